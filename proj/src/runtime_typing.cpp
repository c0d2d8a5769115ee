#include "runtime_typing.hpp"

#include <algorithm>
#include <map>

namespace hgv {

namespace {

using TypeMap = std::map<Name, TypePtr>;

// One connected component of threads: the flat-environment names it
// consumes, plus the main thread's type if it contains the main thread.
struct Group {
    NameSet names;
    bool has_main = false;
    TypePtr main_type;
};

TypeEnv restrict_env(const TypeMap& tm, const NameSet& names) {
    TypeEnv env;
    for (const Name& x : names) {
        auto it = tm.find(x);
        if (it != tm.end()) env.bind(x, it->second);
    }
    return env;
}

TypePtr lookup_session(const TypeMap& tm, const Name& x) {
    auto it = tm.find(x);
    if (it == tm.end())
        throw TypeError(TypeErrorKind::Unbound, "unbound name '" + x + "'");
    if (!is_session_type(it->second))
        throw ConfigError(ConfigErrorKind::Duality,
                          "name '" + x + "' has non-session type " +
                              show_type(it->second));
    return it->second;
}

void check_child_result(const TypePtr& t, bool mix) {
    bool ok = mix ? t->tag == TypeTag::Unit
                  : (is_session_type(t) && t->s->tag == SessionTag::EndOut);
    if (!ok)
        throw ConfigError(ConfigErrorKind::ChildResult,
                          std::string("child thread must return ") +
                              (mix ? "1" : "end!") + ", got " + show_type(t));
}

void check_link_env(const TypeMap& tm, const Name& z, const Name& x,
                    const Name& y) {
    TypePtr tz = lookup_session(tm, z);
    if (tz->s->tag != SessionTag::EndIn)
        throw ConfigError(ConfigErrorKind::Duality,
                          "link thread waits on '" + z + "' of type " +
                              show_type(tz) + ", expected end?");
    TypePtr tx = lookup_session(tm, x);
    TypePtr ty = lookup_session(tm, y);
    if (!session_eq(dual(tx->s), ty->s))
        throw ConfigError(ConfigErrorKind::Duality,
                          "link thread endpoints '" + x + "' : " + show_type(tx) +
                              " and '" + y + "' : " + show_type(ty) +
                              " are not dual");
}

std::vector<Group> groups_of(TypeMap& tm, const ConfigPtr& c, bool mix) {
    switch (c->tag) {
        case ConfigTag::Thread: {
            NameSet fv = free_names(c->term);
            TypePtr t = check_term(restrict_env(tm, fv), c->term, mix);
            Group g;
            g.names = std::move(fv);
            if (c->is_main) {
                g.has_main = true;
                g.main_type = t;
            } else {
                check_child_result(t, mix);
            }
            return {g};
        }
        case ConfigTag::LinkThread: {
            if (mix)
                throw ConfigError(ConfigErrorKind::Structure,
                                  "link threads do not occur in the Mix variant");
            check_link_env(tm, c->z, c->x, c->y);
            Group g;
            g.names = {c->z, c->x, c->y};
            return {g};
        }
        case ConfigTag::Par: {
            std::vector<Group> left = groups_of(tm, c->c, mix);
            std::vector<Group> right = groups_of(tm, c->d, mix);
            NameSet seen;
            bool main_seen = false;
            for (const auto& gs : {std::cref(left), std::cref(right)})
                for (const Group& g : gs.get()) {
                    for (const Name& x : g.names) {
                        if (seen.count(x))
                            throw TypeError(TypeErrorKind::Reuse,
                                            "name '" + x +
                                                "' used by two threads");
                        seen.insert(x);
                    }
                    if (g.has_main) {
                        if (main_seen)
                            throw ConfigError(ConfigErrorKind::MultipleMains,
                                              "more than one main thread");
                        main_seen = true;
                    }
                }
            left.insert(left.end(), right.begin(), right.end());
            return left;
        }
        case ConfigTag::Res: {
            if (!c->ann)
                throw ConfigError(ConfigErrorKind::Structure,
                                  "restriction of " + c->x + ", " + c->y +
                                      " lacks a session annotation");
            tm[c->x] = t_session(c->ann);
            tm[c->y] = t_session(dual(c->ann));
            std::vector<Group> groups = groups_of(tm, c->c, mix);
            auto find = [&](const Name& n) -> int {
                for (size_t i = 0; i < groups.size(); ++i)
                    if (groups[i].names.count(n)) return (int)i;
                throw TypeError(TypeErrorKind::Unused,
                                "endpoint '" + n + "' is never used");
            };
            int ix = find(c->x), iy = find(c->y);
            if (ix == iy)
                throw ConfigError(ConfigErrorKind::Cycle,
                                  "endpoints '" + c->x + "' and '" + c->y +
                                      "' are connected without the restriction");
            Group merged = groups[ix];
            merged.names.insert(groups[iy].names.begin(), groups[iy].names.end());
            if (groups[iy].has_main) {
                merged.has_main = true;
                merged.main_type = groups[iy].main_type;
            }
            merged.names.erase(c->x);
            merged.names.erase(c->y);
            std::vector<Group> out;
            for (size_t i = 0; i < groups.size(); ++i)
                if ((int)i != ix && (int)i != iy) out.push_back(groups[i]);
            out.push_back(std::move(merged));
            return out;
        }
    }
    throw ConfigError(ConfigErrorKind::Structure, "malformed configuration");
}

RuntimeType runtime_type_of(const std::vector<Group>& groups) {
    RuntimeType r;
    for (const Group& g : groups)
        if (g.has_main) r.main = g.main_type;
    return r;
}

// Matches groups against the hyper-environment. Plain mode: bijection on
// domains. Mix mode: every member's domain is exactly covered by the groups
// assigned to it (empty groups are unconstrained).
void match_groups(const std::vector<Group>& groups, const HyperEnv& h, bool mix) {
    std::vector<NameSet> domains;
    for (const TypeEnv& env : h) domains.push_back(env.domain());
    if (!mix) {
        std::vector<bool> taken(domains.size(), false);
        for (const Group& g : groups) {
            bool found = false;
            for (size_t i = 0; i < domains.size(); ++i) {
                if (!taken[i] && domains[i] == g.names) {
                    taken[i] = true;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw ConfigError(
                    ConfigErrorKind::EnvMismatch,
                    "no environment matches a thread group of " +
                        std::to_string(g.names.size()) + " name(s)");
        }
        if (groups.size() != domains.size())
            throw ConfigError(ConfigErrorKind::EnvMismatch,
                              "hyper-environment has " +
                                  std::to_string(domains.size()) +
                                  " member(s) but the configuration has " +
                                  std::to_string(groups.size()) +
                                  " thread group(s)");
        return;
    }
    // Mix: assign each non-empty group to the unique member containing its
    // names, then require exact coverage of every member.
    std::vector<NameSet> covered(domains.size());
    for (const Group& g : groups) {
        if (g.names.empty()) continue;
        int owner = -1;
        for (size_t i = 0; i < domains.size(); ++i)
            if (domains[i].count(*g.names.begin())) owner = (int)i;
        if (owner < 0)
            throw ConfigError(ConfigErrorKind::EnvMismatch,
                              "name '" + *g.names.begin() +
                                  "' is not bound by the hyper-environment");
        for (const Name& x : g.names) {
            if (!domains[owner].count(x))
                throw ConfigError(ConfigErrorKind::EnvMismatch,
                                  "a thread group spans two environments (" +
                                      x + ")");
            covered[owner].insert(x);
        }
    }
    for (size_t i = 0; i < domains.size(); ++i)
        if (covered[i] != domains[i])
            throw ConfigError(ConfigErrorKind::EnvMismatch,
                              "environment member " + std::to_string(i) +
                                  " is not exactly covered by thread groups");
}

TypeMap flat_map_of(const HyperEnv& h) {
    TypeMap tm;
    for (const TypeEnv& env : h)
        for (const auto& [x, t] : env.bindings) {
            if (tm.count(x))
                throw ConfigError(ConfigErrorKind::Structure,
                                  "hyper-environment binds '" + x + "' twice");
            tm[x] = t;
        }
    return tm;
}

ConfigPtr freshen(const ConfigPtr& c, NameSet& avoid) {
    switch (c->tag) {
        case ConfigTag::Thread:
        case ConfigTag::LinkThread:
            return c;
        case ConfigTag::Par:
            return mk_par(freshen(c->c, avoid), freshen(c->d, avoid));
        case ConfigTag::Res: {
            Name x = c->x, y = c->y;
            ConfigPtr body = c->c;
            bool x_taken = avoid.count(x) > 0;
            bool y_taken = avoid.count(y) > 0 || y == x;
            avoid.insert(x);
            avoid.insert(y);
            if (x_taken) {
                Name nx = fresh_name(x, avoid);
                body = rename_config(body, nx, x);
                x = nx;
            }
            if (y_taken) {
                Name ny = fresh_name(y, avoid);
                body = rename_config(body, ny, y);
                y = ny;
            }
            return mk_res(x, y, c->ann, freshen(body, avoid));
        }
    }
    return c;
}

}  // namespace

ConfigPtr freshen_config(const ConfigPtr& c, NameSet avoid) {
    NameSet fv = free_names(c);
    avoid.insert(fv.begin(), fv.end());
    return freshen(c, avoid);
}

namespace {

void extrude_into(const ConfigPtr& c, FlatConfig& out) {
    switch (c->tag) {
        case ConfigTag::Thread:
        case ConfigTag::LinkThread:
            out.threads.push_back(c);
            return;
        case ConfigTag::Par:
            extrude_into(c->c, out);
            extrude_into(c->d, out);
            return;
        case ConfigTag::Res:
            out.binders.push_back({c->x, c->y, c->ann});
            extrude_into(c->c, out);
            return;
    }
}

}  // namespace

FlatConfig extrude(const ConfigPtr& c) {
    FlatConfig out;
    extrude_into(c, out);
    return out;
}

HyperEnv config_groups(const TypeEnv& flat, const ConfigPtr& c, bool mix) {
    HyperEnv h{flat};
    TypeMap tm = flat_map_of(h);
    NameSet avoid = flat.domain();
    ConfigPtr fc = freshen_config(c, avoid);
    std::vector<Group> groups = groups_of(tm, fc, mix);
    HyperEnv out;
    for (const Group& g : groups) out.push_back(restrict_env(tm, g.names));
    return out;
}

RuntimeType check_config(const HyperEnv& h, const ConfigPtr& c, bool mix) {
    TypeMap tm = flat_map_of(h);
    NameSet avoid;
    for (const auto& [x, t] : tm) avoid.insert(x);
    ConfigPtr fc = freshen_config(c, avoid);
    std::vector<Group> groups = groups_of(tm, fc, mix);
    match_groups(groups, h, mix);
    return runtime_type_of(groups);
}

TypeEnv flatten(const GvEnv& g) {
    TypeEnv env;
    for (const auto& [x, t] : g.bindings) env.bind(x, t);
    for (const GvLock& l : g.locks) {
        env.bind(l.a, t_session(l.s));
        env.bind(l.b, t_session(dual(l.s)));
    }
    return env;
}

HyperEnv splitting(const GvEnv& g, const ConfigPtr& c, bool mix) {
    return config_groups(flatten(g), c, mix);
}

namespace {

RuntimeType gv_go(const GvEnv& g, const ConfigPtr& c, bool mix) {
    switch (c->tag) {
        case ConfigTag::Thread: {
            if (!g.locks.empty())
                throw ConfigError(ConfigErrorKind::LockAtThread,
                                  "channel lock '" + g.locks.front().a + "~" +
                                      g.locks.front().b +
                                      "' reaches a single thread");
            TypeEnv env;
            for (const auto& [x, t] : g.bindings) env.bind(x, t);
            TypePtr t = check_term(env, c->term, mix);
            RuntimeType r;
            if (c->is_main)
                r.main = t;
            else
                check_child_result(t, mix);
            return r;
        }
        case ConfigTag::LinkThread: {
            if (mix)
                throw ConfigError(ConfigErrorKind::Structure,
                                  "link threads do not occur in the Mix variant");
            if (!g.locks.empty())
                throw ConfigError(ConfigErrorKind::LockAtThread,
                                  "channel lock reaches a link thread");
            TypeMap tm;
            for (const auto& [x, t] : g.bindings) tm[x] = t;
            if (tm.size() != 3 || !tm.count(c->z) || !tm.count(c->x) ||
                !tm.count(c->y))
                throw ConfigError(ConfigErrorKind::EnvMismatch,
                                  "link thread environment must bind exactly "
                                  "its three names");
            check_link_env(tm, c->z, c->x, c->y);
            return {};
        }
        case ConfigTag::Res: {
            if (!c->ann)
                throw ConfigError(ConfigErrorKind::Structure,
                                  "restriction of " + c->x + ", " + c->y +
                                      " lacks a session annotation");
            GvEnv inner = g;
            inner.locks.push_back({c->x, c->y, c->ann});
            return gv_go(inner, c->c, mix);
        }
        case ConfigTag::Par: {
            NameSet fvl = free_names(c->c), fvr = free_names(c->d);
            GvEnv gl, gr;
            for (const auto& [x, t] : g.bindings) {
                bool inl = fvl.count(x), inr = fvr.count(x);
                if (inl && inr)
                    throw TypeError(TypeErrorKind::Reuse,
                                    "name '" + x + "' used by two threads");
                if (!inl && !inr)
                    throw TypeError(TypeErrorKind::Unused,
                                    "linear variable '" + x + "' is never used");
                (inl ? gl : gr).bindings.emplace_back(x, t);
            }
            int crossings = 0;
            const GvLock* crossing = nullptr;
            bool crossing_a_left = false;
            for (const GvLock& l : g.locks) {
                auto side = [&](const Name& n) -> int {
                    if (fvl.count(n)) return 0;
                    if (fvr.count(n)) return 1;
                    throw TypeError(TypeErrorKind::Unused,
                                    "endpoint '" + n + "' is never used");
                };
                int sa = side(l.a), sb = side(l.b);
                if (sa == sb) {
                    (sa == 0 ? gl : gr).locks.push_back(l);
                } else {
                    ++crossings;
                    crossing = &l;
                    crossing_a_left = (sa == 0);
                }
            }
            if (crossings != 1)
                throw ConfigError(ConfigErrorKind::ZeroOrManyLocks,
                                  "a parallel composition is crossed by " +
                                      std::to_string(crossings) +
                                      " channel lock(s); exactly one is "
                                      "required");
            TypePtr ta = t_session(crossing->s);
            TypePtr tb = t_session(dual(crossing->s));
            (crossing_a_left ? gl : gr).bindings.emplace_back(crossing->a, ta);
            (crossing_a_left ? gr : gl).bindings.emplace_back(crossing->b, tb);
            RuntimeType rl = gv_go(gl, c->c, mix);
            RuntimeType rr = gv_go(gr, c->d, mix);
            if (rl.has_main() && rr.has_main())
                throw ConfigError(ConfigErrorKind::MultipleMains,
                                  "more than one main thread");
            return rl.has_main() ? rl : rr;
        }
    }
    throw ConfigError(ConfigErrorKind::Structure, "malformed configuration");
}

}  // namespace

RuntimeType gv_check_config(const GvEnv& g, const ConfigPtr& c, bool mix) {
    NameSet avoid;
    for (const auto& [x, t] : g.bindings) avoid.insert(x);
    for (const GvLock& l : g.locks) {
        avoid.insert(l.a);
        avoid.insert(l.b);
    }
    return gv_go(g, freshen_config(c, avoid), mix);
}

}  // namespace hgv
