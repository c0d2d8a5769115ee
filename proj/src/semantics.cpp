#include "semantics.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>

namespace hgv {

namespace {

// ---------------------------------------------------------------------
// Term analysis: locate the call-by-value, left-to-right active position.
// ---------------------------------------------------------------------

enum class ActKind {
    Value,  // the term is a value
    Step,   // a pure term step is available (stepped/rule filled in)
    Stuck,  // no step and no communication action (ill-typed or open)
    Send,   // send(V, chan) in evaluation position
    Recv,   // recv chan
    Wait,   // wait chan
    Close,  // close chan
    Fork,   // fork payload
    Link,   // link (chan, chan2)
};

struct Action {
    ActKind kind = ActKind::Stuck;
    TermPtr stepped;
    std::string rule;
    Name chan, chan2;
    TermPtr payload;
    // Rebuilds the whole term with the active redex replaced.
    std::function<TermPtr(const TermPtr&)> plug;
};

bool is_comm(ActKind k) {
    return k == ActKind::Send || k == ActKind::Recv || k == ActKind::Wait ||
           k == ActKind::Close || k == ActKind::Fork || k == ActKind::Link;
}

using Wrap = std::function<TermPtr(const TermPtr&)>;

Action lift(Action a, const Wrap& wrap) {
    if (a.kind == ActKind::Step) {
        a.stepped = wrap(a.stepped);
    } else if (is_comm(a.kind)) {
        Wrap inner = a.plug;
        a.plug = [wrap, inner](const TermPtr& r) { return wrap(inner(r)); };
    }
    return a;
}

Action value_action() { return {ActKind::Value, nullptr, "", "", "", nullptr, {}}; }
Action stuck_action() { return {ActKind::Stuck, nullptr, "", "", "", nullptr, {}}; }

Action step_action(TermPtr t, std::string rule) {
    Action a;
    a.kind = ActKind::Step;
    a.stepped = std::move(t);
    a.rule = std::move(rule);
    return a;
}

// Substitutes v1 for x and v2 for y in body without the second substitution
// capturing names introduced by the first.
TermPtr subst2(const TermPtr& body, const Name& x, const TermPtr& v1,
               const Name& y, const TermPtr& v2) {
    Name yy = y;
    TermPtr b = body;
    if (free_names(v1).count(yy)) {
        NameSet avoid = all_names(b);
        NameSet fv1 = free_names(v1);
        avoid.insert(fv1.begin(), fv1.end());
        Name ny = fresh_name(yy, avoid);
        b = subst(b, mk_var(ny), yy);
        yy = ny;
    }
    b = subst(b, v1, x);
    return subst(b, v2, yy);
}

Action analyze(const TermPtr& m) {
    switch (m->tag) {
        case TermTag::Var:
        case TermTag::Const:
        case TermTag::Unit:
        case TermTag::Lam:
            return value_action();
        case TermTag::App: {
            Action f = analyze(m->m);
            if (f.kind == ActKind::Step || is_comm(f.kind))
                return lift(std::move(f),
                            [n = m->n](const TermPtr& t) { return mk_app(t, n); });
            if (f.kind == ActKind::Stuck) return stuck_action();
            Action a = analyze(m->n);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a),
                            [l = m->m](const TermPtr& t) { return mk_app(l, t); });
            if (a.kind == ActKind::Stuck) return stuck_action();
            // Both operator and operand are values.
            if (m->m->tag == TermTag::Lam)
                return step_action(subst(m->m->m, m->n, m->m->x), "E-Lam");
            if (m->m->tag == TermTag::Const) {
                Action c;
                c.plug = [](const TermPtr& r) { return r; };
                const TermPtr& v = m->n;
                switch (m->m->k) {
                    case ConstTag::SendK:
                        if (v->tag == TermTag::Pair && is_value(v->m) &&
                            v->n->tag == TermTag::Var) {
                            c.kind = ActKind::Send;
                            c.payload = v->m;
                            c.chan = v->n->x;
                            return c;
                        }
                        return stuck_action();
                    case ConstTag::RecvK:
                    case ConstTag::Wait:
                    case ConstTag::Close:
                        if (v->tag == TermTag::Var) {
                            c.kind = m->m->k == ConstTag::RecvK ? ActKind::Recv
                                     : m->m->k == ConstTag::Wait ? ActKind::Wait
                                                                 : ActKind::Close;
                            c.chan = v->x;
                            return c;
                        }
                        return stuck_action();
                    case ConstTag::Fork:
                        c.kind = ActKind::Fork;
                        c.payload = v;
                        return c;
                    case ConstTag::Link:
                        if (v->tag == TermTag::Pair &&
                            v->m->tag == TermTag::Var &&
                            v->n->tag == TermTag::Var) {
                            c.kind = ActKind::Link;
                            c.chan = v->m->x;
                            c.chan2 = v->n->x;
                            return c;
                        }
                        return stuck_action();
                    case ConstTag::Spawn:
                        return stuck_action();
                }
            }
            return stuck_action();
        }
        case TermTag::LetUnit: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a), [n = m->n](const TermPtr& t) {
                    return mk_letunit(t, n);
                });
            if (a.kind == ActKind::Stuck) return stuck_action();
            if (m->m->tag == TermTag::Unit) return step_action(m->n, "E-Unit");
            return stuck_action();
        }
        case TermTag::Pair: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a), [n = m->n](const TermPtr& t) {
                    return mk_pair(t, n);
                });
            if (a.kind == ActKind::Stuck) return stuck_action();
            Action b = analyze(m->n);
            if (b.kind == ActKind::Step || is_comm(b.kind))
                return lift(std::move(b), [l = m->m](const TermPtr& t) {
                    return mk_pair(l, t);
                });
            if (b.kind == ActKind::Stuck) return stuck_action();
            return value_action();
        }
        case TermTag::LetPair: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a),
                            [x = m->x, y = m->y, n = m->n](const TermPtr& t) {
                                return mk_letpair(x, y, t, n);
                            });
            if (a.kind == ActKind::Stuck) return stuck_action();
            if (m->m->tag == TermTag::Pair)
                return step_action(subst2(m->n, m->x, m->m->m, m->y, m->m->n),
                                   "E-Pair");
            return stuck_action();
        }
        case TermTag::Inl:
        case TermTag::Inr: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind)) {
                bool left = m->tag == TermTag::Inl;
                return lift(std::move(a),
                            [left, ann = m->ann](const TermPtr& t) {
                                return left ? mk_inl(ann, t) : mk_inr(ann, t);
                            });
            }
            if (a.kind == ActKind::Stuck) return stuck_action();
            return value_action();
        }
        case TermTag::Case: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a), [x = m->x, n = m->n, y = m->y,
                                           o = m->o](const TermPtr& t) {
                    return mk_case(t, x, n, y, o);
                });
            if (a.kind == ActKind::Stuck) return stuck_action();
            if (m->m->tag == TermTag::Inl)
                return step_action(subst(m->n, m->m->m, m->x), "E-Inl");
            if (m->m->tag == TermTag::Inr)
                return step_action(subst(m->o, m->m->m, m->y), "E-Inr");
            return stuck_action();
        }
        case TermTag::Absurd: {
            Action a = analyze(m->m);
            if (a.kind == ActKind::Step || is_comm(a.kind))
                return lift(std::move(a), [ann = m->ann](const TermPtr& t) {
                    return mk_absurd(ann, t);
                });
            return stuck_action();
        }
    }
    return stuck_action();
}

}  // namespace

std::optional<std::pair<TermPtr, std::string>> term_step_tagged(const TermPtr& m) {
    Action a = analyze(m);
    if (a.kind == ActKind::Step) return std::make_pair(a.stepped, a.rule);
    return std::nullopt;
}

std::optional<TermPtr> term_step(const TermPtr& m) {
    if (auto r = term_step_tagged(m)) return r->first;
    return std::nullopt;
}

ConfigPtr assemble(const std::vector<ResBinder>& binders,
                   const std::vector<ConfigPtr>& threads) {
    ConfigPtr body;
    for (auto it = threads.rbegin(); it != threads.rend(); ++it)
        body = body ? mk_par(*it, body) : *it;
    if (!body)
        throw SemanticsError(SemanticsErrorKind::IllTyped,
                             "configuration has no threads");
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = mk_res(it->x, it->y, it->ann, body);
    return body;
}

// ---------------------------------------------------------------------
// Configuration stepping.
// ---------------------------------------------------------------------

namespace {

NameSet thread_names(const ConfigPtr& t) {
    if (t->tag == ConfigTag::LinkThread) return {t->z, t->x, t->y};
    return free_names(t->term);
}

ConfigPtr rename_thread(const ConfigPtr& t, const Name& to, const Name& from) {
    if (t->tag == ConfigTag::LinkThread) {
        auto r = [&](const Name& n) { return n == from ? to : n; };
        return mk_link_thread(r(t->z), r(t->x), r(t->y));
    }
    return mk_thread(t->is_main, subst(t->term, mk_var(to), from));
}

struct Stepper {
    FlatConfig flat;
    std::vector<Action> actions;       // per thread; Stuck for link threads
    std::vector<NameSet> names;        // per thread
    NameSet avoid;                     // every name in the configuration
    bool mix;
    std::vector<Successor> out;

    int binder_of(const Name& n) const {
        for (size_t i = 0; i < flat.binders.size(); ++i)
            if (flat.binders[i].x == n || flat.binders[i].y == n) return (int)i;
        return -1;
    }
    int owner_of(const Name& n, int skip1 = -1, int skip2 = -1) const {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            if ((int)i == skip1 || (int)i == skip2) continue;
            if (names[i].count(n)) return (int)i;
        }
        return -1;
    }

    void emit(const std::string& rule, const std::string& locus,
              std::vector<ResBinder> binders, std::vector<ConfigPtr> threads) {
        // Drop removed entries marked as null.
        std::vector<ConfigPtr> ts;
        for (auto& t : threads)
            if (t) ts.push_back(t);
        out.push_back({{rule, locus}, assemble(binders, ts)});
    }

    void term_steps() {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            if (actions[i].kind != ActKind::Step) continue;
            auto threads = flat.threads;
            threads[i] = mk_thread(threads[i]->is_main, actions[i].stepped);
            emit(actions[i].rule, "thread " + std::to_string(i), flat.binders,
                 threads);
        }
    }

    void reify_fork() {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            const Action& a = actions[i];
            if (a.kind != ActKind::Fork) continue;
            // The forked value's binder annotation supplies the fresh
            // channel's session type.
            if (a.payload->tag != TermTag::Lam || !a.payload->ann ||
                !is_session_type(a.payload->ann))
                continue;
            SessionPtr s = a.payload->ann->s;
            NameSet av = avoid;
            Name x = fresh_name("x", av);
            Name y = fresh_name("y", av);
            auto binders = flat.binders;
            binders.push_back({x, y, dual(s)});  // parent holds the dual end
            auto threads = flat.threads;
            threads[i] = mk_thread(threads[i]->is_main, a.plug(mk_var(x)));
            threads.push_back(mk_thread(false, mk_app(a.payload, mk_var(y))));
            emit("E-Reify-Fork", "thread " + std::to_string(i), binders,
                 threads);
        }
    }

    void reify_link() {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            const Action& a = actions[i];
            if (a.kind != ActKind::Link) continue;
            NameSet av = avoid;
            Name z = fresh_name("z", av);
            Name z2 = fresh_name("z'", av);
            auto binders = flat.binders;
            binders.push_back({z, z2, s_end_in()});
            auto threads = flat.threads;
            threads[i] = mk_thread(threads[i]->is_main, a.plug(mk_var(z2)));
            threads.push_back(mk_link_thread(z, a.chan, a.chan2));
            emit("E-Reify-Link", "thread " + std::to_string(i), binders,
                 threads);
        }
    }

    void link_mix() {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            const Action& a = actions[i];
            if (a.kind != ActKind::Link) continue;
            for (auto [bound, other_name] :
                 {std::pair{a.chan, a.chan2}, std::pair{a.chan2, a.chan}}) {
                int b = binder_of(bound);
                if (b < 0) continue;
                const ResBinder& rb = flat.binders[b];
                Name partner = rb.x == bound ? rb.y : rb.x;
                int j = owner_of(partner, (int)i);
                if (j < 0) continue;
                auto binders = flat.binders;
                binders.erase(binders.begin() + b);
                auto threads = flat.threads;
                threads[i] = mk_thread(threads[i]->is_main, a.plug(mk_unit()));
                threads[j] = rename_thread(threads[j], other_name, partner);
                emit("E-Link-Mix",
                     "thread " + std::to_string(i) + ", channel {" + rb.x +
                         "," + rb.y + "}",
                     binders, threads);
            }
        }
    }

    void comm_send() {
        for (size_t b = 0; b < flat.binders.size(); ++b) {
            const ResBinder& rb = flat.binders[b];
            if (!rb.ann) continue;
            Name sender, receiver;
            if (rb.ann->tag == SessionTag::Send) {
                sender = rb.x;
                receiver = rb.y;
            } else if (rb.ann->tag == SessionTag::Recv) {
                sender = rb.y;
                receiver = rb.x;
            } else {
                continue;
            }
            int i = -1, j = -1;
            for (size_t t = 0; t < flat.threads.size(); ++t) {
                if (actions[t].kind == ActKind::Send && actions[t].chan == sender)
                    i = (int)t;
                if (actions[t].kind == ActKind::Recv &&
                    actions[t].chan == receiver)
                    j = (int)t;
            }
            if (i < 0 || j < 0 || i == j) continue;
            auto binders = flat.binders;
            // The annotation still types endpoint x after the exchange.
            binders[b].ann = rb.ann->cont;
            auto threads = flat.threads;
            threads[i] =
                mk_thread(threads[i]->is_main, actions[i].plug(mk_var(sender)));
            threads[j] = mk_thread(
                threads[j]->is_main,
                actions[j].plug(mk_pair(actions[i].payload, mk_var(receiver))));
            emit("E-Comm-Send", "channel {" + rb.x + "," + rb.y + "}", binders,
                 threads);
        }
    }

    void comm_close() {
        for (size_t b = 0; b < flat.binders.size(); ++b) {
            const ResBinder& rb = flat.binders[b];
            if (!rb.ann) continue;
            Name waiter, child;
            if (rb.ann->tag == SessionTag::EndIn) {
                waiter = rb.x;
                child = rb.y;
            } else if (rb.ann->tag == SessionTag::EndOut) {
                waiter = rb.y;
                child = rb.x;
            } else {
                continue;
            }
            int i = -1, j = -1;
            for (size_t t = 0; t < flat.threads.size(); ++t) {
                if (actions[t].kind == ActKind::Wait && actions[t].chan == waiter)
                    i = (int)t;
                const ConfigPtr& th = flat.threads[t];
                if (th->tag == ConfigTag::Thread && !th->is_main &&
                    th->term->tag == TermTag::Var && th->term->x == child)
                    j = (int)t;
            }
            if (i < 0 || j < 0 || i == j) continue;
            auto binders = flat.binders;
            binders.erase(binders.begin() + b);
            auto threads = flat.threads;
            threads[i] = mk_thread(threads[i]->is_main, actions[i].plug(mk_unit()));
            threads[j] = nullptr;
            emit("E-Comm-Close", "channel {" + rb.x + "," + rb.y + "}", binders,
                 threads);
        }
    }

    void close_mix() {
        for (size_t b = 0; b < flat.binders.size(); ++b) {
            const ResBinder& rb = flat.binders[b];
            if (!rb.ann || rb.ann->tag != SessionTag::End) continue;
            int i = -1, j = -1;
            for (size_t t = 0; t < flat.threads.size(); ++t) {
                if (actions[t].kind != ActKind::Close) continue;
                if (actions[t].chan == rb.x) i = (int)t;
                if (actions[t].chan == rb.y) j = (int)t;
            }
            if (i < 0 || j < 0 || i == j) continue;
            auto binders = flat.binders;
            binders.erase(binders.begin() + b);
            auto threads = flat.threads;
            threads[i] = mk_thread(threads[i]->is_main, actions[i].plug(mk_unit()));
            threads[j] = mk_thread(threads[j]->is_main, actions[j].plug(mk_unit()));
            emit("E-Close", "channel {" + rb.x + "," + rb.y + "}", binders,
                 threads);
        }
    }

    void comm_link() {
        for (size_t i = 0; i < flat.threads.size(); ++i) {
            const ConfigPtr& lt = flat.threads[i];
            if (lt->tag != ConfigTag::LinkThread) continue;
            int bz = binder_of(lt->z);
            if (bz < 0) continue;
            const ResBinder& rbz = flat.binders[bz];
            Name z2 = rbz.x == lt->z ? rbz.y : rbz.x;
            int j = -1;
            for (size_t t = 0; t < flat.threads.size(); ++t) {
                const ConfigPtr& th = flat.threads[t];
                if (th->tag == ConfigTag::Thread && !th->is_main &&
                    th->term->tag == TermTag::Var && th->term->x == z2)
                    j = (int)t;
            }
            if (j < 0) continue;
            // Links are undirected: try fusing in both orientations.
            for (auto [a, bname] :
                 {std::pair{lt->x, lt->y}, std::pair{lt->y, lt->x}}) {
                int ba = binder_of(a);
                if (ba < 0) continue;
                const ResBinder& rba = flat.binders[ba];
                Name a2 = rba.x == a ? rba.y : rba.x;
                int k = owner_of(a2, (int)i, j);
                if (k < 0) continue;
                auto binders = flat.binders;
                binders.erase(binders.begin() + std::max(bz, ba));
                binders.erase(binders.begin() + std::min(bz, ba));
                auto threads = flat.threads;
                threads[i] = nullptr;
                threads[j] = nullptr;
                threads[k] = rename_thread(threads[k], bname, a2);
                emit("E-Comm-Link",
                     "link " + lt->z + " " + lt->x + " " + lt->y, binders,
                     threads);
            }
        }
    }
};

}  // namespace

std::vector<Successor> config_step_all(const ConfigPtr& c, bool mix) {
    Stepper st;
    ConfigPtr fc = freshen_config(c, {});
    st.flat = extrude(fc);
    st.avoid = all_names(fc);
    st.mix = mix;
    for (const ConfigPtr& t : st.flat.threads) {
        st.names.push_back(thread_names(t));
        st.actions.push_back(t->tag == ConfigTag::Thread ? analyze(t->term)
                                                         : stuck_action());
    }
    st.term_steps();
    st.reify_fork();
    if (mix) {
        st.link_mix();
        st.close_mix();
    } else {
        st.reify_link();
        st.comm_link();
    }
    st.comm_send();
    if (!mix) st.comm_close();
    return std::move(st.out);
}

// ---------------------------------------------------------------------
// Structural congruence.
// ---------------------------------------------------------------------

namespace {

struct EquivSearch {
    // A's bound names have been renamed to unique placeholders; the search
    // builds a bijection from placeholders to B's bound names.
    std::vector<ResBinder> a_binders;
    std::vector<ConfigPtr> a_threads;
    std::vector<ResBinder> b_binders;
    std::vector<ConfigPtr> b_threads;

    ConfigPtr apply_map(const ConfigPtr& t,
                        const std::map<Name, Name>& m) const {
        ConfigPtr out = t;
        for (const auto& [from, to] : m)
            out = rename_thread(out, to, from);
        return out;
    }

    bool threads_match(const ConfigPtr& a, const ConfigPtr& b) const {
        if (a->tag != b->tag) return false;
        if (a->tag == ConfigTag::LinkThread)
            return a->z == b->z && ((a->x == b->x && a->y == b->y) ||
                                    (a->x == b->y && a->y == b->x));
        return a->is_main == b->is_main && alpha_eq(a->term, b->term);
    }

    bool match_threads(std::vector<bool>& used, size_t i,
                       const std::map<Name, Name>& m) const {
        if (i == a_threads.size()) return true;
        ConfigPtr at = apply_map(a_threads[i], m);
        for (size_t j = 0; j < b_threads.size(); ++j) {
            if (used[j] || !threads_match(at, b_threads[j])) continue;
            used[j] = true;
            if (match_threads(used, i + 1, m)) return true;
            used[j] = false;
        }
        return false;
    }

    bool match_binders(std::vector<bool>& used, size_t i,
                       std::map<Name, Name>& m) const {
        if (i == a_binders.size()) {
            std::vector<bool> tu(b_threads.size(), false);
            return match_threads(tu, 0, m);
        }
        const ResBinder& ab = a_binders[i];
        for (size_t j = 0; j < b_binders.size(); ++j) {
            if (used[j]) continue;
            const ResBinder& bb = b_binders[j];
            // Same orientation.
            if (session_eq(ab.ann, bb.ann)) {
                used[j] = true;
                m[ab.x] = bb.x;
                m[ab.y] = bb.y;
                if (match_binders(used, i + 1, m)) return true;
                m.erase(ab.x);
                m.erase(ab.y);
                used[j] = false;
            }
            // Swapped endpoints with dual annotation.
            if (session_eq(ab.ann, dual(bb.ann))) {
                used[j] = true;
                m[ab.x] = bb.y;
                m[ab.y] = bb.x;
                if (match_binders(used, i + 1, m)) return true;
                m.erase(ab.x);
                m.erase(ab.y);
                used[j] = false;
            }
        }
        return false;
    }
};

}  // namespace

bool config_equiv(const ConfigPtr& c, const ConfigPtr& d) {
    if (free_names(c) != free_names(d)) return false;
    ConfigPtr fc = freshen_config(c, all_names(d));
    ConfigPtr fd = freshen_config(d, all_names(fc));
    EquivSearch s;
    FlatConfig a = extrude(fc), b = extrude(fd);
    if (a.binders.size() != b.binders.size() ||
        a.threads.size() != b.threads.size())
        return false;
    // Rename A's bound names to placeholders distinct from everything.
    NameSet avoid = all_names(fc);
    NameSet bn = all_names(fd);
    avoid.insert(bn.begin(), bn.end());
    std::map<Name, Name> to_temp;
    for (auto& rb : a.binders) {
        to_temp[rb.x] = fresh_name("tmp_eq", avoid);
        to_temp[rb.y] = fresh_name("tmp_eq", avoid);
    }
    for (auto& rb : a.binders) {
        rb.x = to_temp[rb.x];
        rb.y = to_temp[rb.y];
    }
    for (auto& t : a.threads) {
        for (const auto& [from, to] : to_temp) {
            if (t->tag == ConfigTag::LinkThread) {
                auto r = [&](const Name& n) { return n == from ? to : n; };
                t = mk_link_thread(r(t->z), r(t->x), r(t->y));
            } else {
                t = mk_thread(t->is_main, subst(t->term, mk_var(to), from));
            }
        }
    }
    s.a_binders = std::move(a.binders);
    s.a_threads = std::move(a.threads);
    s.b_binders = std::move(b.binders);
    s.b_threads = std::move(b.threads);
    std::vector<bool> used(s.b_binders.size(), false);
    std::map<Name, Name> m;
    return s.match_binders(used, 0, m);
}

// ---------------------------------------------------------------------
// Running, canonical forms, and progress.
// ---------------------------------------------------------------------

RunResult run(const ConfigPtr& c, const HyperEnv& h, bool mix, RunPolicy policy,
              unsigned seed, int fuel) {
    try {
        check_config(h, c, mix);
    } catch (const std::exception& e) {
        throw SemanticsError(SemanticsErrorKind::IllTyped, e.what());
    }
    if (fuel < 0) fuel = 10 * config_size(c) + 10;
    std::mt19937 rng(seed);
    RunResult r;
    ConfigPtr cur = c;
    for (int i = 0; i < fuel; ++i) {
        std::vector<Successor> succ = config_step_all(cur, mix);
        if (succ.empty()) {
            r.terminal = cur;
            return r;
        }
        size_t pick = 0;
        if (policy == RunPolicy::Random)
            pick = std::uniform_int_distribution<size_t>(0, succ.size() - 1)(rng);
        cur = succ[pick].config;
        r.steps.push_back({succ[pick].redex, cur});
    }
    throw SemanticsError(SemanticsErrorKind::FuelExhausted,
                         "reduction did not terminate within " +
                             std::to_string(fuel) + " steps");
}

ConfigPtr CanonicalConfig::to_config() const {
    ConfigPtr cur = final_thread;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        cur = mk_res(it->binder.x, it->binder.y, it->binder.ann,
                     mk_par(it->aux, cur));
    return cur;
}

CanonicalConfig tree_canonical_form(const ConfigPtr& c, const HyperEnv& h,
                                    bool mix) {
    if (h.size() != 1)
        throw SemanticsError(SemanticsErrorKind::NotSingletonEnv,
                             "tree canonical form needs a single environment; "
                             "split the configuration with independence first");
    try {
        check_config(h, c, mix);
    } catch (const std::exception& e) {
        throw SemanticsError(SemanticsErrorKind::IllTyped, e.what());
    }
    ConfigPtr fc = freshen_config(c, h[0].domain());
    FlatConfig flat = extrude(fc);
    size_t n = flat.threads.size();
    std::vector<NameSet> names;
    for (const ConfigPtr& t : flat.threads) names.push_back(thread_names(t));
    struct Edge {
        int binder, u, v;
    };
    std::vector<Edge> edges;
    auto owner = [&](const Name& nm) -> int {
        for (size_t i = 0; i < n; ++i)
            if (names[i].count(nm)) return (int)i;
        return -1;
    };
    for (size_t b = 0; b < flat.binders.size(); ++b) {
        int u = owner(flat.binders[b].x), v = owner(flat.binders[b].y);
        if (u < 0 || v < 0)
            throw SemanticsError(SemanticsErrorKind::IllTyped,
                                 "restriction endpoint is unused");
        edges.push_back({(int)b, u, v});
    }
    std::vector<bool> alive(n, true), edge_alive(edges.size(), true);
    std::vector<int> degree(n, 0);
    for (const Edge& e : edges) {
        ++degree[e.u];
        ++degree[e.v];
    }
    CanonicalConfig out;
    size_t remaining_edges = edges.size();
    while (remaining_edges > 0) {
        int leaf = -1;
        for (size_t i = 0; i < n; ++i) {
            if (!alive[i] || degree[i] != 1) continue;
            const ConfigPtr& t = flat.threads[i];
            if (t->tag == ConfigTag::Thread && t->is_main) continue;
            leaf = (int)i;
            break;
        }
        if (leaf < 0)
            throw SemanticsError(SemanticsErrorKind::NotTree,
                                 "the restriction structure is not a tree");
        int eidx = -1;
        for (size_t e = 0; e < edges.size(); ++e)
            if (edge_alive[e] && (edges[e].u == leaf || edges[e].v == leaf))
                eidx = (int)e;
        const Edge& e = edges[eidx];
        ResBinder rb = flat.binders[e.binder];
        if (!names[leaf].count(rb.x)) {
            std::swap(rb.x, rb.y);
            rb.ann = dual(rb.ann);
        }
        out.prefix.push_back({rb, flat.threads[leaf]});
        alive[leaf] = false;
        edge_alive[eidx] = false;
        --remaining_edges;
        --degree[e.u];
        --degree[e.v];
    }
    int last = -1;
    for (size_t i = 0; i < n; ++i)
        if (alive[i]) {
            if (last >= 0)
                throw SemanticsError(SemanticsErrorKind::NotTree,
                                     "the configuration is a forest; use "
                                     "independence first");
            last = (int)i;
        }
    out.final_thread = flat.threads[last];
    return out;
}

std::vector<Component> independence(const ConfigPtr& c, const HyperEnv& h,
                                    bool mix) {
    RuntimeType whole = check_config(h, c, mix);
    (void)whole;
    TypeEnv flat_env;
    for (const TypeEnv& env : h)
        for (const auto& [x, t] : env.bindings) flat_env.bind(x, t);
    ConfigPtr fc = freshen_config(c, flat_env.domain());
    FlatConfig flat = extrude(fc);
    size_t n = flat.threads.size();
    std::vector<NameSet> names;
    for (const ConfigPtr& t : flat.threads) names.push_back(thread_names(t));
    // Union-find over threads joined by restrictions.
    std::vector<int> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = (int)i;
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto owner = [&](const Name& nm) -> int {
        for (size_t i = 0; i < n; ++i)
            if (names[i].count(nm)) return (int)i;
        return -1;
    };
    std::vector<int> binder_owner(flat.binders.size());
    for (size_t b = 0; b < flat.binders.size(); ++b) {
        int u = owner(flat.binders[b].x), v = owner(flat.binders[b].y);
        if (u < 0 || v < 0)
            throw SemanticsError(SemanticsErrorKind::IllTyped,
                                 "restriction endpoint is unused");
        parent[find(u)] = find(v);
        binder_owner[b] = u;
    }
    // Gather components in thread order.
    std::map<int, int> comp_index;
    struct Comp {
        std::vector<ResBinder> binders;
        std::vector<ConfigPtr> threads;
        NameSet free;
    };
    std::vector<Comp> comps;
    for (size_t i = 0; i < n; ++i) {
        int r = find((int)i);
        if (!comp_index.count(r)) {
            comp_index[r] = (int)comps.size();
            comps.push_back({});
        }
        Comp& cc = comps[comp_index[r]];
        cc.threads.push_back(flat.threads[i]);
        cc.free.insert(names[i].begin(), names[i].end());
    }
    for (size_t b = 0; b < flat.binders.size(); ++b) {
        Comp& cc = comps[comp_index[find(binder_owner[b])]];
        cc.binders.push_back(flat.binders[b]);
        cc.free.erase(flat.binders[b].x);
        cc.free.erase(flat.binders[b].y);
    }
    // Assign components to the environments of h.
    std::vector<Component> out(h.size());
    std::vector<std::vector<int>> assigned(h.size());
    std::vector<NameSet> domains;
    for (const TypeEnv& env : h) domains.push_back(env.domain());
    std::vector<bool> env_used(h.size(), false);
    for (size_t ci = 0; ci < comps.size(); ++ci) {
        int target = -1;
        if (!comps[ci].free.empty()) {
            for (size_t e = 0; e < h.size(); ++e)
                if (domains[e].count(*comps[ci].free.begin())) target = (int)e;
        } else {
            // An unconnected closed component: match an unused empty
            // environment, or (Mix) fall back to the first environment.
            for (size_t e = 0; e < h.size(); ++e)
                if (!env_used[e] && domains[e].empty()) {
                    target = (int)e;
                    break;
                }
            if (target < 0 && mix && !h.empty()) target = 0;
        }
        if (target < 0)
            throw SemanticsError(SemanticsErrorKind::IllTyped,
                                 "component does not match any environment");
        env_used[target] = true;
        assigned[target].push_back((int)ci);
    }
    for (size_t e = 0; e < h.size(); ++e) {
        if (assigned[e].empty())
            throw SemanticsError(SemanticsErrorKind::IllTyped,
                                 "environment member has no component");
        std::vector<ResBinder> binders;
        std::vector<ConfigPtr> threads;
        for (int ci : assigned[e]) {
            binders.insert(binders.end(), comps[ci].binders.begin(),
                           comps[ci].binders.end());
            threads.insert(threads.end(), comps[ci].threads.begin(),
                           comps[ci].threads.end());
        }
        Component comp;
        comp.env = h[e];
        comp.config = assemble(binders, threads);
        comp.type = check_config({h[e]}, comp.config, mix);
        out[e] = comp;
    }
    return out;
}

std::optional<Name> blocked_endpoint(const ConfigPtr& thread, bool mix) {
    (void)mix;
    if (thread->tag == ConfigTag::LinkThread) return thread->z;
    if (thread->tag != ConfigTag::Thread) return std::nullopt;
    const TermPtr& m = thread->term;
    if (is_value(m)) {
        if (!thread->is_main && m->tag == TermTag::Var) return m->x;
        return std::nullopt;
    }
    Action a = analyze(m);
    switch (a.kind) {
        case ActKind::Send:
        case ActKind::Recv:
        case ActKind::Wait:
        case ActKind::Close:
            return a.chan;
        default:
            return std::nullopt;
    }
}

ProgressReport classify_progress(const ConfigPtr& c, const HyperEnv& h,
                                 bool mix) {
    try {
        check_config(h, c, mix);
    } catch (const std::exception& e) {
        throw SemanticsError(SemanticsErrorKind::IllTyped, e.what());
    }
    ProgressReport r;
    r.redexes = config_step_all(c, mix);
    if (!r.redexes.empty()) {
        r.kind = ProgressKind::Reducible;
        return r;
    }
    ConfigPtr fc = freshen_config(c, {});
    FlatConfig flat = extrude(fc);
    if (flat.binders.empty() && flat.threads.size() == 1 &&
        flat.threads[0]->tag == ConfigTag::Thread && flat.threads[0]->is_main &&
        is_value(flat.threads[0]->term)) {
        r.kind = ProgressKind::MainValue;
        r.value = flat.threads[0]->term;
        return r;
    }
    NameSet bound;
    for (const ResBinder& b : flat.binders) {
        bound.insert(b.x);
        bound.insert(b.y);
    }
    bool any_free = false;
    bool pattern_ok = true;
    for (const ConfigPtr& t : flat.threads) {
        auto b = blocked_endpoint(t, mix);
        if (b) {
            r.blocked.emplace_back(show_config(t), *b);
            if (!bound.count(*b)) any_free = true;
        } else if (!(t->tag == ConfigTag::Thread && is_value(t->term))) {
            pattern_ok = false;
            r.detail = "thread is stuck without a blocked endpoint: " +
                       show_config(t);
        }
    }
    if (pattern_ok && any_free) {
        r.kind = ProgressKind::OpenBlocked;
    } else {
        r.kind = ProgressKind::Deadlock;
        if (r.detail.empty())
            r.detail = "no redex, no main value, and no free blocked endpoint";
    }
    return r;
}

bool diamond_check(const ConfigPtr& c, bool mix) {
    std::vector<Successor> succ = config_step_all(c, mix);
    for (size_t i = 0; i < succ.size(); ++i) {
        for (size_t j = i + 1; j < succ.size(); ++j) {
            if (config_equiv(succ[i].config, succ[j].config)) continue;
            std::vector<Successor> si = config_step_all(succ[i].config, mix);
            std::vector<Successor> sj = config_step_all(succ[j].config, mix);
            bool joined = false;
            for (const Successor& a : si) {
                for (const Successor& b : sj)
                    if (config_equiv(a.config, b.config)) {
                        joined = true;
                        break;
                    }
                if (joined) break;
            }
            if (!joined) return false;
        }
    }
    return true;
}

}  // namespace hgv
