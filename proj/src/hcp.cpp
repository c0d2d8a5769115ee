#include "hcp.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace hgv {

// ---------------------------------------------------------------------
// Linear types.
// ---------------------------------------------------------------------

namespace {
LinPtr mklin(LinTag tag, LinPtr a = nullptr, LinPtr b = nullptr) {
    return std::make_shared<const Lin>(Lin{tag, std::move(a), std::move(b)});
}
}  // namespace

LinPtr lt_one() { static LinPtr t = mklin(LinTag::One); return t; }
LinPtr lt_bot() { static LinPtr t = mklin(LinTag::Bot); return t; }
LinPtr lt_zero() { static LinPtr t = mklin(LinTag::Zero); return t; }
LinPtr lt_top() { static LinPtr t = mklin(LinTag::Top); return t; }
LinPtr lt_tensor(LinPtr a, LinPtr b) { return mklin(LinTag::Tensor, std::move(a), std::move(b)); }
LinPtr lt_parr(LinPtr a, LinPtr b) { return mklin(LinTag::Parr, std::move(a), std::move(b)); }
LinPtr lt_plus(LinPtr a, LinPtr b) { return mklin(LinTag::Plus, std::move(a), std::move(b)); }
LinPtr lt_with(LinPtr a, LinPtr b) { return mklin(LinTag::With, std::move(a), std::move(b)); }

LinPtr lt_dual(const LinPtr& a) {
    switch (a->tag) {
        case LinTag::One: return lt_bot();
        case LinTag::Bot: return lt_one();
        case LinTag::Zero: return lt_top();
        case LinTag::Top: return lt_zero();
        case LinTag::Tensor: return lt_parr(lt_dual(a->a), lt_dual(a->b));
        case LinTag::Parr: return lt_tensor(lt_dual(a->a), lt_dual(a->b));
        case LinTag::Plus: return lt_with(lt_dual(a->a), lt_dual(a->b));
        case LinTag::With: return lt_plus(lt_dual(a->a), lt_dual(a->b));
    }
    return a;
}

bool lin_eq(const LinPtr& a, const LinPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case LinTag::One:
        case LinTag::Bot:
        case LinTag::Zero:
        case LinTag::Top:
            return true;
        default:
            return lin_eq(a->a, b->a) && lin_eq(a->b, b->b);
    }
}

std::string show_lin(const LinPtr& a) {
    auto bin = [&](const char* op) {
        auto side = [&](const LinPtr& t) {
            std::string s = show_lin(t);
            switch (t->tag) {
                case LinTag::Tensor:
                case LinTag::Parr:
                case LinTag::Plus:
                case LinTag::With:
                    return "(" + s + ")";
                default:
                    return s;
            }
        };
        return side(a->a) + " " + op + " " + side(a->b);
    };
    switch (a->tag) {
        case LinTag::One: return "1";
        case LinTag::Bot: return "bot";
        case LinTag::Zero: return "0";
        case LinTag::Top: return "top";
        case LinTag::Tensor: return bin("*");
        case LinTag::Parr: return bin("@");
        case LinTag::Plus: return bin("+");
        case LinTag::With: return bin("&");
    }
    return "?";
}

std::string show_lin_hyperenv(const LinHyperEnv& g) {
    std::string out;
    for (size_t i = 0; i < g.size(); ++i) {
        if (i) out += " | ";
        if (g[i].empty()) out += "(empty)";
        for (size_t j = 0; j < g[i].size(); ++j) {
            if (j) out += ", ";
            out += g[i][j].first + " : " + show_lin(g[i][j].second);
        }
    }
    if (g.empty()) out = "(no environments)";
    return out;
}

// ---------------------------------------------------------------------
// Process constructors and basics.
// ---------------------------------------------------------------------

namespace {
ProcPtr mkp(Proc p) { return std::make_shared<const Proc>(std::move(p)); }
}  // namespace

ProcPtr h_link(Name x, Name y, LinPtr a) {
    return mkp({ProcTag::Link, std::move(x), std::move(y), std::move(a), nullptr, nullptr, {}});
}
ProcPtr h_res(Name x, Name y, ProcPtr p) {
    return mkp({ProcTag::Res, std::move(x), std::move(y), nullptr, std::move(p), nullptr, {}});
}
ProcPtr h_par(ProcPtr p, ProcPtr q) {
    return mkp({ProcTag::Par, "", "", nullptr, std::move(p), std::move(q), {}});
}
ProcPtr h_halt() {
    static ProcPtr h = mkp({ProcTag::Halt, "", "", nullptr, nullptr, nullptr, {}});
    return h;
}
ProcPtr h_send(Name x, Name y, ProcPtr p) {
    return mkp({ProcTag::Send, std::move(x), std::move(y), nullptr, std::move(p), nullptr, {}});
}
ProcPtr h_recv(Name x, Name y, ProcPtr p) {
    return mkp({ProcTag::Recv, std::move(x), std::move(y), nullptr, std::move(p), nullptr, {}});
}
ProcPtr h_close(Name x, ProcPtr p) {
    return mkp({ProcTag::Close, std::move(x), "", nullptr, std::move(p), nullptr, {}});
}
ProcPtr h_wait(Name x, ProcPtr p) {
    return mkp({ProcTag::Wait, std::move(x), "", nullptr, std::move(p), nullptr, {}});
}
ProcPtr h_inl(Name x, LinPtr other, ProcPtr p) {
    return mkp({ProcTag::Inl, std::move(x), "", std::move(other), std::move(p), nullptr, {}});
}
ProcPtr h_inr(Name x, LinPtr other, ProcPtr p) {
    return mkp({ProcTag::Inr, std::move(x), "", std::move(other), std::move(p), nullptr, {}});
}
ProcPtr h_offer(Name x, ProcPtr p, ProcPtr q) {
    return mkp({ProcTag::Offer, std::move(x), "", nullptr, std::move(p), std::move(q), {}});
}
ProcPtr h_absurd_on(Name x, LinEnv weaken) {
    return mkp({ProcTag::AbsurdOn, std::move(x), "", nullptr, nullptr, nullptr, std::move(weaken)});
}

ProcPtr h_usend(Name x, Name y, ProcPtr p, const LinPtr& y_type) {
    NameSet avoid = hcp_free_names(p);
    avoid.insert(x);
    avoid.insert(y);
    Name z = fresh_name("u", avoid);
    return h_send(x, z, h_par(h_link(y, z, y_type), std::move(p)));
}
ProcPtr h_ping(Name x, ProcPtr p) {
    NameSet avoid = hcp_free_names(p);
    avoid.insert(x);
    Name z = fresh_name("t", avoid);
    return h_send(x, z, h_par(h_close(z, h_halt()), std::move(p)));
}
ProcPtr h_pong(Name x, ProcPtr p) {
    NameSet avoid = hcp_free_names(p);
    avoid.insert(x);
    Name z = fresh_name("t", avoid);
    return h_recv(x, z, h_wait(z, std::move(p)));
}

namespace {

void pfree(const ProcPtr& p, NameSet& out) {
    switch (p->tag) {
        case ProcTag::Link:
            out.insert(p->x);
            out.insert(p->y);
            return;
        case ProcTag::Res: {
            NameSet inner;
            pfree(p->p, inner);
            inner.erase(p->x);
            inner.erase(p->y);
            out.insert(inner.begin(), inner.end());
            return;
        }
        case ProcTag::Par:
            pfree(p->p, out);
            pfree(p->q, out);
            return;
        case ProcTag::Halt:
            return;
        case ProcTag::Send:
        case ProcTag::Recv: {
            out.insert(p->x);
            NameSet inner;
            pfree(p->p, inner);
            inner.erase(p->y);
            out.insert(inner.begin(), inner.end());
            return;
        }
        case ProcTag::Close:
        case ProcTag::Wait:
        case ProcTag::Inl:
        case ProcTag::Inr:
            out.insert(p->x);
            pfree(p->p, out);
            return;
        case ProcTag::Offer:
            out.insert(p->x);
            pfree(p->p, out);
            pfree(p->q, out);
            return;
        case ProcTag::AbsurdOn:
            out.insert(p->x);
            for (const auto& [n, t] : p->weaken) out.insert(n);
            return;
    }
}

}  // namespace

NameSet hcp_free_names(const ProcPtr& p) {
    NameSet out;
    pfree(p, out);
    return out;
}

ProcPtr hcp_rename(const ProcPtr& p, const Name& to, const Name& from) {
    if (to == from) return p;
    auto r = [&](const Name& n) { return n == from ? to : n; };
    // Renames a binder out of the way if it would capture `to`.
    auto under = [&](const Name& binder, const ProcPtr& body,
                     auto rebuild) -> ProcPtr {
        if (binder == from) return rebuild(binder, body);
        if (binder == to) {
            NameSet avoid = hcp_free_names(body);
            avoid.insert(to);
            avoid.insert(from);
            Name nb = fresh_name(binder, avoid);
            return rebuild(nb, hcp_rename(hcp_rename(body, nb, binder), to, from));
        }
        return rebuild(binder, hcp_rename(body, to, from));
    };
    switch (p->tag) {
        case ProcTag::Link:
            return h_link(r(p->x), r(p->y), p->ann);
        case ProcTag::Res: {
            if (p->x == from || p->y == from) return p;
            Name bx = p->x, by = p->y;
            ProcPtr body = p->p;
            for (Name* b : {&bx, &by}) {
                if (*b == to) {
                    NameSet avoid = hcp_free_names(body);
                    avoid.insert(to);
                    avoid.insert(from);
                    avoid.insert(bx);
                    avoid.insert(by);
                    Name nb = fresh_name(*b, avoid);
                    body = hcp_rename(body, nb, *b);
                    *b = nb;
                }
            }
            return h_res(bx, by, hcp_rename(body, to, from));
        }
        case ProcTag::Par:
            return h_par(hcp_rename(p->p, to, from), hcp_rename(p->q, to, from));
        case ProcTag::Halt:
            return p;
        case ProcTag::Send:
        case ProcTag::Recv: {
            Name subj = r(p->x);
            auto rebuild = [&](const Name& b, const ProcPtr& body) {
                return p->tag == ProcTag::Send ? h_send(subj, b, body)
                                               : h_recv(subj, b, body);
            };
            return under(p->y, p->p, rebuild);
        }
        case ProcTag::Close:
            return h_close(r(p->x), hcp_rename(p->p, to, from));
        case ProcTag::Wait:
            return h_wait(r(p->x), hcp_rename(p->p, to, from));
        case ProcTag::Inl:
            return h_inl(r(p->x), p->ann, hcp_rename(p->p, to, from));
        case ProcTag::Inr:
            return h_inr(r(p->x), p->ann, hcp_rename(p->p, to, from));
        case ProcTag::Offer:
            return h_offer(r(p->x), hcp_rename(p->p, to, from),
                           hcp_rename(p->q, to, from));
        case ProcTag::AbsurdOn: {
            LinEnv w = p->weaken;
            for (auto& [n, t] : w) n = r(n);
            return h_absurd_on(r(p->x), std::move(w));
        }
    }
    return p;
}

std::string show_proc(const ProcPtr& p) {
    switch (p->tag) {
        case ProcTag::Link:
            return p->x + "<->" + p->y + " : " + show_lin(p->ann);
        case ProcTag::Res:
            return "new (" + p->x + " " + p->y + "). " + show_proc(p->p);
        case ProcTag::Par: {
            auto side = [&](const ProcPtr& s) {
                std::string str = show_proc(s);
                if (s->tag == ProcTag::Res || s->tag == ProcTag::Link)
                    return "(" + str + ")";
                return str;
            };
            return "(" + side(p->p) + " || " + side(p->q) + ")";
        }
        case ProcTag::Halt:
            return "0";
        case ProcTag::Send:
            return p->x + "[" + p->y + "]. " + show_proc(p->p);
        case ProcTag::Recv:
            return p->x + "(" + p->y + "). " + show_proc(p->p);
        case ProcTag::Close:
            return p->x + "[]. " + show_proc(p->p);
        case ProcTag::Wait:
            return p->x + "(). " + show_proc(p->p);
        case ProcTag::Inl:
            return p->x + "[inl : " + show_lin(p->ann) + "]. " + show_proc(p->p);
        case ProcTag::Inr:
            return p->x + "[inr : " + show_lin(p->ann) + "]. " + show_proc(p->p);
        case ProcTag::Offer:
            return p->x + ".case(" + show_proc(p->p) + ", " + show_proc(p->q) + ")";
        case ProcTag::AbsurdOn: {
            std::string s = p->x + ".case(){";
            for (size_t i = 0; i < p->weaken.size(); ++i) {
                if (i) s += ", ";
                s += p->weaken[i].first + " : " + show_lin(p->weaken[i].second);
            }
            return s + "}";
        }
    }
    return "?";
}

// ---------------------------------------------------------------------
// Type synthesis.
// ---------------------------------------------------------------------

namespace {

// A typing group is a context fragment. An anchored group is a genuine
// member of the hyper-environment. An unanchored group still owes a merge
// into some environment: wait introduces x : bot without saying which
// context it extends, and merges keep that obligation open until a receive
// joins the group with an anchored one (or the top level resolves leftovers
// into the first environment).
struct Group {
    LinEnv env;
    bool anchored;
};

struct Synth {
    std::vector<Group> groups;
};

// Locates a name: (group index, position) or (-2, -1) when absent.
std::pair<int, int> locate(const Synth& s, const Name& n) {
    for (size_t i = 0; i < s.groups.size(); ++i)
        for (size_t j = 0; j < s.groups[i].env.size(); ++j)
            if (s.groups[i].env[j].first == n) return {(int)i, (int)j};
    return {-2, -1};
}

LinPtr type_at(const Synth& s, std::pair<int, int> loc) {
    return s.groups[loc.first].env[loc.second].second;
}

Synth synth(const ProcPtr& p);

void check_disjoint(const Synth& a, const Synth& b) {
    NameSet seen;
    auto scan = [&](const Synth& s) {
        for (const Group& g : s.groups)
            for (const auto& [n, t] : g.env) {
                if (seen.count(n))
                    throw HcpError("name '" + n + "' typed twice");
                seen.insert(n);
            }
    };
    scan(a);
    scan(b);
}

bool synth_env_eq(const LinEnv& a, const LinEnv& b) {
    if (a.size() != b.size()) return false;
    // Compare as sets of bindings.
    std::vector<bool> used(b.size(), false);
    for (const auto& [n, t] : a) {
        bool found = false;
        for (size_t j = 0; j < b.size(); ++j) {
            if (!used[j] && b[j].first == n && lin_eq(t, b[j].second)) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

bool synth_eq(const Synth& a, const Synth& b) {
    if (a.groups.size() != b.groups.size()) return false;
    std::vector<bool> used(b.groups.size(), false);
    for (const Group& g : a.groups) {
        bool found = false;
        for (size_t j = 0; j < b.groups.size(); ++j) {
            if (!used[j] && b.groups[j].anchored == g.anchored &&
                synth_env_eq(g.env, b.groups[j].env)) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// Merges two distinct groups, dropping the named endpoints and appending
// extra bindings; the result keeps an open obligation if either side had
// one.
Group merge_groups(const Synth& s, std::pair<int, int> la, const Name& skip_a,
                   std::pair<int, int> lb, const Name& skip_b) {
    Group out;
    out.anchored = s.groups[la.first].anchored && s.groups[lb.first].anchored;
    for (const auto& [n, t] : s.groups[la.first].env)
        if (n != skip_a) out.env.push_back({n, t});
    for (const auto& [n, t] : s.groups[lb.first].env)
        if (n != skip_b) out.env.push_back({n, t});
    return out;
}

Synth drop_groups(const Synth& s, int i, int j) {
    Synth out;
    for (size_t k = 0; k < s.groups.size(); ++k)
        if ((int)k != i && (int)k != j) out.groups.push_back(s.groups[k]);
    return out;
}

Synth synth(const ProcPtr& p) {
    switch (p->tag) {
        case ProcTag::Halt:
            return {};
        case ProcTag::Link:
            return {{{{{p->x, p->ann}, {p->y, lt_dual(p->ann)}}, true}}};
        case ProcTag::Par: {
            Synth a = synth(p->p), b = synth(p->q);
            check_disjoint(a, b);
            a.groups.insert(a.groups.end(), b.groups.begin(), b.groups.end());
            return a;
        }
        case ProcTag::Res: {
            Synth s = synth(p->p);
            auto lx = locate(s, p->x), ly = locate(s, p->y);
            if (lx.first == -2 || ly.first == -2)
                throw HcpError("restriction endpoint '" +
                               (lx.first == -2 ? p->x : p->y) + "' is unused");
            if (lx.first == ly.first)
                throw HcpError("restriction endpoints '" + p->x + "' and '" +
                               p->y + "' share an environment (cycle)");
            LinPtr tx = type_at(s, lx), ty = type_at(s, ly);
            if (!lin_eq(lt_dual(tx), ty))
                throw HcpError("restriction endpoints have non-dual types " +
                               show_lin(tx) + " and " + show_lin(ty));
            Group merged = merge_groups(s, lx, p->x, ly, p->y);
            Synth out = drop_groups(s, lx.first, ly.first);
            out.groups.push_back(std::move(merged));
            return out;
        }
        case ProcTag::Close: {
            Synth s = synth(p->p);
            if (locate(s, p->x).first != -2)
                throw HcpError("'" + p->x + "' used after close");
            s.groups.push_back({{{p->x, lt_one()}}, true});
            return s;
        }
        case ProcTag::Wait: {
            Synth s = synth(p->p);
            if (locate(s, p->x).first != -2)
                throw HcpError("'" + p->x + "' used after wait");
            s.groups.push_back({{{p->x, lt_bot()}}, false});
            return s;
        }
        case ProcTag::Send: {
            Synth s = synth(p->p);
            auto ly = locate(s, p->y), lx = locate(s, p->x);
            if (ly.first == -2)
                throw HcpError("sent name '" + p->y + "' is unused");
            if (lx.first == -2)
                throw HcpError("subject '" + p->x + "' is unused after send");
            if (lx.first == ly.first)
                throw HcpError("send subject and payload share an environment");
            LinPtr ta = type_at(s, ly), tb = type_at(s, lx);
            Group merged = merge_groups(s, ly, p->y, lx, p->x);
            merged.env.push_back({p->x, lt_tensor(ta, tb)});
            Synth out = drop_groups(s, lx.first, ly.first);
            out.groups.push_back(std::move(merged));
            return out;
        }
        case ProcTag::Recv: {
            Synth s = synth(p->p);
            auto ly = locate(s, p->y), lx = locate(s, p->x);
            if (ly.first == -2)
                throw HcpError("received name '" + p->y + "' is unused");
            if (lx.first == -2)
                throw HcpError("subject '" + p->x + "' is unused after recv");
            LinPtr ta = type_at(s, ly), tb = type_at(s, lx);
            if (lx.first == ly.first) {
                Group joined;
                joined.anchored = s.groups[lx.first].anchored;
                for (const auto& [n, t] : s.groups[lx.first].env)
                    if (n != p->x && n != p->y) joined.env.push_back({n, t});
                joined.env.push_back({p->x, lt_parr(ta, tb)});
                Synth out = drop_groups(s, lx.first, -1);
                out.groups.push_back(std::move(joined));
                return out;
            }
            // Distinct groups can only be joined by discharging an open
            // obligation: the unanchored side commits to this environment.
            if (s.groups[lx.first].anchored && s.groups[ly.first].anchored)
                throw HcpError(
                    "recv subject and payload are in different environments");
            Group joined;
            joined.anchored =
                s.groups[lx.first].anchored || s.groups[ly.first].anchored;
            for (const auto& [n, t] : s.groups[lx.first].env)
                if (n != p->x) joined.env.push_back({n, t});
            for (const auto& [n, t] : s.groups[ly.first].env)
                if (n != p->y) joined.env.push_back({n, t});
            joined.env.push_back({p->x, lt_parr(ta, tb)});
            Synth out = drop_groups(s, lx.first, ly.first);
            out.groups.push_back(std::move(joined));
            return out;
        }
        case ProcTag::Inl:
        case ProcTag::Inr: {
            Synth s = synth(p->p);
            auto lx = locate(s, p->x);
            if (lx.first == -2)
                throw HcpError("subject '" + p->x + "' is unused after select");
            LinPtr t = type_at(s, lx);
            LinPtr sum = p->tag == ProcTag::Inl ? lt_plus(t, p->ann)
                                                : lt_plus(p->ann, t);
            s.groups[lx.first].env[lx.second].second = sum;
            return s;
        }
        case ProcTag::Offer: {
            Synth a = synth(p->p), b = synth(p->q);
            auto la = locate(a, p->x), lb = locate(b, p->x);
            if (la.first == -2 || lb.first == -2)
                throw HcpError("offer subject '" + p->x +
                               "' is unused in a branch");
            LinPtr ta = type_at(a, la), tb = type_at(b, lb);
            a.groups[la.first].env.erase(a.groups[la.first].env.begin() +
                                         la.second);
            Synth b2 = b;
            b2.groups[lb.first].env.erase(b2.groups[lb.first].env.begin() +
                                          lb.second);
            // Everything but the subject must agree between the branches.
            if (!synth_eq(a, b2))
                throw HcpError(
                    "offer branches type different environments at '" + p->x +
                    "'");
            a.groups[la.first].env.push_back({p->x, lt_with(ta, tb)});
            return a;
        }
        case ProcTag::AbsurdOn: {
            Synth s;
            LinEnv env = p->weaken;
            env.push_back({p->x, lt_top()});
            s.groups.push_back({std::move(env), true});
            return s;
        }
    }
    throw HcpError("malformed process");
}

}  // namespace

LinHyperEnv hcp_check(const ProcPtr& p) {
    Synth s = synth(p);
    // Leftover obligations resolve into the first anchored environment.
    LinHyperEnv out;
    LinEnv pending;
    for (const Group& g : s.groups) {
        if (g.anchored)
            out.push_back(g.env);
        else
            pending.insert(pending.end(), g.env.begin(), g.env.end());
    }
    if (!pending.empty()) {
        if (out.empty()) out.push_back({});
        out.front().insert(out.front().end(), pending.begin(), pending.end());
    }
    return out;
}

// ---------------------------------------------------------------------
// Structural congruence.
// ---------------------------------------------------------------------

namespace {

struct PFlat {
    std::vector<std::pair<Name, Name>> binders;
    std::vector<ProcPtr> atoms;  // non-Par, non-Res, non-Halt
};

void pextrude(const ProcPtr& p, PFlat& out) {
    switch (p->tag) {
        case ProcTag::Par:
            pextrude(p->p, out);
            pextrude(p->q, out);
            return;
        case ProcTag::Res:
            out.binders.push_back({p->x, p->y});
            pextrude(p->p, out);
            return;
        case ProcTag::Halt:
            return;  // unit of parallel composition
        default:
            out.atoms.push_back(p);
            return;
    }
}

ProcPtr pfreshen(const ProcPtr& p, NameSet& avoid) {
    auto claim = [&](Name& n, ProcPtr& body) {
        if (avoid.count(n)) {
            Name nn = fresh_name(n, avoid);
            body = hcp_rename(body, nn, n);
            n = nn;
        } else {
            avoid.insert(n);
        }
    };
    switch (p->tag) {
        case ProcTag::Res: {
            Name x = p->x, y = p->y;
            ProcPtr body = p->p;
            claim(x, body);
            claim(y, body);
            return h_res(x, y, pfreshen(body, avoid));
        }
        case ProcTag::Par:
            return h_par(pfreshen(p->p, avoid), pfreshen(p->q, avoid));
        case ProcTag::Send:
        case ProcTag::Recv: {
            Name y = p->y;
            ProcPtr body = p->p;
            claim(y, body);
            body = pfreshen(body, avoid);
            return p->tag == ProcTag::Send ? h_send(p->x, y, body)
                                           : h_recv(p->x, y, body);
        }
        case ProcTag::Close:
            return h_close(p->x, pfreshen(p->p, avoid));
        case ProcTag::Wait:
            return h_wait(p->x, pfreshen(p->p, avoid));
        case ProcTag::Inl:
            return h_inl(p->x, p->ann, pfreshen(p->p, avoid));
        case ProcTag::Inr:
            return h_inr(p->x, p->ann, pfreshen(p->p, avoid));
        case ProcTag::Offer:
            return h_offer(p->x, pfreshen(p->p, avoid), pfreshen(p->q, avoid));
        default:
            return p;
    }
}

// Recursive congruence check; `m` maps names of the left process to names
// of the right for binders matched above.
bool pequiv(const ProcPtr& a0, const ProcPtr& b0, std::map<Name, Name> m);

Name mapped(const std::map<Name, Name>& m, const Name& n) {
    auto it = m.find(n);
    return it == m.end() ? n : it->second;
}

bool atoms_match(const ProcPtr& a, const ProcPtr& b,
                 const std::map<Name, Name>& m) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case ProcTag::Link: {
            Name ax = mapped(m, a->x), ay = mapped(m, a->y);
            if (ax == b->x && ay == b->y) return lin_eq(a->ann, b->ann);
            if (ax == b->y && ay == b->x)
                return lin_eq(a->ann, lt_dual(b->ann));
            return false;
        }
        case ProcTag::Close:
        case ProcTag::Wait:
            return mapped(m, a->x) == b->x && pequiv(a->p, b->p, m);
        case ProcTag::Inl:
        case ProcTag::Inr:
            return mapped(m, a->x) == b->x && lin_eq(a->ann, b->ann) &&
                   pequiv(a->p, b->p, m);
        case ProcTag::Send:
        case ProcTag::Recv: {
            if (mapped(m, a->x) != b->x) return false;
            std::map<Name, Name> m2 = m;
            m2[a->y] = b->y;
            return pequiv(a->p, b->p, m2);
        }
        case ProcTag::Offer:
            return mapped(m, a->x) == b->x && pequiv(a->p, b->p, m) &&
                   pequiv(a->q, b->q, m);
        case ProcTag::AbsurdOn: {
            if (mapped(m, a->x) != b->x) return false;
            if (a->weaken.size() != b->weaken.size()) return false;
            std::vector<bool> used(b->weaken.size(), false);
            for (const auto& [n, t] : a->weaken) {
                bool found = false;
                Name mn = mapped(m, n);
                for (size_t j = 0; j < b->weaken.size(); ++j)
                    if (!used[j] && b->weaken[j].first == mn &&
                        lin_eq(t, b->weaken[j].second)) {
                        used[j] = true;
                        found = true;
                        break;
                    }
                if (!found) return false;
            }
            return true;
        }
        default:
            return false;
    }
}

bool match_patoms(const PFlat& a, const PFlat& b, std::vector<bool>& used,
                  size_t i, const std::map<Name, Name>& m) {
    if (i == a.atoms.size()) return true;
    for (size_t j = 0; j < b.atoms.size(); ++j) {
        if (used[j] || !atoms_match(a.atoms[i], b.atoms[j], m)) continue;
        used[j] = true;
        if (match_patoms(a, b, used, i + 1, m)) return true;
        used[j] = false;
    }
    return false;
}

bool match_pbinders(const PFlat& a, const PFlat& b, std::vector<bool>& used,
                    size_t i, std::map<Name, Name>& m) {
    if (i == a.binders.size()) {
        std::vector<bool> au(b.atoms.size(), false);
        return match_patoms(a, b, au, 0, m);
    }
    const auto& [ax, ay] = a.binders[i];
    for (size_t j = 0; j < b.binders.size(); ++j) {
        if (used[j]) continue;
        const auto& [bx, by] = b.binders[j];
        for (int flip = 0; flip < 2; ++flip) {
            used[j] = true;
            m[ax] = flip ? by : bx;
            m[ay] = flip ? bx : by;
            if (match_pbinders(a, b, used, i + 1, m)) return true;
            m.erase(ax);
            m.erase(ay);
            used[j] = false;
        }
    }
    return false;
}

bool pequiv(const ProcPtr& a0, const ProcPtr& b0, std::map<Name, Name> m) {
    PFlat a, b;
    pextrude(a0, a);
    pextrude(b0, b);
    if (a.binders.size() != b.binders.size() || a.atoms.size() != b.atoms.size())
        return false;
    std::vector<bool> used(b.binders.size(), false);
    return match_pbinders(a, b, used, 0, m);
}

}  // namespace

bool hcp_equiv(const ProcPtr& p, const ProcPtr& q) {
    NameSet avoid = hcp_free_names(p);
    NameSet fq = hcp_free_names(q);
    avoid.insert(fq.begin(), fq.end());
    ProcPtr fp = pfreshen(p, avoid);
    // Freshen q against p's names too so binder matching is injective.
    NameSet avoid3 = avoid;
    ProcPtr fq2 = pfreshen(q, avoid3);
    return pequiv(fp, fq2, {});
}

// ---------------------------------------------------------------------
// Labelled transition system.
// ---------------------------------------------------------------------

namespace {

const char* verb_name(Verb v) {
    switch (v) {
        case Verb::VSend: return "send";
        case Verb::VRecv: return "recv";
        case Verb::VClose: return "close";
        case Verb::VWait: return "wait";
        case Verb::VSelInl: return "inl-select";
        case Verb::VSelInr: return "inr-select";
        case Verb::VOffInl: return "inl-offer";
        case Verb::VOffInr: return "inr-offer";
        case Verb::VLink: return "link";
    }
    return "?";
}

std::string show_act(const Act& a) {
    std::string s = std::string(verb_name(a.verb)) + " " + a.subject;
    if (!a.object.empty()) s += " " + a.object;
    return s;
}

bool act_mentions(const Act& a, const Name& x, const Name& y) {
    return a.subject == x || a.subject == y || a.object == x || a.object == y;
}

Label action_label(Act a) { return {LabelKind::Action, std::move(a), {}}; }

// Canonicalises the bound name of a send/recv action so that equal labels
// have comparable residuals.
Transition bound_prefix_transition(Verb v, const Name& subject,
                                   const Name& bound, const ProcPtr& body) {
    NameSet fv = hcp_free_names(body);
    fv.erase(bound);
    Name canon = subject + "^";
    while (fv.count(canon)) canon += "^";
    return {action_label({v, subject, canon}), hcp_rename(body, canon, bound)};
}

}  // namespace

std::string show_label(const Label& l) {
    switch (l.kind) {
        case LabelKind::Action: return show_act(l.a);
        case LabelKind::PairAct: return show_act(l.a) + " || " + show_act(l.b);
        case LabelKind::Alpha: return "alpha";
        case LabelKind::Beta: return "beta";
        case LabelKind::Tau: return "tau";
    }
    return "?";
}

bool label_internal(const Label& l) {
    return l.kind == LabelKind::Alpha || l.kind == LabelKind::Beta ||
           l.kind == LabelKind::Tau;
}

std::vector<Transition> lts_step(const ProcPtr& p) {
    std::vector<Transition> out;
    switch (p->tag) {
        case ProcTag::Halt:
        case ProcTag::AbsurdOn:
            return out;
        case ProcTag::Link:
            out.push_back({action_label({Verb::VLink, p->x, p->y}), h_halt()});
            out.push_back({action_label({Verb::VLink, p->y, p->x}), h_halt()});
            return out;
        case ProcTag::Send:
            out.push_back(bound_prefix_transition(Verb::VSend, p->x, p->y, p->p));
            return out;
        case ProcTag::Recv:
            out.push_back(bound_prefix_transition(Verb::VRecv, p->x, p->y, p->p));
            return out;
        case ProcTag::Close:
            out.push_back({action_label({Verb::VClose, p->x, ""}), p->p});
            return out;
        case ProcTag::Wait:
            out.push_back({action_label({Verb::VWait, p->x, ""}), p->p});
            return out;
        case ProcTag::Inl:
            out.push_back({action_label({Verb::VSelInl, p->x, ""}), p->p});
            return out;
        case ProcTag::Inr:
            out.push_back({action_label({Verb::VSelInr, p->x, ""}), p->p});
            return out;
        case ProcTag::Offer:
            out.push_back({action_label({Verb::VOffInl, p->x, ""}), p->p});
            out.push_back({action_label({Verb::VOffInr, p->x, ""}), p->q});
            return out;
        case ProcTag::Par: {
            std::vector<Transition> left = lts_step(p->p);
            std::vector<Transition> right = lts_step(p->q);
            for (const Transition& t : left)
                out.push_back({t.label, h_par(t.target, p->q)});
            for (const Transition& t : right)
                out.push_back({t.label, h_par(p->p, t.target)});
            for (const Transition& lt : left)
                for (const Transition& rt : right)
                    if (lt.label.kind == LabelKind::Action &&
                        rt.label.kind == LabelKind::Action) {
                        // The pair is a multiset: order the two actions
                        // canonically so commuted compositions emit equal
                        // labels.
                        Act a = lt.label.a;
                        Act b = rt.label.a;
                        if (show_act(b) < show_act(a)) std::swap(a, b);
                        out.push_back({{LabelKind::PairAct, a, b},
                                       h_par(lt.target, rt.target)});
                    }
            return out;
        }
        case ProcTag::Res: {
            const Name& x = p->x;
            const Name& y = p->y;
            for (const Transition& t : lts_step(p->p)) {
                const Label& l = t.label;
                if (l.kind == LabelKind::Action) {
                    const Act& a = l.a;
                    if (a.verb == Verb::VLink &&
                        (a.subject == x || a.subject == y) &&
                        a.object != x && a.object != y) {
                        Name other = a.subject == x ? y : x;
                        out.push_back({{LabelKind::Alpha, {}, {}},
                                       hcp_rename(t.target, a.object, other)});
                        continue;
                    }
                    if (act_mentions(a, x, y)) continue;
                    out.push_back({l, h_res(x, y, t.target)});
                    continue;
                }
                if (l.kind == LabelKind::PairAct) {
                    const Act& a = l.a;
                    const Act& b = l.b;
                    bool on_pair = (a.subject == x && b.subject == y) ||
                                   (a.subject == y && b.subject == x);
                    if (on_pair) {
                        auto verbs = std::minmax(
                            {a.verb, b.verb}, [](Verb u, Verb v) {
                                return static_cast<int>(u) < static_cast<int>(v);
                            });
                        if ((a.verb == Verb::VClose && b.verb == Verb::VWait) ||
                            (a.verb == Verb::VWait && b.verb == Verb::VClose)) {
                            out.push_back({{LabelKind::Beta, {}, {}}, t.target});
                        } else if ((a.verb == Verb::VSend &&
                                    b.verb == Verb::VRecv) ||
                                   (a.verb == Verb::VRecv &&
                                    b.verb == Verb::VSend)) {
                            const Act& snd = a.verb == Verb::VSend ? a : b;
                            const Act& rcv = a.verb == Verb::VSend ? b : a;
                            out.push_back(
                                {{LabelKind::Beta, {}, {}},
                                 h_res(x, y,
                                       h_res(snd.object, rcv.object,
                                             t.target))});
                        } else if ((a.verb == Verb::VSelInl &&
                                    b.verb == Verb::VOffInl) ||
                                   (a.verb == Verb::VOffInl &&
                                    b.verb == Verb::VSelInl) ||
                                   (a.verb == Verb::VSelInr &&
                                    b.verb == Verb::VOffInr) ||
                                   (a.verb == Verb::VOffInr &&
                                    b.verb == Verb::VSelInr)) {
                            out.push_back({{LabelKind::Beta, {}, {}},
                                           h_res(x, y, t.target)});
                        }
                        (void)verbs;
                        continue;
                    }
                    if (act_mentions(a, x, y) || act_mentions(b, x, y))
                        continue;
                    out.push_back({l, h_res(x, y, t.target)});
                    continue;
                }
                // Internal labels pass through.
                out.push_back({l, h_res(x, y, t.target)});
            }
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// State exploration and bisimilarity.
// ---------------------------------------------------------------------

namespace {

// Canonical alpha form: binders renamed in traversal order.
ProcPtr canon(const ProcPtr& p, std::map<Name, Name>& m, int& counter) {
    auto look = [&](const Name& n) {
        auto it = m.find(n);
        return it == m.end() ? n : it->second;
    };
    auto bind = [&](const Name& n) {
        Name c = "#b" + std::to_string(counter++);
        m[n] = c;
        return c;
    };
    auto unbind = [&](const Name& n, const std::optional<Name>& old) {
        if (old) m[n] = *old;
        else m.erase(n);
    };
    auto old_of = [&](const Name& n) -> std::optional<Name> {
        auto it = m.find(n);
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
    switch (p->tag) {
        case ProcTag::Halt:
            return p;
        case ProcTag::Link:
            return h_link(look(p->x), look(p->y), p->ann);
        case ProcTag::Par:
            return h_par(canon(p->p, m, counter), canon(p->q, m, counter));
        case ProcTag::Res: {
            auto ox = old_of(p->x);
            Name cx = bind(p->x);
            auto oy = old_of(p->y);
            Name cy = bind(p->y);
            ProcPtr body = canon(p->p, m, counter);
            unbind(p->y, oy);
            unbind(p->x, ox);
            return h_res(cx, cy, body);
        }
        case ProcTag::Send:
        case ProcTag::Recv: {
            Name subj = look(p->x);
            auto oy = old_of(p->y);
            Name cy = bind(p->y);
            ProcPtr body = canon(p->p, m, counter);
            unbind(p->y, oy);
            return p->tag == ProcTag::Send ? h_send(subj, cy, body)
                                           : h_recv(subj, cy, body);
        }
        case ProcTag::Close:
            return h_close(look(p->x), canon(p->p, m, counter));
        case ProcTag::Wait:
            return h_wait(look(p->x), canon(p->p, m, counter));
        case ProcTag::Inl:
            return h_inl(look(p->x), p->ann, canon(p->p, m, counter));
        case ProcTag::Inr:
            return h_inr(look(p->x), p->ann, canon(p->p, m, counter));
        case ProcTag::Offer:
            return h_offer(look(p->x), canon(p->p, m, counter),
                           canon(p->q, m, counter));
        case ProcTag::AbsurdOn: {
            LinEnv w = p->weaken;
            for (auto& [n, t] : w) n = look(n);
            std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) {
                return a.first < b.first;
            });
            return h_absurd_on(look(p->x), std::move(w));
        }
    }
    return p;
}

std::string state_key(const ProcPtr& p) {
    std::map<Name, Name> m;
    int counter = 0;
    return show_proc(canon(p, m, counter));
}

}  // namespace

std::string proc_key(const ProcPtr& p) { return state_key(p); }

Lts explore(const ProcPtr& p, size_t cap) {
    Lts lts;
    std::map<std::string, int> index;
    std::deque<int> queue;
    auto add = [&](const ProcPtr& s) {
        std::string key = state_key(s);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (lts.states.size() >= cap)
            throw HcpError("state-space cap of " + std::to_string(cap) +
                           " states exceeded");
        int id = (int)lts.states.size();
        index[key] = id;
        lts.states.push_back(s);
        lts.keys.push_back(std::move(key));
        lts.edges.emplace_back();
        queue.push_back(id);
        return id;
    };
    add(p);
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        for (const Transition& t : lts_step(lts.states[id])) {
            int to = add(t.target);
            lts.edges[id].push_back({t.label, to});
        }
    }
    return lts;
}

std::vector<std::pair<Label, int>> saturated(const Lts& lts, int state,
                                             InternalSet internal) {
    auto is_internal = [&](const Label& l) {
        return (l.kind == LabelKind::Alpha && internal.alpha) ||
               (l.kind == LabelKind::Beta && internal.beta) ||
               l.kind == LabelKind::Tau;
    };
    auto closure = [&](int from) {
        std::set<int> seen{from};
        std::deque<int> q{from};
        while (!q.empty()) {
            int s = q.front();
            q.pop_front();
            for (const auto& [l, to] : lts.edges[s])
                if (is_internal(l) && !seen.count(to)) {
                    seen.insert(to);
                    q.push_back(to);
                }
        }
        return seen;
    };
    std::vector<std::pair<Label, int>> out;
    std::set<int> pre = closure(state);
    std::set<std::pair<std::string, int>> dedup;
    Label tau{LabelKind::Tau, {}, {}};
    for (int s : pre)
        if (dedup.insert({"tau", s}).second) out.push_back({tau, s});
    for (int s : pre)
        for (const auto& [l, to] : lts.edges[s]) {
            if (is_internal(l)) continue;
            for (int post : closure(to))
                if (dedup.insert({show_label(l), post}).second)
                    out.push_back({l, post});
        }
    return out;
}

BisimClasses bisim_classes(const std::vector<ProcPtr>& roots, BisimMode mode,
                           InternalSet internal, size_t cap) {
    BisimClasses out;
    std::vector<int> offset;
    size_t n = 0;
    for (const ProcPtr& r : roots) {
        out.lts.push_back(explore(r, cap));
        offset.push_back((int)n);
        n += out.lts.back().states.size();
    }
    // Signature edges over the disjoint union of all state spaces.
    std::vector<std::vector<std::pair<std::string, int>>> sig_edges(n);
    for (size_t i = 0; i < out.lts.size(); ++i) {
        const Lts& l = out.lts[i];
        int off = offset[i];
        for (size_t s = 0; s < l.states.size(); ++s) {
            if (mode == BisimMode::Weak) {
                for (const auto& [lab, to] : saturated(l, (int)s, internal))
                    sig_edges[off + s].push_back({show_label(lab), off + to});
            } else {
                for (const auto& [lab, to] : l.edges[s])
                    sig_edges[off + s].push_back({show_label(lab), off + to});
            }
        }
    }
    std::vector<int> block(n, 0);
    for (;;) {
        std::map<std::pair<int, std::set<std::pair<std::string, int>>>, int>
            next_ids;
        std::vector<int> next(n);
        for (size_t s = 0; s < n; ++s) {
            std::set<std::pair<std::string, int>> sig;
            for (const auto& [lab, to] : sig_edges[s])
                sig.insert({lab, block[to]});
            auto key = std::make_pair(block[s], std::move(sig));
            auto it = next_ids.find(key);
            if (it == next_ids.end())
                it = next_ids.emplace(std::move(key), (int)next_ids.size()).first;
            next[s] = it->second;
        }
        if (next == block) break;
        block = std::move(next);
    }
    for (size_t i = 0; i < out.lts.size(); ++i)
        out.block.emplace_back(block.begin() + offset[i],
                               block.begin() + offset[i] +
                                   out.lts[i].states.size());
    return out;
}

bool bisim(const ProcPtr& p, const ProcPtr& q, BisimMode mode,
           InternalSet internal, size_t cap) {
    BisimClasses c = bisim_classes({p, q}, mode, internal, cap);
    return c.block[0][0] == c.block[1][0];
}

std::string lts_dot(const Lts& lts) {
    std::ostringstream os;
    os << "digraph lts {\n";
    for (size_t s = 0; s < lts.states.size(); ++s) {
        std::string label = show_proc(lts.states[s]);
        std::string esc;
        for (char c : label) {
            if (c == '"' || c == '\\') esc += '\\';
            esc += c;
        }
        os << "  s" << s << " [label=\"" << esc << "\"];\n";
    }
    for (size_t s = 0; s < lts.states.size(); ++s)
        for (const auto& [l, to] : lts.edges[s])
            os << "  s" << s << " -> s" << to << " [label=\"" << show_label(l)
               << "\"];\n";
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------
// Concrete syntax.
// ---------------------------------------------------------------------

namespace {

struct PTok {
    std::string text;
    int line, col;
};

std::vector<PTok> plex(const std::string& src) {
    std::vector<PTok> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t k) {
        for (size_t j = 0; j < k; ++j) {
            if (src[i + j] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += k;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (src.compare(i, 3, "<->") == 0) {
            out.push_back({"<->", line, col});
            advance(3);
            continue;
        }
        if (src.compare(i, 2, "||") == 0) {
            out.push_back({"||", line, col});
            advance(2);
            continue;
        }
        if (isalpha((unsigned char)c) || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (isalnum((unsigned char)src[j]) || src[j] == '_' ||
                    src[j] == '\'' || src[j] == '^'))
                ++j;
            out.push_back({src.substr(i, j - i), line, col});
            advance(j - i);
            continue;
        }
        if (isdigit((unsigned char)c)) {
            out.push_back({std::string(1, c), line, col});
            advance(1);
            continue;
        }
        out.push_back({std::string(1, c), line, col});
        advance(1);
    }
    return out;
}

struct PParser {
    std::vector<PTok> toks;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) {
        int line = pos < toks.size() ? toks[pos].line : 0;
        int col = pos < toks.size() ? toks[pos].col : 0;
        throw HcpError("parse error at " + std::to_string(line) + ":" +
                       std::to_string(col) + ": " + msg);
    }
    bool at(const std::string& s) const {
        return pos < toks.size() && toks[pos].text == s;
    }
    bool eat(const std::string& s) {
        if (!at(s)) return false;
        ++pos;
        return true;
    }
    void expect(const std::string& s) {
        if (!eat(s)) fail("expected '" + s + "'");
    }
    std::string ident() {
        if (pos >= toks.size() || !isalpha((unsigned char)toks[pos].text[0]))
            fail("expected a name");
        return toks[pos++].text;
    }

    LinPtr lin_atom() {
        if (eat("1")) return lt_one();
        if (eat("0")) return lt_zero();
        if (eat("bot")) return lt_bot();
        if (eat("top")) return lt_top();
        if (eat("~")) return lt_dual(lin_atom());
        if (eat("(")) {
            LinPtr t = lin();
            expect(")");
            return t;
        }
        fail("expected a linear type");
    }
    LinPtr lin() {
        LinPtr t = lin_atom();
        for (;;) {
            if (eat("*")) t = lt_tensor(t, lin_atom());
            else if (eat("@")) t = lt_parr(t, lin_atom());
            else if (eat("+")) t = lt_plus(t, lin_atom());
            else if (eat("&")) t = lt_with(t, lin_atom());
            else return t;
        }
    }

    ProcPtr proc() {
        ProcPtr p = atom();
        while (eat("||")) p = h_par(p, atom());
        return p;
    }

    ProcPtr atom() {
        if (eat("0")) return h_halt();
        if (eat("(")) {
            ProcPtr p = proc();
            expect(")");
            return p;
        }
        if (eat("new")) {
            expect("(");
            Name x = ident();
            Name y = ident();
            expect(")");
            expect(".");
            return h_res(x, y, atom());
        }
        Name x = ident();
        if (eat("<->")) {
            Name y = ident();
            expect(":");
            return h_link(x, y, lin());
        }
        if (eat("[")) {
            if (eat("]")) {
                expect(".");
                return h_close(x, atom());
            }
            if (at("inl") || at("inr")) {
                bool left = at("inl");
                ++pos;
                expect(":");
                LinPtr other = lin();
                expect("]");
                expect(".");
                return left ? h_inl(x, other, atom()) : h_inr(x, other, atom());
            }
            Name y = ident();
            expect("]");
            expect(".");
            return h_send(x, y, atom());
        }
        if (eat("(")) {
            if (eat(")")) {
                expect(".");
                return h_wait(x, atom());
            }
            Name y = ident();
            expect(")");
            expect(".");
            return h_recv(x, y, atom());
        }
        if (eat(".")) {
            expect("case");
            expect("(");
            if (eat(")")) {
                LinEnv w;
                if (eat("{")) {
                    if (!eat("}")) {
                        do {
                            Name n = ident();
                            expect(":");
                            w.push_back({n, lin()});
                        } while (eat(","));
                        expect("}");
                    }
                }
                return h_absurd_on(x, std::move(w));
            }
            ProcPtr l = proc();
            expect(",");
            ProcPtr r = proc();
            expect(")");
            return h_offer(x, l, r);
        }
        fail("expected a process");
    }
};

}  // namespace

ProcPtr parse_proc(const std::string& src) {
    PParser p{plex(src)};
    ProcPtr out = p.proc();
    if (p.pos != p.toks.size()) p.fail("unexpected trailing input");
    return out;
}

LinPtr parse_lin(const std::string& src) {
    PParser p{plex(src)};
    LinPtr out = p.lin();
    if (p.pos != p.toks.size()) p.fail("unexpected trailing input");
    return out;
}

}  // namespace hgv
