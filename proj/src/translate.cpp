#include "translate.hpp"

#include <deque>
#include <map>
#include <set>

#include "runtime_typing.hpp"
#include "semantics.hpp"
#include "typecheck.hpp"

namespace hgv {

// ---------------------------------------------------------------------
// Type translations.
// ---------------------------------------------------------------------

LinPtr up_session(const SessionPtr& s) {
    switch (s->tag) {
        case SessionTag::Send:
            return lt_parr(lt_dual(up_type(s->payload)), up_session(s->cont));
        case SessionTag::Recv:
            return lt_tensor(up_type(s->payload), up_session(s->cont));
        case SessionTag::EndOut:
            return lt_bot();
        case SessionTag::EndIn:
            return lt_one();
        case SessionTag::End:
            throw TranslateError(
                "the self-dual end type has no process translation");
    }
    throw TranslateError("malformed session type");
}

LinPtr up_type(const TypePtr& t) {
    switch (t->tag) {
        case TypeTag::Unit:
            return lt_one();
        case TypeTag::Void:
            return lt_zero();
        case TypeTag::Product:
            return lt_tensor(up_type(t->a), up_type(t->b));
        case TypeTag::Sum:
            return lt_plus(up_type(t->a), up_type(t->b));
        case TypeTag::Lolli:
            return lt_parr(lt_dual(up_type(t->a)),
                           lt_tensor(lt_one(), up_type(t->b)));
        case TypeTag::Session:
            return up_session(t->s);
    }
    throw TranslateError("malformed type");
}

LinPtr down_type(const TypePtr& t) { return lt_dual(up_type(t)); }
LinPtr down_session(const SessionPtr& s) { return lt_dual(up_session(s)); }

// ---------------------------------------------------------------------
// Constant-schema instantiation.
//
// A bare constant has a schema, not a type; the concrete type is only
// determined at the application site. This pass mirrors the fine-grain
// checker, remembering which constant occurrence (and which let binders it
// flowed through) each pending schema belongs to, and records the
// instantiated function type for all of them once the argument is seen.
// ---------------------------------------------------------------------

namespace {

using InstMap = std::map<const void*, TypePtr>;

struct RBind {
    Name name;
    TypePtr type;  // null when pending
    std::optional<ConstTag> pending;
    std::vector<const void*> sites;
    int id;
};

struct RCtx {
    std::vector<RBind> scope;
    int next_id = 0;
    bool mix = false;
    InstMap* inst = nullptr;
};

struct RRes {
    TypePtr type;
    std::optional<ConstTag> pending;
    std::vector<const void*> sites;
};

const RBind* r_lookup(const RCtx& ctx, const Name& x) {
    for (auto it = ctx.scope.rbegin(); it != ctx.scope.rend(); ++it)
        if (it->name == x) return &*it;
    return nullptr;
}

TypePtr r_require(const RRes& r, const std::string& where) {
    if (r.pending)
        throw TypeError(TypeErrorKind::ConstantUse,
                        "constant '" + show_const(*r.pending) +
                            "' must be applied to an argument (" + where +
                            ")");
    return r.type;
}

RRes resolve_term(RCtx& ctx, const FgTermPtr& m);

RRes resolve_val(RCtx& ctx, const FgValPtr& v) {
    switch (v->tag) {
        case FgValTag::Var: {
            const RBind* b = r_lookup(ctx, v->x);
            if (!b)
                throw TypeError(TypeErrorKind::Unbound,
                                "unbound variable '" + v->x + "'");
            return {b->type, b->pending, b->sites};
        }
        case FgValTag::Const:
            return {nullptr, v->k, {v.get()}};
        case FgValTag::Unit:
            return {t_unit(), {}, {}};
        case FgValTag::Lam: {
            ctx.scope.push_back({v->x, v->ann, {}, {}, ctx.next_id++});
            RRes r = resolve_term(ctx, v->body);
            ctx.scope.pop_back();
            return {t_lolli(v->ann, r_require(r, "function body")), {}, {}};
        }
        case FgValTag::Pair: {
            TypePtr a = r_require(resolve_val(ctx, v->a), "pair");
            TypePtr b = r_require(resolve_val(ctx, v->b), "pair");
            return {t_product(a, b), {}, {}};
        }
        case FgValTag::Inl:
            return {t_sum(r_require(resolve_val(ctx, v->a), "inl"), v->ann),
                    {},
                    {}};
        case FgValTag::Inr:
            return {t_sum(v->ann, r_require(resolve_val(ctx, v->a), "inr")),
                    {},
                    {}};
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed value");
}

RRes resolve_term(RCtx& ctx, const FgTermPtr& m) {
    switch (m->tag) {
        case FgTermTag::Ret:
            return resolve_val(ctx, m->v);
        case FgTermTag::Let: {
            RRes bound = resolve_term(ctx, m->m);
            std::vector<const void*> sites = bound.sites;
            if (bound.pending) sites.push_back(m.get());
            ctx.scope.push_back({m->x, bound.type, bound.pending,
                                 std::move(sites), ctx.next_id++});
            RRes r = resolve_term(ctx, m->n);
            ctx.scope.pop_back();
            return r;
        }
        case FgTermTag::App: {
            RRes f = resolve_val(ctx, m->v);
            RRes a = resolve_val(ctx, m->w);
            if (f.pending) {
                TypePtr at = r_require(a, "constant argument");
                TypePtr full =
                    t_lolli(at, delta_type(*f.pending, at, ctx.mix));
                for (const void* site : f.sites) (*ctx.inst)[site] = full;
                return {full->b, {}, {}};
            }
            TypePtr ft = r_require(f, "application");
            if (ft->tag != TypeTag::Lolli)
                throw TypeError(TypeErrorKind::Mismatch,
                                "application of a non-function");
            r_require(a, "argument");
            return {ft->b, {}, {}};
        }
        case FgTermTag::LetUnit:
            r_require(resolve_val(ctx, m->v), "let ()");
            return resolve_term(ctx, m->m);
        case FgTermTag::LetPair: {
            TypePtr t = r_require(resolve_val(ctx, m->v), "let (x,y)");
            if (t->tag != TypeTag::Product)
                throw TypeError(TypeErrorKind::Mismatch,
                                "let (x,y) binds a non-pair");
            ctx.scope.push_back({m->x, t->a, {}, {}, ctx.next_id++});
            ctx.scope.push_back({m->y, t->b, {}, {}, ctx.next_id++});
            RRes r = resolve_term(ctx, m->m);
            ctx.scope.pop_back();
            ctx.scope.pop_back();
            return r;
        }
        case FgTermTag::Absurd:
            r_require(resolve_val(ctx, m->v), "absurd");
            return {m->ann, {}, {}};
        case FgTermTag::Case: {
            TypePtr t = r_require(resolve_val(ctx, m->v), "case");
            if (t->tag != TypeTag::Sum)
                throw TypeError(TypeErrorKind::Mismatch,
                                "case scrutinee is not a sum");
            ctx.scope.push_back({m->x, t->a, {}, {}, ctx.next_id++});
            RRes rl = resolve_term(ctx, m->m);
            ctx.scope.pop_back();
            ctx.scope.push_back({m->y, t->b, {}, {}, ctx.next_id++});
            resolve_term(ctx, m->n);
            ctx.scope.pop_back();
            return rl;
        }
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed term");
}

// ---------------------------------------------------------------------
// Translation proper.
// ---------------------------------------------------------------------

struct TrCtx {
    InstMap inst;
    NameSet avoid;
    bool mix = false;
    std::vector<std::pair<Name, TypePtr>> scope;

    TypePtr type_of(const Name& x) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == x) return it->second;
        throw TranslateError("unbound variable '" + x + "'");
    }
};

struct TV {
    ProcPtr p;
    TypePtr t;
};

TV go_term(TrCtx& ctx, const FgTermPtr& m, const Name& r);

TV go_const(TrCtx& ctx, const FgValPtr& v, const Name& r) {
    auto it = ctx.inst.find(v.get());
    TypePtr full = it == ctx.inst.end() ? nullptr : it->second;
    switch (v->k) {
        case ConstTag::Wait: {
            Name x = fresh_name("x", ctx.avoid);
            ProcPtr p = h_recv(
                r, x,
                h_wait(x, h_ping(r, h_close(r, h_halt()))));
            TypePtr t = full ? full
                             : t_lolli(t_session(s_end_in()), t_unit());
            return {p, t};
        }
        case ConstTag::Link: {
            if (!full)
                throw TranslateError(
                    "link occurs without an application to fix its type");
            SessionPtr s = full->a->a->s;  // argument is S * ~S
            Name x = fresh_name("x", ctx.avoid);
            Name y = fresh_name("y", ctx.avoid);
            ProcPtr p = h_recv(
                r, y,
                h_recv(y, x,
                       h_ping(r, h_wait(r, h_link(x, y,
                                                  lt_dual(up_session(s)))))));
            return {p, full};
        }
        case ConstTag::Fork: {
            if (!full)
                throw TranslateError(
                    "fork occurs without an application to fix its type");
            SessionPtr s = full->a->a->s;  // argument is (S -o end!)
            Name y = fresh_name("y", ctx.avoid);
            Name yp = fresh_name("y'", ctx.avoid);
            Name x = fresh_name("x", ctx.avoid);
            Name x2 = fresh_name("x", ctx.avoid);
            ProcPtr left = h_recv(
                r, x,
                h_usend(y, x, h_ping(r, h_link(r, y, down_session(s))),
                        lt_tensor(lt_dual(down_session(s)),
                                  lt_parr(lt_bot(), lt_one()))));
            ProcPtr right = h_recv(
                yp, x2,
                h_usend(x2, yp, h_pong(x2, h_close(x2, h_halt())),
                        down_session(s)));
            return {h_res(y, yp, h_par(left, right)), full};
        }
        case ConstTag::SendK: {
            if (!full)
                throw TranslateError(
                    "send occurs without an application to fix its type");
            TypePtr t = full->a->a;             // argument is T * !T.S
            SessionPtr s = full->a->b->s->cont;
            Name x = fresh_name("x", ctx.avoid);
            Name y = fresh_name("y", ctx.avoid);
            ProcPtr p = h_recv(
                r, y,
                h_recv(y, x,
                       h_usend(y, x, h_ping(r, h_link(r, y, up_session(s))),
                               down_type(t))));
            return {p, full};
        }
        case ConstTag::RecvK: {
            if (!full)
                throw TranslateError(
                    "recv occurs without an application to fix its type");
            TypePtr t = full->a->s->payload;    // argument is ?T.S
            SessionPtr s = full->a->s->cont;
            Name x = fresh_name("x", ctx.avoid);
            Name y = fresh_name("y", ctx.avoid);
            ProcPtr p = h_recv(
                r, x,
                h_recv(x, y,
                       h_ping(r, h_usend(r, y, h_link(r, x, up_session(s)),
                                         down_type(t)))));
            return {p, full};
        }
        case ConstTag::Close:
        case ConstTag::Spawn:
            throw TranslateError(
                "the mixed variant's constants have no process translation");
    }
    throw TranslateError("malformed constant");
}

TV go_val(TrCtx& ctx, const FgValPtr& v, const Name& r) {
    switch (v->tag) {
        case FgValTag::Var: {
            TypePtr t = ctx.type_of(v->x);
            return {h_link(r, v->x, up_type(t)), t};
        }
        case FgValTag::Const:
            return go_const(ctx, v, r);
        case FgValTag::Unit:
            return {h_close(r, h_halt()), t_unit()};
        case FgValTag::Lam: {
            ctx.scope.push_back({v->x, v->ann});
            TV body = go_term(ctx, v->body, r);
            ctx.scope.pop_back();
            return {h_recv(r, v->x, body.p), t_lolli(v->ann, body.t)};
        }
        case FgValTag::Pair: {
            Name x = fresh_name("x", ctx.avoid);
            TV a = go_val(ctx, v->a, x);
            TV b = go_val(ctx, v->b, r);
            return {h_send(r, x, h_par(a.p, b.p)), t_product(a.t, b.t)};
        }
        case FgValTag::Inl: {
            TV a = go_val(ctx, v->a, r);
            return {h_inl(r, up_type(v->ann), a.p), t_sum(a.t, v->ann)};
        }
        case FgValTag::Inr: {
            TV a = go_val(ctx, v->a, r);
            return {h_inr(r, up_type(v->ann), a.p), t_sum(v->ann, a.t)};
        }
    }
    throw TranslateError("malformed value");
}

TV go_term(TrCtx& ctx, const FgTermPtr& m, const Name& r) {
    switch (m->tag) {
        case FgTermTag::Ret: {
            TV v = go_val(ctx, m->v, r);
            return {h_ping(r, v.p), v.t};
        }
        case FgTermTag::Let: {
            Name xp = fresh_name(m->x + "'", ctx.avoid);
            TV bound = go_term(ctx, m->m, xp);
            TypePtr bt = bound.t;
            if (!bt) {
                auto it = ctx.inst.find(m.get());
                if (it == ctx.inst.end())
                    throw TranslateError("let-bound constant never applied");
                bt = it->second;
            }
            ctx.scope.push_back({m->x, bt});
            TV body = go_term(ctx, m->n, r);
            ctx.scope.pop_back();
            // The binder doubles as the internal channel; rename it away if
            // the bound term also mentions an outer variable of that name.
            Name ch = m->x;
            ProcPtr bodyp = body.p;
            if (fg_free_names(m->m).count(ch)) {
                ch = fresh_name(m->x, ctx.avoid);
                bodyp = hcp_rename(bodyp, ch, m->x);
            }
            return {h_res(ch, xp, h_par(h_pong(ch, bodyp), bound.p)), body.t};
        }
        case FgTermTag::App: {
            Name x = fresh_name("x", ctx.avoid);
            Name xp = fresh_name("x'", ctx.avoid);
            Name y = fresh_name("y", ctx.avoid);
            Name yp = fresh_name("y'", ctx.avoid);
            TV f = go_val(ctx, m->v, yp);
            TV a = go_val(ctx, m->w, xp);
            if (f.t->tag != TypeTag::Lolli)
                throw TranslateError("application of a non-function");
            TypePtr t = f.t->a, u = f.t->b;
            ProcPtr inner = h_par(
                h_usend(y, x,
                        h_link(r, y, lt_tensor(lt_one(), up_type(u))),
                        down_type(t)),
                h_par(f.p, a.p));
            return {h_res(x, xp, h_res(y, yp, inner)), u};
        }
        case FgTermTag::LetUnit: {
            Name x = fresh_name("x", ctx.avoid);
            Name xp = fresh_name("x'", ctx.avoid);
            TV v = go_val(ctx, m->v, xp);
            TV body = go_term(ctx, m->m, r);
            return {h_res(x, xp, h_par(h_wait(x, body.p), v.p)), body.t};
        }
        case FgTermTag::LetPair: {
            Name yp = fresh_name(m->y + "'", ctx.avoid);
            TV v = go_val(ctx, m->v, yp);
            if (v.t->tag != TypeTag::Product)
                throw TranslateError("let (x,y) binds a non-pair");
            ctx.scope.push_back({m->x, v.t->a});
            ctx.scope.push_back({m->y, v.t->b});
            TV body = go_term(ctx, m->m, r);
            ctx.scope.pop_back();
            ctx.scope.pop_back();
            Name cy = m->y;
            ProcPtr bodyp = body.p;
            if (fg_free_names(m->v).count(cy)) {
                cy = fresh_name(m->y, ctx.avoid);
                bodyp = hcp_rename(bodyp, cy, m->y);
            }
            return {h_res(cy, yp, h_par(h_recv(cy, m->x, bodyp), v.p)),
                    body.t};
        }
        case FgTermTag::Absurd: {
            Name x = fresh_name("x", ctx.avoid);
            Name xp = fresh_name("x'", ctx.avoid);
            TV v = go_val(ctx, m->v, xp);
            LinEnv weaken{{r, lt_tensor(lt_one(), up_type(m->ann))}};
            return {h_res(x, xp,
                          h_par(h_absurd_on(x, std::move(weaken)), v.p)),
                    m->ann};
        }
        case FgTermTag::Case: {
            Name xp = fresh_name(m->x + "'", ctx.avoid);
            TV v = go_val(ctx, m->v, xp);
            if (v.t->tag != TypeTag::Sum)
                throw TranslateError("case scrutinee is not a sum");
            ctx.scope.push_back({m->x, v.t->a});
            TV left = go_term(ctx, m->m, r);
            ctx.scope.pop_back();
            ctx.scope.push_back({m->y, v.t->b});
            TV right = go_term(ctx, m->n, r);
            ctx.scope.pop_back();
            // Both branches talk on the same offered channel.
            Name ch = m->x;
            ProcPtr pl = left.p, pr = right.p;
            NameSet fn = fg_free_names(m->n);
            fn.erase(m->y);
            NameSet fv = fg_free_names(m->v);
            if (fn.count(ch) || fv.count(ch)) {
                ch = fresh_name(m->x, ctx.avoid);
                pl = hcp_rename(pl, ch, m->x);
            }
            if (m->y != ch) pr = hcp_rename(pr, ch, m->y);
            return {h_res(ch, xp, h_par(h_offer(ch, pl, pr), v.p)), left.t};
        }
    }
    throw TranslateError("malformed term");
}

TrCtx make_ctx(const NameSet& names, const TypeEnv& env, const Name& r,
               bool mix) {
    TrCtx ctx;
    ctx.mix = mix;
    ctx.avoid = names;
    ctx.avoid.insert(r);
    for (const auto& [x, t] : env.bindings) {
        ctx.avoid.insert(x);
        ctx.scope.push_back({x, t});
    }
    return ctx;
}

void resolve_into(TrCtx& ctx, const TypeEnv& env, const FgTermPtr& m) {
    RCtx rc;
    rc.mix = ctx.mix;
    rc.inst = &ctx.inst;
    for (const auto& [x, t] : env.bindings)
        rc.scope.push_back({x, t, {}, {}, rc.next_id++});
    resolve_term(rc, m);
}

}  // namespace

ProcPtr tr_value(const FgValPtr& v, const Name& r, const TypeEnv& env,
                 bool mix) {
    TrCtx ctx = make_ctx(fg_free_names(v), env, r, mix);
    RCtx rc;
    rc.mix = mix;
    rc.inst = &ctx.inst;
    for (const auto& [x, t] : env.bindings)
        rc.scope.push_back({x, t, {}, {}, rc.next_id++});
    resolve_val(rc, v);
    return go_val(ctx, v, r).p;
}

ProcPtr tr_term(const FgTermPtr& m, const Name& r, const TypeEnv& env,
                bool mix) {
    TrCtx ctx = make_ctx(fg_free_names(m), env, r, mix);
    resolve_into(ctx, env, m);
    return go_term(ctx, m, r).p;
}

// ---------------------------------------------------------------------
// Configurations.
// ---------------------------------------------------------------------

namespace {

struct CfgCtx {
    std::map<Name, TypePtr> types;
    NameSet avoid;
    Name r;
};

ProcPtr go_cfg(CfgCtx& ctx, const ConfigPtr& c) {
    switch (c->tag) {
        case ConfigTag::Res:
            ctx.types[c->x] = t_session(c->ann);
            ctx.types[c->y] = t_session(dual(c->ann));
            return h_res(c->x, c->y, go_cfg(ctx, c->c));
        case ConfigTag::Par:
            return h_par(go_cfg(ctx, c->c), go_cfg(ctx, c->d));
        case ConfigTag::LinkThread: {
            auto it = ctx.types.find(c->x);
            if (it == ctx.types.end())
                throw TranslateError("untyped link endpoint '" + c->x + "'");
            // The token endpoint z is waited on: the partner thread closes
            // its end when it has finished with the linked value (threads
            // announce their own results to their wrappers, so no extra
            // token handshake happens here).
            return h_wait(c->z, h_link(c->x, c->y, down_type(it->second)));
        }
        case ConfigTag::Thread: {
            FgTermPtr fg = fg_translate(c->term);
            TypeEnv env;
            for (const Name& n : free_names(c->term)) {
                auto it = ctx.types.find(n);
                if (it == ctx.types.end())
                    throw TranslateError("untyped free name '" + n + "'");
                env.bind(n, it->second);
            }
            // Binders invented by the fine-grain pass must not clash with
            // the carrier endpoints chosen here.
            NameSet fg_names = fg_all_names(fg);
            ctx.avoid.insert(fg_names.begin(), fg_names.end());
            Name inner = fresh_name(c->is_main ? "a" : "w", ctx.avoid);
            ctx.avoid.insert(inner);
            Name innerp = fresh_name(inner + "'", ctx.avoid);
            ctx.avoid.insert(innerp);
            TrCtx tc = make_ctx(ctx.avoid, env, inner, false);
            resolve_into(tc, env, fg);
            TV body = go_term(tc, fg, inner);
            ctx.avoid.insert(tc.avoid.begin(), tc.avoid.end());
            ProcPtr partner =
                c->is_main
                    ? h_pong(innerp, h_link(innerp, ctx.r, down_type(body.t)))
                    : h_pong(innerp, h_close(innerp, h_halt()));
            return h_res(inner, innerp, h_par(body.p, partner));
        }
    }
    throw TranslateError("malformed configuration");
}

}  // namespace

ProcPtr tr_config(const ConfigPtr& c, const HyperEnv& h, const Name& r,
                  bool mix) {
    if (mix)
        throw TranslateError(
            "the mixed variant has no process translation");
    CfgCtx ctx;
    ctx.r = r;
    ctx.avoid = all_names(c);
    ctx.avoid.insert(r);
    for (const TypeEnv& env : h)
        for (const auto& [n, t] : env.bindings) {
            ctx.types[n] = t;
            ctx.avoid.insert(n);
        }
    NameSet avoid = ctx.avoid;
    ConfigPtr fresh = freshen_config(c, avoid);
    ctx.avoid = avoid;
    return go_cfg(ctx, fresh);
}

// ---------------------------------------------------------------------
// Operational correspondence.
// ---------------------------------------------------------------------

namespace {

// Internal (alpha/beta) reduction of well-typed translations is confluent:
// every channel is linear, so two enabled internal transitions act on
// disjoint redexes and commute. The harness exploits this by following a
// single internal path to the unique internal normal form, verifying the
// one-step diamond property at every visited state, and comparing normal
// forms by their observable behaviour.
struct CorrEngine {
    size_t budget;
    size_t visited = 0;
    std::map<std::string, std::vector<Transition>> step_cache;
    struct Nf {
        ProcPtr proc;
        int steps = 0;
        bool has_beta = false;
    };
    std::map<std::string, Nf> nf_cache;
    std::map<std::pair<std::string, std::string>, bool> eq_memo;

    explicit CorrEngine(size_t b) : budget(b) {}

    const std::vector<Transition>& step(const ProcPtr& p,
                                        const std::string& key) {
        auto it = step_cache.find(key);
        if (it != step_cache.end()) return it->second;
        if (++visited > budget)
            throw TranslateError("correspondence budget exceeded");
        return step_cache.emplace(key, lts_step(p)).first->second;
    }

    static bool internal(const Label& l) {
        return l.kind == LabelKind::Alpha || l.kind == LabelKind::Beta;
    }

    // One-step commutation of every transition pair involving an internal
    // transition: after either one fires, the other's label still leads to
    // a common state.
    void diamond_check(const std::vector<Transition>& ts) {
        for (size_t i = 0; i < ts.size(); ++i)
            for (size_t j = i + 1; j < ts.size(); ++j) {
                if (!internal(ts[i].label) && !internal(ts[j].label)) continue;
                std::set<std::string> via_i, via_j;
                std::string lj = show_label(ts[j].label);
                std::string li = show_label(ts[i].label);
                for (const Transition& t :
                     step(ts[i].target, proc_key(ts[i].target)))
                    if (show_label(t.label) == lj)
                        via_i.insert(proc_key(t.target));
                bool met = false;
                for (const Transition& t :
                     step(ts[j].target, proc_key(ts[j].target)))
                    if (show_label(t.label) == li &&
                        via_i.count(proc_key(t.target))) {
                        met = true;
                        break;
                    }
                if (!met)
                    throw TranslateError(
                        "internal transitions fail to commute; the "
                        "single-path correspondence search is unsound here");
            }
    }

    Nf normal_form(ProcPtr p) {
        struct Hop {
            std::string key;
            bool beta;  // the edge taken out of this state is a beta
        };
        std::vector<Hop> path;
        std::set<std::string> on_path;
        Nf tail;
        for (;;) {
            std::string key = proc_key(p);
            auto hit = nf_cache.find(key);
            if (hit != nf_cache.end()) {
                tail = hit->second;
                break;
            }
            if (!on_path.insert(key).second)
                throw TranslateError(
                    "internal reduction of the translation diverges");
            const std::vector<Transition>& ts = step(p, key);
            diamond_check(ts);
            const Transition* next = nullptr;
            for (const Transition& t : ts)
                if (internal(t.label)) {
                    next = &t;
                    break;
                }
            if (!next) {
                tail = {p, 0, false};
                nf_cache[key] = tail;
                break;
            }
            path.push_back({key, next->label.kind == LabelKind::Beta});
            p = next->target;
        }
        Nf acc = tail;
        for (size_t i = path.size(); i-- > 0;) {
            ++acc.steps;
            acc.has_beta = acc.has_beta || path[i].beta;
            nf_cache[path[i].key] = acc;
        }
        return acc;
    }

    // Weak bisimilarity over observable actions, comparing internal normal
    // forms recursively; coinductive on the pair memo.
    bool weak_eq(const ProcPtr& a, const ProcPtr& b) {
        Nf na = normal_form(a), nb = normal_form(b);
        std::string ka = proc_key(na.proc), kb = proc_key(nb.proc);
        if (ka == kb) return true;
        auto memo_key = ka < kb ? std::make_pair(ka, kb)
                                : std::make_pair(kb, ka);
        auto it = eq_memo.find(memo_key);
        if (it != eq_memo.end()) return it->second;
        eq_memo[memo_key] = true;  // coinductive hypothesis
        auto grouped = [&](const Nf& n, const std::string& k) {
            std::map<std::string, std::vector<ProcPtr>> g;
            for (const Transition& t : step(n.proc, k))
                g[show_label(t.label)].push_back(t.target);
            return g;
        };
        auto ga = grouped(na, ka), gb = grouped(nb, kb);
        bool ok = true;
        if (ga.size() != gb.size()) ok = false;
        for (auto ia = ga.begin(), ib = gb.begin();
             ok && ia != ga.end() && ib != gb.end(); ++ia, ++ib) {
            if (ia->first != ib->first) {
                ok = false;
                break;
            }
            auto match = [&](const std::vector<ProcPtr>& xs,
                             const std::vector<ProcPtr>& ys) {
                for (const ProcPtr& x : xs) {
                    bool found = false;
                    for (const ProcPtr& y : ys)
                        if (weak_eq(x, y)) {
                            found = true;
                            break;
                        }
                    if (!found) return false;
                }
                return true;
            };
            if (!match(ia->second, ib->second) ||
                !match(ib->second, ia->second))
                ok = false;
        }
        eq_memo[memo_key] = ok;
        return ok;
    }
};

}  // namespace

CorrespondenceReport correspondence_check(const ConfigPtr& c,
                                          const HyperEnv& h, size_t budget) {
    CorrespondenceReport report;
    NameSet names = all_names(c);
    for (const TypeEnv& env : h)
        for (const auto& [n, t] : env.bindings) names.insert(n);
    Name r = fresh_name("r", names);

    ProcPtr p0 = tr_config(c, h, r);
    std::vector<Successor> succs = config_step_all(c, false);
    std::vector<ProcPtr> images;
    for (const Successor& s : succs) images.push_back(tr_config(s.config, h, r));

    CorrEngine eng(budget);
    CorrEngine::Nf nf0 = eng.normal_form(p0);

    // Preservation: each reduction is matched by an internal path of the
    // translation passing through a beta and meeting the image's own
    // internal reduct in a weakly equivalent state (the image may still
    // have pending administrative reductions of its own).
    for (size_t i = 0; i < succs.size(); ++i) {
        CorrEntry entry{succs[i].redex.rule, nf0.steps, false};
        entry.ok = nf0.has_beta && eng.weak_eq(p0, images[i]);
        if (!entry.ok && report.ok) {
            report.ok = false;
            report.detail = "no beta-path of the translation matches the " +
                            succs[i].redex.rule + " reduction";
        }
        report.preservation.push_back(std::move(entry));
    }

    // Reflection: alpha-transitions preserve the state up to weak
    // equivalence; beta-transitions either meet some translated successor
    // or are administrative (weakly equivalent to the translation itself,
    // as with the result-forwarder handover).
    for (const Transition& t : eng.step(p0, proc_key(p0))) {
        if (t.label.kind == LabelKind::Alpha) {
            ++report.alpha_checked;
            if (!eng.weak_eq(t.target, p0) && report.ok) {
                report.ok = false;
                report.detail =
                    "an alpha-transition changed the translation's state";
            }
        } else if (t.label.kind == LabelKind::Beta) {
            ++report.beta_checked;
            bool matched = false;
            for (const ProcPtr& image : images)
                if (eng.weak_eq(t.target, image)) {
                    matched = true;
                    break;
                }
            if (!matched) matched = eng.weak_eq(t.target, p0);
            if (!matched && report.ok) {
                report.ok = false;
                report.detail =
                    "a beta-transition is not matched by any reduction";
            }
        }
    }
    report.states = eng.step_cache.size();
    return report;
}

}  // namespace hgv
