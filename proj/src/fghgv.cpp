#include "fghgv.hpp"

#include <map>

namespace hgv {

namespace {

FgValPtr mkv(FgVal v) { return std::make_shared<const FgVal>(std::move(v)); }
FgTermPtr mkt(FgTerm t) { return std::make_shared<const FgTerm>(std::move(t)); }

}  // namespace

FgValPtr fv_var(Name x) { return mkv({FgValTag::Var, std::move(x), {}, nullptr, nullptr, nullptr, nullptr}); }
FgValPtr fv_const(ConstTag k) { return mkv({FgValTag::Const, "", k, nullptr, nullptr, nullptr, nullptr}); }
FgValPtr fv_unit() { return mkv({FgValTag::Unit, "", {}, nullptr, nullptr, nullptr, nullptr}); }
FgValPtr fv_lam(Name x, TypePtr ann, FgTermPtr body) {
    return mkv({FgValTag::Lam, std::move(x), {}, std::move(ann), nullptr, nullptr, std::move(body)});
}
FgValPtr fv_pair(FgValPtr a, FgValPtr b) {
    return mkv({FgValTag::Pair, "", {}, nullptr, std::move(a), std::move(b), nullptr});
}
FgValPtr fv_inl(TypePtr other, FgValPtr a) {
    return mkv({FgValTag::Inl, "", {}, std::move(other), std::move(a), nullptr, nullptr});
}
FgValPtr fv_inr(TypePtr other, FgValPtr a) {
    return mkv({FgValTag::Inr, "", {}, std::move(other), std::move(a), nullptr, nullptr});
}

FgTermPtr fg_ret(FgValPtr v) {
    return mkt({FgTermTag::Ret, "", "", std::move(v), nullptr, nullptr, nullptr, nullptr});
}
FgTermPtr fg_let(Name x, FgTermPtr m, FgTermPtr n) {
    return mkt({FgTermTag::Let, std::move(x), "", nullptr, nullptr, std::move(m), std::move(n), nullptr});
}
FgTermPtr fg_app(FgValPtr v, FgValPtr w) {
    return mkt({FgTermTag::App, "", "", std::move(v), std::move(w), nullptr, nullptr, nullptr});
}
FgTermPtr fg_letunit(FgValPtr v, FgTermPtr m) {
    return mkt({FgTermTag::LetUnit, "", "", std::move(v), nullptr, std::move(m), nullptr, nullptr});
}
FgTermPtr fg_letpair(Name x, Name y, FgValPtr v, FgTermPtr m) {
    return mkt({FgTermTag::LetPair, std::move(x), std::move(y), std::move(v), nullptr, std::move(m), nullptr, nullptr});
}
FgTermPtr fg_absurd(TypePtr result, FgValPtr v) {
    return mkt({FgTermTag::Absurd, "", "", std::move(v), nullptr, nullptr, nullptr, std::move(result)});
}
FgTermPtr fg_case(FgValPtr v, Name x, FgTermPtr left, Name y, FgTermPtr right) {
    return mkt({FgTermTag::Case, std::move(x), std::move(y), std::move(v), nullptr, std::move(left), std::move(right), nullptr});
}

// ---------------------------------------------------------------------
// Free names.
// ---------------------------------------------------------------------

namespace {

void fv_of(const FgValPtr& v, NameSet& out);

void fv_of(const FgTermPtr& m, NameSet& out) {
    switch (m->tag) {
        case FgTermTag::Ret:
            fv_of(m->v, out);
            return;
        case FgTermTag::Let: {
            fv_of(m->m, out);
            NameSet body;
            fv_of(m->n, body);
            body.erase(m->x);
            out.insert(body.begin(), body.end());
            return;
        }
        case FgTermTag::App:
            fv_of(m->v, out);
            fv_of(m->w, out);
            return;
        case FgTermTag::LetUnit:
            fv_of(m->v, out);
            fv_of(m->m, out);
            return;
        case FgTermTag::LetPair: {
            fv_of(m->v, out);
            NameSet body;
            fv_of(m->m, body);
            body.erase(m->x);
            body.erase(m->y);
            out.insert(body.begin(), body.end());
            return;
        }
        case FgTermTag::Absurd:
            fv_of(m->v, out);
            return;
        case FgTermTag::Case: {
            fv_of(m->v, out);
            NameSet l, r;
            fv_of(m->m, l);
            l.erase(m->x);
            fv_of(m->n, r);
            r.erase(m->y);
            out.insert(l.begin(), l.end());
            out.insert(r.begin(), r.end());
            return;
        }
    }
}

void fv_of(const FgValPtr& v, NameSet& out) {
    switch (v->tag) {
        case FgValTag::Var:
            out.insert(v->x);
            return;
        case FgValTag::Const:
        case FgValTag::Unit:
            return;
        case FgValTag::Lam: {
            NameSet body;
            fv_of(v->body, body);
            body.erase(v->x);
            out.insert(body.begin(), body.end());
            return;
        }
        case FgValTag::Pair:
            fv_of(v->a, out);
            fv_of(v->b, out);
            return;
        case FgValTag::Inl:
        case FgValTag::Inr:
            fv_of(v->a, out);
            return;
    }
}

void all_of(const FgValPtr& v, NameSet& out);
void all_of(const FgTermPtr& m, NameSet& out) {
    if (!m->x.empty()) out.insert(m->x);
    if (!m->y.empty()) out.insert(m->y);
    if (m->v) all_of(m->v, out);
    if (m->w) all_of(m->w, out);
    if (m->m) all_of(m->m, out);
    if (m->n) all_of(m->n, out);
}
void all_of(const FgValPtr& v, NameSet& out) {
    if (!v->x.empty()) out.insert(v->x);
    if (v->a) all_of(v->a, out);
    if (v->b) all_of(v->b, out);
    if (v->body) all_of(v->body, out);
}

}  // namespace

NameSet fg_free_names(const FgTermPtr& m) {
    NameSet out;
    fv_of(m, out);
    return out;
}
NameSet fg_free_names(const FgValPtr& v) {
    NameSet out;
    fv_of(v, out);
    return out;
}

NameSet fg_all_names(const FgTermPtr& m) {
    NameSet out;
    all_of(m, out);
    return out;
}

// ---------------------------------------------------------------------
// Substitution.
// ---------------------------------------------------------------------

namespace {

FgValPtr subst_v(const FgValPtr& t, const FgValPtr& v, const Name& x);

FgTermPtr subst_t(const FgTermPtr& t, const FgValPtr& v, const Name& x) {
    NameSet fvv = fg_free_names(v);
    // Renames the binder if it would capture a free name of v.
    auto rename_binder = [&](Name b, const FgTermPtr& body,
                             Name& nb) -> FgTermPtr {
        nb = b;
        if (b == x || !fvv.count(b)) return body;
        NameSet avoid;
        all_of(body, avoid);
        avoid.insert(fvv.begin(), fvv.end());
        avoid.insert(x);
        nb = fresh_name(b, avoid);
        return subst_t(body, fv_var(nb), b);
    };
    switch (t->tag) {
        case FgTermTag::Ret:
            return fg_ret(subst_v(t->v, v, x));
        case FgTermTag::Let: {
            FgTermPtr m = subst_t(t->m, v, x);
            if (t->x == x) return fg_let(t->x, m, t->n);
            Name nb;
            FgTermPtr body = rename_binder(t->x, t->n, nb);
            return fg_let(nb, m, subst_t(body, v, x));
        }
        case FgTermTag::App:
            return fg_app(subst_v(t->v, v, x), subst_v(t->w, v, x));
        case FgTermTag::LetUnit:
            return fg_letunit(subst_v(t->v, v, x), subst_t(t->m, v, x));
        case FgTermTag::LetPair: {
            FgValPtr sv = subst_v(t->v, v, x);
            if (t->x == x || t->y == x) return fg_letpair(t->x, t->y, sv, t->m);
            Name n1, n2;
            FgTermPtr body = rename_binder(t->x, t->m, n1);
            body = rename_binder(t->y, body, n2);
            return fg_letpair(n1, n2, sv, subst_t(body, v, x));
        }
        case FgTermTag::Absurd:
            return fg_absurd(t->ann, subst_v(t->v, v, x));
        case FgTermTag::Case: {
            FgValPtr sv = subst_v(t->v, v, x);
            FgTermPtr left = t->m, right = t->n;
            Name lx = t->x, ry = t->y;
            if (lx != x) {
                left = rename_binder(lx, left, lx);
                left = subst_t(left, v, x);
            }
            if (ry != x) {
                right = rename_binder(ry, right, ry);
                right = subst_t(right, v, x);
            }
            return fg_case(sv, lx, left, ry, right);
        }
    }
    return t;
}

FgValPtr subst_v(const FgValPtr& t, const FgValPtr& v, const Name& x) {
    switch (t->tag) {
        case FgValTag::Var:
            return t->x == x ? v : t;
        case FgValTag::Const:
        case FgValTag::Unit:
            return t;
        case FgValTag::Lam: {
            if (t->x == x) return t;
            NameSet fvv = fg_free_names(v);
            Name nb = t->x;
            FgTermPtr body = t->body;
            if (fvv.count(nb)) {
                NameSet avoid;
                all_of(body, avoid);
                avoid.insert(fvv.begin(), fvv.end());
                avoid.insert(x);
                nb = fresh_name(nb, avoid);
                body = subst_t(body, fv_var(nb), t->x);
            }
            return fv_lam(nb, t->ann, subst_t(body, v, x));
        }
        case FgValTag::Pair:
            return fv_pair(subst_v(t->a, v, x), subst_v(t->b, v, x));
        case FgValTag::Inl:
            return fv_inl(t->ann, subst_v(t->a, v, x));
        case FgValTag::Inr:
            return fv_inr(t->ann, subst_v(t->a, v, x));
    }
    return t;
}

}  // namespace

FgTermPtr fg_subst(const FgTermPtr& m, const FgValPtr& v, const Name& x) {
    return subst_t(m, v, x);
}

// ---------------------------------------------------------------------
// Alpha equivalence.
// ---------------------------------------------------------------------

namespace {

struct FgAlpha {
    std::map<Name, int> left, right;
    int counter = 0;

    bool name_eq(const Name& a, const Name& b) const {
        auto la = left.find(a);
        auto rb = right.find(b);
        if (la == left.end() && rb == right.end()) return a == b;
        if (la == left.end() || rb == right.end()) return false;
        return la->second == rb->second;
    }

    bool val_eq(const FgValPtr& a, const FgValPtr& b);
    bool term_eq(const FgTermPtr& a, const FgTermPtr& b);
};

struct FgScope {
    FgAlpha& ctx;
    Name a, b;
    std::optional<int> olda, oldb;
    FgScope(FgAlpha& ctx, const Name& a, const Name& b) : ctx(ctx), a(a), b(b) {
        if (auto it = ctx.left.find(a); it != ctx.left.end()) olda = it->second;
        if (auto it = ctx.right.find(b); it != ctx.right.end()) oldb = it->second;
        ctx.left[a] = ctx.right[b] = ctx.counter++;
    }
    ~FgScope() {
        if (olda) ctx.left[a] = *olda; else ctx.left.erase(a);
        if (oldb) ctx.right[b] = *oldb; else ctx.right.erase(b);
    }
};

bool opt_type_eq(const TypePtr& a, const TypePtr& b) {
    if (!a || !b) return !a && !b;
    return type_eq(a, b);
}

bool FgAlpha::val_eq(const FgValPtr& a, const FgValPtr& b) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case FgValTag::Var:
            return name_eq(a->x, b->x);
        case FgValTag::Const:
            return a->k == b->k;
        case FgValTag::Unit:
            return true;
        case FgValTag::Lam: {
            if (!opt_type_eq(a->ann, b->ann)) return false;
            FgScope s(*this, a->x, b->x);
            return term_eq(a->body, b->body);
        }
        case FgValTag::Pair:
            return val_eq(a->a, b->a) && val_eq(a->b, b->b);
        case FgValTag::Inl:
        case FgValTag::Inr:
            return opt_type_eq(a->ann, b->ann) && val_eq(a->a, b->a);
    }
    return false;
}

bool FgAlpha::term_eq(const FgTermPtr& a, const FgTermPtr& b) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case FgTermTag::Ret:
            return val_eq(a->v, b->v);
        case FgTermTag::Let: {
            if (!term_eq(a->m, b->m)) return false;
            FgScope s(*this, a->x, b->x);
            return term_eq(a->n, b->n);
        }
        case FgTermTag::App:
            return val_eq(a->v, b->v) && val_eq(a->w, b->w);
        case FgTermTag::LetUnit:
            return val_eq(a->v, b->v) && term_eq(a->m, b->m);
        case FgTermTag::LetPair: {
            if (!val_eq(a->v, b->v)) return false;
            FgScope s1(*this, a->x, b->x);
            FgScope s2(*this, a->y, b->y);
            return term_eq(a->m, b->m);
        }
        case FgTermTag::Absurd:
            return opt_type_eq(a->ann, b->ann) && val_eq(a->v, b->v);
        case FgTermTag::Case: {
            if (!val_eq(a->v, b->v)) return false;
            {
                FgScope s(*this, a->x, b->x);
                if (!term_eq(a->m, b->m)) return false;
            }
            FgScope s(*this, a->y, b->y);
            return term_eq(a->n, b->n);
        }
    }
    return false;
}

}  // namespace

bool fg_alpha_eq(const FgTermPtr& a, const FgTermPtr& b) {
    FgAlpha ctx;
    return ctx.term_eq(a, b);
}

// ---------------------------------------------------------------------
// The naive translation.
// ---------------------------------------------------------------------

namespace {

FgTermPtr translate(const TermPtr& m, NameSet& avoid) {
    switch (m->tag) {
        case TermTag::Var:
            return fg_ret(fv_var(m->x));
        case TermTag::Const:
            return fg_ret(fv_const(m->k));
        case TermTag::Unit:
            return fg_ret(fv_unit());
        case TermTag::Lam:
            return fg_ret(fv_lam(m->x, m->ann, translate(m->m, avoid)));
        case TermTag::App: {
            // The unannotated-lambda application is the surface let and maps
            // directly onto the fine-grain let.
            if (m->m->tag == TermTag::Lam && !m->m->ann)
                return fg_let(m->m->x, translate(m->n, avoid),
                              translate(m->m->m, avoid));
            Name f = fresh_name("f", avoid);
            Name a = fresh_name("a", avoid);
            return fg_let(f, translate(m->m, avoid),
                          fg_let(a, translate(m->n, avoid),
                                 fg_app(fv_var(f), fv_var(a))));
        }
        case TermTag::LetUnit: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_letunit(fv_var(z), translate(m->n, avoid)));
        }
        case TermTag::Pair: {
            Name a = fresh_name("a", avoid);
            Name b = fresh_name("b", avoid);
            return fg_let(a, translate(m->m, avoid),
                          fg_let(b, translate(m->n, avoid),
                                 fg_ret(fv_pair(fv_var(a), fv_var(b)))));
        }
        case TermTag::LetPair: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_letpair(m->x, m->y, fv_var(z),
                                     translate(m->n, avoid)));
        }
        case TermTag::Inl: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_ret(fv_inl(m->ann, fv_var(z))));
        }
        case TermTag::Inr: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_ret(fv_inr(m->ann, fv_var(z))));
        }
        case TermTag::Case: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_case(fv_var(z), m->x, translate(m->n, avoid),
                                  m->y, translate(m->o, avoid)));
        }
        case TermTag::Absurd: {
            Name z = fresh_name("z", avoid);
            return fg_let(z, translate(m->m, avoid),
                          fg_absurd(m->ann, fv_var(z)));
        }
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed term");
}

}  // namespace

FgTermPtr fg_translate(const TermPtr& m) {
    NameSet avoid = all_names(m);
    return translate(m, avoid);
}

// ---------------------------------------------------------------------
// Type checking.
// ---------------------------------------------------------------------

namespace {

// A binding carries either a type or a pending constant schema (a let-bound
// bare constant awaiting its application site).
struct FgBinding {
    Name name;
    TypePtr type;                   // null when pending
    std::optional<ConstTag> pending;
    int id;
};

struct FgCtx {
    std::vector<FgBinding> scope;
    int next_id = 0;
    bool mix = false;

    int push(const Name& x, TypePtr t, std::optional<ConstTag> pending = {}) {
        int id = next_id++;
        scope.push_back({x, std::move(t), pending, id});
        return id;
    }
    void pop() { scope.pop_back(); }
    const FgBinding* lookup(const Name& x) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->name == x) return &*it;
        return nullptr;
    }
};

struct FgRes {
    TypePtr type;                   // null when pending
    std::optional<ConstTag> pending;
};

using FgUsed = std::set<int>;

void fg_merge(FgUsed& into, const FgUsed& other) {
    for (int id : other) {
        if (into.count(id))
            throw TypeError(TypeErrorKind::Reuse,
                            "linear variable used more than once");
        into.insert(id);
    }
}

void fg_consume(FgUsed& used, int id, const Name& x) {
    if (!used.count(id))
        throw TypeError(TypeErrorKind::Unused,
                        "linear variable '" + x + "' is never used");
    used.erase(id);
}

TypePtr require_type(const FgRes& r, const std::string& where) {
    if (r.pending)
        throw TypeError(TypeErrorKind::ConstantUse,
                        "constant '" + show_const(*r.pending) +
                            "' must be applied to an argument (" + where + ")");
    return r.type;
}

FgRes fg_check_term(FgCtx& ctx, const FgTermPtr& m, FgUsed& used);

FgRes fg_check_val(FgCtx& ctx, const FgValPtr& v, FgUsed& used) {
    switch (v->tag) {
        case FgValTag::Var: {
            const FgBinding* b = ctx.lookup(v->x);
            if (!b)
                throw TypeError(TypeErrorKind::Unbound,
                                "unbound variable '" + v->x + "'");
            if (used.count(b->id))
                throw TypeError(TypeErrorKind::Reuse,
                                "linear variable '" + v->x + "' used twice");
            used.insert(b->id);
            return {b->type, b->pending};
        }
        case FgValTag::Const:
            return {nullptr, v->k};
        case FgValTag::Unit:
            return {t_unit(), {}};
        case FgValTag::Lam: {
            if (!v->ann)
                throw TypeError(TypeErrorKind::MissingAnnotation,
                                "lambda binder '" + v->x +
                                    "' needs a type annotation");
            int id = ctx.push(v->x, v->ann);
            FgUsed body_used;
            FgRes r = fg_check_term(ctx, v->body, body_used);
            ctx.pop();
            fg_consume(body_used, id, v->x);
            fg_merge(used, body_used);
            return {t_lolli(v->ann, require_type(r, "function body")), {}};
        }
        case FgValTag::Pair: {
            TypePtr a = require_type(fg_check_val(ctx, v->a, used), "pair");
            TypePtr b = require_type(fg_check_val(ctx, v->b, used), "pair");
            return {t_product(a, b), {}};
        }
        case FgValTag::Inl:
            return {t_sum(require_type(fg_check_val(ctx, v->a, used), "inl"),
                          v->ann),
                    {}};
        case FgValTag::Inr:
            return {t_sum(v->ann,
                          require_type(fg_check_val(ctx, v->a, used), "inr")),
                    {}};
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed value");
}

FgRes fg_check_term(FgCtx& ctx, const FgTermPtr& m, FgUsed& used) {
    switch (m->tag) {
        case FgTermTag::Ret:
            return fg_check_val(ctx, m->v, used);
        case FgTermTag::Let: {
            FgUsed bound_used;
            FgRes bound = fg_check_term(ctx, m->m, bound_used);
            fg_merge(used, bound_used);
            int id = ctx.push(m->x, bound.type, bound.pending);
            FgUsed body_used;
            FgRes r = fg_check_term(ctx, m->n, body_used);
            ctx.pop();
            fg_consume(body_used, id, m->x);
            fg_merge(used, body_used);
            return r;
        }
        case FgTermTag::App: {
            FgRes f = fg_check_val(ctx, m->v, used);
            FgRes a = fg_check_val(ctx, m->w, used);
            if (f.pending)
                return {delta_type(*f.pending,
                                   require_type(a, "constant argument"),
                                   ctx.mix),
                        {}};
            TypePtr ft = require_type(f, "application");
            if (ft->tag != TypeTag::Lolli)
                throw TypeError(TypeErrorKind::Mismatch,
                                "application of a non-function of type " +
                                    show_type(ft));
            TypePtr at = require_type(a, "argument");
            if (!type_eq(ft->a, at))
                throw TypeError(TypeErrorKind::Mismatch,
                                "argument type " + show_type(at) +
                                    " does not match parameter type " +
                                    show_type(ft->a));
            return {ft->b, {}};
        }
        case FgTermTag::LetUnit: {
            TypePtr t = require_type(fg_check_val(ctx, m->v, used), "let ()");
            if (t->tag != TypeTag::Unit)
                throw TypeError(TypeErrorKind::Mismatch,
                                "let () binds a value of type " + show_type(t));
            return fg_check_term(ctx, m->m, used);
        }
        case FgTermTag::LetPair: {
            TypePtr t =
                require_type(fg_check_val(ctx, m->v, used), "let (x,y)");
            if (t->tag != TypeTag::Product)
                throw TypeError(TypeErrorKind::Mismatch,
                                "let (x,y) binds a value of type " +
                                    show_type(t));
            int idx = ctx.push(m->x, t->a);
            int idy = ctx.push(m->y, t->b);
            FgUsed body_used;
            FgRes r = fg_check_term(ctx, m->m, body_used);
            ctx.pop();
            ctx.pop();
            fg_consume(body_used, idy, m->y);
            fg_consume(body_used, idx, m->x);
            fg_merge(used, body_used);
            return r;
        }
        case FgTermTag::Absurd: {
            TypePtr t = require_type(fg_check_val(ctx, m->v, used), "absurd");
            if (t->tag != TypeTag::Void)
                throw TypeError(TypeErrorKind::Mismatch,
                                "absurd applied to a value of type " +
                                    show_type(t));
            return {m->ann, {}};
        }
        case FgTermTag::Case: {
            TypePtr t = require_type(fg_check_val(ctx, m->v, used), "case");
            if (t->tag != TypeTag::Sum)
                throw TypeError(TypeErrorKind::Mismatch,
                                "case scrutinee has type " + show_type(t));
            int idl = ctx.push(m->x, t->a);
            FgUsed ul;
            FgRes rl = fg_check_term(ctx, m->m, ul);
            ctx.pop();
            fg_consume(ul, idl, m->x);
            int idr = ctx.push(m->y, t->b);
            FgUsed ur;
            FgRes rr = fg_check_term(ctx, m->n, ur);
            ctx.pop();
            fg_consume(ur, idr, m->y);
            if (ul != ur)
                throw TypeError(TypeErrorKind::NonlinearSplit,
                                "case branches consume different variables");
            TypePtr tl = require_type(rl, "case branch");
            TypePtr tr = require_type(rr, "case branch");
            if (!type_eq(tl, tr))
                throw TypeError(TypeErrorKind::Mismatch,
                                "case branches have types " + show_type(tl) +
                                    " and " + show_type(tr));
            fg_merge(used, ul);
            return {tl, {}};
        }
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed term");
}

}  // namespace

TypePtr fg_check(const TypeEnv& env, const FgTermPtr& m, bool mix) {
    FgCtx ctx;
    ctx.mix = mix;
    for (const auto& [x, t] : env.bindings) ctx.push(x, t);
    FgUsed used;
    FgRes r = fg_check_term(ctx, m, used);
    for (const FgBinding& b : ctx.scope)
        if (!used.count(b.id))
            throw TypeError(TypeErrorKind::Unused,
                            "linear variable '" + b.name + "' is never used");
    return require_type(r, "program result");
}

// ---------------------------------------------------------------------
// Reduction.
// ---------------------------------------------------------------------

std::optional<FgTermPtr> fg_step(const FgTermPtr& m) {
    switch (m->tag) {
        case FgTermTag::Let: {
            if (m->m->tag == FgTermTag::Ret)
                return fg_subst(m->n, m->m->v, m->x);
            if (auto inner = fg_step(m->m))
                return fg_let(m->x, *inner, m->n);
            return std::nullopt;
        }
        case FgTermTag::App:
            if (m->v->tag == FgValTag::Lam)
                return fg_subst(m->v->body, m->w, m->v->x);
            return std::nullopt;  // communication constant: blocked
        case FgTermTag::LetUnit:
            if (m->v->tag == FgValTag::Unit) return m->m;
            return std::nullopt;
        case FgTermTag::LetPair:
            if (m->v->tag == FgValTag::Pair) {
                // Substitute both components without the second capture.
                Name y = m->y;
                FgTermPtr body = m->m;
                if (fg_free_names(m->v->a).count(y)) {
                    NameSet avoid;
                    all_of(body, avoid);
                    NameSet f1 = fg_free_names(m->v->a);
                    avoid.insert(f1.begin(), f1.end());
                    Name ny = fresh_name(y, avoid);
                    body = fg_subst(body, fv_var(ny), y);
                    y = ny;
                }
                body = fg_subst(body, m->v->a, m->x);
                return fg_subst(body, m->v->b, y);
            }
            return std::nullopt;
        case FgTermTag::Case:
            if (m->v->tag == FgValTag::Inl)
                return fg_subst(m->m, m->v->a, m->x);
            if (m->v->tag == FgValTag::Inr)
                return fg_subst(m->n, m->v->a, m->y);
            return std::nullopt;
        case FgTermTag::Ret:
        case FgTermTag::Absurd:
            return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------
// Printing.
// ---------------------------------------------------------------------

std::string show_fg_val(const FgValPtr& v) {
    switch (v->tag) {
        case FgValTag::Var:
            return v->x;
        case FgValTag::Const:
            return show_const(v->k);
        case FgValTag::Unit:
            return "()";
        case FgValTag::Lam:
            return "\\" + v->x + (v->ann ? " : " + show_type(v->ann) : "") +
                   ". " + show_fg(v->body);
        case FgValTag::Pair:
            return "(" + show_fg_val(v->a) + ", " + show_fg_val(v->b) + ")";
        case FgValTag::Inl:
            return "inl" + (v->ann ? "[" + show_type(v->ann) + "]" : "") + " " +
                   show_fg_val(v->a);
        case FgValTag::Inr:
            return "inr" + (v->ann ? "[" + show_type(v->ann) + "]" : "") + " " +
                   show_fg_val(v->a);
    }
    return "?";
}

std::string show_fg(const FgTermPtr& m) {
    switch (m->tag) {
        case FgTermTag::Ret:
            return "ret " + show_fg_val(m->v);
        case FgTermTag::Let:
            return "let " + m->x + " = " + show_fg(m->m) + " in " +
                   show_fg(m->n);
        case FgTermTag::App:
            return show_fg_val(m->v) + " " + show_fg_val(m->w);
        case FgTermTag::LetUnit:
            return "let () = " + show_fg_val(m->v) + " in " + show_fg(m->m);
        case FgTermTag::LetPair:
            return "let (" + m->x + ", " + m->y + ") = " + show_fg_val(m->v) +
                   " in " + show_fg(m->m);
        case FgTermTag::Absurd:
            return "absurd" + (m->ann ? "[" + show_type(m->ann) + "]" : "") +
                   " " + show_fg_val(m->v);
        case FgTermTag::Case:
            return "case " + show_fg_val(m->v) + " { inl " + m->x + " -> " +
                   show_fg(m->m) + "; inr " + m->y + " -> " + show_fg(m->n) +
                   " }";
    }
    return "?";
}

}  // namespace hgv
