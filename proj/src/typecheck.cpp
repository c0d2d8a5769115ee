#include "typecheck.hpp"

#include <algorithm>

namespace hgv {

namespace {

struct Binding {
    Name name;
    TypePtr type;
    int id;
};

struct Ctx {
    std::vector<Binding> scope;
    int next_id = 0;
    bool mix = false;

    int push(const Name& x, TypePtr t) {
        int id = next_id++;
        scope.push_back({x, std::move(t), id});
        return id;
    }
    void pop() { scope.pop_back(); }
    const Binding* lookup(const Name& x) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->name == x) return &*it;
        return nullptr;
    }
};

using Used = std::set<int>;

void merge_disjoint(Used& into, const Used& other) {
    for (int id : other) {
        if (into.count(id))
            throw TypeError(TypeErrorKind::Reuse,
                            "linear variable used more than once");
        into.insert(id);
    }
}

void consume_binder(Used& used, int id, const Name& x) {
    if (!used.count(id))
        throw TypeError(TypeErrorKind::Unused,
                        "linear variable '" + x + "' is never used");
    used.erase(id);
}

TypePtr check(Ctx& ctx, const TermPtr& m, Used& used);

TypePtr check_branchless(Ctx& ctx, const TermPtr& m, Used& used) {
    Used local;
    TypePtr t = check(ctx, m, local);
    merge_disjoint(used, local);
    return t;
}

TypePtr check(Ctx& ctx, const TermPtr& m, Used& used) {
    switch (m->tag) {
        case TermTag::Var: {
            const Binding* b = ctx.lookup(m->x);
            if (!b)
                throw TypeError(TypeErrorKind::Unbound,
                                "unbound variable '" + m->x + "'");
            if (used.count(b->id))
                throw TypeError(TypeErrorKind::Reuse,
                                "linear variable '" + m->x + "' used twice");
            used.insert(b->id);
            return b->type;
        }
        case TermTag::Const:
            throw TypeError(TypeErrorKind::ConstantUse,
                            "constant '" + show_const(m->k) +
                                "' must be applied to an argument");
        case TermTag::Unit:
            return t_unit();
        case TermTag::Lam: {
            if (!m->ann)
                throw TypeError(TypeErrorKind::MissingAnnotation,
                                "lambda binder '" + m->x +
                                    "' needs a type annotation");
            int id = ctx.push(m->x, m->ann);
            TypePtr body = check(ctx, m->m, used);
            ctx.pop();
            consume_binder(used, id, m->x);
            return t_lolli(m->ann, body);
        }
        case TermTag::App: {
            if (m->m->tag == TermTag::Const) {
                TypePtr arg = check_branchless(ctx, m->n, used);
                return delta_type(m->m->k, arg, ctx.mix);
            }
            if (m->m->tag == TermTag::Lam && !m->m->ann) {
                // let x = N in body (sugar without annotation): the bound
                // term is checked first and supplies the binder's type.
                TypePtr bound = check_branchless(ctx, m->n, used);
                const Term& lam = *m->m;
                int id = ctx.push(lam.x, bound);
                Used body_used;
                TypePtr t = check(ctx, lam.m, body_used);
                ctx.pop();
                consume_binder(body_used, id, lam.x);
                merge_disjoint(used, body_used);
                return t;
            }
            TypePtr fun = check_branchless(ctx, m->m, used);
            TypePtr arg = check_branchless(ctx, m->n, used);
            if (fun->tag != TypeTag::Lolli)
                throw TypeError(TypeErrorKind::Mismatch,
                                "application of a non-function of type " +
                                    show_type(fun));
            if (!type_eq(fun->a, arg))
                throw TypeError(TypeErrorKind::Mismatch,
                                "argument type " + show_type(arg) +
                                    " does not match parameter type " +
                                    show_type(fun->a));
            return fun->b;
        }
        case TermTag::LetUnit: {
            TypePtr t = check_branchless(ctx, m->m, used);
            if (t->tag != TypeTag::Unit)
                throw TypeError(TypeErrorKind::Mismatch,
                                "let () binds a term of type " + show_type(t));
            return check_branchless(ctx, m->n, used);
        }
        case TermTag::Pair: {
            TypePtr a = check_branchless(ctx, m->m, used);
            TypePtr b = check_branchless(ctx, m->n, used);
            return t_product(a, b);
        }
        case TermTag::LetPair: {
            TypePtr t = check_branchless(ctx, m->m, used);
            if (t->tag != TypeTag::Product)
                throw TypeError(TypeErrorKind::Mismatch,
                                "let (x,y) binds a term of type " + show_type(t));
            int idx = ctx.push(m->x, t->a);
            int idy = ctx.push(m->y, t->b);
            Used body_used;
            TypePtr body = check(ctx, m->n, body_used);
            ctx.pop();
            ctx.pop();
            consume_binder(body_used, idy, m->y);
            consume_binder(body_used, idx, m->x);
            merge_disjoint(used, body_used);
            return body;
        }
        case TermTag::Inl: {
            TypePtr t = check_branchless(ctx, m->m, used);
            return t_sum(t, m->ann);
        }
        case TermTag::Inr: {
            TypePtr t = check_branchless(ctx, m->m, used);
            return t_sum(m->ann, t);
        }
        case TermTag::Case: {
            TypePtr scrut = check_branchless(ctx, m->m, used);
            if (scrut->tag != TypeTag::Sum)
                throw TypeError(TypeErrorKind::Mismatch,
                                "case scrutinee has type " + show_type(scrut));
            int idl = ctx.push(m->x, scrut->a);
            Used used_l;
            TypePtr tl = check(ctx, m->n, used_l);
            ctx.pop();
            consume_binder(used_l, idl, m->x);
            int idr = ctx.push(m->y, scrut->b);
            Used used_r;
            TypePtr tr = check(ctx, m->o, used_r);
            ctx.pop();
            consume_binder(used_r, idr, m->y);
            if (used_l != used_r)
                throw TypeError(TypeErrorKind::NonlinearSplit,
                                "case branches consume different variables");
            if (!type_eq(tl, tr))
                throw TypeError(TypeErrorKind::Mismatch,
                                "case branches have types " + show_type(tl) +
                                    " and " + show_type(tr));
            merge_disjoint(used, used_l);
            return tl;
        }
        case TermTag::Absurd: {
            TypePtr t = check_branchless(ctx, m->m, used);
            if (t->tag != TypeTag::Void)
                throw TypeError(TypeErrorKind::Mismatch,
                                "absurd applied to a term of type " + show_type(t));
            return m->ann;
        }
    }
    throw TypeError(TypeErrorKind::Mismatch, "malformed term");
}

}  // namespace

TypePtr delta_type(ConstTag k, const TypePtr& arg, bool mix) {
    auto mismatch = [&](const std::string& expected) -> TypeError {
        return TypeError(TypeErrorKind::Mismatch,
                         "constant '" + show_const(k) + "' expects " + expected +
                             ", got " + show_type(arg));
    };
    switch (k) {
        case ConstTag::Link: {
            // (S * ~S) -o end!   (Mix: (S * ~S) -o 1)
            if (arg->tag != TypeTag::Product || !is_session_type(arg->a) ||
                !is_session_type(arg->b) ||
                !session_eq(dual(arg->a->s), arg->b->s))
                throw mismatch("a pair of dual session endpoints");
            return mix ? t_unit() : t_session(s_end_out());
        }
        case ConstTag::Fork: {
            // (S -o end!) -o ~S   (Mix: (S -o 1) -o ~S)
            if (arg->tag != TypeTag::Lolli || !is_session_type(arg->a))
                throw mismatch("a function from a session endpoint");
            const TypePtr& result = arg->b;
            bool ok = mix ? result->tag == TypeTag::Unit
                          : (is_session_type(result) &&
                             result->s->tag == SessionTag::EndOut);
            if (!ok)
                throw mismatch(mix ? "a function returning 1"
                                   : "a function returning end!");
            return t_session(dual(arg->a->s));
        }
        case ConstTag::SendK: {
            // (T * !T.S) -o S
            if (arg->tag != TypeTag::Product || !is_session_type(arg->b) ||
                arg->b->s->tag != SessionTag::Send ||
                !type_eq(arg->b->s->payload, arg->a))
                throw mismatch("a pair (T, !T.S)");
            return t_session(arg->b->s->cont);
        }
        case ConstTag::RecvK: {
            // ?T.S -o (T * S)
            if (!is_session_type(arg) || arg->s->tag != SessionTag::Recv)
                throw mismatch("an endpoint of type ?T.S");
            return t_product(arg->s->payload, t_session(arg->s->cont));
        }
        case ConstTag::Wait: {
            if (mix)
                throw TypeError(TypeErrorKind::ConstantUse,
                                "'wait' is not available in the Mix variant");
            if (!is_session_type(arg) || arg->s->tag != SessionTag::EndIn)
                throw mismatch("an endpoint of type end?");
            return t_unit();
        }
        case ConstTag::Close: {
            if (!mix)
                throw TypeError(TypeErrorKind::ConstantUse,
                                "'close' requires the Mix variant");
            if (!is_session_type(arg) || arg->s->tag != SessionTag::End)
                throw mismatch("an endpoint of type end");
            return t_unit();
        }
        case ConstTag::Spawn: {
            if (!mix)
                throw TypeError(TypeErrorKind::ConstantUse,
                                "'spawn' requires the Mix variant");
            if (arg->tag != TypeTag::Lolli || arg->a->tag != TypeTag::Unit ||
                arg->b->tag != TypeTag::Unit)
                throw mismatch("a thunk of type 1 -o 1");
            return t_unit();
        }
    }
    throw TypeError(TypeErrorKind::Mismatch, "unknown constant");
}

TypePtr check_term(const TypeEnv& env, const TermPtr& m, bool mix) {
    Ctx ctx;
    ctx.mix = mix;
    for (const auto& [x, t] : env.bindings) ctx.push(x, t);
    Used used;
    TypePtr result = check(ctx, m, used);
    for (const Binding& b : ctx.scope)
        if (!used.count(b.id))
            throw TypeError(TypeErrorKind::Unused,
                            "linear variable '" + b.name + "' is never used");
    return result;
}

TypePtr check_value(const TypeEnv& env, const TermPtr& v, bool mix) {
    if (!is_value(v))
        throw TypeError(TypeErrorKind::Mismatch, "term is not a value");
    return check_term(env, v, mix);
}

}  // namespace hgv
