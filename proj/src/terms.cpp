#include "terms.hpp"

#include <map>
#include <stdexcept>

namespace hgv {

namespace {
std::shared_ptr<Term> blank_term(TermTag tag) {
    auto t = std::make_shared<Term>();
    t->tag = tag;
    return t;
}
std::shared_ptr<Config> blank_config(ConfigTag tag) {
    auto c = std::make_shared<Config>();
    c->tag = tag;
    return c;
}
}  // namespace

TermPtr mk_var(Name x) {
    auto t = blank_term(TermTag::Var);
    t->x = std::move(x);
    return t;
}
TermPtr mk_const(ConstTag k) {
    auto t = blank_term(TermTag::Const);
    t->k = k;
    return t;
}
TermPtr mk_lam(Name x, TypePtr ann, TermPtr body) {
    auto t = blank_term(TermTag::Lam);
    t->x = std::move(x);
    t->ann = std::move(ann);
    t->m = std::move(body);
    return t;
}
TermPtr mk_app(TermPtr m, TermPtr n) {
    auto t = blank_term(TermTag::App);
    t->m = std::move(m);
    t->n = std::move(n);
    return t;
}
TermPtr mk_unit() {
    static const TermPtr u = blank_term(TermTag::Unit);
    return u;
}
TermPtr mk_letunit(TermPtr m, TermPtr n) {
    auto t = blank_term(TermTag::LetUnit);
    t->m = std::move(m);
    t->n = std::move(n);
    return t;
}
TermPtr mk_pair(TermPtr m, TermPtr n) {
    auto t = blank_term(TermTag::Pair);
    t->m = std::move(m);
    t->n = std::move(n);
    return t;
}
TermPtr mk_letpair(Name x, Name y, TermPtr m, TermPtr n) {
    auto t = blank_term(TermTag::LetPair);
    t->x = std::move(x);
    t->y = std::move(y);
    t->m = std::move(m);
    t->n = std::move(n);
    return t;
}
TermPtr mk_inl(TypePtr other, TermPtr m) {
    auto t = blank_term(TermTag::Inl);
    t->ann = std::move(other);
    t->m = std::move(m);
    return t;
}
TermPtr mk_inr(TypePtr other, TermPtr m) {
    auto t = blank_term(TermTag::Inr);
    t->ann = std::move(other);
    t->m = std::move(m);
    return t;
}
TermPtr mk_case(TermPtr scrut, Name x, TermPtr left, Name y, TermPtr right) {
    auto t = blank_term(TermTag::Case);
    t->m = std::move(scrut);
    t->x = std::move(x);
    t->n = std::move(left);
    t->y = std::move(y);
    t->o = std::move(right);
    return t;
}
TermPtr mk_absurd(TypePtr result, TermPtr m) {
    auto t = blank_term(TermTag::Absurd);
    t->ann = std::move(result);
    t->m = std::move(m);
    return t;
}

TermPtr mk_let(Name x, TypePtr ann, TermPtr bound, TermPtr body) {
    return mk_app(mk_lam(std::move(x), std::move(ann), std::move(body)),
                  std::move(bound));
}
TermPtr mk_seq(TermPtr m, TermPtr n) {
    return mk_letunit(std::move(m), std::move(n));
}

ConfigPtr mk_thread(bool is_main, TermPtr term) {
    auto c = blank_config(ConfigTag::Thread);
    c->is_main = is_main;
    c->term = std::move(term);
    return c;
}
ConfigPtr mk_link_thread(Name z, Name x, Name y) {
    auto c = blank_config(ConfigTag::LinkThread);
    c->z = std::move(z);
    c->x = std::move(x);
    c->y = std::move(y);
    return c;
}
ConfigPtr mk_res(Name x, Name y, SessionPtr ann, ConfigPtr body) {
    auto c = blank_config(ConfigTag::Res);
    c->x = std::move(x);
    c->y = std::move(y);
    c->ann = std::move(ann);
    c->c = std::move(body);
    return c;
}
ConfigPtr mk_par(ConfigPtr c, ConfigPtr d) {
    auto p = blank_config(ConfigTag::Par);
    p->c = std::move(c);
    p->d = std::move(d);
    return p;
}

bool is_value(const TermPtr& m) {
    switch (m->tag) {
        case TermTag::Var:
        case TermTag::Const:
        case TermTag::Lam:
        case TermTag::Unit:
            return true;
        case TermTag::Pair:
            return is_value(m->m) && is_value(m->n);
        case TermTag::Inl:
        case TermTag::Inr:
            return is_value(m->m);
        default:
            return false;
    }
}

namespace {
void free_names_into(const TermPtr& m, NameSet& bound, NameSet& out) {
    switch (m->tag) {
        case TermTag::Var:
            if (!bound.count(m->x)) out.insert(m->x);
            break;
        case TermTag::Const:
        case TermTag::Unit:
            break;
        case TermTag::Lam: {
            bool added = bound.insert(m->x).second;
            free_names_into(m->m, bound, out);
            if (added) bound.erase(m->x);
            break;
        }
        case TermTag::App:
        case TermTag::LetUnit:
        case TermTag::Pair:
            free_names_into(m->m, bound, out);
            free_names_into(m->n, bound, out);
            break;
        case TermTag::LetPair: {
            free_names_into(m->m, bound, out);
            bool ax = bound.insert(m->x).second;
            bool ay = bound.insert(m->y).second;
            free_names_into(m->n, bound, out);
            if (ax) bound.erase(m->x);
            if (ay) bound.erase(m->y);
            break;
        }
        case TermTag::Inl:
        case TermTag::Inr:
        case TermTag::Absurd:
            free_names_into(m->m, bound, out);
            break;
        case TermTag::Case: {
            free_names_into(m->m, bound, out);
            bool ax = bound.insert(m->x).second;
            free_names_into(m->n, bound, out);
            if (ax) bound.erase(m->x);
            bool ay = bound.insert(m->y).second;
            free_names_into(m->o, bound, out);
            if (ay) bound.erase(m->y);
            break;
        }
    }
}

void free_names_into(const ConfigPtr& c, NameSet& bound, NameSet& out) {
    switch (c->tag) {
        case ConfigTag::Thread:
            free_names_into(c->term, bound, out);
            break;
        case ConfigTag::LinkThread:
            for (const Name* n : {&c->z, &c->x, &c->y})
                if (!bound.count(*n)) out.insert(*n);
            break;
        case ConfigTag::Res: {
            bool ax = bound.insert(c->x).second;
            bool ay = bound.insert(c->y).second;
            free_names_into(c->c, bound, out);
            if (ax) bound.erase(c->x);
            if (ay) bound.erase(c->y);
            break;
        }
        case ConfigTag::Par:
            free_names_into(c->c, bound, out);
            free_names_into(c->d, bound, out);
            break;
    }
}

void all_names_into(const TermPtr& m, NameSet& out) {
    switch (m->tag) {
        case TermTag::Var:
            out.insert(m->x);
            break;
        case TermTag::Const:
        case TermTag::Unit:
            break;
        case TermTag::Lam:
            out.insert(m->x);
            all_names_into(m->m, out);
            break;
        case TermTag::App:
        case TermTag::LetUnit:
        case TermTag::Pair:
            all_names_into(m->m, out);
            all_names_into(m->n, out);
            break;
        case TermTag::LetPair:
            out.insert(m->x);
            out.insert(m->y);
            all_names_into(m->m, out);
            all_names_into(m->n, out);
            break;
        case TermTag::Inl:
        case TermTag::Inr:
        case TermTag::Absurd:
            all_names_into(m->m, out);
            break;
        case TermTag::Case:
            out.insert(m->x);
            out.insert(m->y);
            all_names_into(m->m, out);
            all_names_into(m->n, out);
            all_names_into(m->o, out);
            break;
    }
}

void all_names_into(const ConfigPtr& c, NameSet& out) {
    switch (c->tag) {
        case ConfigTag::Thread:
            all_names_into(c->term, out);
            break;
        case ConfigTag::LinkThread:
            out.insert(c->z);
            out.insert(c->x);
            out.insert(c->y);
            break;
        case ConfigTag::Res:
            out.insert(c->x);
            out.insert(c->y);
            all_names_into(c->c, out);
            break;
        case ConfigTag::Par:
            all_names_into(c->c, out);
            all_names_into(c->d, out);
            break;
    }
}
}  // namespace

NameSet free_names(const TermPtr& m) {
    NameSet bound, out;
    free_names_into(m, bound, out);
    return out;
}
NameSet free_names(const ConfigPtr& c) {
    NameSet bound, out;
    free_names_into(c, bound, out);
    return out;
}
NameSet all_names(const TermPtr& m) {
    NameSet out;
    all_names_into(m, out);
    return out;
}
NameSet all_names(const ConfigPtr& c) {
    NameSet out;
    all_names_into(c, out);
    return out;
}

Name fresh_name(const Name& base, NameSet& avoid) {
    if (!avoid.count(base)) {
        avoid.insert(base);
        return base;
    }
    for (int i = 1;; ++i) {
        Name candidate = base + std::to_string(i);
        if (!avoid.count(candidate)) {
            avoid.insert(candidate);
            return candidate;
        }
    }
}

namespace {
// Renames a single binder occurrence: substitutes variable `to` for `from`
// in the body (used when a binder would capture a free name of the payload).
TermPtr rename_term(const TermPtr& m, const Name& to, const Name& from) {
    return subst(m, mk_var(to), from);
}
}  // namespace

TermPtr subst(const TermPtr& m, const TermPtr& v, const Name& x) {
    switch (m->tag) {
        case TermTag::Var:
            return m->x == x ? v : m;
        case TermTag::Const:
        case TermTag::Unit:
            return m;
        case TermTag::Lam: {
            if (m->x == x) return m;
            NameSet fv = free_names(v);
            if (fv.count(m->x)) {
                NameSet avoid = fv;
                NameSet body_names = all_names(m->m);
                avoid.insert(body_names.begin(), body_names.end());
                avoid.insert(x);
                Name nx = fresh_name(m->x, avoid);
                return mk_lam(nx, m->ann, subst(rename_term(m->m, nx, m->x), v, x));
            }
            return mk_lam(m->x, m->ann, subst(m->m, v, x));
        }
        case TermTag::App:
            return mk_app(subst(m->m, v, x), subst(m->n, v, x));
        case TermTag::LetUnit:
            return mk_letunit(subst(m->m, v, x), subst(m->n, v, x));
        case TermTag::Pair:
            return mk_pair(subst(m->m, v, x), subst(m->n, v, x));
        case TermTag::LetPair: {
            TermPtr bound = subst(m->m, v, x);
            if (m->x == x || m->y == x) return mk_letpair(m->x, m->y, bound, m->n);
            NameSet fv = free_names(v);
            Name bx = m->x, by = m->y;
            TermPtr body = m->n;
            if (fv.count(bx) || fv.count(by)) {
                NameSet avoid = fv;
                NameSet body_names = all_names(body);
                avoid.insert(body_names.begin(), body_names.end());
                avoid.insert(x);
                if (fv.count(bx)) {
                    Name nb = fresh_name(bx, avoid);
                    body = rename_term(body, nb, bx);
                    bx = nb;
                }
                if (fv.count(by)) {
                    Name nb = fresh_name(by, avoid);
                    body = rename_term(body, nb, by);
                    by = nb;
                }
            }
            return mk_letpair(bx, by, bound, subst(body, v, x));
        }
        case TermTag::Inl:
            return mk_inl(m->ann, subst(m->m, v, x));
        case TermTag::Inr:
            return mk_inr(m->ann, subst(m->m, v, x));
        case TermTag::Absurd:
            return mk_absurd(m->ann, subst(m->m, v, x));
        case TermTag::Case: {
            TermPtr scrut = subst(m->m, v, x);
            NameSet fv = free_names(v);
            Name bx = m->x, by = m->y;
            TermPtr left = m->n, right = m->o;
            if (bx != x) {
                if (fv.count(bx)) {
                    NameSet avoid = fv;
                    NameSet names = all_names(left);
                    avoid.insert(names.begin(), names.end());
                    avoid.insert(x);
                    Name nb = fresh_name(bx, avoid);
                    left = rename_term(left, nb, bx);
                    bx = nb;
                }
                left = subst(left, v, x);
            }
            if (by != x) {
                if (fv.count(by)) {
                    NameSet avoid = fv;
                    NameSet names = all_names(right);
                    avoid.insert(names.begin(), names.end());
                    avoid.insert(x);
                    Name nb = fresh_name(by, avoid);
                    right = rename_term(right, nb, by);
                    by = nb;
                }
                right = subst(right, v, x);
            }
            return mk_case(scrut, bx, left, by, right);
        }
    }
    return m;
}

ConfigPtr subst(const ConfigPtr& c, const TermPtr& v, const Name& x) {
    switch (c->tag) {
        case ConfigTag::Thread:
            return mk_thread(c->is_main, subst(c->term, v, x));
        case ConfigTag::LinkThread: {
            // Only a name can stand for a link-thread endpoint.
            bool hit = c->z == x || c->x == x || c->y == x;
            if (!hit) return c;
            if (v->tag != TermTag::Var)
                throw std::runtime_error(
                    "substitution of a non-name into a link thread");
            const Name& w = v->x;
            return mk_link_thread(c->z == x ? w : c->z, c->x == x ? w : c->x,
                                  c->y == x ? w : c->y);
        }
        case ConfigTag::Res: {
            if (c->x == x || c->y == x) return c;
            NameSet fv = free_names(v);
            Name bx = c->x, by = c->y;
            ConfigPtr body = c->c;
            if (fv.count(bx) || fv.count(by)) {
                NameSet avoid = fv;
                NameSet names = all_names(body);
                avoid.insert(names.begin(), names.end());
                avoid.insert(x);
                if (fv.count(bx)) {
                    Name nb = fresh_name(bx, avoid);
                    body = rename_config(body, nb, bx);
                    bx = nb;
                }
                if (fv.count(by)) {
                    Name nb = fresh_name(by, avoid);
                    body = rename_config(body, nb, by);
                    by = nb;
                }
            }
            return mk_res(bx, by, c->ann, subst(body, v, x));
        }
        case ConfigTag::Par:
            return mk_par(subst(c->c, v, x), subst(c->d, v, x));
    }
    return c;
}

ConfigPtr rename_config(const ConfigPtr& c, const Name& to, const Name& from) {
    return subst(c, mk_var(to), from);
}

namespace {
struct AlphaCtx {
    std::map<Name, Name> left;   // left name -> canonical
    std::map<Name, Name> right;  // right name -> canonical
    int counter = 0;

    Name canon_left(const Name& n) const {
        auto it = left.find(n);
        return it == left.end() ? "$" + n : it->second;
    }
    Name canon_right(const Name& n) const {
        auto it = right.find(n);
        return it == right.end() ? "$" + n : it->second;
    }
};

struct Scoped {
    AlphaCtx& ctx;
    Name l, r;
    bool had_l = false, had_r = false;
    Name old_l, old_r;
    Scoped(AlphaCtx& ctx, const Name& l, const Name& r) : ctx(ctx), l(l), r(r) {
        Name canon = "#" + std::to_string(ctx.counter++);
        auto il = ctx.left.find(l);
        if (il != ctx.left.end()) {
            had_l = true;
            old_l = il->second;
        }
        auto ir = ctx.right.find(r);
        if (ir != ctx.right.end()) {
            had_r = true;
            old_r = ir->second;
        }
        ctx.left[l] = canon;
        ctx.right[r] = canon;
    }
    ~Scoped() {
        if (had_l)
            ctx.left[l] = old_l;
        else
            ctx.left.erase(l);
        if (had_r)
            ctx.right[r] = old_r;
        else
            ctx.right.erase(r);
    }
};

bool alpha_eq_in(const TermPtr& a, const TermPtr& b, AlphaCtx& ctx) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case TermTag::Var:
            return ctx.canon_left(a->x) == ctx.canon_right(b->x);
        case TermTag::Const:
            return a->k == b->k;
        case TermTag::Unit:
            return true;
        case TermTag::Lam: {
            if (!type_eq(a->ann, b->ann)) return false;
            Scoped s(ctx, a->x, b->x);
            return alpha_eq_in(a->m, b->m, ctx);
        }
        case TermTag::App:
        case TermTag::LetUnit:
        case TermTag::Pair:
            return alpha_eq_in(a->m, b->m, ctx) && alpha_eq_in(a->n, b->n, ctx);
        case TermTag::LetPair: {
            if (!alpha_eq_in(a->m, b->m, ctx)) return false;
            Scoped sx(ctx, a->x, b->x);
            Scoped sy(ctx, a->y, b->y);
            return alpha_eq_in(a->n, b->n, ctx);
        }
        case TermTag::Inl:
        case TermTag::Inr:
        case TermTag::Absurd:
            return type_eq(a->ann, b->ann) && alpha_eq_in(a->m, b->m, ctx);
        case TermTag::Case: {
            if (!alpha_eq_in(a->m, b->m, ctx)) return false;
            {
                Scoped sx(ctx, a->x, b->x);
                if (!alpha_eq_in(a->n, b->n, ctx)) return false;
            }
            Scoped sy(ctx, a->y, b->y);
            return alpha_eq_in(a->o, b->o, ctx);
        }
    }
    return false;
}

bool alpha_eq_in(const ConfigPtr& a, const ConfigPtr& b, AlphaCtx& ctx) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case ConfigTag::Thread:
            return a->is_main == b->is_main && alpha_eq_in(a->term, b->term, ctx);
        case ConfigTag::LinkThread:
            return ctx.canon_left(a->z) == ctx.canon_right(b->z) &&
                   ctx.canon_left(a->x) == ctx.canon_right(b->x) &&
                   ctx.canon_left(a->y) == ctx.canon_right(b->y);
        case ConfigTag::Res: {
            if (!session_eq(a->ann, b->ann)) return false;
            Scoped sx(ctx, a->x, b->x);
            Scoped sy(ctx, a->y, b->y);
            return alpha_eq_in(a->c, b->c, ctx);
        }
        case ConfigTag::Par:
            return alpha_eq_in(a->c, b->c, ctx) && alpha_eq_in(a->d, b->d, ctx);
    }
    return false;
}
}  // namespace

bool alpha_eq(const TermPtr& a, const TermPtr& b) {
    AlphaCtx ctx;
    return alpha_eq_in(a, b, ctx);
}
bool alpha_eq(const ConfigPtr& a, const ConfigPtr& b) {
    AlphaCtx ctx;
    return alpha_eq_in(a, b, ctx);
}

int term_size(const TermPtr& m) {
    switch (m->tag) {
        case TermTag::Var:
        case TermTag::Const:
        case TermTag::Unit:
            return 1;
        case TermTag::Lam:
        case TermTag::Inl:
        case TermTag::Inr:
        case TermTag::Absurd:
            return 1 + term_size(m->m);
        case TermTag::App:
        case TermTag::LetUnit:
        case TermTag::Pair:
        case TermTag::LetPair:
            return 1 + term_size(m->m) + term_size(m->n);
        case TermTag::Case:
            return 1 + term_size(m->m) + term_size(m->n) + term_size(m->o);
    }
    return 1;
}

int config_size(const ConfigPtr& c) {
    switch (c->tag) {
        case ConfigTag::Thread:
            return 1 + term_size(c->term);
        case ConfigTag::LinkThread:
            return 1;
        case ConfigTag::Res:
            return 1 + config_size(c->c);
        case ConfigTag::Par:
            return 1 + config_size(c->c) + config_size(c->d);
    }
    return 1;
}

std::string show_const(ConstTag k) {
    switch (k) {
        case ConstTag::Link: return "link";
        case ConstTag::Fork: return "fork";
        case ConstTag::SendK: return "send";
        case ConstTag::RecvK: return "recv";
        case ConstTag::Wait: return "wait";
        case ConstTag::Close: return "close";
        case ConstTag::Spawn: return "spawn";
    }
    return "?";
}

namespace {
// Precedence: 0 = prefix forms, 2 = application, 3 = atom.
std::string show_term_prec(const TermPtr& m, int prec) {
    auto wrap = [&](int level, const std::string& s) {
        return prec > level ? "(" + s + ")" : s;
    };
    switch (m->tag) {
        case TermTag::Var:
            return m->x;
        case TermTag::Const:
            return show_const(m->k);
        case TermTag::Unit:
            return "()";
        case TermTag::Lam:
            return wrap(0, "\\" + m->x +
                               (m->ann ? ":" + show_type(m->ann) : "") + ". " +
                               show_term_prec(m->m, 0));
        case TermTag::App:
            // A let-redex prints as its sugar, which also covers the
            // unannotated binders the sugar introduces.
            if (m->m->tag == TermTag::Lam) {
                const Term& lam = *m->m;
                return wrap(0, "let " + lam.x +
                                   (lam.ann ? " : " + show_type(lam.ann) : "") +
                                   " = " + show_term_prec(m->n, 0) + " in " +
                                   show_term_prec(lam.m, 0));
            }
            return wrap(2, show_term_prec(m->m, 2) + " " + show_term_prec(m->n, 3));
        case TermTag::LetUnit:
            return wrap(0, "let () = " + show_term_prec(m->m, 0) + " in " +
                               show_term_prec(m->n, 0));
        case TermTag::Pair:
            return "(" + show_term_prec(m->m, 0) + ", " + show_term_prec(m->n, 0) +
                   ")";
        case TermTag::LetPair:
            return wrap(0, "let (" + m->x + ", " + m->y + ") = " +
                               show_term_prec(m->m, 0) + " in " +
                               show_term_prec(m->n, 0));
        case TermTag::Inl:
            return wrap(0, "inl [" + show_type(m->ann) + "] " +
                               show_term_prec(m->m, 3));
        case TermTag::Inr:
            return wrap(0, "inr [" + show_type(m->ann) + "] " +
                               show_term_prec(m->m, 3));
        case TermTag::Case:
            return wrap(0, "case " + show_term_prec(m->m, 0) + " { inl " + m->x +
                               " -> " + show_term_prec(m->n, 0) + " ; inr " + m->y +
                               " -> " + show_term_prec(m->o, 0) + " }");
        case TermTag::Absurd:
            return wrap(0, "absurd [" + show_type(m->ann) + "] " +
                               show_term_prec(m->m, 3));
    }
    return "?";
}

// Config precedence: 0 = par, 1 = atom.
std::string show_config_prec(const ConfigPtr& c, int prec) {
    auto wrap = [&](int level, const std::string& s) {
        return prec > level ? "(" + s + ")" : s;
    };
    switch (c->tag) {
        case ConfigTag::Thread:
            return wrap(0, std::string(c->is_main ? "main " : "child ") +
                               show_term_prec(c->term, 3));
        case ConfigTag::LinkThread:
            return wrap(0, "link " + c->z + " " + c->x + " " + c->y);
        case ConfigTag::Res:
            return wrap(0, "new (" + c->x + " " + c->y + " : " +
                               show_session(c->ann) + "). " +
                               show_config_prec(c->c, 0));
        case ConfigTag::Par:
            return wrap(0, show_config_prec(c->c, 1) + " || " +
                               show_config_prec(c->d, 0));
    }
    return "?";
}
}  // namespace

std::string show_term(const TermPtr& m) { return show_term_prec(m, 0); }
std::string show_config(const ConfigPtr& c) { return show_config_prec(c, 0); }

}  // namespace hgv
