#include "types.hpp"

namespace hgv {

namespace {
TypePtr mk_type(TypeTag tag, TypePtr a = nullptr, TypePtr b = nullptr,
                SessionPtr s = nullptr) {
    auto t = std::make_shared<Type>();
    t->tag = tag;
    t->a = std::move(a);
    t->b = std::move(b);
    t->s = std::move(s);
    return t;
}

SessionPtr mk_session(SessionTag tag, TypePtr payload = nullptr,
                      SessionPtr cont = nullptr) {
    auto s = std::make_shared<Session>();
    s->tag = tag;
    s->payload = std::move(payload);
    s->cont = std::move(cont);
    return s;
}
}  // namespace

TypePtr t_unit() {
    static const TypePtr t = mk_type(TypeTag::Unit);
    return t;
}
TypePtr t_void() {
    static const TypePtr t = mk_type(TypeTag::Void);
    return t;
}
TypePtr t_product(TypePtr a, TypePtr b) {
    return mk_type(TypeTag::Product, std::move(a), std::move(b));
}
TypePtr t_sum(TypePtr a, TypePtr b) {
    return mk_type(TypeTag::Sum, std::move(a), std::move(b));
}
TypePtr t_lolli(TypePtr a, TypePtr b) {
    return mk_type(TypeTag::Lolli, std::move(a), std::move(b));
}
TypePtr t_session(SessionPtr s) {
    return mk_type(TypeTag::Session, nullptr, nullptr, std::move(s));
}

SessionPtr s_send(TypePtr t, SessionPtr s) {
    return mk_session(SessionTag::Send, std::move(t), std::move(s));
}
SessionPtr s_recv(TypePtr t, SessionPtr s) {
    return mk_session(SessionTag::Recv, std::move(t), std::move(s));
}
SessionPtr s_end_out() {
    static const SessionPtr s = mk_session(SessionTag::EndOut);
    return s;
}
SessionPtr s_end_in() {
    static const SessionPtr s = mk_session(SessionTag::EndIn);
    return s;
}
SessionPtr s_end() {
    static const SessionPtr s = mk_session(SessionTag::End);
    return s;
}

SessionPtr dual(const SessionPtr& s) {
    switch (s->tag) {
        case SessionTag::Send:
            return s_recv(s->payload, dual(s->cont));
        case SessionTag::Recv:
            return s_send(s->payload, dual(s->cont));
        case SessionTag::EndOut:
            return s_end_in();
        case SessionTag::EndIn:
            return s_end_out();
        case SessionTag::End:
            return s_end();
    }
    return nullptr;  // unreachable
}

bool type_eq(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case TypeTag::Unit:
        case TypeTag::Void:
            return true;
        case TypeTag::Product:
        case TypeTag::Sum:
        case TypeTag::Lolli:
            return type_eq(a->a, b->a) && type_eq(a->b, b->b);
        case TypeTag::Session:
            return session_eq(a->s, b->s);
    }
    return false;
}

bool session_eq(const SessionPtr& a, const SessionPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case SessionTag::Send:
        case SessionTag::Recv:
            return type_eq(a->payload, b->payload) && session_eq(a->cont, b->cont);
        case SessionTag::EndOut:
        case SessionTag::EndIn:
        case SessionTag::End:
            return true;
    }
    return false;
}

bool is_session_type(const TypePtr& t) { return t && t->tag == TypeTag::Session; }

namespace {
// Precedence levels: 0 = lolli (weakest), 1 = sum, 2 = product, 3 = atom.
std::string show_type_prec(const TypePtr& t, int prec);

std::string parenthesize(bool needed, const std::string& body) {
    return needed ? "(" + body + ")" : body;
}

std::string show_type_prec(const TypePtr& t, int prec) {
    switch (t->tag) {
        case TypeTag::Unit:
            return "1";
        case TypeTag::Void:
            return "0";
        case TypeTag::Product:
            return parenthesize(prec > 2, show_type_prec(t->a, 2) + " * " +
                                              show_type_prec(t->b, 3));
        case TypeTag::Sum:
            return parenthesize(prec > 1, show_type_prec(t->a, 1) + " + " +
                                              show_type_prec(t->b, 2));
        case TypeTag::Lolli:
            return parenthesize(prec > 0, show_type_prec(t->a, 1) + " -o " +
                                              show_type_prec(t->b, 0));
        case TypeTag::Session:
            // In payload position (prec 3) a prefixed session must be
            // parenthesized: !1.end!.end! would re-parse incorrectly.
            return parenthesize(prec >= 3 && (t->s->tag == SessionTag::Send ||
                                              t->s->tag == SessionTag::Recv),
                                show_session(t->s));
    }
    return "?";
}
}  // namespace

std::string show_type(const TypePtr& t) { return show_type_prec(t, 0); }

std::string show_session(const SessionPtr& s) {
    switch (s->tag) {
        case SessionTag::Send:
            return "!" + show_type_prec(s->payload, 3) + "." + show_session(s->cont);
        case SessionTag::Recv:
            return "?" + show_type_prec(s->payload, 3) + "." + show_session(s->cont);
        case SessionTag::EndOut:
            return "end!";
        case SessionTag::EndIn:
            return "end?";
        case SessionTag::End:
            return "end";
    }
    return "?";
}

}  // namespace hgv
