#include "surface.hpp"

#include <cctype>
#include <vector>

namespace hgv {

namespace {

enum class TokKind { Ident, Num, Sym, Eof };

struct Tok {
    TokKind kind;
    std::string text;
    int line, col;
};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum((unsigned char)c) || c == '_' || c == '\'';
}

std::vector<Tok> lex(const std::string& src) {
    std::vector<Tok> toks;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            // line comment
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        int tl = line, tc = col;
        if (ident_start(c)) {
            size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            std::string word = src.substr(i, j - i);
            if (word == "end" && j < src.size() && (src[j] == '!' || src[j] == '?')) {
                word += src[j];
                ++j;
            }
            toks.push_back({TokKind::Ident, word, tl, tc});
            advance(j - i);
            continue;
        }
        if (std::isdigit((unsigned char)c)) {
            size_t j = i;
            while (j < src.size() && std::isdigit((unsigned char)src[j])) ++j;
            toks.push_back({TokKind::Num, src.substr(i, j - i), tl, tc});
            advance(j - i);
            continue;
        }
        auto two = [&](const char* s) {
            return i + 1 < src.size() && src[i] == s[0] && src[i + 1] == s[1];
        };
        if (i + 2 < src.size() && src[i] == '(' &&
            ((src[i + 1] == '+' || src[i + 1] == '&') && src[i + 2] == ')')) {
            toks.push_back({TokKind::Sym, std::string("(") + src[i + 1] + ")", tl, tc});
            advance(3);
            continue;
        }
        if (two("->") || two("-o") || two("||")) {
            toks.push_back({TokKind::Sym, src.substr(i, 2), tl, tc});
            advance(2);
            continue;
        }
        static const std::string singles = "(){}[],.;:=\\*+!?~|";
        if (singles.find(c) != std::string::npos) {
            toks.push_back({TokKind::Sym, std::string(1, c), tl, tc});
            advance(1);
            continue;
        }
        throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
    }
    toks.push_back({TokKind::Eof, "", line, col});
    return toks;
}

bool is_reserved(const std::string& w) {
    static const NameSet kws = {"main",  "child", "new",  "let",    "in",
                                "case",  "inl",   "inr",  "absurd", "offer",
                                "select", "end",  "end!", "end?",   "link",
                                "fork",  "send",  "recv", "wait",   "close",
                                "spawn"};
    return kws.count(w) > 0;
}

struct Parser {
    std::vector<Tok> toks;
    size_t pos = 0;
    // Inside the left branch of a case/offer a top-level ';' separates the
    // branches rather than sequencing; delimited contexts reset this.
    bool seq_ok = true;

    const Tok& peek(size_t ahead = 0) const {
        size_t p = pos + ahead;
        return p < toks.size() ? toks[p] : toks.back();
    }
    const Tok& next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
    bool at_sym(const std::string& s) const {
        return peek().kind == TokKind::Sym && peek().text == s;
    }
    bool at_word(const std::string& w) const {
        return peek().kind == TokKind::Ident && peek().text == w;
    }
    bool accept_sym(const std::string& s) {
        if (at_sym(s)) {
            ++pos;
            return true;
        }
        return false;
    }
    bool accept_word(const std::string& w) {
        if (at_word(w)) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(peek().line, peek().col, msg + " (got '" +
                                                      (peek().kind == TokKind::Eof
                                                           ? "end of input"
                                                           : peek().text) +
                                                      "')");
    }
    void expect_sym(const std::string& s) {
        if (!accept_sym(s)) fail("expected '" + s + "'");
    }
    void expect_word(const std::string& w) {
        if (!accept_word(w)) fail("expected '" + w + "'");
    }
    Name expect_ident() {
        if (peek().kind != TokKind::Ident || is_reserved(peek().text))
            fail("expected identifier");
        return next().text;
    }
    bool at_eof() const { return peek().kind == TokKind::Eof; }

    // ---- types ----

    bool at_session_start() const {
        return at_sym("!") || at_sym("?") || at_sym("~") || at_sym("(+)") ||
               at_sym("(&)") || at_word("end!") || at_word("end?") || at_word("end");
    }

    SessionPtr parse_session_atom() {
        if (accept_sym("!")) {
            TypePtr payload = parse_atom_type();
            expect_sym(".");
            return s_send(payload, parse_session_atom());
        }
        if (accept_sym("?")) {
            TypePtr payload = parse_atom_type();
            expect_sym(".");
            return s_recv(payload, parse_session_atom());
        }
        if (accept_sym("~")) return dual(parse_session_atom());
        if (accept_word("end!")) return s_end_out();
        if (accept_word("end?")) return s_end_in();
        if (accept_word("end")) return s_end();
        if (at_sym("(+)") || at_sym("(&)")) {
            bool plus = at_sym("(+)");
            ++pos;
            expect_sym("{");
            if (accept_sym("}")) return plus ? choice_plus_empty() : choice_with_empty();
            SessionPtr s1 = parse_session_atom();
            expect_sym(",");
            SessionPtr s2 = parse_session_atom();
            expect_sym("}");
            return plus ? choice_plus(s1, s2) : choice_with(s1, s2);
        }
        if (accept_sym("(")) {
            TypePtr t = parse_type_inner();
            expect_sym(")");
            if (!is_session_type(t)) fail("expected a session type");
            return t->s;
        }
        fail("expected session type");
    }

    TypePtr parse_atom_type() {
        if (peek().kind == TokKind::Num) {
            const std::string& n = next().text;
            if (n == "1") return t_unit();
            if (n == "0") return t_void();
            throw ParseError(toks[pos - 1].line, toks[pos - 1].col,
                             "unknown type literal '" + n + "'");
        }
        if (at_session_start()) return t_session(parse_session_atom());
        if (accept_sym("(")) {
            TypePtr t = parse_type_inner();
            expect_sym(")");
            return t;
        }
        fail("expected type");
    }

    TypePtr parse_prod_type() {
        TypePtr t = parse_atom_type();
        while (accept_sym("*")) t = t_product(t, parse_atom_type());
        return t;
    }
    TypePtr parse_sum_type() {
        TypePtr t = parse_prod_type();
        while (accept_sym("+")) t = t_sum(t, parse_prod_type());
        return t;
    }
    TypePtr parse_type_inner() {
        TypePtr t = parse_sum_type();
        if (accept_sym("-o")) return t_lolli(t, parse_type_inner());
        return t;
    }

    SessionPtr parse_session_inner() {
        TypePtr t = parse_type_inner();
        if (!is_session_type(t)) fail("expected a session type");
        return t->s;
    }

    // ---- terms ----

    bool at_atom_start() const {
        if (peek().kind == TokKind::Ident) {
            const std::string& w = peek().text;
            if (is_reserved(w))
                return w == "link" || w == "fork" || w == "send" || w == "recv" ||
                       w == "wait" || w == "close" || w == "spawn";
            return true;
        }
        return at_sym("(") && !at_sym("(+)");
    }

    TermPtr parse_atom_term() {
        if (peek().kind == TokKind::Ident) {
            const std::string& w = peek().text;
            if (w == "link") { ++pos; return mk_const(ConstTag::Link); }
            if (w == "fork") { ++pos; return mk_const(ConstTag::Fork); }
            if (w == "send") { ++pos; return mk_const(ConstTag::SendK); }
            if (w == "recv") { ++pos; return mk_const(ConstTag::RecvK); }
            if (w == "wait") { ++pos; return mk_const(ConstTag::Wait); }
            if (w == "close") { ++pos; return mk_const(ConstTag::Close); }
            if (w == "spawn") { ++pos; return spawn_encoding(); }
            return mk_var(expect_ident());
        }
        if (accept_sym("(")) {
            if (accept_sym(")")) return mk_unit();
            bool saved = seq_ok;
            seq_ok = true;
            TermPtr m = parse_term_inner();
            if (accept_sym(",")) {
                TermPtr n = parse_term_inner();
                expect_sym(")");
                seq_ok = saved;
                return mk_pair(m, n);
            }
            expect_sym(")");
            seq_ok = saved;
            return m;
        }
        fail("expected term");
    }

    TermPtr parse_app_term() {
        TermPtr m = parse_atom_term();
        while (at_atom_start()) m = mk_app(m, parse_atom_term());
        return m;
    }

    TermPtr parse_lambda() {
        // after '\'
        if (accept_sym("(")) {
            if (accept_sym(")")) {
                // \(). M  desugars to \z:1. let () = z in M
                TypePtr ann = t_unit();
                if (accept_sym(":")) ann = parse_type_inner();
                expect_sym(".");
                TermPtr body = parse_term_inner();
                NameSet avoid = all_names(body);
                Name z = fresh_name("u", avoid);
                return mk_lam(z, ann, mk_letunit(mk_var(z), body));
            }
            Name x = expect_ident();
            expect_sym(",");
            Name y = expect_ident();
            expect_sym(")");
            expect_sym(":");
            TypePtr ann = parse_type_inner();
            expect_sym(".");
            TermPtr body = parse_term_inner();
            NameSet avoid = all_names(body);
            avoid.insert(x);
            avoid.insert(y);
            Name z = fresh_name("p", avoid);
            return mk_lam(z, ann, mk_letpair(x, y, mk_var(z), body));
        }
        Name x = expect_ident();
        TypePtr ann;  // may stay null; checking then requires a let context
        if (accept_sym(":")) ann = parse_type_inner();
        expect_sym(".");
        return mk_lam(x, ann, parse_term_inner());
    }

    TermPtr parse_term_inner() {
        if (accept_sym("\\")) return parse_lambda();
        if (accept_word("let")) {
            if (accept_sym("(")) {
                if (accept_sym(")")) {
                    expect_sym("=");
                    TermPtr m = parse_term_inner();
                    expect_word("in");
                    return mk_letunit(m, parse_term_inner());
                }
                Name x = expect_ident();
                expect_sym(",");
                Name y = expect_ident();
                expect_sym(")");
                expect_sym("=");
                TermPtr m = parse_term_inner();
                expect_word("in");
                return mk_letpair(x, y, m, parse_term_inner());
            }
            Name x = expect_ident();
            TypePtr ann;
            if (accept_sym(":")) ann = parse_type_inner();
            expect_sym("=");
            TermPtr m = parse_term_inner();
            expect_word("in");
            return mk_let(x, ann, m, parse_term_inner());
        }
        if (accept_word("case")) {
            TermPtr scrut = parse_term_inner();
            expect_sym("{");
            expect_word("inl");
            Name x = expect_ident();
            expect_sym("->");
            bool saved = seq_ok;
            seq_ok = false;
            TermPtr left = parse_term_inner();
            expect_sym(";");
            expect_word("inr");
            Name y = expect_ident();
            expect_sym("->");
            seq_ok = true;  // the closing '}' delimits the right branch
            TermPtr right = parse_term_inner();
            seq_ok = saved;
            expect_sym("}");
            return mk_case(scrut, x, left, y, right);
        }
        if (accept_word("offer")) {
            TermPtr scrut = parse_term_inner();
            expect_sym("{");
            if (accept_sym("}")) {
                expect_sym(":");
                TypePtr result = parse_type_inner();
                return offer_empty_term(scrut, result);
            }
            expect_word("inl");
            Name x = expect_ident();
            expect_sym("->");
            bool saved = seq_ok;
            seq_ok = false;
            TermPtr left = parse_term_inner();
            expect_sym(";");
            expect_word("inr");
            Name y = expect_ident();
            expect_sym("->");
            seq_ok = true;
            TermPtr right = parse_term_inner();
            seq_ok = saved;
            expect_sym("}");
            return offer_term(scrut, x, left, y, right);
        }
        if (accept_word("select")) {
            bool left;
            if (accept_word("inl"))
                left = true;
            else if (accept_word("inr"))
                left = false;
            else
                fail("expected 'inl' or 'inr' after 'select'");
            expect_sym("{");
            SessionPtr s1 = parse_session_inner();
            expect_sym(",");
            SessionPtr s2 = parse_session_inner();
            expect_sym("}");
            return select_term(left, s1, s2);
        }
        if (at_word("inl") || at_word("inr")) {
            bool left = at_word("inl");
            ++pos;
            expect_sym("[");
            TypePtr other = parse_type_inner();
            expect_sym("]");
            TermPtr m = parse_atom_term();
            return left ? mk_inl(other, m) : mk_inr(other, m);
        }
        if (accept_word("absurd")) {
            expect_sym("[");
            TypePtr result = parse_type_inner();
            expect_sym("]");
            return mk_absurd(result, parse_atom_term());
        }
        TermPtr m = parse_app_term();
        if (seq_ok && accept_sym(";")) return mk_seq(m, parse_term_inner());
        return m;
    }

    // ---- configurations ----

    ConfigPtr parse_config_atom() {
        if (accept_word("main")) return mk_thread(true, parse_term_inner());
        if (accept_word("child")) return mk_thread(false, parse_term_inner());
        if (at_word("link")) {
            ++pos;
            Name z = expect_ident();
            Name x = expect_ident();
            Name y = expect_ident();
            return mk_link_thread(z, x, y);
        }
        if (accept_word("new")) {
            expect_sym("(");
            Name x = expect_ident();
            Name y = expect_ident();
            expect_sym(":");
            SessionPtr s = parse_session_inner();
            expect_sym(")");
            expect_sym(".");
            return mk_res(x, y, s, parse_config_inner());
        }
        if (accept_sym("(")) {
            ConfigPtr c = parse_config_inner();
            expect_sym(")");
            return c;
        }
        fail("expected configuration");
    }

    ConfigPtr parse_config_inner() {
        ConfigPtr c = parse_config_atom();
        if (accept_sym("||")) return mk_par(c, parse_config_inner());
        return c;
    }

    // ---- environments ----

    TypeEnv parse_env_segment() {
        TypeEnv env;
        if (at_eof() || at_sym("|")) return env;
        for (;;) {
            Name x = expect_ident();
            expect_sym(":");
            env.bind(x, parse_type_inner());
            if (!accept_sym(",")) break;
        }
        return env;
    }
};

}  // namespace

TermPtr parse_term(const std::string& src) {
    Parser p{lex(src)};
    TermPtr m = p.parse_term_inner();
    if (!p.at_eof()) p.fail("trailing input after term");
    return m;
}

ConfigPtr parse_config(const std::string& src) {
    Parser p{lex(src)};
    ConfigPtr c = p.parse_config_inner();
    if (!p.at_eof()) p.fail("trailing input after configuration");
    return c;
}

Parsed parse_program(const std::string& src) {
    Parser probe{lex(src)};
    bool looks_config = probe.at_word("main") || probe.at_word("child") ||
                        probe.at_word("new") ||
                        (probe.at_word("link") &&
                         probe.peek(1).kind == TokKind::Ident &&
                         !is_reserved(probe.peek(1).text));
    if (looks_config) return Parsed{nullptr, parse_config(src)};
    try {
        return Parsed{parse_term(src), nullptr};
    } catch (const ParseError&) {
        // e.g. "(main M) || child N" starts with '('
        return Parsed{nullptr, parse_config(src)};
    }
}

TypePtr parse_type(const std::string& src) {
    Parser p{lex(src)};
    TypePtr t = p.parse_type_inner();
    if (!p.at_eof()) p.fail("trailing input after type");
    return t;
}

SessionPtr parse_session(const std::string& src) {
    TypePtr t = parse_type(src);
    if (!is_session_type(t))
        throw ParseError(1, 1, "expected a session type");
    return t->s;
}

HyperEnv parse_hyperenv(const std::string& src) {
    Parser p{lex(src)};
    HyperEnv h;
    h.push_back(p.parse_env_segment());
    while (p.accept_sym("|")) h.push_back(p.parse_env_segment());
    if (!p.at_eof()) p.fail("trailing input after hyper-environment");
    return h;
}

GvEnv parse_gv_env(const std::string& src) {
    Parser p{lex(src)};
    GvEnv env;
    if (p.at_eof()) return env;
    for (;;) {
        Name x = p.expect_ident();
        if (p.accept_sym("~")) {
            Name y = p.expect_ident();
            p.expect_sym(":");
            env.locks.push_back({x, y, p.parse_session_inner()});
        } else {
            p.expect_sym(":");
            env.bindings.emplace_back(x, p.parse_type_inner());
        }
        if (!p.accept_sym(",")) break;
    }
    if (!p.at_eof()) p.fail("trailing input after environment");
    return env;
}

CoNameSet parse_conames(const std::string& src) {
    Parser p{lex(src)};
    CoNameSet names;
    if (p.at_eof()) return names;
    for (;;) {
        p.expect_sym("{");
        Name x = p.expect_ident();
        p.expect_sym(",");
        Name y = p.expect_ident();
        p.expect_sym("}");
        names.emplace_back(x, y);
        if (!p.accept_sym(",")) break;
    }
    if (!p.at_eof()) p.fail("trailing input after co-name set");
    return names;
}

SessionPtr choice_plus(const SessionPtr& s1, const SessionPtr& s2) {
    return s_send(t_unit(),
                  s_send(t_sum(t_session(dual(s1)), t_session(dual(s2))),
                         s_end_out()));
}
SessionPtr choice_with(const SessionPtr& s1, const SessionPtr& s2) {
    return s_recv(t_unit(),
                  s_recv(t_sum(t_session(s1), t_session(s2)), s_end_in()));
}
SessionPtr choice_plus_empty() {
    return s_send(t_unit(), s_send(t_void(), s_end_out()));
}
SessionPtr choice_with_empty() {
    return s_recv(t_unit(), s_recv(t_void(), s_end_in()));
}

TermPtr select_term(bool left, const SessionPtr& s1, const SessionPtr& s2) {
    SessionPtr enc = choice_plus(s1, s2);
    TypePtr sum = t_sum(t_session(dual(s1)), t_session(dual(s2)));
    Name x = "x", y = "y";
    TermPtr inj = left ? mk_inl(t_session(dual(s2)), mk_var(y))
                       : mk_inr(t_session(dual(s1)), mk_var(y));
    SessionPtr chosen_dual = left ? dual(s1) : dual(s2);
    // \x:enc. let x = send((),x) in fork (\y:~chosen. send (inj y, x))
    TermPtr inner = mk_app(
        mk_const(ConstTag::Fork),
        mk_lam(y, t_session(chosen_dual),
               mk_app(mk_const(ConstTag::SendK), mk_pair(inj, mk_var(x)))));
    TermPtr body = mk_let(x, t_session(s_send(sum, s_end_out())),
                          mk_app(mk_const(ConstTag::SendK),
                                 mk_pair(mk_unit(), mk_var(x))),
                          inner);
    return mk_lam(x, t_session(enc), body);
}

TermPtr offer_term(const TermPtr& scrutinee, const Name& xl, const TermPtr& left,
                   const Name& xr, const TermPtr& right) {
    NameSet avoid = all_names(scrutinee);
    for (const auto& t : {left, right}) {
        NameSet more = all_names(t);
        avoid.insert(more.begin(), more.end());
    }
    avoid.insert(xl);
    avoid.insert(xr);
    // The source expansion binds z twice; we rename the inner binder.
    Name u = fresh_name("u", avoid);
    Name z = fresh_name("z", avoid);
    Name w = fresh_name("w", avoid);
    Name z2 = fresh_name("z", avoid);
    return mk_letpair(
        u, z, mk_app(mk_const(ConstTag::RecvK), scrutinee),
        mk_letunit(
            mk_var(u),
            mk_letpair(w, z2, mk_app(mk_const(ConstTag::RecvK), mk_var(z)),
                       mk_letunit(mk_app(mk_const(ConstTag::Wait), mk_var(z2)),
                                  mk_case(mk_var(w), xl, left, xr, right)))));
}

TermPtr offer_empty_term(const TermPtr& scrutinee, const TypePtr& result) {
    NameSet avoid = all_names(scrutinee);
    Name u = fresh_name("u", avoid);
    Name c = fresh_name("c", avoid);
    Name z = fresh_name("z", avoid);
    Name c2 = fresh_name("c", avoid);
    return mk_letpair(
        u, c, mk_app(mk_const(ConstTag::RecvK), scrutinee),
        mk_letunit(
            mk_var(u),
            mk_letpair(z, c2, mk_app(mk_const(ConstTag::RecvK), mk_var(c)),
                       mk_letunit(mk_app(mk_const(ConstTag::Wait), mk_var(c2)),
                                  mk_absurd(result, mk_var(z))))));
}

TermPtr spawn_encoding() {
    // \f:1-o1. let x = fork (\y:end. let () = close y in f ()) in close x
    Name f = "f", x = "x", y = "y";
    TermPtr forked =
        mk_lam(y, t_session(s_end()),
               mk_letunit(mk_app(mk_const(ConstTag::Close), mk_var(y)),
                          mk_app(mk_var(f), mk_unit())));
    return mk_lam(f, t_lolli(t_unit(), t_unit()),
                  mk_let(x, t_session(s_end()),
                         mk_app(mk_const(ConstTag::Fork), forked),
                         mk_app(mk_const(ConstTag::Close), mk_var(x))));
}

}  // namespace hgv
