#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "surface.hpp"
#include "typecheck.hpp"

using namespace hgv;

static TypeEnv env1(const Name& x, TypePtr t) {
    TypeEnv e;
    e.bind(x, std::move(t));
    return e;
}

static TypeErrorKind kind_of(const TypeEnv& env, const std::string& src,
                             bool mix = false) {
    try {
        check_term(env, parse_term(src), mix);
    } catch (const TypeError& e) {
        return e.kind;
    }
    FAIL("expected a type error for: " << src);
    return TypeErrorKind::Mismatch;
}

TEST_CASE("constant schemas, base variant") {
    SessionPtr s = parse_session("!1.end?");
    // link : (S * ~S) -o end!
    CHECK(type_eq(delta_type(ConstTag::Link,
                             t_product(t_session(s), t_session(dual(s))),
                             false),
                  t_session(s_end_out())));
    // fork : (S -o end!) -o ~S
    CHECK(type_eq(delta_type(ConstTag::Fork,
                             t_lolli(t_session(s), t_session(s_end_out())),
                             false),
                  t_session(dual(s))));
    // send : (T * !T.S) -o S
    CHECK(type_eq(delta_type(ConstTag::SendK,
                             t_product(t_unit(),
                                       t_session(s_send(t_unit(), s))),
                             false),
                  t_session(s)));
    // recv : ?T.S -o (T * S)
    CHECK(type_eq(delta_type(ConstTag::RecvK,
                             t_session(s_recv(t_unit(), s)), false),
                  t_product(t_unit(), t_session(s))));
    // wait : end? -o 1
    CHECK(type_eq(delta_type(ConstTag::Wait, t_session(s_end_in()), false),
                  t_unit()));
    // Ill-formed instantiations.
    CHECK_THROWS_AS(delta_type(ConstTag::Link,
                               t_product(t_session(s), t_session(s)), false),
                    TypeError);
    CHECK_THROWS_AS(delta_type(ConstTag::SendK,
                               t_product(t_void(),
                                         t_session(s_send(t_unit(), s))),
                               false),
                    TypeError);
    CHECK_THROWS_AS(delta_type(ConstTag::Wait, t_session(s_end_out()), false),
                    TypeError);
    // Mix-only constants are rejected in the base variant.
    CHECK_THROWS_AS(delta_type(ConstTag::Close, t_session(s_end()), false),
                    TypeError);
    CHECK_THROWS_AS(delta_type(ConstTag::Spawn,
                               t_lolli(t_unit(), t_unit()), false),
                    TypeError);
}

TEST_CASE("constant schemas, Mix variant") {
    SessionPtr s = parse_session("!1.end");
    CHECK(type_eq(delta_type(ConstTag::Link,
                             t_product(t_session(s), t_session(dual(s))),
                             true),
                  t_unit()));
    CHECK(type_eq(delta_type(ConstTag::Fork,
                             t_lolli(t_session(s), t_unit()), true),
                  t_session(dual(s))));
    CHECK(type_eq(delta_type(ConstTag::Close, t_session(s_end()), true),
                  t_unit()));
    CHECK(type_eq(delta_type(ConstTag::Spawn, t_lolli(t_unit(), t_unit()),
                             true),
                  t_unit()));
    // The base terminator discipline is swapped out entirely.
    CHECK_THROWS_AS(delta_type(ConstTag::Wait, t_session(s_end_in()), true),
                    TypeError);
    CHECK_THROWS_AS(delta_type(ConstTag::Fork,
                               t_lolli(t_session(s), t_session(s_end_out())),
                               true),
                    TypeError);
}

TEST_CASE("well-typed programs") {
    TypeEnv empty;
    CHECK(type_eq(check_term(empty, parse_term("()")), t_unit()));
    CHECK(type_eq(check_term(empty, parse_term("\\x : 1. x")),
                  t_lolli(t_unit(), t_unit())));
    CHECK(type_eq(check_term(empty, parse_term("let x : 1 = () in x")),
                  t_unit()));
    CHECK(type_eq(check_term(empty, parse_term("(\\x : 1 * 1. let (a, b) = x in (b, a)) ((), ())")),
                  t_product(t_unit(), t_unit())));
    // Sum elimination must consume the binder in both branches.
    CHECK(type_eq(check_term(empty,
                             parse_term("case inl [0] () { inl a -> a ; inr b -> absurd [1] b }")),
                  t_unit()));
    // A session pipeline: fork a sender, receive, wait.
    TypePtr t = check_term(
        empty,
        parse_term("let y : ?1.end? = fork (\\x : !1.end!. send ((), x)) in "
                   "let (u, y') = recv y in let () = u in wait y'"));
    CHECK(type_eq(t, t_unit()));
}

TEST_CASE("linearity violations are reported precisely") {
    TypeEnv e = env1("x", t_unit());
    CHECK(kind_of(e, "(x, x)") == TypeErrorKind::Reuse);
    CHECK(kind_of(e, "()") == TypeErrorKind::Unused);
    CHECK(kind_of(env1("f", t_lolli(t_unit(), t_unit())),
                  "\\x : 1. f") == TypeErrorKind::Unused);
    TypeEnv empty;
    CHECK(kind_of(empty, "x") == TypeErrorKind::Unbound);
    CHECK(kind_of(empty, "send") == TypeErrorKind::ConstantUse);
    CHECK(kind_of(empty, "\\x. x") == TypeErrorKind::MissingAnnotation);
    CHECK(kind_of(empty, "() ()") == TypeErrorKind::Mismatch);
    CHECK(kind_of(empty, "(\\x : 1. x) (\\y : 1. y)") ==
          TypeErrorKind::Mismatch);
    // Branch binders must be consumed in their own branch.
    CHECK(kind_of(env1("s", t_sum(t_unit(), t_unit())),
                  "case s { inl a -> a ; inr b -> () }") ==
          TypeErrorKind::Unused);
    // No weakening: a session endpoint cannot be dropped.
    CHECK(kind_of(env1("x", t_session(s_end_in())), "()") ==
          TypeErrorKind::Unused);
}

TEST_CASE("branches must agree and scrutinees must match") {
    TypeEnv e = env1("s", t_sum(t_unit(), t_product(t_unit(), t_unit())));
    CHECK(kind_of(e, "case s { inl a -> a ; inr b -> b }") ==
          TypeErrorKind::Mismatch);
    TypeEnv empty;
    CHECK(kind_of(empty, "case () { inl a -> a ; inr b -> b }") ==
          TypeErrorKind::Mismatch);
    CHECK(kind_of(empty, "let (a, b) = () in (a, b)") ==
          TypeErrorKind::Mismatch);
    CHECK(kind_of(empty, "let () = \\x : 1. x in ()") ==
          TypeErrorKind::Mismatch);
    CHECK(kind_of(env1("v", t_void()), "absurd [1] ()") ==
          TypeErrorKind::Mismatch);
}

TEST_CASE("absurd accepts any result type and consumes the rest") {
    TypeEnv e = env1("v", t_void());
    CHECK(type_eq(check_term(e, parse_term("absurd [1 -o 1] v")),
                  t_lolli(t_unit(), t_unit())));
}

TEST_CASE("check_value restricts to syntactic values") {
    TypeEnv empty;
    CHECK(type_eq(check_value(empty, parse_term("((), ())")),
                  t_product(t_unit(), t_unit())));
    CHECK_THROWS_AS(check_value(empty, parse_term("(\\x : 1. x) ()")),
                    TypeError);
}
