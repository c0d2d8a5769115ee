#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "terms.hpp"
#include "types.hpp"

#include "gen.hpp"

using namespace hgv;

TEST_CASE("duality is involutive and swaps polarities") {
    SessionPtr s =
        s_send(t_unit(), s_recv(t_lolli(t_unit(), t_unit()), s_end_out()));
    CHECK(session_eq(dual(dual(s)), s));
    CHECK(dual(s)->tag == SessionTag::Recv);
    CHECK(dual(s)->cont->tag == SessionTag::Send);
    CHECK(dual(s)->cont->cont->tag == SessionTag::EndIn);
    CHECK(session_eq(dual(s_end_out()), s_end_in()));
    CHECK(session_eq(dual(s_end_in()), s_end_out()));
    CHECK(session_eq(dual(s_end()), s_end()));

    hgvgen::Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        SessionPtr r = hgvgen::gen_session(rng, 4);
        CHECK(session_eq(dual(dual(r)), r));
    }
}

TEST_CASE("type equality is structural") {
    TypePtr a = t_product(t_unit(), t_sum(t_void(), t_unit()));
    TypePtr b = t_product(t_unit(), t_sum(t_void(), t_unit()));
    CHECK(type_eq(a, b));
    CHECK_FALSE(type_eq(a, t_product(t_unit(), t_unit())));
    CHECK_FALSE(type_eq(t_session(s_end_out()), t_session(s_end_in())));
    CHECK(is_session_type(t_session(s_end())));
    CHECK_FALSE(is_session_type(t_unit()));
}

TEST_CASE("substitution avoids capture") {
    // (\y:1. x) with x := y must rename the binder.
    TermPtr m = mk_lam("y", t_unit(), mk_pair(mk_var("x"), mk_var("y")));
    TermPtr r = subst(m, mk_var("y"), "x");
    REQUIRE(r->tag == TermTag::Lam);
    CHECK(r->x != "y");  // binder renamed
    NameSet fn = free_names(r);
    CHECK(fn.count("y") == 1);
    // The substituted free y and the bound occurrence stay distinct.
    CHECK(alpha_eq(r, mk_lam("z", t_unit(),
                             mk_pair(mk_var("y"), mk_var("z")))));
}

TEST_CASE("substitution respects shadowing") {
    // (\x:1. x) is unaffected by substituting for x.
    TermPtr m = mk_lam("x", t_unit(), mk_var("x"));
    CHECK(alpha_eq(subst(m, mk_unit(), "x"), m));
}

TEST_CASE("alpha equivalence on terms and configurations") {
    TermPtr a = mk_lam("x", t_unit(), mk_var("x"));
    TermPtr b = mk_lam("y", t_unit(), mk_var("y"));
    CHECK(alpha_eq(a, b));
    CHECK_FALSE(alpha_eq(a, mk_lam("y", t_unit(), mk_unit())));

    ConfigPtr c1 = mk_res("x", "y", s_end_out(),
                          mk_par(mk_thread(false, mk_var("x")),
                                 mk_thread(true, mk_app(mk_app(mk_const(ConstTag::Wait), mk_var("y")), mk_unit()))));
    ConfigPtr c2 = mk_res("a", "b", s_end_out(),
                          mk_par(mk_thread(false, mk_var("a")),
                                 mk_thread(true, mk_app(mk_app(mk_const(ConstTag::Wait), mk_var("b")), mk_unit()))));
    CHECK(alpha_eq(c1, c2));
    // Same skeleton but different session annotation is not alpha-equal.
    ConfigPtr c3 = mk_res("a", "b", s_end_in(),
                          mk_par(mk_thread(false, mk_var("a")),
                                 mk_thread(true, mk_app(mk_app(mk_const(ConstTag::Wait), mk_var("b")), mk_unit()))));
    CHECK_FALSE(alpha_eq(c1, c3));
}

TEST_CASE("free and bound name collection") {
    TermPtr m = mk_letpair("a", "b", mk_var("p"),
                           mk_pair(mk_var("a"), mk_var("b")));
    NameSet fn = free_names(m);
    CHECK(fn == NameSet{"p"});
    NameSet an = all_names(m);
    CHECK(an.count("a") == 1);
    CHECK(an.count("b") == 1);
    CHECK(an.count("p") == 1);

    ConfigPtr c = mk_res("x", "y", s_end_out(),
                         mk_par(mk_link_thread("z", "x", "y"),
                                mk_thread(true, mk_unit())));
    CHECK(free_names(c) == NameSet{"z"});
    CHECK(all_names(c).count("x") == 1);
}

TEST_CASE("fresh_name picks an unused name and reserves it") {
    NameSet avoid{"x"};
    Name a = fresh_name("x", avoid);
    CHECK(a != "x");
    CHECK(avoid.count(a) == 1);
    Name b = fresh_name("x", avoid);
    CHECK(b != a);
    CHECK(b != "x");
    NameSet empty;
    CHECK(fresh_name("y", empty) == "y");
}

TEST_CASE("size measures count nodes") {
    CHECK(term_size(mk_unit()) == 1);
    CHECK(term_size(mk_pair(mk_unit(), mk_unit())) == 3);
    ConfigPtr c = mk_par(mk_thread(true, mk_unit()),
                         mk_thread(false, mk_unit()));
    CHECK(config_size(c) > 2);
    CHECK(config_size(c) ==
          config_size(mk_thread(true, mk_unit())) +
              config_size(mk_thread(false, mk_unit())) + 1);
}

TEST_CASE("value predicate") {
    CHECK(is_value(mk_unit()));
    CHECK(is_value(mk_lam("x", t_unit(), mk_var("x"))));
    CHECK(is_value(mk_pair(mk_unit(), mk_unit())));
    CHECK(is_value(mk_inl(t_unit(), mk_unit())));
    CHECK(is_value(mk_const(ConstTag::SendK)));
    CHECK_FALSE(is_value(mk_app(mk_lam("x", t_unit(), mk_var("x")), mk_unit())));
    CHECK_FALSE(is_value(mk_pair(mk_app(mk_const(ConstTag::Wait), mk_var("x")),
                                 mk_unit())));
}

TEST_CASE("rename_config renames link-thread endpoints") {
    ConfigPtr c = mk_link_thread("z", "x", "y");
    ConfigPtr r = rename_config(c, "w", "x");
    CHECK(r->x == "w");
    CHECK(r->z == "z");
    CHECK(r->y == "y");
}

TEST_CASE("printers produce the documented notation") {
    CHECK(show_type(t_lolli(t_unit(), t_unit())).find("-o") != std::string::npos);
    CHECK(show_session(s_send(t_unit(), s_end_out())).find("!") != std::string::npos);
    CHECK(show_session(s_end_in()).find("end?") != std::string::npos);
    CHECK(show_const(ConstTag::Fork) == "fork");
    std::string s = show_config(mk_par(mk_thread(true, mk_unit()),
                                       mk_thread(false, mk_var("x"))));
    CHECK(s.find("main") != std::string::npos);
    CHECK(s.find("||") != std::string::npos);
}
