#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semantics.hpp"
#include "surface.hpp"

using namespace hgv;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static std::set<std::string> rule_names(const RunResult& r) {
    std::set<std::string> s;
    for (auto& st : r.steps) s.insert(st.redex.rule);
    return s;
}

TEST_CASE("term reduction is call-by-value with named rules") {
    auto step = [](const char* src) {
        auto r = term_step_tagged(parse_term(src));
        REQUIRE(r.has_value());
        return *r;
    };
    auto [m1, r1] = step("(\\x : 1. x) ()");
    CHECK(r1 == "E-Lam");
    CHECK(alpha_eq(m1, mk_unit()));

    auto [m2, r2] = step("let () = () in ()");
    CHECK(r2 == "E-Unit");
    CHECK(alpha_eq(m2, mk_unit()));

    auto [m3, r3] = step("let (a, b) = ((), \\x : 1. x) in b a");
    CHECK(r3 == "E-Pair");
    CHECK(alpha_eq(m3, parse_term("(\\x : 1. x) ()")));

    auto [m4, r4] = step("case inl [0] () { inl a -> a ; inr b -> absurd [1] b }");
    CHECK(r4 == "E-Inl");
    CHECK(alpha_eq(m4, mk_unit()));

    auto [m5, r5] = step("case inr [0] () { inl b -> absurd [1] b ; inr a -> a }");
    CHECK(r5 == "E-Inr");
    CHECK(alpha_eq(m5, mk_unit()));

    // Reduction happens left to right under evaluation contexts.
    auto [m6, r6] = step("((\\x : 1. x) (), ())");
    CHECK(r6 == "E-Lam");
    CHECK(alpha_eq(m6, parse_term("((), ())")));

    // Values and communication-blocked terms do not step.
    CHECK_FALSE(term_step(parse_term("()")).has_value());
    CHECK_FALSE(term_step(parse_term("\\x : 1. x")).has_value());
    CHECK_FALSE(term_step(parse_term("send ((), x)")).has_value());
    CHECK_FALSE(term_step(parse_term("wait x")).has_value());
}

TEST_CASE("structural congruence axioms") {
    ConfigPtr a = parse_config("main ()");
    ConfigPtr b = parse_config("child (send ((), x))");
    ConfigPtr c = parse_config("link t p q");
    CHECK(config_equiv(mk_par(a, b), mk_par(b, a)));
    CHECK(config_equiv(mk_par(mk_par(a, b), c), mk_par(a, mk_par(b, c))));
    // Swapping the endpoints of a restriction dualises its annotation.
    CHECK(config_equiv(
        parse_config("new (x y : !1.end!). (child (send ((), x)) || main (let (u,y') = recv y in let () = u in wait y'))"),
        parse_config("new (y x : ?1.end?). (child (send ((), x)) || main (let (u,y') = recv y in let () = u in wait y'))")));
    CHECK_FALSE(config_equiv(
        parse_config("new (x y : !1.end!). (child (send ((), x)) || main (let (u,y') = recv y in let () = u in wait y'))"),
        parse_config("new (y x : !1.end!). (child (send ((), x)) || main (let (u,y') = recv y in let () = u in wait y'))")));
    // Restrictions commute.
    CHECK(config_equiv(
        parse_config("new (x y : end!). new (a b : end!). (child x || child a || main (let () = wait y in wait b))"),
        parse_config("new (a b : end!). new (x y : end!). (child x || child a || main (let () = wait y in wait b))")));
}

TEST_CASE("scope extrusion and alpha-renaming") {
    ConfigPtr inside = parse_config(
        "main () || new (x y : end!). (child x || child (let () = wait y in x'))");
    ConfigPtr outside = parse_config(
        "new (x y : end!). (main () || (child x || child (let () = wait y in x')))");
    CHECK(config_equiv(inside, outside));
    // Alpha: bound names are irrelevant.
    CHECK(config_equiv(
        parse_config("new (a b : end!). (child a || main (wait b))"),
        parse_config("new (p q : end!). (child p || main (wait q))")));
    // Link threads are symmetric in their fused endpoints.
    CHECK(config_equiv(parse_config("link t p q"),
                       parse_config("link t q p")));
    CHECK_FALSE(config_equiv(parse_config("main ()"), parse_config("child ()")));
}

TEST_CASE("fork reifies a child thread") {
    ConfigPtr c = parse_config("main (let y : ?1.end? = fork (\\x : !1.end!. send ((), x)) in let (u, y') = recv y in let () = u in wait y')");
    auto succs = config_step_all(c);
    REQUIRE(succs.size() == 1);
    CHECK(succs[0].redex.rule == "E-Reify-Fork");
    ConfigPtr next = succs[0].config;
    // The successor is a restriction over the child and the continuation.
    FlatConfig fc = extrude(freshen_config(next, {}));
    CHECK(fc.binders.size() == 1);
    CHECK(fc.threads.size() == 2);
    CHECK(check_config(HyperEnv{TypeEnv{}}, next).has_main());
}

TEST_CASE("the ping configuration runs to its main value") {
    ConfigPtr c = parse_config(slurp("examples/hgv/ping_closed.hgv"));
    HyperEnv h = parse_hyperenv("");
    RunResult r = run(c, h);
    REQUIRE(r.terminal != nullptr);
    CHECK(config_equiv(r.terminal, parse_config("main ()")));
    auto rules = rule_names(r);
    CHECK(rules.count("E-Comm-Send") == 1);
    CHECK(rules.count("E-Comm-Close") == 1);
    // Each reduction strictly decreases configuration size.
    int prev = config_size(c);
    for (auto& st : r.steps) {
        CHECK(config_size(st.config) < prev);
        prev = config_size(st.config);
    }
    // Random scheduling reaches the same terminal (confluence).
    RunResult rr = run(c, h, false, RunPolicy::Random, 42);
    CHECK(config_equiv(rr.terminal, r.terminal));
}

TEST_CASE("link threads forward across channels") {
    ConfigPtr c = parse_config(slurp("examples/hgv/link_example.hgv"));
    HyperEnv h = parse_hyperenv("");
    RunResult r = run(c, h);
    CHECK(config_equiv(r.terminal, parse_config("main ()")));
    auto rules = rule_names(r);
    CHECK(rules.count("E-Reify-Link") == 1);
    CHECK(rules.count("E-Comm-Link") == 1);
}

TEST_CASE("the vending machine selects and receives its candy") {
    ConfigPtr c = parse_config(slurp("examples/hgv/vending.hgv"));
    RunResult r = run(c, parse_hyperenv(""));
    CHECK(config_equiv(r.terminal, parse_config("main ()")));
}

TEST_CASE("tree canonical form") {
    ConfigPtr c = parse_config(slurp("examples/hgv/ping_closed.hgv"));
    HyperEnv h = parse_hyperenv("");
    CanonicalConfig tcf = tree_canonical_form(c, h);
    REQUIRE(tcf.prefix.size() == 1);
    // Each auxiliary thread owns the first endpoint of its binder.
    for (auto& entry : tcf.prefix) {
        CHECK(free_names(entry.aux).count(entry.binder.x) == 1);
        CHECK(entry.aux->tag != ConfigTag::Res);
    }
    CHECK(tcf.final_thread->tag == ConfigTag::Thread);
    CHECK(tcf.final_thread->is_main);
    ConfigPtr rebuilt = tcf.to_config();
    CHECK(config_equiv(rebuilt, c));
    // The canonical form retypes under both disciplines.
    CHECK(check_config(h, rebuilt).has_main());
    CHECK(gv_check_config(GvEnv{}, rebuilt).has_main());
    // Canonicalising the canonical form is stable.
    CanonicalConfig again = tree_canonical_form(rebuilt, h);
    CHECK(config_equiv(again.to_config(), rebuilt));

    // A multi-member hyper-environment is rejected.
    ConfigPtr open_body = parse_config(
        "child (send ((), x)) || "
        "main (let (u, y') = recv y in let () = u in let () = wait y' in ())");
    HyperEnv h2 = parse_hyperenv("x: !1.end! | y: ?1.end?");
    try {
        tree_canonical_form(open_body, h2);
        FAIL("expected a singleton-environment error");
    } catch (const SemanticsError& e) {
        CHECK(e.kind == SemanticsErrorKind::NotSingletonEnv);
    }
}

TEST_CASE("independence splits a configuration along its groups") {
    ConfigPtr body = parse_config(
        "child (send ((), x)) || "
        "main (let (u, y') = recv y in let () = u in let () = wait y' in ())");
    HyperEnv h = parse_hyperenv("x: !1.end! | y: ?1.end?");
    auto comps = independence(body, h);
    REQUIRE(comps.size() == 2);
    int mains = 0;
    for (auto& comp : comps) {
        // Each component typechecks alone under its environment.
        RuntimeType rt = check_config(HyperEnv{comp.env}, comp.config);
        CHECK(rt.has_main() == comp.type.has_main());
        if (comp.type.has_main()) ++mains;
    }
    CHECK(mains == 1);
}

TEST_CASE("blocked endpoints") {
    CHECK(*blocked_endpoint(parse_config("child (send ((), x))")) == "x");
    CHECK(*blocked_endpoint(mk_thread(
              true, parse_term("let (u, y') = recv y in let () = u in wait y'"))) ==
          "y");
    CHECK(*blocked_endpoint(parse_config("child x")) == "x");
    CHECK(*blocked_endpoint(parse_config("link t p q")) == "t");
    CHECK_FALSE(blocked_endpoint(parse_config("main ()")).has_value());
    CHECK_FALSE(
        blocked_endpoint(mk_thread(true, parse_term("(\\x : 1. x) ()")))
            .has_value());
}

TEST_CASE("progress classification") {
    HyperEnv closed = parse_hyperenv("");
    auto p1 = classify_progress(parse_config(slurp("examples/hgv/ping_closed.hgv")),
                                closed);
    CHECK(p1.kind == ProgressKind::Reducible);
    CHECK_FALSE(p1.redexes.empty());

    auto p2 = classify_progress(parse_config("main ()"), closed);
    CHECK(p2.kind == ProgressKind::MainValue);
    CHECK(alpha_eq(p2.value, mk_unit()));

    auto p3 = classify_progress(
        parse_config("child (send ((), x)) || "
                     "main (let (u, y') = recv y in let () = u in "
                     "let () = wait y' in ())"),
        parse_hyperenv("x: !1.end! | y: ?1.end?"));
    CHECK(p3.kind == ProgressKind::OpenBlocked);
    REQUIRE(!p3.blocked.empty());
    std::set<Name> blocked_on;
    for (auto& [thr, ep] : p3.blocked) blocked_on.insert(ep);
    CHECK(blocked_on == std::set<Name>{"x", "y"});
}

TEST_CASE("one-step diamond property on examples") {
    CHECK(diamond_check(parse_config(slurp("examples/hgv/ping_closed.hgv"))));
    CHECK(diamond_check(parse_config(slurp("examples/hgv/vending.hgv"))));
    CHECK(diamond_check(parse_config(slurp("examples/hgv/link_example.hgv"))));
}

TEST_CASE("Mix variant: spawn and direct link") {
    // spawn detaches a unit thunk; the run ends with a lone main value.
    ConfigPtr sp = parse_config(slurp("examples/hgv/spawn_mix.hgv"));
    HyperEnv closed = parse_hyperenv("");
    RunResult r = run(sp, closed, true);
    // Mix has no wait: the finished unit child stays alongside the main
    // value.
    CHECK(config_equiv(r.terminal, parse_config("main () || child ()")));
    auto rules = rule_names(r);
    CHECK(rules.count("E-Reify-Fork") == 1);
    CHECK(rules.count("E-Close") == 1);

    // link fuses two channels in place, without a link thread.
    ConfigPtr lk = parse_config(
        "new (a a' : end). new (b b' : end). "
        "( child (let () = close a in ()) "
        "  || child (link ((a', b))) "
        "  || main (let () = close b' in ()) )");
    CHECK(check_config(closed, lk, true).has_main());
    RunResult r2 = run(lk, closed, true);
    CHECK(config_equiv(r2.terminal,
                       parse_config("child () || child () || main ()")));
    CHECK(rule_names(r2).count("E-Link-Mix") == 1);
}

TEST_CASE("assemble rebuilds a binder prefix") {
    std::vector<ResBinder> binders{{"x", "y", s_end_out()}};
    std::vector<ConfigPtr> threads{
        parse_config("child x"),
        parse_config("main (let () = wait y in ())")};
    ConfigPtr c = assemble(binders, threads);
    CHECK(check_config(parse_hyperenv(""), c).has_main());
    CHECK(config_equiv(
        c, parse_config(
               "new (x y : end!). (child x || main (let () = wait y in ()))")));
}
