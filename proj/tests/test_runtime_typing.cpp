#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "runtime_typing.hpp"
#include "surface.hpp"

using namespace hgv;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Environments as order-insensitive fingerprints.
static std::set<std::string> env_fp(const TypeEnv& e) {
    std::set<std::string> s;
    for (auto& [n, t] : e.bindings) s.insert(n + " : " + show_type(t));
    return s;
}
static std::multiset<std::set<std::string>> hyper_fp(const HyperEnv& h) {
    std::multiset<std::set<std::string>> s;
    for (auto& e : h) s.insert(env_fp(e));
    return s;
}

// The ping configuration's parallel body and the enclosing restriction.
static const char* kPingBody =
    "child (send ((), x)) || "
    "main (let (u, y') = recv y in let () = u in let () = wait y' in ping)";
static const char* kPingFull =
    "new (x y : !1.end!). "
    "( child (send ((), x)) || "
    "  main (let (u, y') = recv y in let () = u in let () = wait y' in ping) )";

TEST_CASE("ping: hyper-environment typing of the open body") {
    ConfigPtr body = parse_config(kPingBody);
    HyperEnv h = parse_hyperenv("x: !1.end! | y: ?1.end?, ping: 1");
    RuntimeType rt = check_config(h, body);
    REQUIRE(rt.has_main());
    CHECK(type_eq(*rt.main, t_unit()));
    // The same bindings grouped wrongly are rejected: the groups must match
    // the hyper-environment member for member.
    HyperEnv bad = parse_hyperenv("x: !1.end!, ping: 1 | y: ?1.end?");
    CHECK_THROWS_AS(check_config(bad, body), ConfigError);
    // And as a single flat environment the split fails too.
    HyperEnv flat = parse_hyperenv("x: !1.end!, y: ?1.end?, ping: 1");
    CHECK_THROWS_AS(check_config(flat, body), ConfigError);
}

TEST_CASE("ping: full configuration under each discipline") {
    ConfigPtr c = parse_config(kPingFull);
    RuntimeType rt = check_config(parse_hyperenv("ping: 1"), c);
    REQUIRE(rt.has_main());
    CHECK(type_eq(*rt.main, t_unit()));

    GvEnv g = parse_gv_env("ping: 1");
    RuntimeType gt = gv_check_config(g, c);
    REQUIRE(gt.has_main());
    CHECK(type_eq(*gt.main, t_unit()));

    // The lock discipline types the body directly under a channel lock.
    ConfigPtr body = parse_config(kPingBody);
    RuntimeType bt = gv_check_config(parse_gv_env("ping: 1, x~y: !1.end!"),
                                     body);
    REQUIRE(bt.has_main());
    CHECK(type_eq(*bt.main, t_unit()));
}

TEST_CASE("main value configuration") {
    RuntimeType rt = check_config(parse_hyperenv(""),
                                  parse_config("main ()"));
    REQUIRE(rt.has_main());
    CHECK(type_eq(*rt.main, t_unit()));
}

// A three-thread chain: A sends on x, B relays x' -> y, C receives on y'.
static const char* kChainA = "child (send ((), x))";
static const char* kChainB =
    "child (let (u, x2) = recv x' in let () = u in let () = wait x2 in "
    "send ((), y))";
static const char* kChainC =
    "main (let (u, y2) = recv y' in let () = u in let () = wait y2 in ())";

static ConfigPtr chain(const std::string& par) {
    return parse_config("new (x x' : !1.end!). new (y y' : !1.end!). (" +
                        par + ")");
}

TEST_CASE("reassociation: accepted with hyper-environments, rejected by locks") {
    std::string a = kChainA, b = kChainB, c = kChainC;
    ConfigPtr assoc = chain(a + " || (" + b + " || " + c + ")");
    ConfigPtr reassoc = chain("(" + a + " || " + c + ") || " + b);

    HyperEnv closed = parse_hyperenv("");
    CHECK(check_config(closed, assoc).has_main());
    CHECK(check_config(closed, reassoc).has_main());

    GvEnv g;  // closed
    CHECK(gv_check_config(g, assoc).has_main());
    try {
        gv_check_config(g, reassoc);
        FAIL("expected a lock-discipline failure");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::ZeroOrManyLocks);
    }
}

TEST_CASE("cyclic topologies are rejected") {
    // Two channels between the same two threads.
    ConfigPtr c = parse_config(
        "new (x x' : !1.end!). new (y y' : !1.end!). "
        "( child (let (u, y2) = recv y' in let () = u in let () = wait y2 in "
        "         send ((), x)) || "
        "  main (let (u, x2) = recv x' in let () = u in let () = wait x2 in "
        "        send ((), y)) )");
    try {
        check_config(parse_hyperenv("").empty() ? HyperEnv{TypeEnv{}}
                                                : parse_hyperenv(""),
                     c);
        FAIL("expected a cycle error");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::Cycle);
    }
}

TEST_CASE("link threads demand dual endpoints") {
    HyperEnv good = parse_hyperenv("t: end?, a: !1.end!, b: ?1.end?");
    RuntimeType rt = check_config(good, parse_config("link t a b"));
    CHECK_FALSE(rt.has_main());

    HyperEnv bad = parse_hyperenv("t: end?, a: !1.end!, b: !1.end!");
    try {
        check_config(bad, parse_config("link t a b"));
        FAIL("expected a duality error");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::Duality);
    }
}

TEST_CASE("structural errors") {
    try {
        check_config(parse_hyperenv(" | "),
                     parse_config("main () || main ()"));
        FAIL("expected multiple-mains");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::MultipleMains);
    }
    try {
        check_config(parse_hyperenv(""), parse_config("child ()"));
        FAIL("expected a child-result error");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::ChildResult);
    }
    // Link threads are not part of the Mix variant (link reduces directly).
    try {
        check_config(parse_hyperenv("t: end?, a: !1.end!, b: ?1.end?"),
                     parse_config("link t a b"), true);
        FAIL("expected a structure error");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::Structure);
    }
    // A lock that reaches a single thread is malformed.
    try {
        gv_check_config(parse_gv_env("x~y: !1.end!"),
                        parse_config("main (let (a, b) = (x, y) in "
                                     "link ((a, b)))"));
        FAIL("expected a lock-at-thread error");
    } catch (const ConfigError& e) {
        CHECK(e.kind == ConfigErrorKind::LockAtThread);
    }
}

TEST_CASE("flatten expands locks into dual bindings") {
    GvEnv g = parse_gv_env("p: 1, x~y: !1.end!");
    TypeEnv f = flatten(g);
    CHECK(env_fp(f) ==
          std::set<std::string>{"p : " + show_type(t_unit()),
                                "x : " + show_type(t_session(parse_session("!1.end!"))),
                                "y : " + show_type(t_session(parse_session("?1.end?")))});
}

TEST_CASE("splitting yields the thread groups of the flattened environment") {
    ConfigPtr body = parse_config(kPingBody);
    GvEnv g = parse_gv_env("ping: 1, x~y: !1.end!");
    HyperEnv h = splitting(g, body);
    CHECK(hyper_fp(h) ==
          hyper_fp(parse_hyperenv("x: !1.end! | y: ?1.end?, ping: 1")));
    // The split re-checks under the hyper-environment discipline.
    CHECK(check_config(h, body).has_main());
    // Splitting partitions the flattened environment exactly.
    std::set<std::string> whole = env_fp(flatten(g));
    std::set<std::string> parts;
    size_t total = 0;
    for (auto& e : h) {
        auto fp = env_fp(e);
        total += fp.size();
        parts.insert(fp.begin(), fp.end());
    }
    CHECK(parts == whole);
    CHECK(total == whole.size());
}

TEST_CASE("freshen_config separates bound names") {
    ConfigPtr c = parse_config(
        "new (x y : !1.end!). ( child (send ((), x)) || "
        "main (let (u, y') = recv y in let () = u in wait y') )");
    NameSet avoid{"x", "y"};
    ConfigPtr f = freshen_config(c, avoid);
    CHECK(alpha_eq(c, f));
    REQUIRE(f->tag == ConfigTag::Res);
    CHECK(f->x != "x");
    CHECK(f->y != "y");
}

TEST_CASE("extrude floats every restriction to a prefix") {
    ConfigPtr c = parse_config(kPingFull);
    FlatConfig fc = extrude(freshen_config(c, {}));
    CHECK(fc.binders.size() == 1);
    CHECK(fc.threads.size() == 2);
    CHECK(session_eq(fc.binders[0].ann, parse_session("!1.end!")));
}

TEST_CASE("corpus configurations typecheck under their documented environments") {
    CHECK(check_config(parse_hyperenv("ping: 1"),
                       parse_config(slurp("examples/hgv/ping.hgv")))
              .has_main());
    CHECK(check_config(parse_hyperenv(""),
                       parse_config(slurp("examples/hgv/ping_closed.hgv")))
              .has_main());
    CHECK(check_config(parse_hyperenv(""),
                       parse_config(slurp("examples/hgv/vending.hgv")))
              .has_main());
    // higher_order.hgv is a closed term; it types directly and as a main
    // thread.
    TermPtr ho = parse_term(slurp("examples/hgv/higher_order.hgv"));
    CHECK(type_eq(check_term(TypeEnv{}, ho), t_unit()));
    CHECK(check_config(parse_hyperenv(""), mk_thread(true, ho)).has_main());
    CHECK(check_config(parse_hyperenv(""),
                       parse_config(slurp("examples/hgv/link_example.hgv")))
              .has_main());
    CHECK(check_config(parse_hyperenv(""),
                       parse_config(slurp("examples/hgv/spawn_mix.hgv")), true)
              .has_main());
}
