#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "semantics.hpp"
#include "surface.hpp"

#include "gen.hpp"

using namespace hgv;
using hgvgen::Rng;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static bool same_runtime_type(const RuntimeType& a, const RuntimeType& b) {
    if (a.has_main() != b.has_main()) return false;
    return !a.has_main() || type_eq(*a.main, *b.main);
}

// Checks that every successor of c retypes with the same runtime type, and
// records the rules seen.
static void check_preservation(const ConfigPtr& c, const HyperEnv& h,
                               bool mix, std::set<std::string>& rules) {
    RuntimeType rt = check_config(h, c, mix);
    for (const Successor& s : config_step_all(c, mix)) {
        rules.insert(s.redex.rule);
        CAPTURE(s.redex.rule);
        CAPTURE(show_config(c));
        RuntimeType rt2 = check_config(h, s.config, mix);
        CHECK(same_runtime_type(rt, rt2));
    }
}

// Walks a deterministic run, re-checking preservation at every state.
static void check_preservation_along_run(const ConfigPtr& c0,
                                         const HyperEnv& h, bool mix,
                                         std::set<std::string>& rules) {
    ConfigPtr c = c0;
    int fuel = 10 * config_size(c0) + 10;
    while (true) {
        check_preservation(c, h, mix, rules);
        auto succs = config_step_all(c, mix);
        if (succs.empty()) break;
        c = succs.front().config;
        REQUIRE(--fuel > 0);
    }
}

TEST_CASE("preservation on 1000 generated ground configurations") {
    std::set<std::string> rules;
    int checked = 0;
    for (unsigned seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        RuntimeType rt = check_config(gc.env, gc.config);
        REQUIRE(rt.has_main());
        ++checked;
        // Every state along a random run re-typechecks with the same type.
        ConfigPtr c = gc.config;
        Rng sched(seed ^ 0x9e3779b9u);
        int fuel = 10 * config_size(c) + 10;
        while (true) {
            check_preservation(c, gc.env, false, rules);
            auto succs = config_step_all(c);
            if (succs.empty()) break;
            c = succs[hgvgen::pick(sched, (int)succs.size())].config;
            REQUIRE(--fuel > 0);
        }
    }
    CHECK(checked == 1000);
    // The generator alone exercises the core communication rules.
    for (const char* r : {"E-Lam", "E-Unit", "E-Pair", "E-Inl",
                          "E-Comm-Send", "E-Comm-Close"}) {
        CAPTURE(r);
        CHECK(rules.count(r) == 1);
    }
}

TEST_CASE("preservation with directed coverage of every rule") {
    std::set<std::string> base_rules;
    HyperEnv closed = parse_hyperenv("");
    // Corpus programs.
    check_preservation_along_run(
        parse_config(slurp("examples/hgv/ping_closed.hgv")), closed, false,
        base_rules);
    check_preservation_along_run(
        parse_config(slurp("examples/hgv/vending.hgv")), closed, false,
        base_rules);
    check_preservation_along_run(
        parse_config(slurp("examples/hgv/link_example.hgv")), closed, false,
        base_rules);
    check_preservation_along_run(
        mk_thread(true,
                  parse_term(slurp("examples/hgv/higher_order.hgv"))),
        closed, false, base_rules);
    // Micro-configurations for the remaining term rules.
    check_preservation_along_run(
        parse_config("main (case inr [0] () { inl b -> absurd [1] b ; "
                     "inr a -> a })"),
        closed, false, base_rules);
    for (const char* r :
         {"E-Lam", "E-Unit", "E-Pair", "E-Inl", "E-Inr", "E-Reify-Fork",
          "E-Reify-Link", "E-Comm-Send", "E-Comm-Close", "E-Comm-Link"}) {
        CAPTURE(r);
        CHECK(base_rules.count(r) == 1);
    }

    // Mix-variant rules.
    std::set<std::string> mix_rules;
    check_preservation_along_run(
        parse_config(slurp("examples/hgv/spawn_mix.hgv")), closed, true,
        mix_rules);
    check_preservation_along_run(
        parse_config("new (a a' : end). new (b b' : end). "
                     "( child (let () = close a in ()) "
                     "  || child (link ((a', b))) "
                     "  || main (let () = close b' in ()) )"),
        closed, true, mix_rules);
    for (const char* r : {"E-Link-Mix", "E-Close"}) {
        CAPTURE(r);
        CHECK(mix_rules.count(r) == 1);
    }
}

TEST_CASE("congruence rewrites retype identically") {
    for (unsigned seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        RuntimeType rt = check_config(gc.env, gc.config);

        // Alpha-renaming every bound name.
        ConfigPtr alpha = freshen_config(gc.config, all_names(gc.config));
        CHECK(config_equiv(gc.config, alpha));
        CHECK(same_runtime_type(rt, check_config(gc.env, alpha)));

        // Commuted restrictions and parallel components.
        FlatConfig flat = extrude(freshen_config(gc.config, {}));
        std::reverse(flat.binders.begin(), flat.binders.end());
        std::rotate(flat.threads.begin(),
                    flat.threads.begin() +
                        (flat.threads.empty()
                             ? 0
                             : (long)(seed % flat.threads.size())),
                    flat.threads.end());
        ConfigPtr shuffled = assemble(flat.binders, flat.threads);
        CHECK(config_equiv(gc.config, shuffled));
        CHECK(same_runtime_type(rt, check_config(gc.env, shuffled)));

        // Swapping a restriction's endpoints dualises its annotation.
        if (!flat.binders.empty()) {
            auto binders = flat.binders;
            binders[0] = ResBinder{binders[0].y, binders[0].x,
                                   dual(binders[0].ann)};
            ConfigPtr swapped = assemble(binders, flat.threads);
            CHECK(config_equiv(gc.config, swapped));
            CHECK(same_runtime_type(rt, check_config(gc.env, swapped)));
        }
    }
}

TEST_CASE("one-step diamond and strong normalisation") {
    for (unsigned seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        CAPTURE(seed);
        CHECK(diamond_check(gc.config));
        // Runs terminate within the size-derived fuel, strictly shrinking.
        int fuel = 10 * config_size(gc.config);
        RunResult r = run(gc.config, gc.env, false, RunPolicy::Random, seed,
                          fuel);
        CHECK((int)r.steps.size() <= fuel);
        int prev = config_size(gc.config);
        for (const RunStep& st : r.steps) {
            int sz = config_size(st.config);
            CHECK(sz < prev);
            prev = sz;
        }
        // Determinism of the result: two schedules join at the same value.
        RunResult r2 = run(gc.config, gc.env, false, RunPolicy::Random,
                           seed + 1, fuel);
        CHECK(config_equiv(r.terminal, r2.terminal));
    }
}

TEST_CASE("global progress on ground configurations") {
    for (unsigned seed = 1000; seed < 1300; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        ConfigPtr c = gc.config;
        Rng sched(seed);
        int fuel = 10 * config_size(c) + 10;
        while (true) {
            ProgressReport pr = classify_progress(c, gc.env);
            // A well-typed ground configuration is never stuck.
            REQUIRE((pr.kind == ProgressKind::Reducible ||
                     pr.kind == ProgressKind::MainValue));
            if (pr.kind == ProgressKind::MainValue) {
                // Terminal states carry no residual threads.
                CHECK(extrude(freshen_config(c, {})).threads.size() == 1);
                CHECK(is_value(pr.value));
                break;
            }
            REQUIRE(!pr.redexes.empty());
            c = pr.redexes[hgvgen::pick(sched, (int)pr.redexes.size())]
                    .config;
            REQUIRE(--fuel > 0);
        }
    }
}

TEST_CASE("tree canonical forms on corpus and generated configurations") {
    HyperEnv closed = parse_hyperenv("");
    std::vector<std::pair<ConfigPtr, HyperEnv>> inputs = {
        {parse_config(slurp("examples/hgv/ping_closed.hgv")), closed},
        {parse_config(slurp("examples/hgv/vending.hgv")), closed},
        {parse_config(slurp("examples/hgv/link_example.hgv")), closed},
        {parse_config(slurp("examples/hgv/ping.hgv")),
         parse_hyperenv("ping: 1")},
    };
    for (unsigned seed = 2000; seed < 2200; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        inputs.push_back({gc.config, gc.env});
    }
    for (auto& [c, h] : inputs) {
        CAPTURE(show_config(c));
        CanonicalConfig tcf = tree_canonical_form(c, h);
        // Shape: each prefix entry is an auxiliary (child or link) thread
        // owning the first endpoint of its binder.
        for (const TcfEntry& e : tcf.prefix) {
            CHECK((e.aux->tag == ConfigTag::Thread ||
                   e.aux->tag == ConfigTag::LinkThread));
            if (e.aux->tag == ConfigTag::Thread) CHECK_FALSE(e.aux->is_main);
            CHECK(free_names(e.aux).count(e.binder.x) == 1);
        }
        CHECK(tcf.final_thread->tag == ConfigTag::Thread);
        ConfigPtr rebuilt = tcf.to_config();
        // The canonical form is congruent to the input and retypes under
        // both typing disciplines.
        CHECK(config_equiv(rebuilt, c));
        RuntimeType rt = check_config(h, c);
        CHECK(same_runtime_type(rt, check_config(h, rebuilt)));
        GvEnv g;
        for (auto& [n, t] : h[0].bindings) g.bindings.emplace_back(n, t);
        CHECK(same_runtime_type(rt, gv_check_config(g, rebuilt)));
    }
}
