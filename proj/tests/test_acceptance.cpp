// Acceptance harness: one pass/fail line per top-level criterion.
// Exits nonzero if any criterion fails.
#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aps.hpp"
#include "semantics.hpp"
#include "surface.hpp"
#include "translate.hpp"

#include "gen.hpp"

using namespace hgv;
using hgvgen::Rng;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    expect(in.good(), "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_rt(const RuntimeType& a, const RuntimeType& b) {
    if (a.has_main() != b.has_main()) return false;
    return !a.has_main() || type_eq(*a.main, *b.main);
}

// ---------------------------------------------------------------------
// Criterion 1: the worked examples.
// ---------------------------------------------------------------------

void criterion_examples() {
    // Three environments in a line: a tree whose leaves are the two
    // endpoint groups.
    Multigraph tree = build_aps(
        parse_hyperenv(
            "x: !1.end!, y: ?1.end? | x': ?1.end?, z: 1 | y': !1.end!"),
        parse_conames("{x,x'}, {y,y'}"));
    expect(is_tree(tree), "line example is not a tree");
    expect(leaves(tree) == std::vector<int>{1, 2},
           "line example has wrong leaves");

    // Three environments in a triangle: connected but cyclic.
    Multigraph tri = build_aps(
        parse_hyperenv("x: !1.end!, z': ?1.end? | x': ?1.end?, y: !1.end! | "
                       "y': ?1.end?, z: !1.end!"),
        parse_conames("{x,x'}, {y,y'}, {z,z'}"));
    expect(!is_tree(tri) && is_connected(tri) && !is_acyclic(tri),
           "triangle example is not cyclic");

    // The ping configuration typechecks under the split hyper-environment
    // and under the lock environment, with main type 1.
    ConfigPtr body = parse_config(
        "child (send ((), x)) || "
        "main (let (u, y') = recv y in let () = u in let () = wait y' in "
        "ping)");
    RuntimeType hgv_rt =
        check_config(parse_hyperenv("x: !1.end! | y: ?1.end?, ping: 1"), body);
    expect(hgv_rt.has_main() && type_eq(*hgv_rt.main, t_unit()),
           "ping body does not have hyper-environment type 1");
    RuntimeType gv_rt =
        gv_check_config(parse_gv_env("ping: 1, x~y: !1.end!"), body);
    expect(gv_rt.has_main() && type_eq(*gv_rt.main, t_unit()),
           "ping body does not have lock-environment type 1");

    // The reassociated three-thread chain passes the hyper-environment
    // discipline and fails the lock discipline with ZeroOrManyLocks.
    std::string a = "child (send ((), x))";
    std::string b =
        "child (let (u, x2) = recv x' in let () = u in let () = wait x2 in "
        "send ((), y))";
    std::string c =
        "main (let (u, y2) = recv y' in let () = u in let () = wait y2 in ())";
    auto wrap = [](const std::string& par) {
        return parse_config("new (x x' : !1.end!). new (y y' : !1.end!). (" +
                            par + ")");
    };
    ConfigPtr reassoc = wrap("(" + a + " || " + c + ") || " + b);
    expect(check_config(parse_hyperenv(""), reassoc).has_main(),
           "reassociated configuration fails hyper-environment typing");
    try {
        gv_check_config(GvEnv{}, reassoc);
        throw Failure("reassociated configuration passed lock typing");
    } catch (const ConfigError& e) {
        expect(e.kind == ConfigErrorKind::ZeroOrManyLocks,
               "lock typing failed with the wrong error kind");
    }
}

// ---------------------------------------------------------------------
// Criterion 2: preservation.
// ---------------------------------------------------------------------

void preservation_walk(const ConfigPtr& c0, const HyperEnv& h, bool mix,
                       unsigned seed, std::set<std::string>& rules) {
    ConfigPtr c = c0;
    Rng sched(seed);
    int fuel = 10 * config_size(c0) + 10;
    while (true) {
        RuntimeType rt = check_config(h, c, mix);
        auto succs = config_step_all(c, mix);
        for (const Successor& s : succs) {
            rules.insert(s.redex.rule);
            expect(same_rt(rt, check_config(h, s.config, mix)),
                   "reduction " + s.redex.rule + " changed the runtime type");
        }
        if (succs.empty()) break;
        c = succs[hgvgen::pick(sched, (int)succs.size())].config;
        expect(--fuel > 0, "preservation walk exceeded its fuel");
    }
}

void criterion_preservation() {
    std::set<std::string> rules;
    for (unsigned seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        RuntimeType rt = check_config(gc.env, gc.config);
        expect(rt.has_main(), "generated configuration has no main type");

        // Congruence rewrites retype identically: alpha, commuted binders
        // and threads, swapped restriction endpoints.
        ConfigPtr alpha = freshen_config(gc.config, all_names(gc.config));
        expect(config_equiv(gc.config, alpha) &&
                   same_rt(rt, check_config(gc.env, alpha)),
               "alpha rewrite changed the runtime type");
        FlatConfig flat = extrude(freshen_config(gc.config, {}));
        std::reverse(flat.binders.begin(), flat.binders.end());
        if (!flat.binders.empty())
            flat.binders[0] = ResBinder{flat.binders[0].y, flat.binders[0].x,
                                        dual(flat.binders[0].ann)};
        std::rotate(flat.threads.begin(),
                    flat.threads.begin() + (long)(seed % flat.threads.size()),
                    flat.threads.end());
        ConfigPtr shuffled = assemble(flat.binders, flat.threads);
        expect(config_equiv(gc.config, shuffled) &&
                   same_rt(rt, check_config(gc.env, shuffled)),
               "congruence rewrite changed the runtime type");

        preservation_walk(gc.config, gc.env, false, seed ^ 0x5bd1e995u, rules);
    }
    // Directed coverage of every reduction rule.
    HyperEnv closed = parse_hyperenv("");
    preservation_walk(parse_config(slurp("examples/hgv/ping_closed.hgv")),
                      closed, false, 1, rules);
    preservation_walk(parse_config(slurp("examples/hgv/vending.hgv")), closed,
                      false, 1, rules);
    preservation_walk(parse_config(slurp("examples/hgv/link_example.hgv")),
                      closed, false, 1, rules);
    preservation_walk(
        mk_thread(true, parse_term(slurp("examples/hgv/higher_order.hgv"))),
        closed, false, 1, rules);
    preservation_walk(
        parse_config(
            "main (case inr [0] () { inl b -> absurd [1] b ; inr a -> a })"),
        closed, false, 1, rules);
    for (const char* r :
         {"E-Lam", "E-Unit", "E-Pair", "E-Inl", "E-Inr", "E-Reify-Fork",
          "E-Reify-Link", "E-Comm-Send", "E-Comm-Close", "E-Comm-Link"})
        expect(rules.count(r) == 1, std::string("rule not covered: ") + r);

    std::set<std::string> mix_rules;
    preservation_walk(parse_config(slurp("examples/hgv/spawn_mix.hgv")),
                      closed, true, 1, mix_rules);
    preservation_walk(
        parse_config("new (a a' : end). new (b b' : end). "
                     "( child (let () = close a in ()) "
                     "  || child (link ((a', b))) "
                     "  || main (let () = close b' in ()) )"),
        closed, true, 1, mix_rules);
    for (const char* r : {"E-Link-Mix", "E-Close"})
        expect(mix_rules.count(r) == 1,
               std::string("Mix rule not covered: ") + r);
}

// ---------------------------------------------------------------------
// Criterion 3: diamond property and termination.
// ---------------------------------------------------------------------

void criterion_diamond_termination() {
    for (unsigned seed = 0; seed < 400; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        expect(diamond_check(gc.config),
               "one-step joinability fails on a generated configuration");
        int fuel = 10 * config_size(gc.config);
        RunResult r =
            run(gc.config, gc.env, false, RunPolicy::Random, seed, fuel);
        int prev = config_size(gc.config);
        for (const RunStep& st : r.steps) {
            int sz = config_size(st.config);
            expect(sz < prev, "configuration size did not decrease");
            prev = sz;
        }
    }
}

// ---------------------------------------------------------------------
// Criterion 4: global progress.
// ---------------------------------------------------------------------

void criterion_progress() {
    for (unsigned seed = 0; seed < 400; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        ConfigPtr c = gc.config;
        Rng sched(seed + 1);
        int fuel = 10 * config_size(c) + 10;
        while (true) {
            ProgressReport pr = classify_progress(c, gc.env);
            expect(pr.kind == ProgressKind::Reducible ||
                       pr.kind == ProgressKind::MainValue,
                   "ground configuration is neither reducible nor a main "
                   "value");
            if (pr.kind == ProgressKind::MainValue) break;
            c = pr.redexes[hgvgen::pick(sched, (int)pr.redexes.size())].config;
            expect(--fuel > 0, "progress walk exceeded its fuel");
        }
    }
    // The vending machine terminates at a main value with no residual
    // threads.
    RunResult r = run(parse_config(slurp("examples/hgv/vending.hgv")),
                      parse_hyperenv(""));
    ProgressReport pr = classify_progress(r.terminal, parse_hyperenv(""));
    expect(pr.kind == ProgressKind::MainValue,
           "vending machine does not end at a main value");
    expect(extrude(freshen_config(r.terminal, {})).threads.size() == 1,
           "vending machine leaves residual threads");
}

// ---------------------------------------------------------------------
// Criterion 5: tree canonical forms.
// ---------------------------------------------------------------------

void criterion_tcf() {
    HyperEnv closed = parse_hyperenv("");
    std::vector<std::pair<ConfigPtr, HyperEnv>> inputs = {
        {parse_config(slurp("examples/hgv/ping_closed.hgv")), closed},
        {parse_config(slurp("examples/hgv/vending.hgv")), closed},
        {parse_config(slurp("examples/hgv/link_example.hgv")), closed},
        {parse_config(slurp("examples/hgv/ping.hgv")),
         parse_hyperenv("ping: 1")},
    };
    for (unsigned seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        auto gc = hgvgen::gen_ground_config(rng);
        inputs.push_back({gc.config, gc.env});
    }
    for (auto& [c, h] : inputs) {
        CanonicalConfig tcf = tree_canonical_form(c, h);
        for (const TcfEntry& e : tcf.prefix) {
            expect(e.aux->tag == ConfigTag::Thread ||
                       e.aux->tag == ConfigTag::LinkThread,
                   "canonical prefix entry is not an auxiliary thread");
            expect(free_names(e.aux).count(e.binder.x) == 1,
                   "auxiliary thread does not own its binder endpoint");
        }
        ConfigPtr rebuilt = tcf.to_config();
        expect(config_equiv(rebuilt, c),
               "canonical form is not congruent to its input");
        RuntimeType rt = check_config(h, c);
        expect(same_rt(rt, check_config(h, rebuilt)),
               "canonical form changed the hyper-environment type");
        GvEnv g;
        for (auto& [n, t] : h[0].bindings) g.bindings.emplace_back(n, t);
        expect(same_rt(rt, gv_check_config(g, rebuilt)),
               "canonical form does not typecheck under locks");
    }
}

// ---------------------------------------------------------------------
// Criterion 6: translation typing.
// ---------------------------------------------------------------------

void criterion_translation_typing() {
    // hcp_check(tr_term(M, r)) is the consumed environment plus the
    // announced result, in a single hyper-environment member.
    struct CaseT {
        const char* src;
        const char* env;
    };
    const CaseT terms[] = {
        {"()", ""},
        {"\\x : 1. x", ""},
        {"let x : 1 = () in x", ""},
        {"case inl [0] () { inl a -> a ; inr b -> absurd [1] b }", ""},
        {"let (u, y') = recv y in let () = u in wait y'", "y: ?1.end?"},
        {"send ((), x)", "x: !1.end!"},
        {"let y : ?1.end? = fork (\\x : !1.end!. send ((), x)) in "
         "let (u, y') = recv y in let () = u in wait y'",
         ""},
    };
    auto env_key = [](const LinEnv& e) {
        std::set<std::string> s;
        for (auto& [n, t] : e) s.insert(n + " : " + show_lin(t));
        return s;
    };
    for (const auto& t : terms) {
        TypeEnv env = parse_hyperenv(t.env)[0];
        TermPtr m = parse_term(t.src);
        TypePtr ty = check_term(env, m);
        LinHyperEnv g = hcp_check(tr_term(fg_translate(m), "r", env));
        expect(g.size() == 1, "term translation typed in several members");
        std::set<std::string> want;
        for (auto& [x, xt] : env.bindings)
            want.insert(x + " : " + show_lin(down_type(xt)));
        want.insert("r : " + show_lin(lt_tensor(lt_one(), up_type(ty))));
        expect(env_key(g[0]) == want,
               std::string("term translation typing mismatch for ") + t.src);
        // Value translations announce without the token.
        FgTermPtr fg = fg_translate(m);
        if (fg->tag == FgTermTag::Ret) {
            LinHyperEnv gv = hcp_check(tr_value(fg->v, "r", env));
            std::set<std::string> wantv;
            for (auto& [x, xt] : env.bindings)
                wantv.insert(x + " : " + show_lin(down_type(xt)));
            wantv.insert("r : " + show_lin(up_type(ty)));
            expect(gv.size() == 1 && env_key(gv[0]) == wantv,
                   std::string("value translation typing mismatch for ") +
                       t.src);
        }
    }
    TermPtr ho = parse_term(slurp("examples/hgv/higher_order.hgv"));
    LinHyperEnv gho = hcp_check(tr_term(fg_translate(ho), "r", TypeEnv{}));
    expect(gho.size() == 1 &&
               env_key(gho[0]) ==
                   std::set<std::string>{
                       "r : " + show_lin(lt_tensor(lt_one(), lt_one()))},
           "higher-order term translation typing mismatch");

    // Configurations: the wrapper absorbs the token, so the result endpoint
    // offers the main value directly.
    const CaseT configs[] = {
        {"examples/hgv/ping.hgv", "ping: 1"},
        {"examples/hgv/ping_closed.hgv", ""},
        {"examples/hgv/vending.hgv", ""},
        {"examples/hgv/link_example.hgv", ""},
    };
    for (const auto& t : configs) {
        ConfigPtr cfg = parse_config(slurp(t.src));
        HyperEnv h = parse_hyperenv(t.env);
        TypePtr main_t = *check_config(h, cfg).main;
        LinHyperEnv g = hcp_check(tr_config(cfg, h, "r"));
        bool found = false;
        for (auto& env : g)
            for (auto& [n, ty] : env)
                if (n == "r") {
                    found = true;
                    expect(lin_eq(ty, up_type(main_t)),
                           std::string("configuration translation typing "
                                       "mismatch for ") +
                               t.src);
                }
        expect(found, "configuration translation lost the result endpoint");
    }

    // The consuming translation is the dual of the producing one.
    // Exhaustive over every type of depth <= 3 with all four atoms, and of
    // depth <= 4 over the {1, end!} basis; the identity is structural, so
    // these cover every constructor pairing.
    auto check_type = [](const TypePtr& t) {
        expect(lin_eq(down_type(t), lt_dual(up_type(t))),
               "down_type is not the dual of up_type on " + show_type(t));
    };
    auto check_sess = [](const SessionPtr& s) {
        expect(lin_eq(down_session(s), lt_dual(up_session(s))),
               "down_session is not the dual of up_session on " +
                   show_session(s));
    };
    auto grow = [](const std::vector<TypePtr>& ts,
                   const std::vector<SessionPtr>& ss,
                   const std::vector<TypePtr>& atoms,
                   const std::vector<SessionPtr>& satoms,
                   std::vector<TypePtr>& out_t,
                   std::vector<SessionPtr>& out_s) {
        out_s = satoms;
        for (const auto& t : ts)
            for (const auto& s : ss) {
                out_s.push_back(s_send(t, s));
                out_s.push_back(s_recv(t, s));
            }
        out_t = atoms;
        for (const auto& s : out_s) out_t.push_back(t_session(s));
        for (const auto& a : ts)
            for (const auto& b : ts) {
                out_t.push_back(t_product(a, b));
                out_t.push_back(t_sum(a, b));
                out_t.push_back(t_lolli(a, b));
            }
    };
    {  // all atoms, depth 3
        std::vector<TypePtr> atoms{t_unit(), t_void()};
        std::vector<SessionPtr> satoms{s_end_out(), s_end_in()};
        std::vector<TypePtr> t1;
        std::vector<SessionPtr> s1;
        grow(atoms, satoms, atoms, satoms, t1, s1);
        std::vector<TypePtr> t2;
        std::vector<SessionPtr> s2;
        grow(t1, s1, atoms, satoms, t2, s2);
        std::vector<TypePtr> t3;
        std::vector<SessionPtr> s3;
        grow(t2, s2, atoms, satoms, t3, s3);
        for (const auto& t : t3) check_type(t);
        for (const auto& s : s3) check_sess(s);
    }
    {  // reduced atoms, depth 4 (streamed at the last level)
        std::vector<TypePtr> atoms{t_unit()};
        std::vector<SessionPtr> satoms{s_end_out()};
        std::vector<TypePtr> t1, t2, t3;
        std::vector<SessionPtr> s1, s2, s3;
        grow(atoms, satoms, atoms, satoms, t1, s1);
        grow(t1, s1, atoms, satoms, t2, s2);
        grow(t2, s2, atoms, satoms, t3, s3);
        for (const auto& t : t3)
            for (const auto& s : s3) {
                check_sess(s_send(t, s));
                check_sess(s_recv(t, s));
            }
        for (const auto& a : t3)
            for (const auto& b : t3) {
                check_type(t_product(a, b));
                check_type(t_sum(a, b));
                check_type(t_lolli(a, b));
            }
    }
}

// ---------------------------------------------------------------------
// Criterion 7: operational correspondence, with type preservation and
// progress on the explored process states.
// ---------------------------------------------------------------------

std::multiset<std::set<std::string>> lin_fp(const LinHyperEnv& g) {
    std::multiset<std::set<std::string>> out;
    for (auto& env : g) {
        std::set<std::string> e;
        for (auto& [n, t] : env) e.insert(n + " : " + show_lin(t));
        out.insert(e);
    }
    return out;
}

void hcp_invariants_over(const ProcPtr& root, size_t cap) {
    Lts lts = explore(root, cap);
    for (size_t i = 0; i < lts.states.size(); ++i) {
        const ProcPtr& p = lts.states[i];
        auto g = lin_fp(hcp_check(p));  // every reachable state is typable
        auto ts = lts_step(p);
        // Progress: a well-typed process without transitions is halt.
        if (ts.empty())
            expect(hcp_equiv(p, h_halt()),
                   "well-typed non-halt process has no transition: " +
                       show_proc(p));
        // Type preservation: internal labels keep the typing unchanged.
        for (const Transition& t : ts)
            if (label_internal(t.label))
                expect(lin_fp(hcp_check(t.target)) == g,
                       "internal transition changed the typing of " +
                           show_proc(p));
    }
}

void criterion_correspondence() {
    struct CaseC {
        const char* src;
        const char* env;
        bool is_path;
    };
    const CaseC cases[] = {
        {"main ()", "", false},
        {"main (let x : 1 = () in x)", "", false},
        {"examples/hgv/ping.hgv", "ping: 1", true},
        {"examples/hgv/ping_closed.hgv", "", true},
        {"examples/hgv/vending.hgv", "", true},
        {"examples/hgv/link_example.hgv", "", true},
    };
    for (const auto& c : cases) {
        ConfigPtr cfg =
            parse_config(c.is_path ? slurp(c.src) : std::string(c.src));
        CorrespondenceReport rep =
            correspondence_check(cfg, parse_hyperenv(c.env), 100000);
        expect(rep.ok, std::string("correspondence fails on ") + c.src +
                           ": " + rep.detail);
        for (auto& e : rep.preservation)
            expect(e.ok, std::string("preservation clause fails on ") +
                             c.src + " for " + e.rule);
        expect(rep.states <= 100000, "state budget exceeded");
    }
    // higher_order.hgv is a term; run it as the main thread.
    CorrespondenceReport rep = correspondence_check(
        mk_thread(true, parse_term(slurp("examples/hgv/higher_order.hgv"))),
        parse_hyperenv(""), 100000);
    expect(rep.ok, "correspondence fails on higher_order: " + rep.detail);

    // Process-level invariants on fully explored state spaces.
    hcp_invariants_over(
        parse_proc(slurp("examples/hcp/ping_translated.hcp")), 100000);
    for (const char* f :
         {"examples/hcp/forward.hcp", "examples/hcp/choice.hcp",
          "examples/hcp/pair.hcp", "examples/hcp/beta_z.hcp",
          "examples/hcp/plain_z.hcp"})
        hcp_invariants_over(parse_proc(slurp(f)), 100000);
    hcp_invariants_over(
        tr_config(parse_config("main (let x : 1 = () in x)"),
                  parse_hyperenv(""), "r"),
        100000);
}

// ---------------------------------------------------------------------
// Criterion 8: the Mix variant.
// ---------------------------------------------------------------------

void criterion_mix() {
    HyperEnv closed = parse_hyperenv("");
    // The spawn encoding reifies a detached child and leaves main ().
    ConfigPtr sp = parse_config(slurp("examples/hgv/spawn_mix.hgv"));
    check_config(closed, sp, true);
    RunResult r = run(sp, closed, true);
    bool forked = false;
    for (const RunStep& st : r.steps) {
        if (st.redex.rule == "E-Reify-Fork") forked = true;
        check_config(closed, st.config, true);  // typed at every step
    }
    expect(forked, "spawn did not reify a child thread");
    expect(config_equiv(r.terminal, parse_config("main () || child ()")),
           "spawn run does not end at child () || main ()");

    // E-Link-Mix terminals agree with the base link semantics: the main
    // thread ends at the same value, with only unit children left behind.
    ConfigPtr base = parse_config(slurp("examples/hgv/link_example.hgv"));
    RunResult rb = run(base, closed);
    expect(config_equiv(rb.terminal, parse_config("main ()")),
           "base link run does not end at main ()");
    ConfigPtr lk = parse_config(
        "new (a a' : end). new (b b' : end). "
        "( child (let () = close a in ()) "
        "  || child (link ((a', b))) "
        "  || main (let () = close b' in ()) )");
    RunResult rm = run(lk, closed, true);
    bool linked = false;
    for (const RunStep& st : rm.steps)
        if (st.redex.rule == "E-Link-Mix") linked = true;
    expect(linked, "Mix link run never used the direct link rule");
    // Discard finished unit children: the remainder matches the base
    // terminal.
    FlatConfig flat = extrude(freshen_config(rm.terminal, {}));
    std::vector<ConfigPtr> live;
    for (const ConfigPtr& t : flat.threads)
        if (!(t->tag == ConfigTag::Thread && !t->is_main &&
              alpha_eq(t->term, mk_unit())))
            live.push_back(t);
    expect(flat.binders.empty() && live.size() == 1,
           "Mix link run leaves live residuals");
    expect(config_equiv(live[0], rb.terminal),
           "Mix link terminal differs from the base link terminal");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void()> fn;
    };
    const Criterion criteria[] = {
        {"criterion 1: worked examples (process structures, ping, "
         "reassociation)",
         criterion_examples},
        {"criterion 2: preservation on generated and directed configurations",
         criterion_preservation},
        {"criterion 3: one-step diamond and termination",
         criterion_diamond_termination},
        {"criterion 4: global progress on ground configurations",
         criterion_progress},
        {"criterion 5: tree canonical forms", criterion_tcf},
        {"criterion 6: translation typing", criterion_translation_typing},
        {"criterion 7: operational correspondence and process invariants",
         criterion_correspondence},
        {"criterion 8: Mix variant", criterion_mix},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        try {
            c.fn();
            std::printf("PASS %s\n", c.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL %s: %s\n", c.name, e.what());
        }
    }
    return failures == 0 ? 0 : 1;
}
