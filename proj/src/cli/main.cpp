// Command-line front end.
//
// Exit codes: 0 = success / analysis positive; 1 = analysis negative
// (ill-typed, cyclic, deadlocked, not bisimilar, correspondence failure);
// 2 = usage or parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "aps.hpp"
#include "envs.hpp"
#include "fghgv.hpp"
#include "hcp.hpp"
#include "runtime_typing.hpp"
#include "semantics.hpp"
#include "surface.hpp"
#include "terms.hpp"
#include "translate.hpp"
#include "typecheck.hpp"
#include "types.hpp"

using json = nlohmann::json;
using namespace hgv;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write file: " + path);
    out << content;
}

TypeEnv single_env(const HyperEnv& h, const char* what) {
    if (h.size() != 1)
        throw UsageError(std::string(what) +
                         " needs a single environment, got " +
                         std::to_string(h.size()) + " members");
    return h[0];
}

std::string show_env(const TypeEnv& env) {
    std::string s;
    for (size_t i = 0; i < env.bindings.size(); ++i) {
        if (i) s += ", ";
        s += env.bindings[i].first + ": " + show_type(env.bindings[i].second);
    }
    return s;
}

// Wraps a bare term as a main thread so configuration-level commands accept
// term files too.
ConfigPtr as_config(const Parsed& p) {
    return p.is_config() ? p.config : mk_thread(true, p.term);
}

std::string show_runtime_type(const RuntimeType& t) {
    return t.has_main() ? show_type(*t.main) : "(no main thread)";
}

json trace_json(const ConfigPtr& initial, const RunResult& r, bool mix,
                RunPolicy policy, unsigned seed) {
    json steps = json::array();
    for (const RunStep& s : r.steps)
        steps.push_back({{"rule", s.redex.rule},
                         {"locus", s.redex.locus},
                         {"config", show_config(s.config)}});
    return {{"format", "hgv-trace/1"},
            {"mix", mix},
            {"policy", policy == RunPolicy::Deterministic ? "deterministic" : "random"},
            {"seed", seed},
            {"initial", show_config(initial)},
            {"steps", steps},
            {"terminal", show_config(r.terminal)}};
}

// ------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.
// ------------------------------------------------------------------

int cmd_check(const std::string& file, const std::string& env_src, bool mix,
              bool want_json) {
    Parsed p = parse_program(read_file(file));
    HyperEnv h = parse_hyperenv(env_src);
    try {
        if (p.is_config()) {
            RuntimeType t = check_config(h, p.config, mix);
            if (want_json)
                std::cout << json{{"ok", true},
                                  {"kind", "config"},
                                  {"type", show_runtime_type(t)}}
                          << "\n";
            else
                std::cout << "ok: " << show_runtime_type(t) << "\n";
        } else {
            TypePtr t = check_term(single_env(h, "checking a term"), p.term, mix);
            if (want_json)
                std::cout << json{{"ok", true}, {"kind", "term"}, {"type", show_type(t)}}
                          << "\n";
            else
                std::cout << "ok: " << show_type(t) << "\n";
        }
    } catch (const TypeError& e) {
        if (want_json) std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
        std::cerr << "ill-typed: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        if (want_json) std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
        std::cerr << "ill-typed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_check_config(const std::string& file, const std::string& env_src,
                     bool gv, bool mix, bool want_json) {
    ConfigPtr c = as_config(parse_program(read_file(file)));
    try {
        RuntimeType t = gv ? gv_check_config(parse_gv_env(env_src), c, mix)
                           : check_config(parse_hyperenv(env_src), c, mix);
        if (want_json)
            std::cout << json{{"ok", true},
                              {"discipline", gv ? "gv" : "hgv"},
                              {"type", show_runtime_type(t)}}
                      << "\n";
        else
            std::cout << "ok: " << show_runtime_type(t) << "\n";
    } catch (const ConfigError& e) {
        if (want_json) std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
        std::cerr << "ill-typed: " << e.what() << "\n";
        return 1;
    } catch (const TypeError& e) {
        if (want_json) std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
        std::cerr << "ill-typed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_run(const std::string& file, const std::string& env_src, bool mix,
            bool random, unsigned seed, const std::string& trace_path,
            bool want_json) {
    ConfigPtr c = as_config(parse_program(read_file(file)));
    HyperEnv h = parse_hyperenv(env_src);
    RunPolicy policy = random ? RunPolicy::Random : RunPolicy::Deterministic;
    RunResult r = run(c, h, mix, policy, seed);
    json j = trace_json(c, r, mix, policy, seed);
    if (!trace_path.empty()) write_file(trace_path, j.dump(2) + "\n");
    if (want_json) {
        std::cout << j.dump(2) << "\n";
    } else {
        for (const RunStep& s : r.steps)
            std::cout << s.redex.rule << " @ " << s.redex.locus << "\n";
        std::cout << "terminal: " << show_config(r.terminal) << "\n";
    }
    return 0;
}

int cmd_aps(const std::string& file, const std::string& env_src,
            const std::string& conames_src, bool have_conames,
            const std::string& dot_path, bool mix, bool want_json) {
    Multigraph g;
    if (!file.empty()) {
        ConfigPtr c = as_config(parse_program(read_file(file)));
        g = config_aps(single_env(parse_hyperenv(env_src), "the flat environment"),
                       c, mix);
    } else {
        if (!have_conames)
            throw UsageError("aps needs either a configuration file or --conames");
        g = build_aps(parse_hyperenv(env_src), parse_conames(conames_src));
    }
    bool tree = is_tree(g);
    if (!dot_path.empty()) write_file(dot_path, aps_dot(g));
    if (want_json) {
        json verts = json::array(), edges = json::array(), lv = json::array();
        for (const TypeEnv& v : g.vertices) verts.push_back(show_env(v));
        for (const auto& e : g.edges)
            edges.push_back({{"u", e.u},
                             {"v", e.v},
                             {"names", {e.names.first, e.names.second}}});
        for (int l : leaves(g)) lv.push_back(l);
        std::cout << json{{"tree", tree},
                          {"connected", is_connected(g)},
                          {"acyclic", is_acyclic(g)},
                          {"vertices", verts},
                          {"edges", edges},
                          {"leaves", lv}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "vertices: " << g.vertices.size()
                  << ", edges: " << g.edges.size() << "\n";
        std::cout << (tree ? "tree"
                           : (is_acyclic(g) ? "disconnected" : "cyclic"))
                  << "\n";
    }
    return tree ? 0 : 1;
}

int cmd_tcf(const std::string& file, const std::string& env_src, bool mix,
            bool want_json) {
    ConfigPtr c = as_config(parse_program(read_file(file)));
    HyperEnv h = parse_hyperenv(env_src);
    try {
        CanonicalConfig tcf = tree_canonical_form(c, h, mix);
        ConfigPtr out = tcf.to_config();
        if (want_json) {
            json prefix = json::array();
            for (const TcfEntry& e : tcf.prefix)
                prefix.push_back({{"x", e.binder.x},
                                  {"y", e.binder.y},
                                  {"session", show_session(e.binder.ann)},
                                  {"aux", show_config(e.aux)}});
            std::cout << json{{"ok", true},
                              {"prefix", prefix},
                              {"final", show_config(tcf.final_thread)},
                              {"config", show_config(out)}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << show_config(out) << "\n";
        }
    } catch (const SemanticsError& e) {
        if (want_json) std::cout << json{{"ok", false}, {"error", e.what()}} << "\n";
        std::cerr << "no tree canonical form: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_fg(const std::string& file) {
    Parsed p = parse_program(read_file(file));
    if (p.is_config())
        throw UsageError("fg expects a term file, not a configuration");
    std::cout << show_fg(fg_translate(p.term)) << "\n";
    return 0;
}

int cmd_translate(const std::string& file, const std::string& env_src,
                  const std::string& out_path, bool want_json) {
    Parsed p = parse_program(read_file(file));
    HyperEnv h = parse_hyperenv(env_src);
    ProcPtr proc;
    NameSet avoid;
    if (p.is_config()) {
        avoid = all_names(p.config);
        for (const TypeEnv& env : h)
            for (const auto& [n, t] : env.bindings) avoid.insert(n);
        Name r = fresh_name("r", avoid);
        proc = tr_config(p.config, h, r);
    } else {
        TypeEnv env = single_env(h, "translating a term");
        avoid = all_names(p.term);
        for (const auto& [n, t] : env.bindings) avoid.insert(n);
        Name r = fresh_name("r", avoid);
        proc = tr_term(fg_translate(p.term), r, env);
    }
    LinHyperEnv g = hcp_check(proc);
    std::string text = show_proc(proc) + "\n";
    if (!out_path.empty()) write_file(out_path, "-- " + show_lin_hyperenv(g) + "\n" + text);
    if (want_json)
        std::cout << json{{"process", show_proc(proc)},
                          {"typing", show_lin_hyperenv(g)}}
                         .dump(2)
                  << "\n";
    else if (out_path.empty())
        std::cout << text << "-- typing: " << show_lin_hyperenv(g) << "\n";
    else
        std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_hcp_lts(const std::string& file, const std::string& dot_path,
                size_t cap, bool want_json) {
    ProcPtr p = parse_proc(read_file(file));
    Lts lts = explore(p, cap);
    size_t nedges = 0;
    for (const auto& es : lts.edges) nedges += es.size();
    if (!dot_path.empty()) write_file(dot_path, lts_dot(lts));
    if (want_json) {
        json states = json::array(), edges = json::array();
        for (const ProcPtr& s : lts.states) states.push_back(show_proc(s));
        for (size_t i = 0; i < lts.edges.size(); ++i)
            for (const auto& [lab, tgt] : lts.edges[i])
                edges.push_back({{"from", i}, {"label", show_label(lab)}, {"to", tgt}});
        std::cout << json{{"states", states}, {"edges", edges}}.dump(2) << "\n";
    } else {
        std::cout << "states: " << lts.states.size() << ", transitions: " << nedges
                  << "\n";
    }
    return 0;
}

InternalSet parse_internal(const std::string& s) {
    if (s == "none") return {false, false};
    if (s == "a") return {true, false};
    if (s == "b") return {false, true};
    if (s == "ab") return {true, true};
    throw UsageError("--internal must be one of none|a|b|ab");
}

int cmd_bisim(const std::string& file_a, const std::string& file_b,
              const std::string& mode, const std::string& internal, size_t cap,
              bool want_json) {
    ProcPtr pa = parse_proc(read_file(file_a));
    ProcPtr pb = parse_proc(read_file(file_b));
    BisimMode m;
    if (mode == "strong")
        m = BisimMode::Strong;
    else if (mode == "weak")
        m = BisimMode::Weak;
    else
        throw UsageError("--mode must be strong or weak");
    bool eq = bisim(pa, pb, m, parse_internal(internal), cap);
    if (want_json)
        std::cout << json{{"bisimilar", eq}, {"mode", mode}, {"internal", internal}}
                  << "\n";
    else
        std::cout << (eq ? "bisimilar" : "not bisimilar") << "\n";
    return eq ? 0 : 1;
}

int cmd_correspond(const std::string& file, const std::string& env_src,
                   size_t budget, const std::string& report_path,
                   bool want_json) {
    ConfigPtr c = as_config(parse_program(read_file(file)));
    HyperEnv h = parse_hyperenv(env_src);
    CorrespondenceReport r = correspondence_check(c, h, budget);
    json entries = json::array();
    for (const CorrEntry& e : r.preservation)
        entries.push_back({{"rule", e.rule}, {"path_len", e.path_len}, {"ok", e.ok}});
    json j = {{"ok", r.ok},
              {"detail", r.detail},
              {"preservation", entries},
              {"alpha_checked", r.alpha_checked},
              {"beta_checked", r.beta_checked},
              {"states", r.states}};
    if (!report_path.empty()) write_file(report_path, j.dump(2) + "\n");
    if (want_json) {
        std::cout << j.dump(2) << "\n";
    } else {
        for (const CorrEntry& e : r.preservation)
            std::cout << (e.ok ? "  ok  " : "  FAIL") << "  " << e.rule
                      << " (internal path " << e.path_len << ")\n";
        std::cout << "alpha transitions reflected: " << r.alpha_checked
                  << ", beta transitions reflected: " << r.beta_checked
                  << ", states: " << r.states << "\n";
        std::cout << (r.ok ? "correspondence holds" : "correspondence FAILED: " + r.detail)
                  << "\n";
    }
    return r.ok ? 0 : 1;
}

int cmd_progress(const std::string& file, const std::string& env_src, bool mix,
                 bool want_json) {
    ConfigPtr c = as_config(parse_program(read_file(file)));
    HyperEnv h = parse_hyperenv(env_src);
    ProgressReport r = classify_progress(c, h, mix);
    const char* kind = r.kind == ProgressKind::Reducible     ? "reducible"
                       : r.kind == ProgressKind::MainValue   ? "main-value"
                       : r.kind == ProgressKind::OpenBlocked ? "open-blocked"
                                                             : "deadlock";
    if (want_json) {
        json blocked = json::array();
        for (const auto& [t, n] : r.blocked)
            blocked.push_back({{"thread", t}, {"endpoint", n}});
        json j = {{"kind", kind}, {"detail", r.detail}, {"blocked", blocked}};
        if (r.value) j["value"] = show_term(r.value);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << kind;
        if (r.value) std::cout << ": " << show_term(r.value);
        if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
        std::cout << "\n";
        for (const auto& [t, n] : r.blocked)
            std::cout << "  blocked on " << n << ": " << t << "\n";
    }
    return r.kind == ProgressKind::Deadlock ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hgv: a workbench for hypersequent session-typed processes"};
    app.require_subcommand(1);

    int rc = 0;
    std::string file, file_b, env = "", conames, dot_path, out_path, trace_path,
                report_path;
    std::string mode = "weak", internal = "none";
    bool mix = false, want_json = false, gv = false, random = false;
    bool have_conames = false;
    unsigned seed = 0;
    size_t cap = 100000, budget = 100000;

    auto add_env = [&](CLI::App* c) {
        c->add_option("--env", env,
                      "typing environment(s), members separated by `|`");
    };
    auto add_common = [&](CLI::App* c) {
        c->add_flag("--mix", mix, "use the Mix variant");
        c->add_flag("--json", want_json, "JSON output");
    };

    CLI::App* c_check = app.add_subcommand("check", "statically typecheck a term or configuration");
    c_check->add_option("file", file, "input .hgv file")->required();
    add_env(c_check);
    add_common(c_check);
    c_check->callback([&] { rc = cmd_check(file, env, mix, want_json); });

    CLI::App* c_ccfg = app.add_subcommand("check-config", "typecheck a configuration against a hyper-environment");
    c_ccfg->add_option("file", file, "input .hgv file")->required();
    add_env(c_ccfg);
    c_ccfg->add_flag("--gv", gv, "use the single-environment lock discipline");
    add_common(c_ccfg);
    c_ccfg->callback([&] { rc = cmd_check_config(file, env, gv, mix, want_json); });

    CLI::App* c_run = app.add_subcommand("run", "reduce a configuration to a terminal state");
    c_run->add_option("file", file, "input .hgv file")->required();
    add_env(c_run);
    c_run->add_option("--seed", seed, "random scheduling with this seed");
    c_run->add_flag("--det", "deterministic scheduling (default)");
    c_run->add_option("--trace", trace_path, "write a JSON trace here");
    add_common(c_run);
    c_run->callback([&] {
        random = c_run->count("--seed") > 0;
        rc = cmd_run(file, env, mix, random, seed, trace_path, want_json);
    });

    CLI::App* c_aps = app.add_subcommand("aps", "abstract process structure and tree-ness verdict");
    c_aps->add_option("file", file, "configuration file (optional)");
    add_env(c_aps);
    c_aps->add_option("--conames", conames, "co-name pairs, e.g. \"{x,x'}, {y,y'}\"");
    c_aps->add_option("--dot", dot_path, "write GraphViz output here");
    add_common(c_aps);
    c_aps->callback([&] {
        have_conames = c_aps->count("--conames") > 0;
        rc = cmd_aps(file, env, conames, have_conames, dot_path, mix, want_json);
    });

    CLI::App* c_tcf = app.add_subcommand("tcf", "tree canonical form of a configuration");
    c_tcf->add_option("file", file, "input .hgv file")->required();
    add_env(c_tcf);
    add_common(c_tcf);
    c_tcf->callback([&] { rc = cmd_tcf(file, env, mix, want_json); });

    CLI::App* c_fg = app.add_subcommand("fg", "fine-grain form of a term");
    c_fg->add_option("file", file, "input .hgv term file")->required();
    c_fg->callback([&] { rc = cmd_fg(file); });

    CLI::App* c_tr = app.add_subcommand("translate", "translate into the process calculus");
    c_tr->add_option("file", file, "input .hgv file")->required();
    add_env(c_tr);
    c_tr->add_option("-o,--out", out_path, "write the .hcp process here");
    c_tr->add_flag("--json", want_json, "JSON output");
    c_tr->callback([&] { rc = cmd_translate(file, env, out_path, want_json); });

    CLI::App* c_lts = app.add_subcommand("hcp-lts", "explore the labelled transition system of a process");
    c_lts->add_option("file", file, "input .hcp file")->required();
    c_lts->add_option("--dot", dot_path, "write GraphViz output here");
    c_lts->add_option("--cap", cap, "state-space cap");
    c_lts->add_flag("--json", want_json, "JSON output");
    c_lts->callback([&] { rc = cmd_hcp_lts(file, dot_path, cap, want_json); });

    CLI::App* c_bis = app.add_subcommand("bisim", "decide bisimilarity of two processes");
    c_bis->add_option("file_a", file, "first .hcp file")->required();
    c_bis->add_option("file_b", file_b, "second .hcp file")->required();
    c_bis->add_option("--mode", mode, "strong | weak (default weak)");
    c_bis->add_option("--internal", internal, "internal labels: none | a | b | ab");
    c_bis->add_option("--cap", cap, "state-space cap");
    c_bis->add_flag("--json", want_json, "JSON output");
    c_bis->callback([&] {
        rc = cmd_bisim(file, file_b, mode, internal, cap, want_json);
    });

    CLI::App* c_cor = app.add_subcommand("correspond", "check operational correspondence of the translation");
    c_cor->add_option("file", file, "input .hgv file")->required();
    add_env(c_cor);
    c_cor->add_option("--budget", budget, "internal-state budget");
    c_cor->add_option("--report", report_path, "write a JSON report here");
    c_cor->add_flag("--json", want_json, "JSON output");
    c_cor->callback([&] {
        rc = cmd_correspond(file, env, budget, report_path, want_json);
    });

    CLI::App* c_prg = app.add_subcommand("progress", "classify a configuration's progress");
    c_prg->add_option("file", file, "input .hgv file")->required();
    add_env(c_prg);
    add_common(c_prg);
    c_prg->callback([&] { rc = cmd_progress(file, env, mix, want_json); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
