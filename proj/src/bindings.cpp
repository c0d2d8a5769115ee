// Python bindings: a string-based façade over the core operations. Sources
// and environments come in as concrete syntax; results go out as strings or
// JSON-encoded reports, so the Python side needs no AST mirror.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

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

namespace py = pybind11;
using json = nlohmann::json;
using namespace hgv;

namespace {

ConfigPtr as_config(const std::string& src) {
    Parsed p = parse_program(src);
    return p.is_config() ? p.config : mk_thread(true, p.term);
}

TypeEnv single_env(const std::string& env_src) {
    HyperEnv h = parse_hyperenv(env_src);
    if (h.size() != 1)
        throw std::invalid_argument("expected a single environment");
    return h[0];
}

std::string rt_str(const RuntimeType& t) {
    return t.has_main() ? show_type(*t.main) : "";
}

InternalSet internal_of(const std::string& s) {
    if (s == "none") return {false, false};
    if (s == "a") return {true, false};
    if (s == "b") return {false, true};
    if (s == "ab") return {true, true};
    throw std::invalid_argument("internal must be none|a|b|ab");
}

}  // namespace

PYBIND11_MODULE(_hgv, m) {
    m.doc() = "hypersequent session-typed process workbench";

    m.def(
        "check_term",
        [](const std::string& src, const std::string& env, bool mix) {
            return show_type(check_term(single_env(env), parse_term(src), mix));
        },
        py::arg("src"), py::arg("env") = "", py::arg("mix") = false,
        "Typecheck a term; returns its type.");

    m.def(
        "check_config",
        [](const std::string& src, const std::string& env, bool gv, bool mix) {
            ConfigPtr c = as_config(src);
            RuntimeType t = gv ? gv_check_config(parse_gv_env(env), c, mix)
                               : check_config(parse_hyperenv(env), c, mix);
            return rt_str(t);
        },
        py::arg("src"), py::arg("env") = "", py::arg("gv") = false,
        py::arg("mix") = false,
        "Typecheck a configuration; returns the main type ('' if none).");

    m.def(
        "run",
        [](const std::string& src, const std::string& env, bool mix,
           bool deterministic, unsigned seed) {
            ConfigPtr c = as_config(src);
            RunResult r = run(c, parse_hyperenv(env), mix,
                              deterministic ? RunPolicy::Deterministic
                                            : RunPolicy::Random,
                              seed);
            json steps = json::array();
            for (const RunStep& s : r.steps)
                steps.push_back({{"rule", s.redex.rule},
                                 {"locus", s.redex.locus},
                                 {"config", show_config(s.config)}});
            return json{{"format", "hgv-trace/1"},
                        {"initial", show_config(c)},
                        {"steps", steps},
                        {"terminal", show_config(r.terminal)}}
                .dump();
        },
        py::arg("src"), py::arg("env") = "", py::arg("mix") = false,
        py::arg("deterministic") = true, py::arg("seed") = 0,
        "Reduce to a terminal configuration; returns a JSON trace.");

    m.def(
        "aps_is_tree",
        [](const std::string& env, const std::string& conames) {
            return is_tree(build_aps(parse_hyperenv(env), parse_conames(conames)));
        },
        py::arg("env"), py::arg("conames"),
        "Tree-ness of the abstract process structure of env under conames.");

    m.def(
        "aps_dot",
        [](const std::string& env, const std::string& conames) {
            return aps_dot(build_aps(parse_hyperenv(env), parse_conames(conames)));
        },
        py::arg("env"), py::arg("conames"));

    m.def(
        "tcf",
        [](const std::string& src, const std::string& env, bool mix) {
            return show_config(
                tree_canonical_form(as_config(src), parse_hyperenv(env), mix)
                    .to_config());
        },
        py::arg("src"), py::arg("env") = "", py::arg("mix") = false,
        "Tree canonical form, pretty-printed.");

    m.def(
        "progress",
        [](const std::string& src, const std::string& env, bool mix) {
            ProgressReport r =
                classify_progress(as_config(src), parse_hyperenv(env), mix);
            switch (r.kind) {
                case ProgressKind::Reducible: return std::string("reducible");
                case ProgressKind::MainValue: return std::string("main-value");
                case ProgressKind::OpenBlocked: return std::string("open-blocked");
                default: return std::string("deadlock");
            }
        },
        py::arg("src"), py::arg("env") = "", py::arg("mix") = false);

    m.def(
        "fg",
        [](const std::string& src) { return show_fg(fg_translate(parse_term(src))); },
        py::arg("src"), "Fine-grain form of a term.");

    m.def(
        "translate",
        [](const std::string& src, const std::string& env) {
            Parsed p = parse_program(src);
            HyperEnv h = parse_hyperenv(env);
            NameSet avoid;
            ProcPtr proc;
            if (p.is_config()) {
                avoid = all_names(p.config);
                for (const TypeEnv& e : h)
                    for (const auto& [n, t] : e.bindings) avoid.insert(n);
                Name r = fresh_name("r", avoid);
                proc = tr_config(p.config, h, r);
            } else {
                TypeEnv e = h.size() == 1 ? h[0] : TypeEnv{};
                avoid = all_names(p.term);
                for (const auto& [n, t] : e.bindings) avoid.insert(n);
                Name r = fresh_name("r", avoid);
                proc = tr_term(fg_translate(p.term), r, e);
            }
            return show_proc(proc);
        },
        py::arg("src"), py::arg("env") = "",
        "Translate a term or configuration into the process calculus.");

    m.def(
        "hcp_check",
        [](const std::string& src) {
            return show_lin_hyperenv(hcp_check(parse_proc(src)));
        },
        py::arg("src"), "Synthesized hyper-environment of a process.");

    m.def(
        "hcp_equiv",
        [](const std::string& a, const std::string& b) {
            return hcp_equiv(parse_proc(a), parse_proc(b));
        },
        py::arg("a"), py::arg("b"), "Structural congruence of two processes.");

    m.def(
        "bisim",
        [](const std::string& a, const std::string& b, const std::string& mode,
           const std::string& internal, size_t cap) {
            BisimMode m2 = mode == "strong" ? BisimMode::Strong : BisimMode::Weak;
            return bisim(parse_proc(a), parse_proc(b), m2, internal_of(internal),
                         cap);
        },
        py::arg("a"), py::arg("b"), py::arg("mode") = "weak",
        py::arg("internal") = "none", py::arg("cap") = size_t{100000});

    m.def(
        "lts_size",
        [](const std::string& src, size_t cap) {
            Lts l = explore(parse_proc(src), cap);
            size_t n = 0;
            for (const auto& es : l.edges) n += es.size();
            return py::make_tuple(l.states.size(), n);
        },
        py::arg("src"), py::arg("cap") = size_t{100000},
        "(states, transitions) of the reachable LTS.");

    m.def(
        "lts_dot",
        [](const std::string& src, size_t cap) {
            return lts_dot(explore(parse_proc(src), cap));
        },
        py::arg("src"), py::arg("cap") = size_t{100000});

    m.def(
        "correspond",
        [](const std::string& src, const std::string& env, size_t budget) {
            CorrespondenceReport r =
                correspondence_check(as_config(src), parse_hyperenv(env), budget);
            json entries = json::array();
            for (const CorrEntry& e : r.preservation)
                entries.push_back(
                    {{"rule", e.rule}, {"path_len", e.path_len}, {"ok", e.ok}});
            return json{{"ok", r.ok},
                        {"detail", r.detail},
                        {"preservation", entries},
                        {"alpha_checked", r.alpha_checked},
                        {"beta_checked", r.beta_checked},
                        {"states", r.states}}
                .dump();
        },
        py::arg("src"), py::arg("env") = "", py::arg("budget") = size_t{100000},
        "Operational-correspondence report as JSON.");
}
