// Operational semantics: deterministic term reduction, configuration
// reduction modulo structural congruence, the congruence decision procedure,
// tree canonical forms, independence decomposition, blocked-thread analysis,
// and progress classification. The Mix variant (self-dual end, close, and
// the direct link rule) is selected by a flag.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "envs.hpp"
#include "runtime_typing.hpp"
#include "terms.hpp"

namespace hgv {

enum class SemanticsErrorKind {
    NotSingletonEnv,  // canonical form needs a one-environment input
    NotTree,          // the restriction graph contains a cycle
    FuelExhausted,    // evaluation exceeded its step budget
    IllTyped,
};

struct SemanticsError : std::runtime_error {
    SemanticsErrorKind kind;
    SemanticsError(SemanticsErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
};

// One call-by-value, left-to-right step; none for values and for terms
// blocked on a communication constant.
std::optional<TermPtr> term_step(const TermPtr& m);
// As term_step, also naming the rule that fired.
std::optional<std::pair<TermPtr, std::string>> term_step_tagged(const TermPtr& m);

// Decides structural congruence: associativity/commutativity of parallel
// composition, commutation and endpoint swapping of restrictions, scope
// extrusion, link symmetry, and alpha-renaming of bound names.
bool config_equiv(const ConfigPtr& c, const ConfigPtr& d);

struct Redex {
    std::string rule;   // e.g. "E-Lam", "E-Comm-Send"
    std::string locus;  // human-readable position (thread index, channel)
};

struct Successor {
    Redex redex;
    ConfigPtr config;
};

// Every redex available modulo structural congruence, enumerated on the
// canonicalised (fully extruded) form. Deterministic order.
std::vector<Successor> config_step_all(const ConfigPtr& c, bool mix = false);

enum class RunPolicy { Deterministic, Random };

struct RunStep {
    Redex redex;
    ConfigPtr config;  // configuration after the step
};

struct RunResult {
    std::vector<RunStep> steps;
    ConfigPtr terminal;
};

// Reduces to a terminal configuration. The configuration is typechecked
// against h first; fuel exhaustion raises (it indicates a bug, since
// reduction strictly decreases configuration size).
RunResult run(const ConfigPtr& c, const HyperEnv& h, bool mix = false,
              RunPolicy policy = RunPolicy::Deterministic, unsigned seed = 0,
              int fuel = -1);

// Tree canonical form: (nu x1 y1)(A1 || ... (nu xn yn)(An || final)) with
// each x_i free in the auxiliary thread A_i.
struct TcfEntry {
    ResBinder binder;
    ConfigPtr aux;  // a child or link thread
};
struct CanonicalConfig {
    std::vector<TcfEntry> prefix;
    ConfigPtr final_thread;
    ConfigPtr to_config() const;
};

// Requires h to be a single environment (use independence first otherwise)
// and the configuration to typecheck under it.
CanonicalConfig tree_canonical_form(const ConfigPtr& c, const HyperEnv& h,
                                    bool mix = false);

// Splits a configuration into the independent components matching the
// members of h, each typed under its own environment.
struct Component {
    TypeEnv env;
    ConfigPtr config;
    RuntimeType type;
};
std::vector<Component> independence(const ConfigPtr& c, const HyperEnv& h,
                                    bool mix = false);

// The endpoint a single thread is blocked on, if any: a child returning a
// bare endpoint, a link thread's trigger, or the subject of the
// send/recv/wait/close action in evaluation position.
std::optional<Name> blocked_endpoint(const ConfigPtr& thread, bool mix = false);

enum class ProgressKind { Reducible, MainValue, OpenBlocked, Deadlock };

struct ProgressReport {
    ProgressKind kind;
    TermPtr value;                       // MainValue payload
    std::vector<Successor> redexes;      // Reducible
    std::vector<std::pair<std::string, Name>> blocked;  // thread, endpoint
    std::string detail;
};

ProgressReport classify_progress(const ConfigPtr& c, const HyperEnv& h,
                                 bool mix = false);

// One-step joinability: every pair of distinct successors either coincides
// up to congruence or joins in one further step from each side.
bool diamond_check(const ConfigPtr& c, bool mix = false);

// Reassembles a binder prefix over a flat thread list (right-nested).
ConfigPtr assemble(const std::vector<ResBinder>& binders,
                   const std::vector<ConfigPtr>& threads);

}  // namespace hgv
