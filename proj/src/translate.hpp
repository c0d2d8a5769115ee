// Translation from the fine-grain language into hypersequent classical
// processes: the paired type translations, value/term/configuration
// translations with a distinguished output endpoint, and a per-program
// operational-correspondence harness.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "envs.hpp"
#include "fghgv.hpp"
#include "hcp.hpp"
#include "terms.hpp"
#include "types.hpp"

namespace hgv {

struct TranslateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Type translations: up_type sends a value type to the linear type of the
// producing endpoint, down_type to that of the consuming endpoint, with
// down_type(T) = dual(up_type(T)) everywhere.
LinPtr up_type(const TypePtr& t);
LinPtr down_type(const TypePtr& t);
LinPtr up_session(const SessionPtr& s);
LinPtr down_session(const SessionPtr& s);

// Value translation: the process offering the value of v on endpoint r.
// The environment types the free variables of v (needed to annotate links
// and to instantiate constant schemas).
ProcPtr tr_value(const FgValPtr& v, const Name& r, const TypeEnv& env,
                 bool mix = false);

// Term translation: evaluates m and announces its value on r with a unit
// ping first.
ProcPtr tr_term(const FgTermPtr& m, const Name& r, const TypeEnv& env,
                bool mix = false);

// Configuration translation. Threads are first taken to fine-grain form.
// The hyper-environment types the configuration's free names; r carries
// the main thread's result (and is unused when there is no main thread).
ProcPtr tr_config(const ConfigPtr& c, const HyperEnv& h, const Name& r,
                  bool mix = false);

// Operational-correspondence harness.
struct CorrEntry {
    std::string rule;   // name of the matched reduction rule
    int path_len = 0;   // internal steps taken on the process side
    bool ok = false;
};

struct CorrespondenceReport {
    bool ok = true;
    std::string detail;                  // first failure, if any
    std::vector<CorrEntry> preservation; // one entry per reduction of c
    int alpha_checked = 0;               // reflected alpha-transitions
    int beta_checked = 0;                // reflected beta-transitions
    size_t states = 0;                   // distinct states visited
};

// Checks, for the given well-typed configuration: every reduction of c is
// matched by a beta-path of its translation meeting the translated
// successor (which may still carry administrative reductions of its own) in
// a weakly equivalent state; every alpha-transition of the translation
// stays weakly equivalent to the translation itself; and every
// beta-transition either meets a translated successor or is administrative
// (weakly equivalent to the translation).
//
// Internal (alpha/beta) reduction of translated configurations is
// confluent — channels are linear, so enabled internal transitions act on
// disjoint redexes — which lets the harness follow a single internal path
// to the normal form instead of the exponential set of interleavings. The
// one-step diamond property is re-verified at every visited state and a
// violation is a hard error.
CorrespondenceReport correspondence_check(const ConfigPtr& c,
                                          const HyperEnv& h,
                                          size_t budget = 100000);

}  // namespace hgv
