// Static linear typing of terms against a single type environment.
//
// Checking is syntax-directed: every environment split is determined by the
// free variables of the subterms, realised here by threading a set of used
// binding occurrences and demanding exact consumption.
#pragma once

#include <stdexcept>
#include <string>

#include "envs.hpp"
#include "terms.hpp"
#include "types.hpp"

namespace hgv {

enum class TypeErrorKind {
    Unbound,        // variable not in scope
    Reuse,          // linear variable used more than once
    Unused,         // linear variable never used
    Mismatch,       // expected/actual type disagreement
    NonlinearSplit, // an environment cannot be split as required
    ConstantUse,    // a communication constant used without an argument
    MissingAnnotation,
};

struct TypeError : std::runtime_error {
    TypeErrorKind kind;
    TypeError(TypeErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
};

// Constant schemas, instantiated at the application site from the argument
// type. The Mix variant swaps the fork/link/close/wait table.
TypePtr delta_type(ConstTag k, const TypePtr& arg, bool mix);

// Checks a term under the environment, which must be consumed exactly.
TypePtr check_term(const TypeEnv& env, const TermPtr& m, bool mix = false);

// As check_term but restricted to syntactic values.
TypePtr check_value(const TypeEnv& env, const TermPtr& v, bool mix = false);

}  // namespace hgv
