// Runtime typing of configurations against hyper-environments, plus the
// single-environment discipline with channel locks and its relationship to
// hyper-environments (flattening and splitting).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "envs.hpp"
#include "terms.hpp"
#include "typecheck.hpp"
#include "types.hpp"

namespace hgv {

enum class ConfigErrorKind {
    Cycle,            // both endpoints of a restriction in one thread group
    EnvMismatch,      // root groups do not match the hyper-environment
    Duality,          // link thread endpoints are not dual
    MultipleMains,    // more than one main thread
    ChildResult,      // a child thread's result is not a terminator
    Structure,        // malformed configuration (e.g. link thread in Mix)
    ZeroOrManyLocks,  // a parallel composition is crossed by != 1 lock
    LockAtThread,     // a lock survives down to a single thread
};

struct ConfigError : std::runtime_error {
    ConfigErrorKind kind;
    ConfigError(ConfigErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
};

// A configuration's runtime type: the main thread's type, or nothing when
// the configuration consists of child and link threads only.
struct RuntimeType {
    std::optional<TypePtr> main;
    bool has_main() const { return main.has_value(); }
};

// Returns a copy of the configuration in which every bound name is distinct
// and avoids `avoid`.
ConfigPtr freshen_config(const ConfigPtr& c, NameSet avoid);

// A configuration with all restrictions floated to the outside: a binder
// prefix over a flat multiset of threads. Valid only after freshening (all
// bound names distinct), which makes scope extrusion unconditional.
struct ResBinder {
    Name x, y;
    SessionPtr ann;  // types endpoint x; y has the dual
};
struct FlatConfig {
    std::vector<ResBinder> binders;
    std::vector<ConfigPtr> threads;  // Thread and LinkThread nodes only
};
FlatConfig extrude(const ConfigPtr& c);

// The thread groups of a configuration: each group is the set of names from
// `flat` consumed by one connected component of threads (components are
// joined by restrictions, whose endpoints are checked against `flat` plus
// the binder annotations and then removed). Groups are returned as
// environments restricted from `flat`, in no particular order.
HyperEnv config_groups(const TypeEnv& flat, const ConfigPtr& c, bool mix = false);

// Checks a configuration against a hyper-environment: every thread must be
// well typed on its restriction of the flattened environment, and the thread
// groups must match the hyper-environment's members one to one (in the Mix
// variant, the groups must refine the members).
RuntimeType check_config(const HyperEnv& h, const ConfigPtr& c, bool mix = false);

// Single-environment typing with channel locks: each restriction introduces
// a lock, and every parallel composition must be crossed by exactly one
// lock, which it splits into the two dual endpoints.
RuntimeType gv_check_config(const GvEnv& g, const ConfigPtr& c, bool mix = false);

// Expands every lock x~y:S into the two bindings x:S, y:~S.
TypeEnv flatten(const GvEnv& g);

// The hyper-environment induced by a configuration on a flattened lock
// environment: the thread groups under flatten(g).
HyperEnv splitting(const GvEnv& g, const ConfigPtr& c, bool mix = false);

}  // namespace hgv
