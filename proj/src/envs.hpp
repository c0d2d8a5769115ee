// Typing environments: plain type environments, hyper-environments
// (unordered collections of disjoint environments), GV environments with
// channel locks, and co-name sets.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "terms.hpp"
#include "types.hpp"

namespace hgv {

struct TypeEnv {
    std::vector<std::pair<Name, TypePtr>> bindings;

    bool has(const Name& x) const {
        for (auto& [n, t] : bindings)
            if (n == x) return true;
        return false;
    }
    std::optional<TypePtr> lookup(const Name& x) const {
        for (auto& [n, t] : bindings)
            if (n == x) return t;
        return std::nullopt;
    }
    void bind(Name x, TypePtr t) { bindings.emplace_back(std::move(x), std::move(t)); }
    bool empty() const { return bindings.empty(); }
    NameSet domain() const {
        NameSet s;
        for (auto& [n, t] : bindings) s.insert(n);
        return s;
    }
};

// A hyper-environment is an unordered collection of disjoint environments.
using HyperEnv = std::vector<TypeEnv>;

// GV channel binding x~y : S# (a lock); S types endpoint x.
struct GvLock {
    Name a, b;
    SessionPtr s;
};

struct GvEnv {
    std::vector<std::pair<Name, TypePtr>> bindings;
    std::vector<GvLock> locks;
};

// Unordered pair of dual endpoint names.
using CoName = std::pair<Name, Name>;
using CoNameSet = std::vector<CoName>;

}  // namespace hgv
