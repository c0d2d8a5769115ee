// Abstract process structures: undirected edge-labelled multigraphs whose
// vertices are the members of a hyper-environment and whose edges are
// co-name (dual-endpoint) pairs. Tree-ness of this graph characterises
// deadlock-free process topologies.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "envs.hpp"
#include "runtime_typing.hpp"

namespace hgv {

struct ApsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Multigraph {
    // Vertex i is the i-th member of the hyper-environment it was built
    // from; the environments are retained for reporting.
    std::vector<TypeEnv> vertices;
    // One edge per co-name pair, in input order: the unordered vertex pair
    // (as indices) together with the pair of names labelling it.
    struct Edge {
        int u, v;
        CoName names;
    };
    std::vector<Edge> edges;

    int degree(int v) const {
        int d = 0;
        for (const Edge& e : edges) {
            if (e.u == v) ++d;
            if (e.v == v) ++d;  // a self-loop contributes twice
        }
        return d;
    }
};

// Builds the graph; each pair {x,y} must name two endpoints of dual session
// types bound by the hyper-environment.
Multigraph build_aps(const HyperEnv& h, const CoNameSet& n);

// Connected (|V| <= 1 counts as connected) and acyclic.
bool is_tree(const Multigraph& g);
bool is_connected(const Multigraph& g);
bool is_acyclic(const Multigraph& g);

// Vertices with exactly one incident edge.
std::vector<int> leaves(const Multigraph& g);

// GraphViz rendering; vertices are labelled with their environments.
std::string aps_dot(const Multigraph& g);

// The graph of a configuration: vertices are its thread groups under the
// flat environment, edges its top-level restrictions. `flat` types the free
// names of c (empty for a closed configuration).
Multigraph config_aps(const TypeEnv& flat, const ConfigPtr& c, bool mix = false);

}  // namespace hgv
