#include "aps.hpp"

#include <numeric>
#include <sstream>

namespace hgv {

namespace {

// Union-find over vertex indices.
struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    // Returns false if a and b were already connected.
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

Multigraph build_aps(const HyperEnv& h, const CoNameSet& n) {
    Multigraph g;
    g.vertices = h;
    auto locate = [&](const Name& x) -> std::pair<int, TypePtr> {
        for (size_t i = 0; i < h.size(); ++i)
            if (auto t = h[i].lookup(x)) return {(int)i, *t};
        throw ApsError("co-name '" + x + "' is not bound by the hyper-environment");
    };
    for (const CoName& p : n) {
        auto [u, tu] = locate(p.first);
        auto [v, tv] = locate(p.second);
        if (!is_session_type(tu) || !is_session_type(tv) ||
            !session_eq(dual(tu->s), tv->s))
            throw ApsError("co-names '" + p.first + "' and '" + p.second +
                           "' do not have dual session types");
        g.edges.push_back({u, v, p});
    }
    return g;
}

bool is_connected(const Multigraph& g) {
    if (g.vertices.size() <= 1) return true;
    Dsu dsu((int)g.vertices.size());
    int components = (int)g.vertices.size();
    for (const auto& e : g.edges)
        if (dsu.unite(e.u, e.v)) --components;
    return components == 1;
}

bool is_acyclic(const Multigraph& g) {
    Dsu dsu((int)g.vertices.size());
    for (const auto& e : g.edges)
        if (!dsu.unite(e.u, e.v)) return false;  // includes self-loops
    return true;
}

bool is_tree(const Multigraph& g) { return is_connected(g) && is_acyclic(g); }

std::vector<int> leaves(const Multigraph& g) {
    std::vector<int> out;
    for (int v = 0; v < (int)g.vertices.size(); ++v)
        if (g.degree(v) == 1) out.push_back(v);
    return out;
}

std::string aps_dot(const Multigraph& g) {
    std::ostringstream os;
    os << "graph aps {\n";
    for (size_t i = 0; i < g.vertices.size(); ++i) {
        os << "  v" << i << " [label=\"";
        bool first = true;
        for (const auto& [x, t] : g.vertices[i].bindings) {
            if (!first) os << ", ";
            first = false;
            os << x << " : " << show_type(t);
        }
        if (first) os << "(empty)";
        os << "\"];\n";
    }
    for (const auto& e : g.edges)
        os << "  v" << e.u << " -- v" << e.v << " [label=\"{" << e.names.first
           << "," << e.names.second << "}\"];\n";
    os << "}\n";
    return os.str();
}

Multigraph config_aps(const TypeEnv& flat, const ConfigPtr& c, bool mix) {
    NameSet avoid = flat.domain();
    ConfigPtr fc = freshen_config(c, avoid);
    FlatConfig body = extrude(fc);
    TypeEnv all = flat;
    CoNameSet pairs;
    for (const ResBinder& b : body.binders) {
        all.bind(b.x, t_session(b.ann));
        all.bind(b.y, t_session(dual(b.ann)));
        pairs.push_back({b.x, b.y});
    }
    ConfigPtr par;
    for (const ConfigPtr& t : body.threads)
        par = par ? mk_par(par, t) : t;
    if (!par)
        throw ApsError("configuration has no threads");
    HyperEnv groups = config_groups(all, par, mix);
    return build_aps(groups, pairs);
}

}  // namespace hgv
