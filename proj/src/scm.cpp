#include "corecd/scm.hpp"

#include <cmath>
#include <cstdio>

namespace corecd {

std::string to_string(FnTag tag) {
    switch (tag) {
    case FnTag::kLinear: return "linear";
    case FnTag::kLinearNoise: return "linear_noise";
    case FnTag::kInteraction: return "interaction";
    }
    return "?";
}

FnTag fn_tag_from_string(const std::string& s) {
    if (s == "linear") return FnTag::kLinear;
    if (s == "linear_noise") return FnTag::kLinearNoise;
    if (s == "interaction") return FnTag::kInteraction;
    throw ConfigError("unknown function class '" + s +
                      "' (expected linear, linear_noise or interaction)");
}

namespace {

std::vector<std::vector<int>> parent_lists(const Dag& g) {
    std::vector<std::vector<int>> parents(g.n);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (g.edge(i, j)) parents[j].push_back(i);
    return parents;
}

std::vector<int> topological_order(const Dag& g) {
    std::vector<int> indegree(g.n, 0);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (g.edge(i, j)) ++indegree[j];
    std::vector<int> order;
    order.reserve(g.n);
    std::vector<int> frontier;
    for (int i = g.n - 1; i >= 0; --i)
        if (indegree[i] == 0) frontier.push_back(i);
    while (!frontier.empty()) {
        const int u = frontier.back();
        frontier.pop_back();
        order.push_back(u);
        for (int v = 0; v < g.n; ++v)
            if (g.edge(u, v) && --indegree[v] == 0) frontier.push_back(v);
    }
    return order;
}

void validate_class(const FunctionClass& fc) {
    if (fc.noise_std_sq < 0.0) throw ConfigError("noise variance must be >= 0");
    if (!std::isfinite(fc.root_default)) throw ConfigError("root default must be finite");
}

} // namespace

Scm sample_scm(const Dag& g, const FunctionClass& fclass, Rng& rng) {
    if (!is_acyclic(g)) throw ValidationError("sample_scm requires an acyclic graph");
    validate_class(fclass);

    Scm m;
    m.graph = g;
    m.fclass = fclass;
    m.parents = parent_lists(g);
    m.weights.resize(g.n);
    m.interaction_pair.assign(g.n, {-1, -1});

    for (int i = 0; i < g.n; ++i) {
        const auto& pa = m.parents[i];
        m.weights[i].resize(pa.size());
        for (std::size_t k = 0; k < pa.size(); ++k) m.weights[i][k] = rng.uniform(0.5, 2.0);
        if (fclass.tag == FnTag::kInteraction && pa.size() >= 2) {
            // uniform unordered pair of distinct parents
            const std::size_t a = rng.uniform_below(pa.size());
            std::size_t b = rng.uniform_below(pa.size() - 1);
            if (b >= a) ++b;
            m.interaction_pair[i] = {pa[std::min(a, b)], pa[std::max(a, b)]};
        }
    }
    return m;
}

Scm make_scm(const Dag& g, const FunctionClass& fclass,
             const std::vector<std::vector<double>>& weights) {
    if (!is_acyclic(g)) throw ValidationError("make_scm requires an acyclic graph");
    validate_class(fclass);

    Scm m;
    m.graph = g;
    m.fclass = fclass;
    m.parents = parent_lists(g);
    m.interaction_pair.assign(g.n, {-1, -1});
    if (static_cast<int>(weights.size()) != g.n)
        throw DimensionError("make_scm: weights must have one entry per node");
    for (int i = 0; i < g.n; ++i)
        if (weights[i].size() != m.parents[i].size())
            throw DimensionError("make_scm: node " + std::to_string(i) + " has " +
                                 std::to_string(m.parents[i].size()) + " parents but " +
                                 std::to_string(weights[i].size()) + " weights");
    m.weights = weights;
    return m;
}

void apply_intervention(Scm& m, int target, double value) {
    if (target < 0 || target >= m.n())
        throw IndexError("intervention target " + std::to_string(target) + " out of range [0, " +
                         std::to_string(m.n()) + ")");
    m.intervention = Intervention{target, value};
}

void clear_intervention(Scm& m) { m.intervention.reset(); }

double eval_function(const Scm& m, int node, std::span<const double> parent_values) {
    const auto& pa = m.parents[node];
    if (parent_values.size() != pa.size())
        throw DimensionError("eval_function: wrong number of parent values");
    if (pa.empty()) return m.fclass.root_default;

    double v = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) v += m.weights[node][k] * parent_values[k];
    if (m.fclass.tag == FnTag::kInteraction && m.interaction_pair[node][0] >= 0) {
        double prod = 1.0;
        for (int which : m.interaction_pair[node]) {
            for (std::size_t k = 0; k < pa.size(); ++k)
                if (pa[k] == which) prod *= parent_values[k];
        }
        v += prod;
    }
    return v;
}

std::vector<double> sample_observation(const Scm& m, Rng& rng) {
    // Removing edges cannot break a topological order, so the observational
    // order is valid for the intervened graph as well.
    const std::vector<int> order = topological_order(m.graph);

    const double noise_std =
        m.fclass.tag == FnTag::kLinearNoise ? std::sqrt(m.fclass.noise_std_sq) : 0.0;
    const int target = m.intervention ? m.intervention->target : -1;

    std::vector<double> values(m.n(), 0.0);
    std::vector<double> pa_vals;
    for (int node : order) {
        if (node == target) {
            values[node] = m.intervention->value;
            continue;
        }
        const auto& pa = m.parents[node];
        pa_vals.resize(pa.size());
        for (std::size_t k = 0; k < pa.size(); ++k) pa_vals[k] = values[pa[k]];
        double v = eval_function(m, node, pa_vals);
        if (noise_std > 0.0) v += noise_std * rng.gaussian();
        values[node] = v;
    }
    return values;
}

Dag induced_graph(const Scm& m) {
    Dag g = m.graph;
    if (m.intervention) {
        const int t = m.intervention->target;
        for (int i = 0; i < g.n; ++i)
            if (i != t) g.set_edge(i, t, false);
    }
    return g;
}

namespace {

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

std::string format_scm(const Scm& m) {
    std::string out;
    for (int i = 0; i < m.n(); ++i) {
        out += "X_" + std::to_string(i) + " <- ";
        if (m.intervention && m.intervention->target == i) {
            out += trim_number(m.intervention->value) + " [do]";
        } else if (m.parents[i].empty()) {
            out += trim_number(m.fclass.root_default);
        } else {
            for (std::size_t k = 0; k < m.parents[i].size(); ++k) {
                if (k > 0) out += " + ";
                out += trim_number(m.weights[i][k]) + "*X_" + std::to_string(m.parents[i][k]);
            }
            if (m.fclass.tag == FnTag::kInteraction && m.interaction_pair[i][0] >= 0)
                out += " + X_" + std::to_string(m.interaction_pair[i][0]) + "*X_" +
                       std::to_string(m.interaction_pair[i][1]);
            if (m.fclass.tag == FnTag::kLinearNoise)
                out += " + u_" + std::to_string(i);
        }
        out += "\n";
    }
    return out;
}

Scm scm_preset(const std::string& name) {
    FunctionClass linear;
    if (name == "eq7") {
        Dag g(5);
        g.set_edge(1, 0, true);
        g.set_edge(3, 0, true);
        g.set_edge(4, 0, true);
        g.set_edge(2, 1, true);
        g.set_edge(3, 1, true);
        g.set_edge(3, 2, true);
        return make_scm(g, linear, {{0.54, 0.91, 0.83}, {1.52, 1.84}, {1.38}, {}, {}});
    }
    if (name == "eq8") {
        Dag g(5);
        g.set_edge(3, 1, true);
        g.set_edge(1, 2, true);
        g.set_edge(3, 2, true);
        g.set_edge(4, 2, true);
        g.set_edge(0, 3, true);
        g.set_edge(0, 4, true);
        return make_scm(g, linear, {{}, {1.61}, {0.83, 1.60, 1.5}, {1.39}, {0.54}});
    }
    throw ConfigError("unknown SCM preset '" + name + "' (known: eq7, eq8)");
}

std::vector<std::string> scm_preset_names() { return {"eq7", "eq8"}; }

} // namespace corecd
