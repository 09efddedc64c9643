#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "corecd/graph.hpp"
#include "corecd/rng.hpp"

namespace corecd {

enum class FnTag { kLinear, kLinearNoise, kInteraction };

std::string to_string(FnTag tag);
FnTag fn_tag_from_string(const std::string& s);

/// Family of structural equations the per-node functions are drawn from.
struct FunctionClass {
    FnTag tag = FnTag::kLinear;
    double noise_std_sq = 0.5; // variance of the additive Gaussian term (linear_noise only)
    double root_default = 0.0; // value assigned to parentless nodes

    bool operator==(const FunctionClass&) const = default;
};

struct Intervention {
    int target = 0;
    double value = 0.0;
};

/// A structural causal model: a ground-truth DAG plus one sampled
/// structural equation per node, and at most one active hard intervention.
struct Scm {
    Dag graph; // observational ground truth
    FunctionClass fclass;
    std::vector<std::vector<int>> parents;          // ascending parent indices per node
    std::vector<std::vector<double>> weights;       // one weight per parent, aligned with `parents`
    std::vector<std::array<int, 2>> interaction_pair; // per node; {-1,-1} when absent
    std::optional<Intervention> intervention;

    int n() const { return graph.n; }
};

/// Draws fresh per-node weights from Uniform(0.5, 2.0) (and, for the
/// interaction class, a random distinct parent pair per node with >= 2
/// parents).
Scm sample_scm(const Dag& g, const FunctionClass& fclass, Rng& rng);

/// Builds an SCM with explicit weights (ascending parent order per node).
Scm make_scm(const Dag& g, const FunctionClass& fclass,
             const std::vector<std::vector<double>>& weights);

/// Sets the single active intervention do(X_target = value), replacing any
/// previous one.
void apply_intervention(Scm& m, int target, double value);

/// Returns to the observational regime.
void clear_intervention(Scm& m);

/// Ancestrally samples all endogenous values. The intervened node takes its
/// clamp value exactly; parentless nodes take the class root default;
/// linear_noise adds an independent Gaussian draw to every non-intervened
/// node.
std::vector<double> sample_observation(const Scm& m, Rng& rng);

/// Evaluates node i's structural equation on the given parent values
/// (aligned with m.parents[i]), without noise. Exposed for direct checks of
/// the function family.
double eval_function(const Scm& m, int node, std::span<const double> parent_values);

/// The graph the current SCM induces: the ground truth with, under an
/// intervention, all edges into the target removed.
Dag induced_graph(const Scm& m);

/// Pretty-prints the structural equations, one per line
/// ("X_2 <- 1.38*X_3", roots as "X_3 <- 0").
std::string format_scm(const Scm& m);

/// Built-in demo SCMs for the infer command. Known names: "eq7", "eq8".
Scm scm_preset(const std::string& name);
std::vector<std::string> scm_preset_names();

} // namespace corecd
