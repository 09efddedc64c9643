#pragma once

#include <functional>

#include "corecd/scm.hpp"

namespace corecd {

/// Final-estimate producer for one evaluation episode. Trained policies
/// roll out the environment; baselines ignore the SCM content.
using EpisodeEstimator = std::function<Dag(const Scm& scm, Rng& rng)>;

/// The zero-edge graph.
Dag empty_baseline(int n);

/// A fresh ER DAG per call.
Dag random_baseline(int n, double p, Rng& rng);

EpisodeEstimator empty_baseline_estimator(int n);
EpisodeEstimator random_baseline_estimator(int n, double p);

} // namespace corecd
