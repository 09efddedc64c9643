#include "corecd/baselines.hpp"

namespace corecd {

Dag empty_baseline(int n) {
    if (n < 1) throw ConfigError("empty baseline requires n >= 1");
    return Dag(n);
}

Dag random_baseline(int n, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) throw ConfigError("edge probability must be in [0, 1]");
    return generate_er_dag(n, p, rng);
}

EpisodeEstimator empty_baseline_estimator(int n) {
    Dag empty = empty_baseline(n);
    return [empty](const Scm&, Rng&) { return empty; };
}

EpisodeEstimator random_baseline_estimator(int n, double p) {
    if (p < 0.0 || p > 1.0) throw ConfigError("edge probability must be in [0, 1]");
    return [n, p](const Scm&, Rng& rng) { return generate_er_dag(n, p, rng); };
}

} // namespace corecd
