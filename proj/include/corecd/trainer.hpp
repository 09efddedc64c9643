#pragma once

#include <functional>
#include <optional>
#include <string>

#include "corecd/baselines.hpp"
#include "corecd/dqn.hpp"

namespace corecd {

struct EpsSchedule {
    double start = 1.0;
    double end = 0.05;
    double decay_frac = 0.10; // fraction of total steps spent decaying

    double at(long step, long total_steps) const;
};

struct TrainConfig {
    int n = 3;
    FunctionClass fclass;
    double intervention_value = 20.0;
    int horizon = 5;
    long total_steps = 2'000'000;
    std::vector<int> hidden = {128, 128, 128};
    double gamma = 0.99;
    EpsSchedule eps;
    std::size_t buffer_capacity = 100'000;
    int batch_size = 64;
    long sync_every = 1'000;  // train steps between hard target syncs
    long warmup = 1'000;      // transitions collected before training starts
    int train_every = 1;      // env steps per training round
    int updates_per_step = 1; // gradient updates per training round
    double learning_rate = 1e-4;
    long eval_every = 50'000;
    int eval_episodes_per_graph = 3;
    long metrics_every = 1'000;
    bool random_interventions = false;        // ablation: rollouts pick targets uniformly
    bool ablation_train_intervention = false; // still fit the intervention head while ablated
    int train_threads = 1;
    std::uint64_t seed = 1;
};

void validate_config(const TrainConfig& cfg);

/// Named configurations: paper-3var, paper-4var, paper-5var, paper-8var,
/// paper-10var (full budgets) and desk-3var, desk-4var (reduced budgets).
TrainConfig config_preset(const std::string& name);
std::vector<std::string> config_preset_names();

struct GraphEval {
    int graph_index = 0;
    std::vector<int> shds; // one per SCM draw
    double mean = 0.0;
};

struct EvalReport {
    double mean_shd = 0.0;
    double std_shd = 0.0;
    int graphs = 0;
    int draws_per_graph = 0;
    std::vector<GraphEval> per_graph;
    double seconds_per_graph = 0.0;
};

/// Rolls `draws_per_graph` episodes per graph, each on a freshly sampled
/// SCM, and aggregates shd(G*, final estimate). RNG streams are derived per
/// (graph, draw), so reports are deterministic and independent of thread
/// count.
EvalReport evaluate(const EpisodeEstimator& estimator, std::span<const Dag> graphs,
                    const FunctionClass& fclass, int draws_per_graph, std::uint64_t seed,
                    int threads = 1);

/// A trained agent plus everything needed to rebuild its environment.
struct Checkpoint {
    int n = 0;
    int horizon = 0;
    double intervention_value = 0.0;
    FunctionClass fclass;
    double gamma = 0.0;
    long train_step = 0;
    double epsilon = 0.0;
    bool random_interventions = false;
    DualQ dq;
    std::string rng_state;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// One greedy (epsilon = 0) episode; returns the final estimate.
Dag greedy_episode(const DualQ& dq, const Scm& scm, int horizon, double intervention_value,
                   Rng& rng);

/// Estimator wrapper around a trained agent for evaluate().
EpisodeEstimator policy_estimator(const Checkpoint& ckpt);

struct MetricsRow {
    long step = 0;
    double episode_return_mean = 0.0;
    double loss_st = 0.0;
    double loss_in = 0.0;
    std::optional<double> eval_mean_shd;
    std::optional<double> eval_std_shd;
    double epsilon = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct TrainResult {
    Checkpoint best;
    Checkpoint last;
    double best_mean_shd = 0.0;
    EvalReport final_eval;
    std::vector<MetricsRow> metrics;
};

using MetricsSink = std::function<void(const MetricsRow&)>;

/// Runs the full training loop on the dataset's train split, evaluating on
/// the test split every eval_every steps (plus once at the end) and keeping
/// the checkpoint with the lowest mean test SHD.
TrainResult train(const TrainConfig& cfg, const GraphDataset& dataset,
                  const MetricsSink& on_metrics = {});

struct StepTrace {
    int step = 0;
    int intervene = 0; // n = none
    EdgeOp op;
    int reward = 0;
    std::vector<double> observation; // raw values
    std::string estimate_bits;
};

struct InferResult {
    Dag estimate;
    std::vector<StepTrace> trace;
    int shd_vs_truth = 0;
};

/// One greedy episode against the supplied SCM, with a per-step trace.
InferResult infer(const Checkpoint& ckpt, const Scm& scm, Rng& rng);

/// Evaluates every checkpoint against every function class.
std::vector<std::vector<EvalReport>> transfer_matrix(std::span<const Checkpoint> checkpoints,
                                                     std::span<const FunctionClass> fclasses,
                                                     std::span<const Dag> graphs,
                                                     int draws_per_graph, std::uint64_t seed,
                                                     int threads = 1);

} // namespace corecd
