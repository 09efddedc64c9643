#include "corecd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace corecd {

double EpsSchedule::at(long step, long total_steps) const {
    const double decay_steps = decay_frac * static_cast<double>(total_steps);
    if (decay_steps <= 0.0) return end;
    const double progress = std::min(1.0, static_cast<double>(step) / decay_steps);
    return start + (end - start) * progress;
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("config: n must be >= 2");
    if (cfg.horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (cfg.total_steps < 1) throw ConfigError("config: total_steps must be >= 1");
    if (cfg.total_steps < cfg.warmup) throw ConfigError("config: total_steps must cover the warm-up");
    if (cfg.eval_every < 1 || cfg.eval_every > cfg.total_steps)
        throw ConfigError("config: eval_every must be in [1, total_steps]");
    if (cfg.hidden.empty()) throw ConfigError("config: at least one hidden layer is required");
    for (int h : cfg.hidden)
        if (h < 1) throw ConfigError("config: hidden layer sizes must be positive");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) throw ConfigError("config: gamma must be in [0, 1)");
    if (cfg.eps.start < 0.0 || cfg.eps.start > 1.0 || cfg.eps.end < 0.0 || cfg.eps.end > 1.0)
        throw ConfigError("config: epsilon bounds must be in [0, 1]");
    if (cfg.eps.decay_frac < 0.0 || cfg.eps.decay_frac > 1.0)
        throw ConfigError("config: eps_decay_frac must be in [0, 1]");
    if (cfg.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
    if (cfg.buffer_capacity < static_cast<std::size_t>(cfg.batch_size))
        throw ConfigError("config: buffer capacity must hold at least one batch");
    if (cfg.sync_every < 1) throw ConfigError("config: sync_every must be >= 1");
    if (cfg.train_every < 1) throw ConfigError("config: train_every must be >= 1");
    if (cfg.updates_per_step < 1 || cfg.updates_per_step > 16)
        throw ConfigError("config: updates_per_step must be in [1, 16]");
    if (cfg.learning_rate <= 0.0) throw ConfigError("config: learning_rate must be positive");
    if (cfg.eval_episodes_per_graph < 1)
        throw ConfigError("config: eval_episodes_per_graph must be >= 1");
    if (cfg.metrics_every < 1) throw ConfigError("config: metrics_every must be >= 1");
    if (cfg.train_threads < 1 || cfg.train_threads > 2)
        throw ConfigError("config: train_threads must be 1 or 2");
    if (cfg.intervention_value == 0.0)
        throw ConfigError("config: intervention value must be non-zero");
    if (cfg.fclass.noise_std_sq < 0.0) throw ConfigError("config: noise variance must be >= 0");
}

TrainConfig config_preset(const std::string& name) {
    TrainConfig cfg;
    auto shape = [&cfg](int n, int horizon, std::vector<int> hidden, long steps) {
        cfg.n = n;
        cfg.horizon = horizon;
        cfg.hidden = std::move(hidden);
        cfg.total_steps = steps;
    };
    if (name == "paper-3var") {
        shape(3, 5, {128, 128, 128}, 2'000'000);
    } else if (name == "paper-4var") {
        shape(4, 8, {128, 128, 128}, 3'500'000);
    } else if (name == "paper-5var") {
        shape(5, 10, {256, 256, 256}, 4'500'000);
    } else if (name == "paper-8var") {
        shape(8, 12, {1024, 1024}, 45'000'000);
        cfg.eval_every = 250'000;
    } else if (name == "paper-10var") {
        shape(10, 15, {1024, 1024, 1024}, 90'000'000);
        cfg.eval_every = 250'000;
    } else if (name == "desk-3var") {
        shape(3, 5, {128, 128, 128}, 500'000);
        cfg.learning_rate = 3e-4;
        cfg.eps.end = 0.1;
        cfg.eval_every = 5'000;
    } else if (name == "desk-4var") {
        shape(4, 8, {128, 128, 128}, 1'000'000);
        cfg.learning_rate = 3e-4;
        cfg.eps.end = 0.1;
        cfg.eval_every = 10'000;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

std::vector<std::string> config_preset_names() {
    return {"paper-3var", "paper-4var", "paper-5var", "paper-8var", "paper-10var",
            "desk-3var", "desk-4var"};
}

namespace {

void eval_range(const EpisodeEstimator& estimator, std::span<const Dag> graphs,
                const FunctionClass& fclass, int draws, std::uint64_t seed, std::size_t begin,
                std::size_t end, std::vector<GraphEval>& out) {
    for (std::size_t g = begin; g < end; ++g) {
        GraphEval ge;
        ge.graph_index = static_cast<int>(g);
        ge.shds.resize(draws);
        for (int d = 0; d < draws; ++d) {
            Rng rng(mix_seed(seed, g, static_cast<std::uint64_t>(d)));
            const Scm scm = sample_scm(graphs[g], fclass, rng);
            const Dag estimate = estimator(scm, rng);
            ge.shds[d] = shd(graphs[g], estimate);
        }
        double sum = 0.0;
        for (int s : ge.shds) sum += s;
        ge.mean = sum / draws;
        out[g] = std::move(ge);
    }
}

} // namespace

EvalReport evaluate(const EpisodeEstimator& estimator, std::span<const Dag> graphs,
                    const FunctionClass& fclass, int draws_per_graph, std::uint64_t seed,
                    int threads) {
    if (graphs.empty()) throw ConfigError("evaluation needs a non-empty graph list");
    if (draws_per_graph < 1) throw ConfigError("draws_per_graph must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();

    EvalReport report;
    report.graphs = static_cast<int>(graphs.size());
    report.draws_per_graph = draws_per_graph;
    report.per_graph.resize(graphs.size());

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(graphs.size())));
    if (workers <= 1) {
        eval_range(estimator, graphs, fclass, draws_per_graph, seed, 0, graphs.size(),
                   report.per_graph);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (graphs.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(graphs.size(), begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    eval_range(estimator, graphs, fclass, draws_per_graph, seed, begin, end,
                               report.per_graph);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // aggregation in fixed graph order
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (const GraphEval& ge : report.per_graph) {
        for (int s : ge.shds) {
            sum += s;
            sum_sq += static_cast<double>(s) * s;
            ++count;
        }
    }
    report.mean_shd = sum / static_cast<double>(count);
    report.std_shd =
        std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - report.mean_shd * report.mean_shd));

    const auto t1 = std::chrono::steady_clock::now();
    report.seconds_per_graph =
        std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(graphs.size());
    return report;
}

namespace {

constexpr char kCheckpointMagic[] = "corecd-ckpt v1";

template <typename T> void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T> T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError("truncated checkpoint", 0);
    return v;
}

Dag run_episode(const DualQ& dq, const Scm& scm, int horizon, double intervention_value,
                bool random_interventions, Rng& rng, std::vector<StepTrace>* trace) {
    EnvConfig env_cfg;
    env_cfg.n = scm.n();
    env_cfg.horizon = horizon;
    env_cfg.intervention_value = intervention_value;
    env_cfg.fclass = scm.fclass;
    CdEnv env(env_cfg);

    std::vector<double> h = env.reset_with(scm, rng);
    for (int t = 0; t < horizon; ++t) {
        ActionPair a = select_action(dq, h, env.mask(), 0.0, rng);
        if (random_interventions)
            a.intervene = static_cast<int>(rng.uniform_below(intervention_action_count(env_cfg.n)));
        StepResult res = env.step(a, rng);
        if (trace) {
            StepTrace st;
            st.step = t;
            st.intervene = a.intervene;
            st.op = decode_structural(a.structural, env_cfg.n);
            st.reward = res.reward;
            st.observation = env.last_observation();
            st.estimate_bits = env.estimate().bits();
            trace->push_back(std::move(st));
        }
        h = std::move(res.encoded);
    }
    return env.estimate();
}

} // namespace

Dag greedy_episode(const DualQ& dq, const Scm& scm, int horizon, double intervention_value,
                   Rng& rng) {
    return run_episode(dq, scm, horizon, intervention_value, false, rng, nullptr);
}

EpisodeEstimator policy_estimator(const Checkpoint& ckpt) {
    // Checkpoints trained under the random-intervention ablation keep
    // drawing random targets at evaluation time; their intervention policy
    // is random by construction.
    return [&ckpt](const Scm& scm, Rng& rng) {
        return run_episode(ckpt.dq, scm, ckpt.horizon, ckpt.intervention_value,
                           ckpt.random_interventions, rng, nullptr);
    };
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kCheckpointMagic << "\n";
    put<std::int32_t>(out, ckpt.n);
    put<std::int32_t>(out, ckpt.horizon);
    put(out, ckpt.intervention_value);
    put<std::int32_t>(out, static_cast<std::int32_t>(ckpt.fclass.tag));
    put(out, ckpt.fclass.noise_std_sq);
    put(out, ckpt.fclass.root_default);
    put(out, ckpt.gamma);
    put<std::int64_t>(out, ckpt.train_step);
    put(out, ckpt.epsilon);
    put<std::uint8_t>(out, ckpt.random_interventions ? 1 : 0);
    write_mlp(out, ckpt.dq.q_st);
    write_mlp(out, ckpt.dq.q_in);
    write_mlp(out, ckpt.dq.target_st);
    write_mlp(out, ckpt.dq.target_in);
    write_adam(out, ckpt.dq.opt_st);
    write_adam(out, ckpt.dq.opt_in);
    put<std::uint64_t>(out, ckpt.rng_state.size());
    out.write(ckpt.rng_state.data(), static_cast<std::streamsize>(ckpt.rng_state.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string magic;
    if (!std::getline(in, magic) || magic != kCheckpointMagic)
        throw SchemaError("'" + path + "' is not a checkpoint (bad magic line)");

    Checkpoint ckpt;
    ckpt.n = get<std::int32_t>(in);
    ckpt.horizon = get<std::int32_t>(in);
    ckpt.intervention_value = get<double>(in);
    ckpt.fclass.tag = static_cast<FnTag>(get<std::int32_t>(in));
    ckpt.fclass.noise_std_sq = get<double>(in);
    ckpt.fclass.root_default = get<double>(in);
    ckpt.gamma = get<double>(in);
    ckpt.train_step = get<std::int64_t>(in);
    ckpt.epsilon = get<double>(in);
    ckpt.random_interventions = get<std::uint8_t>(in) != 0;
    ckpt.dq.n = ckpt.n;
    ckpt.dq.q_st = read_mlp(in);
    ckpt.dq.q_in = read_mlp(in);
    ckpt.dq.target_st = read_mlp(in);
    ckpt.dq.target_in = read_mlp(in);
    ckpt.dq.opt_st = read_adam(in);
    ckpt.dq.opt_in = read_adam(in);
    const auto rng_len = get<std::uint64_t>(in);
    ckpt.rng_state.resize(rng_len);
    in.read(ckpt.rng_state.data(), static_cast<std::streamsize>(rng_len));
    if (!in) throw ParseError("truncated checkpoint", 0);
    return ckpt;
}

std::string metrics_csv_header() {
    return "step,episode_return_mean,loss_st,loss_in,eval_mean_shd,eval_std_shd,epsilon";
}

namespace {

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

} // namespace

std::string metrics_csv_row(const MetricsRow& row) {
    std::string line = std::to_string(row.step);
    line += "," + csv_number(row.episode_return_mean);
    line += "," + csv_number(row.loss_st);
    line += "," + csv_number(row.loss_in);
    line += "," + (row.eval_mean_shd ? csv_number(*row.eval_mean_shd) : std::string());
    line += "," + (row.eval_std_shd ? csv_number(*row.eval_std_shd) : std::string());
    line += "," + csv_number(row.epsilon);
    return line;
}

TrainResult train(const TrainConfig& cfg, const GraphDataset& dataset,
                  const MetricsSink& on_metrics) {
    validate_config(cfg);
    if (dataset.n != cfg.n)
        throw ConfigError("dataset has n=" + std::to_string(dataset.n) + ", config expects n=" +
                          std::to_string(cfg.n));
    if (dataset.train.empty()) throw ConfigError("dataset train split is empty");
    if (dataset.test.empty()) throw ConfigError("dataset test split is empty");

    Rng init_rng(mix_seed(cfg.seed, 0x1417));
    Rng rollout_rng(mix_seed(cfg.seed, 0x5011));
    Rng batch_rng(mix_seed(cfg.seed, 0xb47c));

    DualQ dq = make_dual_q(cfg.n, cfg.horizon, cfg.hidden, cfg.learning_rate, init_rng);
    ReplayBuffer buffer(cfg.buffer_capacity);

    EnvConfig env_cfg;
    env_cfg.n = cfg.n;
    env_cfg.horizon = cfg.horizon;
    env_cfg.intervention_value = cfg.intervention_value;
    env_cfg.fclass = cfg.fclass;
    CdEnv env(env_cfg);
    std::vector<double> h = env.reset(dataset.train, rollout_rng);

    const bool train_in_head = !cfg.random_interventions || cfg.ablation_train_intervention;
    TrainStepOptions step_opts;
    step_opts.train_st = true;
    step_opts.train_in = train_in_head;
    step_opts.threads = cfg.train_threads;

    const std::size_t train_ready = std::max<std::size_t>(cfg.warmup, cfg.batch_size);

    TrainResult result;
    double best_mean = std::numeric_limits<double>::infinity();

    auto snapshot = [&](long step, double eps) {
        Checkpoint ckpt;
        ckpt.n = cfg.n;
        ckpt.horizon = cfg.horizon;
        ckpt.intervention_value = cfg.intervention_value;
        ckpt.fclass = cfg.fclass;
        ckpt.gamma = cfg.gamma;
        ckpt.train_step = step;
        ckpt.epsilon = eps;
        ckpt.random_interventions = cfg.random_interventions;
        ckpt.dq = dq;
        ckpt.rng_state = rollout_rng.state();
        return ckpt;
    };

    auto run_eval = [&](long step) {
        EpisodeEstimator estimator = [&](const Scm& scm, Rng& erng) {
            return run_episode(dq, scm, cfg.horizon, cfg.intervention_value,
                               cfg.random_interventions, erng, nullptr);
        };
        return evaluate(estimator, dataset.test, cfg.fclass, cfg.eval_episodes_per_graph,
                        mix_seed(cfg.seed, 0xe7a1, static_cast<std::uint64_t>(step)),
                        cfg.train_threads);
    };

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double episode_return = 0.0;
    double return_acc = 0.0;
    long episodes_acc = 0;
    double loss_st_acc = 0.0, loss_in_acc = 0.0;
    long losses_acc = 0;
    long train_steps_done = 0;

    for (long step = 1; step <= cfg.total_steps; ++step) {
        const double eps = cfg.eps.at(step, cfg.total_steps);

        ActionPair a = select_action(dq, h, env.mask(), eps, rollout_rng);
        if (cfg.random_interventions)
            a.intervene = static_cast<int>(rollout_rng.uniform_below(intervention_action_count(cfg.n)));

        StepResult res = env.step(a, rollout_rng);
        episode_return += res.reward;

        Transition t;
        t.history_before = std::move(h);
        t.action = a;
        t.reward = res.reward;
        t.history_after = res.encoded;
        t.done = res.done;
        t.estimate_after = env.estimate();
        buffer.push(std::move(t));

        if (buffer.size() >= train_ready && step % cfg.train_every == 0) {
            for (int u = 0; u < cfg.updates_per_step; ++u) {
                auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), batch_rng);
                const TrainLosses losses = train_step(dq, *batch, cfg.gamma, step_opts);
                loss_st_acc += losses.st;
                loss_in_acc += losses.in;
                ++losses_acc;
                ++train_steps_done;
                if (train_steps_done % cfg.sync_every == 0) sync_targets(dq);
            }
        }

        if (res.done) {
            return_acc += episode_return;
            ++episodes_acc;
            episode_return = 0.0;
            h = env.reset(dataset.train, rollout_rng);
        } else {
            h = std::move(res.encoded);
        }

        const bool eval_now = step % cfg.eval_every == 0 || step == cfg.total_steps;
        const bool metrics_now = step % cfg.metrics_every == 0 || eval_now;
        if (!metrics_now) continue;

        MetricsRow row;
        row.step = step;
        row.epsilon = eps;
        row.episode_return_mean = episodes_acc > 0 ? return_acc / episodes_acc : nan;
        row.loss_st = losses_acc > 0 ? loss_st_acc / losses_acc : nan;
        row.loss_in = losses_acc > 0 && train_in_head ? loss_in_acc / losses_acc : nan;
        return_acc = 0.0;
        episodes_acc = 0;
        loss_st_acc = loss_in_acc = 0.0;
        losses_acc = 0;

        if (eval_now) {
            const EvalReport report = run_eval(step);
            row.eval_mean_shd = report.mean_shd;
            row.eval_std_shd = report.std_shd;
            if (report.mean_shd < best_mean) {
                best_mean = report.mean_shd;
                result.best = snapshot(step, eps);
            }
            if (step == cfg.total_steps) result.final_eval = report;
        }

        result.metrics.push_back(row);
        if (on_metrics) on_metrics(row);
    }

    result.best_mean_shd = best_mean;
    result.last = snapshot(cfg.total_steps, cfg.eps.at(cfg.total_steps, cfg.total_steps));
    return result;
}

InferResult infer(const Checkpoint& ckpt, const Scm& scm, Rng& rng) {
    if (scm.n() != ckpt.n)
        throw ConfigError("SCM has " + std::to_string(scm.n()) + " nodes, checkpoint expects " +
                          std::to_string(ckpt.n));
    InferResult result;
    result.estimate = run_episode(ckpt.dq, scm, ckpt.horizon, ckpt.intervention_value,
                                  ckpt.random_interventions, rng, &result.trace);
    result.shd_vs_truth = shd(scm.graph, result.estimate);
    return result;
}

std::vector<std::vector<EvalReport>> transfer_matrix(std::span<const Checkpoint> checkpoints,
                                                     std::span<const FunctionClass> fclasses,
                                                     std::span<const Dag> graphs,
                                                     int draws_per_graph, std::uint64_t seed,
                                                     int threads) {
    if (checkpoints.empty() || fclasses.empty())
        throw ConfigError("transfer matrix needs at least one checkpoint and one function class");
    for (const Checkpoint& ckpt : checkpoints)
        if (ckpt.n != checkpoints.front().n)
            throw ConfigError("transfer matrix checkpoints must share the same n");

    std::vector<std::vector<EvalReport>> grid;
    grid.reserve(checkpoints.size());
    for (const Checkpoint& ckpt : checkpoints) {
        std::vector<EvalReport> row;
        row.reserve(fclasses.size());
        for (const FunctionClass& fclass : fclasses)
            row.push_back(
                evaluate(policy_estimator(ckpt), graphs, fclass, draws_per_graph, seed, threads));
        grid.push_back(std::move(row));
    }
    return grid;
}

} // namespace corecd
