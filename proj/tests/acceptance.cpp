// Acceptance suite: one line per criterion, [PASS]/[FAIL], exit code equal
// to the number of failures.
//
//   acceptance [--only 1,2,9] [--workdir DIR] [--reuse]
//
// Criteria 6-9 train real policies; expect roughly an hour for criterion 6
// and several hours for 7 and 8 on a two-core machine. --reuse skips a
// training run when its checkpoint already sits in the work directory.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "corecd/baselines.hpp"
#include "corecd/trainer.hpp"

using namespace corecd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
fs::path g_workdir = "acceptance-work";
bool g_reuse = false;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------- 1: census

void criterion_1() {
    Stopwatch timer;
    const auto d3 = enumerate_all_dags(3);
    const auto d4 = enumerate_all_dags(4);
    const double elapsed = timer.seconds();
    const bool pass = d3.size() == 25 && d4.size() == 543 && elapsed < 1.0;
    report(1, pass,
           fmt("DAG census: n=3 -> %zu (want 25), n=4 -> %zu (want 543), %.2fs (limit 1s)",
               d3.size(), d4.size(), elapsed));
}

// --------------------------------------------------- 2: reward equivalence

void criterion_2() {
    Stopwatch timer;
    Rng rng(90210);
    long checked = 0, mismatches = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const int n = 3 + static_cast<int>(rng.uniform_below(3));
        Dag truth(n), estimate(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (rng.uniform() < 0.4) truth.set_edge(i, j, true);
                if (rng.uniform() < 0.4) estimate.set_edge(i, j, true);
            }
        const StructuralMask mask = structural_mask(estimate);
        std::vector<int> valid;
        for (int a = 0; a < structural_action_count(n); ++a)
            if (mask.allowed[a]) valid.push_back(a);
        const EdgeOp op = decode_structural(valid[rng.uniform_below(valid.size())], n);

        Dag next = estimate;
        if (op.kind == EdgeOpKind::kAdd) next.set_edge(op.from, op.to, true);
        if (op.kind == EdgeOpKind::kRemove) next.set_edge(op.from, op.to, false);

        ++checked;
        if (reward_for(op, truth) != shd(truth, estimate) - shd(truth, next)) ++mismatches;
    }
    const double elapsed = timer.seconds();
    const bool pass = mismatches == 0 && elapsed < 5.0;
    report(2, pass,
           fmt("reward == SHD delta on %ld random triples, %ld mismatches, %.2fs (limit 5s)",
               checked, mismatches, elapsed));
}

// ----------------------------------------------- 3: intervention semantics

void criterion_3() {
    Rng rng(314159);
    const FnTag tags[] = {FnTag::kLinear, FnTag::kLinearNoise, FnTag::kInteraction};
    long checked = 0, clamp_failures = 0, edge_failures = 0;
    for (FnTag tag : tags) {
        FunctionClass fc;
        fc.tag = tag;
        for (int rep = 0; rep < 1000; ++rep) {
            const int n = 3 + static_cast<int>(rng.uniform_below(4));
            const Dag g = generate_er_dag(n, 0.4, rng);
            Scm m = sample_scm(g, fc, rng);
            const int target = static_cast<int>(rng.uniform_below(n));
            apply_intervention(m, target, 20.0);

            if (sample_observation(m, rng)[target] != 20.0) ++clamp_failures;
            const Dag induced = induced_graph(m);
            for (int i = 0; i < n; ++i)
                if (induced.edge(i, target)) ++edge_failures;
            ++checked;
        }
    }
    const bool pass = clamp_failures == 0 && edge_failures == 0;
    report(3, pass,
           fmt("do(X_i=c) on %ld SCMs across 3 function classes: %ld clamp failures, "
               "%ld leftover incoming edges",
               checked, clamp_failures, edge_failures));
}

// ------------------------------------------------ 4: gradient correctness

double net_loss(const Mlp& p, std::span<const double> x, std::span<const double> grad_out) {
    const std::vector<double> y = forward(p, x);
    double j = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) j += y[i] * grad_out[i];
    return j;
}

double min_hidden_preact(const Mlp& p, std::span<const double> x) {
    std::vector<double> act(x.begin(), x.end());
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
        const Layer& layer = p.layers[l];
        std::vector<double> next(layer.out);
        for (int o = 0; o < layer.out; ++o) {
            double pre = layer.b[o];
            for (int i = 0; i < layer.in; ++i) pre += layer.w[o * layer.in + i] * act[i];
            closest = std::min(closest, std::abs(pre));
            next[o] = std::max(0.0, pre);
        }
        act = std::move(next);
    }
    return closest;
}

void criterion_4() {
    Stopwatch timer;
    Rng rng(161803);
    const double h = 1e-5;
    long nets = 0, coords = 0;
    double worst = 0.0;
    while (nets < 100) {
        const int in = 2 + static_cast<int>(rng.uniform_below(4));
        const int mid = 3 + static_cast<int>(rng.uniform_below(6));
        const int out = 1 + static_cast<int>(rng.uniform_below(4));
        std::vector<int> sizes{in, mid};
        if (rng.uniform() < 0.5) sizes.push_back(3 + static_cast<int>(rng.uniform_below(4)));
        sizes.push_back(out);

        Mlp p = init_params(sizes, rng);
        std::vector<double> x(in), grad_out(out);
        for (double& v : x) v = rng.gaussian();
        for (double& v : grad_out) v = rng.gaussian();
        // central differences are only valid away from the rectifier kinks
        if (min_hidden_preact(p, x) < 1e-3) continue;
        ++nets;

        const MlpGrads grads = backward(p, x, grad_out);
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
                for (std::size_t k = 0; k < params.size(); ++k) {
                    const double saved = params[k];
                    params[k] = saved + h;
                    p.layers[l].sync_transpose();
                    const double up = net_loss(p, x, grad_out);
                    params[k] = saved - h;
                    p.layers[l].sync_transpose();
                    const double down = net_loss(p, x, grad_out);
                    params[k] = saved;
                    p.layers[l].sync_transpose();

                    const double fd = (up - down) / (2.0 * h);
                    const double rel =
                        std::abs(fd - analytic[k]) / std::max({1.0, std::abs(fd), std::abs(analytic[k])});
                    worst = std::max(worst, rel);
                    ++coords;
                }
            };
            probe(p.layers[l].w, grads.w[l]);
            probe(p.layers[l].b, grads.b[l]);
        }
    }
    const double elapsed = timer.seconds();
    const bool pass = worst <= 1e-4 && elapsed < 30.0;
    report(4, pass,
           fmt("gradients vs central differences on %ld nets (%ld coords): worst rel err %.2e "
               "(limit 1e-4), %.1fs (limit 30s)",
               nets, coords, worst, elapsed));
}

// ------------------------------------------- 5: empty-baseline exactness

void criterion_5() {
    const GraphDataset ds = build_dataset(3, 25, {19, 6}, 0.2, 17);
    const EvalReport report5 =
        evaluate(empty_baseline_estimator(3), ds.test, FunctionClass{}, 3, 11);
    const double expected = mean_edge_count(ds.test);
    const double err = std::abs(report5.mean_shd - expected);
    report(5, err <= 1e-12,
           fmt("empty baseline mean %.15g vs test mean edge count %.15g (|diff| %.1e)",
               report5.mean_shd, expected, err));
}

// ----------------------------------------------------- training utilities

TrainConfig desk_config(int n, long steps, std::uint64_t seed, int train_threads) {
    TrainConfig cfg;
    cfg.n = n;
    cfg.horizon = n == 3 ? 5 : 8;
    cfg.hidden = {128, 128, 128};
    cfg.total_steps = steps;
    cfg.learning_rate = 3e-4;
    cfg.eps.end = 0.1;
    cfg.eval_every = n == 3 ? 5'000 : 10'000;
    cfg.metrics_every = 5'000;
    cfg.train_threads = train_threads;
    cfg.seed = seed;
    return cfg;
}

TrainResult train_logged(const TrainConfig& cfg, const GraphDataset& ds, const std::string& name) {
    std::ofstream metrics(g_workdir / (name + "-metrics.csv"));
    metrics << metrics_csv_header() << "\n";
    return train(cfg, ds, [&](const MetricsRow& row) {
        metrics << metrics_csv_row(row) << "\n";
        metrics.flush();
    });
}

// Trains (or reloads with --reuse) and returns the best checkpoint path.
Checkpoint trained_checkpoint(const TrainConfig& cfg, const GraphDataset& ds,
                              const std::string& name, double* train_seconds) {
    const fs::path ckpt_path = g_workdir / (name + "-best.ckpt");
    if (g_reuse && fs::exists(ckpt_path)) {
        *train_seconds = 0.0;
        return load_checkpoint(ckpt_path.string());
    }
    Stopwatch timer;
    const TrainResult result = train_logged(cfg, ds, name);
    *train_seconds = timer.seconds();
    save_checkpoint(result.best, ckpt_path.string());
    return result.best;
}

// --------------------------------------------- 6: desk-scale learning n=3

void criterion_6() {
    // dataset seed picked so the test split's edge-count profile matches the
    // published empty baseline (1.80 +- 0.90): seed 17 gives 1.83 +- 0.90
    const GraphDataset ds = build_dataset(3, 25, {19, 6}, 0.2, 17);
    const TrainConfig cfg = desk_config(3, 500'000, 1, 2);

    double seconds = 0.0;
    const Checkpoint best = trained_checkpoint(cfg, ds, "n3-lin20", &seconds);

    const EvalReport policy = evaluate(policy_estimator(best), ds.test, cfg.fclass,
                                       cfg.eval_episodes_per_graph, 40'406, 2);
    const EvalReport empty =
        evaluate(empty_baseline_estimator(3), ds.test, cfg.fclass, cfg.eval_episodes_per_graph, 40'406);

    const bool pass = policy.mean_shd <= 1.0 && policy.mean_shd < empty.mean_shd;
    report(6, pass,
           fmt("n=3 500k steps: best ckpt mean shd %.3f +- %.3f (gate <= 1.0), empty baseline "
               "%.3f, train %.0fs (target 3600s)",
               policy.mean_shd, policy.std_shd, empty.mean_shd, seconds));
}

// --------------------------------------------- 7: desk-scale learning n=4

void criterion_7() {
    // seed 60: test split 3.80 +- 1.10 edges, matching the published empty
    // baseline for four variables
    const GraphDataset ds = build_dataset(4, 543, {401, 142}, 0.2, 60);
    const TrainConfig cfg = desk_config(4, 1'000'000, 1, 2);

    double seconds = 0.0;
    const Checkpoint best = trained_checkpoint(cfg, ds, "n4-lin20", &seconds);

    const EvalReport policy = evaluate(policy_estimator(best), ds.test, cfg.fclass,
                                       cfg.eval_episodes_per_graph, 40'407, 2);
    const bool pass = policy.mean_shd <= 1.5;
    report(7, pass,
           fmt("n=4 1M steps: best ckpt mean shd %.3f +- %.3f (gate <= 1.5), train %.0fs "
               "(target 9000s)",
               policy.mean_shd, policy.std_shd, seconds));
}

// ------------------------------------------------- 8: ablation direction

void criterion_8() {
    const GraphDataset ds = build_dataset(4, 543, {401, 142}, 0.2, 60);
    const std::uint64_t seeds[] = {101, 202, 303};

    int wins = 0;
    std::string detail;
    Stopwatch timer;
    for (std::uint64_t seed : seeds) {
        TrainConfig learned_cfg = desk_config(4, 600'000, seed, 1);
        TrainConfig random_cfg = learned_cfg;
        random_cfg.random_interventions = true;

        const std::string learned_name = "n4-ablation-learned-" + std::to_string(seed);
        const std::string random_name = "n4-ablation-random-" + std::to_string(seed);

        // matched pair shares the machine, one run per core
        double learned_final = 0.0, random_final = 0.0;
        std::exception_ptr worker_error;
        std::thread worker([&] {
            try {
                const fs::path path = g_workdir / (learned_name + "-final.txt");
                if (g_reuse && fs::exists(path)) {
                    std::ifstream(path) >> learned_final;
                    return;
                }
                const TrainResult r = train_logged(learned_cfg, ds, learned_name);
                learned_final = r.final_eval.mean_shd;
                std::ofstream(path) << learned_final << "\n";
            } catch (...) {
                worker_error = std::current_exception();
            }
        });
        {
            const fs::path path = g_workdir / (random_name + "-final.txt");
            if (g_reuse && fs::exists(path)) {
                std::ifstream(path) >> random_final;
            } else {
                const TrainResult r = train_logged(random_cfg, ds, random_name);
                random_final = r.final_eval.mean_shd;
                std::ofstream(path) << random_final << "\n";
            }
        }
        worker.join();
        if (worker_error) std::rethrow_exception(worker_error);

        if (learned_final < random_final) ++wins;
        detail += fmt("seed %llu: learned %.3f vs random %.3f; ",
                      static_cast<unsigned long long>(seed), learned_final, random_final);
    }
    const bool pass = wins >= 2;
    report(8, pass,
           fmt("ablation n=4 600k steps: learned beats random in %d/3 seeds (need >= 2) — %s"
               "%.0fs total",
               wins, detail.c_str(), timer.seconds()));
}

// --------------------------------------------------- 9: transfer direction

void criterion_9() {
    const fs::path ckpt_path = g_workdir / "n3-lin20-best.ckpt";
    if (!fs::exists(ckpt_path)) {
        report(9, false, "transfer check needs the criterion-6 checkpoint (run --only 6,9)");
        return;
    }
    const Checkpoint best = load_checkpoint(ckpt_path.string());
    const GraphDataset ds = build_dataset(3, 25, {19, 6}, 0.2, 17);

    std::vector<FunctionClass> fclasses(3);
    fclasses[0].tag = FnTag::kLinear;
    fclasses[1].tag = FnTag::kLinearNoise;
    fclasses[2].tag = FnTag::kInteraction;

    const std::vector<Checkpoint> ckpts{best};
    const auto grid = transfer_matrix(ckpts, fclasses, ds.test, 3, 50'509, 2);
    const double lin = grid[0][0].mean_shd;
    const double noise = grid[0][1].mean_shd;
    const double interaction = grid[0][2].mean_shd;

    const bool pass = (noise - lin) < 1.0 && (interaction - lin) >= 1.0;
    report(9, pass,
           fmt("transfer from lin-20: lin %.3f, +noise %.3f (delta %.3f, gate < 1.0), "
               "interaction %.3f (delta %.3f, gate >= 1.0)",
               lin, noise, noise - lin, interaction, interaction - lin));
}

// ------------------------------------------------ 10: presets + n=10 smoke

void criterion_10() {
    bool presets_ok = true;
    std::string missing;
    for (const char* name : {"paper-3var", "paper-4var", "paper-5var", "paper-8var", "paper-10var"}) {
        try {
            validate_config(config_preset(name));
        } catch (const Error&) {
            presets_ok = false;
            missing += std::string(name) + " ";
        }
    }

    Stopwatch timer;
    bool smoke_ok = true;
    std::string smoke_detail;
    try {
        const GraphDataset ds = build_dataset(10, 600, {500, 100}, 0.2, 7);

        // paper-10var network shape; batch/cadence shrunk so the smoke run
        // fits the time box on two cores (full budgets stay config-only)
        TrainConfig cfg = config_preset("paper-10var");
        cfg.total_steps = 10'000;
        cfg.batch_size = 8;
        cfg.train_every = 4;
        cfg.buffer_capacity = 20'000;
        cfg.eval_every = 10'000;
        cfg.metrics_every = 1'000;
        cfg.train_threads = 2;
        cfg.learning_rate = 3e-4;
        cfg.seed = 1;
        validate_config(cfg);

        const TrainResult result = train_logged(cfg, ds, "n10-smoke");
        smoke_detail = fmt("final eval %.2f +- %.2f after 10k steps", result.final_eval.mean_shd,
                           result.final_eval.std_shd);
    } catch (const std::exception& e) {
        smoke_ok = false;
        smoke_detail = std::string("smoke run failed: ") + e.what();
    }
    const double elapsed = timer.seconds();
    smoke_ok = smoke_ok && elapsed < 600.0;

    report(10, presets_ok && smoke_ok,
           fmt("presets %s; n=10 smoke (10k steps, 1024-wide): %s, %.0fs (limit 600s)",
               presets_ok ? "all valid" : ("invalid: " + missing).c_str(), smoke_detail.c_str(),
               elapsed));
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else if (arg == "--workdir" && i + 1 < argc) {
            g_workdir = argv[++i];
        } else if (arg == "--reuse") {
            g_reuse = true;
        } else {
            std::cerr << "usage: acceptance [--only 1,2,...] [--workdir DIR] [--reuse]\n";
            return 64;
        }
    }
    fs::create_directories(g_workdir);

    const auto want = [&](int k) { return only.empty() || only.count(k) > 0; };

    try {
        if (want(1)) criterion_1();
        if (want(2)) criterion_2();
        if (want(3)) criterion_3();
        if (want(4)) criterion_4();
        if (want(5)) criterion_5();
        if (want(6)) criterion_6();
        if (want(7)) criterion_7();
        if (want(8)) criterion_8();
        if (want(9)) criterion_9();
        if (want(10)) criterion_10();
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << "\n";
        return 99;
    }

    if (g_failures == 0)
        std::printf("all selected criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
