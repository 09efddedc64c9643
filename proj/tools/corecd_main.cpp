// corecd: train and evaluate causal-discovery policies on simulated SCMs.
//
// Subcommands: gen-data, train, eval, baseline, transfer, infer.
// Exit codes: 0 success, 1 runtime/IO failure, 2 usage/validation failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "corecd/baselines.hpp"
#include "corecd/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corecd;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("CORECD_OUT");
    return env && *env ? env : ".";
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

std::vector<int> parse_hidden(const std::string& v) {
    std::vector<int> sizes;
    for (const std::string& part : split_csv(v))
        sizes.push_back(static_cast<int>(parse_long(part, "hidden")));
    return sizes;
}

struct RunSettings {
    TrainConfig cfg;
    std::string dataset;
    std::string out_dir;
};

/// Applies one flat config key. Unknown keys are rejected.
void apply_key(RunSettings& rs, const std::string& key, const std::string& value) {
    TrainConfig& cfg = rs.cfg;
    if (key == "n") cfg.n = static_cast<int>(parse_long(value, key));
    else if (key == "fclass") cfg.fclass.tag = fn_tag_from_string(value);
    else if (key == "noise_variance") cfg.fclass.noise_std_sq = parse_double(value, key);
    else if (key == "root_default") cfg.fclass.root_default = parse_double(value, key);
    else if (key == "intervention_value") cfg.intervention_value = parse_double(value, key);
    else if (key == "horizon") cfg.horizon = static_cast<int>(parse_long(value, key));
    else if (key == "total_steps") cfg.total_steps = parse_long(value, key);
    else if (key == "hidden") cfg.hidden = parse_hidden(value);
    else if (key == "gamma") cfg.gamma = parse_double(value, key);
    else if (key == "eps_start") cfg.eps.start = parse_double(value, key);
    else if (key == "eps_end") cfg.eps.end = parse_double(value, key);
    else if (key == "eps_decay_frac") cfg.eps.decay_frac = parse_double(value, key);
    else if (key == "buffer_capacity") cfg.buffer_capacity = static_cast<std::size_t>(parse_long(value, key));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_long(value, key));
    else if (key == "sync_every") cfg.sync_every = parse_long(value, key);
    else if (key == "warmup") cfg.warmup = parse_long(value, key);
    else if (key == "train_every") cfg.train_every = static_cast<int>(parse_long(value, key));
    else if (key == "updates_per_step") cfg.updates_per_step = static_cast<int>(parse_long(value, key));
    else if (key == "learning_rate") cfg.learning_rate = parse_double(value, key);
    else if (key == "eval_every") cfg.eval_every = parse_long(value, key);
    else if (key == "eval_episodes_per_graph") cfg.eval_episodes_per_graph = static_cast<int>(parse_long(value, key));
    else if (key == "metrics_every") cfg.metrics_every = parse_long(value, key);
    else if (key == "random_interventions") cfg.random_interventions = parse_bool(value, key);
    else if (key == "ablation_train_intervention") cfg.ablation_train_intervention = parse_bool(value, key);
    else if (key == "train_threads") cfg.train_threads = static_cast<int>(parse_long(value, key));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value, key));
    else if (key == "dataset") rs.dataset = value;
    else if (key == "out_dir") rs.out_dir = value;
    else if (key == "preset")
        throw ConfigError("'preset' is not a config-file key; pass --preset on the command line");
    else
        throw ConfigError("unknown config key '" + key + "'");
}

void load_config_file(RunSettings& rs, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const std::size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" +
                              line + "'");
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::size_t vstart = line.find_first_not_of(" \t", eq + 1);
        const std::string value = vstart == std::string::npos ? "" : line.substr(vstart);
        apply_key(rs, key, value);
    }
}

json report_to_json(const EvalReport& report) {
    json per_graph = json::array();
    for (const GraphEval& ge : report.per_graph)
        per_graph.push_back({{"graph_index", ge.graph_index}, {"shds", ge.shds}, {"mean", ge.mean}});
    return json{{"mean_shd", report.mean_shd},
                {"std_shd", report.std_shd},
                {"graphs", report.graphs},
                {"draws_per_graph", report.draws_per_graph},
                {"per_graph", per_graph},
                {"wall_clock_seconds_per_graph", report.seconds_per_graph}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write to '" + path + "' failed");
}

FunctionClass fclass_from_flags(const std::string& tag, double noise_var, double root_default) {
    FunctionClass fc;
    fc.tag = fn_tag_from_string(tag);
    fc.noise_std_sq = noise_var;
    fc.root_default = root_default;
    return fc;
}

std::string fclass_label(const FunctionClass& fc) { return to_string(fc.tag); }

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
    int n = 3;
    long total = -1;
    int train = -1;
    int test = -1;
    double p = 0.2;
    std::uint64_t seed = 7;
    std::string out;
};

void default_split(int n, long& total, int& train, int& test) {
    struct Row {
        int n;
        long total;
        int train;
        int test;
    };
    static constexpr Row table[] = {{3, 25, 19, 6},
                                    {4, 543, 401, 142},
                                    {5, 16'000, 15'000, 1'000},
                                    {8, 91'000, 90'000, 1'000},
                                    {10, 101'000, 100'000, 1'000}};
    for (const Row& row : table) {
        if (row.n != n) continue;
        if (total < 0) total = row.total;
        if (train < 0) train = row.train;
        if (test < 0) test = row.test;
        return;
    }
    if (total < 0 || train < 0 || test < 0)
        throw ConfigError("no built-in split for n=" + std::to_string(n) +
                          "; pass --total, --train and --test");
}

int cmd_gen_data(const GenDataArgs& args) {
    long total = args.total;
    int train = args.train, test = args.test;
    default_split(args.n, total, train, test);

    const GraphDataset ds =
        build_dataset(args.n, static_cast<int>(total), {train, test}, args.p, args.seed);
    const std::string out =
        args.out.empty() ? (fs::path(default_out_root()) / ("dataset-n" + std::to_string(args.n) + ".txt")).string()
                         : args.out;
    save_dataset(ds, out);
    std::cout << "wrote " << out << "\n"
              << "train " << ds.train.size() << " graphs, mean edges " << mean_edge_count(ds.train)
              << "\n"
              << "test  " << ds.test.size() << " graphs, mean edges " << mean_edge_count(ds.test)
              << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const RunSettings& rs) {
    validate_config(rs.cfg);
    if (rs.dataset.empty()) throw ConfigError("train needs a dataset (key 'dataset' or --dataset)");
    const GraphDataset ds = load_dataset(rs.dataset);
    if (ds.n != rs.cfg.n)
        throw ConfigError("dataset n=" + std::to_string(ds.n) + " does not match config n=" +
                          std::to_string(rs.cfg.n));

    const fs::path out_dir = rs.out_dir.empty() ? fs::path(default_out_root()) : fs::path(rs.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

    std::ofstream metrics(out_dir / "metrics.csv");
    if (!metrics) throw IoError("cannot open metrics.csv under '" + out_dir.string() + "'");
    metrics << metrics_csv_header() << "\n";

    const TrainResult result = train(rs.cfg, ds, [&](const MetricsRow& row) {
        metrics << metrics_csv_row(row) << "\n";
        metrics.flush();
        if (row.eval_mean_shd)
            std::cout << "step " << row.step << "  eval mean shd " << *row.eval_mean_shd << " +- "
                      << *row.eval_std_shd << "\n"
                      << std::flush;
    });

    save_checkpoint(result.best, (out_dir / "best.ckpt").string());
    save_checkpoint(result.last, (out_dir / "last.ckpt").string());

    json final_json = report_to_json(result.final_eval);
    final_json["n"] = rs.cfg.n;
    final_json["fclass"] = fclass_label(rs.cfg.fclass);
    final_json["seed"] = rs.cfg.seed;
    final_json["best_mean_shd"] = result.best_mean_shd;
    final_json["best_step"] = result.best.train_step;
    write_json(final_json, (out_dir / "final_eval.json").string());

    std::cout << "best mean shd " << result.best_mean_shd << " at step " << result.best.train_step
              << "\n"
              << "final eval " << result.final_eval.mean_shd << " +- " << result.final_eval.std_shd
              << "\n"
              << "checkpoints and metrics under " << out_dir.string() << "\n";
    return 0;
}

// -------------------------------------------------------- eval / baseline

void print_report(const std::string& label, const EvalReport& report) {
    std::cout << label << ": mean shd " << report.mean_shd << " +- " << report.std_shd << " over "
              << report.graphs << " graphs x " << report.draws_per_graph << " draws\n";
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset_path,
             const std::string& fclass_tag, double noise_var, double root_default, int draws,
             std::uint64_t seed, int threads, const std::string& json_path) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const GraphDataset ds = load_dataset(dataset_path);
    if (ds.n != ckpt.n)
        throw ConfigError("dataset n=" + std::to_string(ds.n) + " does not match checkpoint n=" +
                          std::to_string(ckpt.n));

    FunctionClass fc = ckpt.fclass;
    if (!fclass_tag.empty()) fc = fclass_from_flags(fclass_tag, noise_var, root_default);

    const EvalReport report = evaluate(policy_estimator(ckpt), ds.test, fc, draws, seed, threads);
    print_report("policy[" + fclass_label(fc) + " c=" + std::to_string(ckpt.intervention_value) + "]",
                 report);

    if (!json_path.empty()) {
        json j = report_to_json(report);
        j["policy"] = ckpt_path;
        j["n"] = ckpt.n;
        j["fclass"] = fclass_label(fc);
        j["noise_variance"] = fc.noise_std_sq;
        j["intervention_value"] = ckpt.intervention_value;
        j["seed"] = seed;
        write_json(j, json_path);
    }
    return 0;
}

int cmd_baseline(const std::string& kind, const std::string& dataset_path, double p, int draws,
                 std::uint64_t seed, const std::string& json_path) {
    const GraphDataset ds = load_dataset(dataset_path);
    const double edge_prob = p >= 0.0 ? p : ds.edge_prob;

    EpisodeEstimator estimator;
    if (kind == "empty")
        estimator = empty_baseline_estimator(ds.n);
    else if (kind == "random")
        estimator = random_baseline_estimator(ds.n, edge_prob);
    else
        throw ConfigError("unknown baseline kind '" + kind + "' (empty or random)");

    const EvalReport report = evaluate(estimator, ds.test, FunctionClass{}, draws, seed);
    print_report("baseline[" + kind + "]", report);

    if (!json_path.empty()) {
        json j = report_to_json(report);
        j["policy"] = "baseline-" + kind;
        j["n"] = ds.n;
        if (kind == "random") {
            j["distribution"] = "er_dag"; // same generator as the datasets
            j["edge_prob"] = edge_prob;
        }
        j["seed"] = seed;
        write_json(j, json_path);
    }
    return 0;
}

// ---------------------------------------------------------------- transfer

int cmd_transfer(const std::string& ckpts_csv, const std::string& fclasses_csv,
                 const std::string& dataset_path, double noise_var, double root_default, int draws,
                 std::uint64_t seed, int threads, const std::string& json_path) {
    std::vector<Checkpoint> ckpts;
    for (const std::string& path : split_csv(ckpts_csv)) ckpts.push_back(load_checkpoint(path));

    std::vector<FunctionClass> fclasses;
    for (const std::string& tag : split_csv(fclasses_csv))
        fclasses.push_back(fclass_from_flags(tag, noise_var, root_default));

    const GraphDataset ds = load_dataset(dataset_path);
    for (const Checkpoint& ckpt : ckpts)
        if (ckpt.n != ds.n) throw ConfigError("checkpoint/dataset node counts differ");

    const auto grid = transfer_matrix(ckpts, fclasses, ds.test, draws, seed, threads);

    std::cout << "transfer grid (rows: checkpoints, cols: function classes)\n";
    std::cout << "          ";
    for (const FunctionClass& fc : fclasses) std::cout << fclass_label(fc) << "  ";
    std::cout << "\n";
    const auto ckpt_paths = split_csv(ckpts_csv);
    for (std::size_t r = 0; r < grid.size(); ++r) {
        std::cout << ckpt_paths[r] << ": ";
        for (const EvalReport& cell : grid[r]) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f +- %.2f   ", cell.mean_shd, cell.std_shd);
            std::cout << buf;
        }
        std::cout << "\n";
    }

    if (!json_path.empty()) {
        json rows = json::array();
        for (std::size_t r = 0; r < grid.size(); ++r) {
            json cols = json::array();
            for (std::size_t c = 0; c < grid[r].size(); ++c) {
                json cell = report_to_json(grid[r][c]);
                cell["checkpoint"] = ckpt_paths[r];
                cell["fclass"] = fclass_label(fclasses[c]);
                cols.push_back(std::move(cell));
            }
            rows.push_back(std::move(cols));
        }
        write_json(json{{"grid", rows}, {"seed", seed}}, json_path);
    }
    return 0;
}

// ------------------------------------------------------------------- infer

int cmd_infer(const std::string& ckpt_path, const std::string& scm_preset_name,
              std::int64_t scm_seed, double graph_p, std::uint64_t episode_seed, bool print_scm,
              const std::string& trace_jsonl) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);

    Scm scm;
    if (!scm_preset_name.empty()) {
        scm = scm_preset(scm_preset_name);
        scm.fclass = ckpt.fclass;
    } else if (scm_seed >= 0) {
        Rng scm_rng(static_cast<std::uint64_t>(scm_seed));
        const Dag g = generate_er_dag(ckpt.n, graph_p, scm_rng);
        scm = sample_scm(g, ckpt.fclass, scm_rng);
    } else {
        throw ConfigError("infer needs --scm-preset or --scm-seed");
    }
    if (scm.n() != ckpt.n)
        throw ConfigError("SCM has " + std::to_string(scm.n()) + " nodes, checkpoint expects " +
                          std::to_string(ckpt.n));

    if (print_scm) std::cout << format_scm(scm);

    Rng rng(episode_seed);
    const InferResult result = infer(ckpt, scm, rng);

    std::ofstream jsonl;
    if (!trace_jsonl.empty()) {
        jsonl.open(trace_jsonl);
        if (!jsonl) throw IoError("cannot open '" + trace_jsonl + "' for writing");
    }

    for (const StepTrace& st : result.trace) {
        std::cout << "step " << st.step << ": ";
        if (st.intervene == ckpt.n)
            std::cout << "observe";
        else
            std::cout << "do(X_" << st.intervene << "=" << ckpt.intervention_value << ")";
        switch (st.op.kind) {
        case EdgeOpKind::kVoid: std::cout << ", void"; break;
        case EdgeOpKind::kAdd: std::cout << ", add " << st.op.from << "->" << st.op.to; break;
        case EdgeOpKind::kRemove: std::cout << ", remove " << st.op.from << "->" << st.op.to; break;
        }
        std::cout << ", reward " << st.reward << "\n";

        if (jsonl.is_open()) {
            json record{{"step", st.step},
                        {"reward", st.reward},
                        {"observation", st.observation},
                        {"estimate_bits", st.estimate_bits}};
            record["intervention"] = st.intervene == ckpt.n ? json(nullptr) : json(st.intervene);
            switch (st.op.kind) {
            case EdgeOpKind::kVoid: record["structural_op"] = {{"kind", "void"}}; break;
            case EdgeOpKind::kAdd:
                record["structural_op"] = {{"kind", "add"}, {"from", st.op.from}, {"to", st.op.to}};
                break;
            case EdgeOpKind::kRemove:
                record["structural_op"] = {{"kind", "remove"}, {"from", st.op.from}, {"to", st.op.to}};
                break;
            }
            jsonl << record.dump() << "\n";
        }
    }

    std::cout << "estimate: " << result.estimate.bits() << "\n"
              << "truth:    " << scm.graph.bits() << "\n"
              << "shd:      " << result.shd_vs_truth << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal-discovery policy training and evaluation on simulated SCMs"};
    app.require_subcommand(1);

    // gen-data
    GenDataArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a train/test DAG dataset");
    gen_cmd->add_option("--n", gen.n, "number of variables")->required();
    gen_cmd->add_option("--total", gen.total, "unique graphs to generate (default: built-in)");
    gen_cmd->add_option("--train", gen.train, "train split size");
    gen_cmd->add_option("--test", gen.test, "test split size");
    gen_cmd->add_option("--p", gen.p, "ER edge probability (default 0.2)");
    gen_cmd->add_option("--seed", gen.seed, "dataset seed");
    gen_cmd->add_option("--out", gen.out, "output path");

    // train
    RunSettings rs;
    std::string preset_name, config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    CLI::App* train_cmd = app.add_subcommand("train", "train a dual Q-learning policy");
    train_cmd->add_option("--preset", preset_name, "base configuration (see --list-presets)");
    train_cmd->add_option("--config", config_path, "key=value config file");
    auto add_override = [&](const std::string& flag, const std::string& key, const std::string& help) {
        train_cmd->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
    };
    add_override("--n", "n", "number of variables");
    add_override("--fclass", "fclass", "linear | linear_noise | interaction");
    add_override("--noise-variance", "noise_variance", "gaussian noise variance (linear_noise)");
    add_override("--root-default", "root_default", "value of parentless nodes");
    add_override("--c,--intervention-value", "intervention_value", "do() clamp value");
    add_override("--horizon", "horizon", "steps per episode");
    add_override("--steps,--total-steps", "total_steps", "environment steps to train for");
    add_override("--hidden", "hidden", "hidden layer sizes, comma separated");
    add_override("--gamma", "gamma", "discount factor");
    add_override("--eps-start", "eps_start", "initial exploration rate");
    add_override("--eps-end", "eps_end", "final exploration rate");
    add_override("--eps-decay-frac", "eps_decay_frac", "fraction of steps spent decaying epsilon");
    add_override("--buffer", "buffer_capacity", "replay buffer capacity");
    add_override("--batch", "batch_size", "training batch size");
    add_override("--sync-every", "sync_every", "train steps between target syncs");
    add_override("--warmup", "warmup", "transitions before training starts");
    add_override("--train-every", "train_every", "env steps per training round");
    add_override("--updates-per-step", "updates_per_step", "gradient updates per training round");
    add_override("--lr", "learning_rate", "optimizer learning rate");
    add_override("--eval-every", "eval_every", "steps between evaluations");
    add_override("--eval-draws", "eval_episodes_per_graph", "SCM draws per test graph");
    add_override("--metrics-every", "metrics_every", "steps between metrics rows");
    add_override("--train-threads", "train_threads", "1 or 2 (per-head parallelism)");
    add_override("--seed", "seed", "training seed");
    add_override("--dataset", "dataset", "dataset file");
    add_override("--out-dir", "out_dir", "output directory");
    bool flag_random_iv = false, flag_ablation_train = false, list_presets = false;
    train_cmd->add_flag("--random-interventions", flag_random_iv,
                        "pick intervention targets uniformly at random");
    train_cmd->add_flag("--ablation-train-intervention-head", flag_ablation_train,
                        "keep fitting the intervention head while ablated");
    train_cmd->add_flag("--list-presets", list_presets, "print preset names and exit");

    // eval
    std::string eval_ckpt, eval_dataset, eval_fclass, eval_json;
    double eval_noise_var = 0.5, eval_root_default = 0.0;
    int eval_draws = 3, eval_threads = 1;
    std::uint64_t eval_seed = 1;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a test split");
    eval_cmd->add_option("--ckpt", eval_ckpt)->required();
    eval_cmd->add_option("--dataset", eval_dataset)->required();
    eval_cmd->add_option("--fclass", eval_fclass, "override the checkpoint's function class");
    eval_cmd->add_option("--noise-variance", eval_noise_var);
    eval_cmd->add_option("--root-default", eval_root_default);
    eval_cmd->add_option("--draws", eval_draws, "SCM draws per graph (default 3)");
    eval_cmd->add_option("--seed", eval_seed);
    eval_cmd->add_option("--threads", eval_threads);
    eval_cmd->add_option("--json", eval_json, "write the report as JSON");

    // baseline
    std::string base_kind, base_dataset, base_json;
    double base_p = -1.0;
    int base_draws = 3;
    std::uint64_t base_seed = 1;
    CLI::App* base_cmd = app.add_subcommand("baseline", "evaluate a trivial baseline");
    base_cmd->add_option("--kind", base_kind, "empty | random")->required();
    base_cmd->add_option("--dataset", base_dataset)->required();
    base_cmd->add_option("--p", base_p, "random baseline edge probability (default: dataset's)");
    base_cmd->add_option("--draws", base_draws);
    base_cmd->add_option("--seed", base_seed);
    base_cmd->add_option("--json", base_json);

    // transfer
    std::string tr_ckpts, tr_fclasses = "linear,linear_noise,interaction", tr_dataset, tr_json;
    double tr_noise_var = 0.5, tr_root_default = 0.0;
    int tr_draws = 3, tr_threads = 1;
    std::uint64_t tr_seed = 1;
    CLI::App* tr_cmd = app.add_subcommand("transfer", "checkpoints x function classes grid");
    tr_cmd->add_option("--ckpts", tr_ckpts, "checkpoint paths, comma separated")->required();
    tr_cmd->add_option("--fclasses", tr_fclasses, "function classes, comma separated");
    tr_cmd->add_option("--dataset", tr_dataset)->required();
    tr_cmd->add_option("--noise-variance", tr_noise_var);
    tr_cmd->add_option("--root-default", tr_root_default);
    tr_cmd->add_option("--draws", tr_draws);
    tr_cmd->add_option("--seed", tr_seed);
    tr_cmd->add_option("--threads", tr_threads);
    tr_cmd->add_option("--json", tr_json);

    // infer
    std::string inf_ckpt, inf_preset, inf_trace;
    std::int64_t inf_scm_seed = -1;
    double inf_graph_p = 0.2;
    std::uint64_t inf_seed = 1;
    bool inf_print_scm = false;
    CLI::App* inf_cmd = app.add_subcommand("infer", "run one greedy episode against one SCM");
    inf_cmd->add_option("--ckpt", inf_ckpt)->required();
    inf_cmd->add_option("--scm-preset", inf_preset, "built-in SCM (eq7, eq8)");
    inf_cmd->add_option("--scm-seed", inf_scm_seed, "generate a random SCM from this seed");
    inf_cmd->add_option("--graph-p", inf_graph_p, "edge probability for --scm-seed graphs");
    inf_cmd->add_option("--seed", inf_seed, "episode noise seed");
    inf_cmd->add_flag("--print-scm", inf_print_scm, "print the structural equations");
    inf_cmd->add_option("--trace-jsonl", inf_trace, "write one JSON record per step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (train_cmd->parsed()) {
            if (list_presets) {
                for (const std::string& name : config_preset_names()) std::cout << name << "\n";
                return 0;
            }
            if (!preset_name.empty()) rs.cfg = config_preset(preset_name);
            if (!config_path.empty()) load_config_file(rs, config_path);
            for (const auto& [key, value] : overrides) apply_key(rs, key, value);
            if (flag_random_iv) rs.cfg.random_interventions = true;
            if (flag_ablation_train) rs.cfg.ablation_train_intervention = true;
            return cmd_train(rs);
        }
        if (eval_cmd->parsed())
            return cmd_eval(eval_ckpt, eval_dataset, eval_fclass, eval_noise_var, eval_root_default,
                            eval_draws, eval_seed, eval_threads, eval_json);
        if (base_cmd->parsed())
            return cmd_baseline(base_kind, base_dataset, base_p, base_draws, base_seed, base_json);
        if (tr_cmd->parsed())
            return cmd_transfer(tr_ckpts, tr_fclasses, tr_dataset, tr_noise_var, tr_root_default,
                                tr_draws, tr_seed, tr_threads, tr_json);
        if (inf_cmd->parsed())
            return cmd_infer(inf_ckpt, inf_preset, inf_scm_seed, inf_graph_p, inf_seed,
                             inf_print_scm, inf_trace);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IndexError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
