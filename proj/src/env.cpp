#include "corecd/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace corecd {

int pair_index(int n, int i, int j) {
    return i * (n - 1) + j - (j > i ? 1 : 0);
}

std::pair<int, int> pair_from_index(int n, int idx) {
    const int i = idx / (n - 1);
    int j = idx % (n - 1);
    if (j >= i) ++j;
    return {i, j};
}

EdgeOp decode_structural(int a_st, int n) {
    const int pairs = ordered_pair_count(n);
    if (a_st < 0 || a_st >= structural_action_count(n))
        throw IndexError("structural action " + std::to_string(a_st) + " out of range [0, " +
                         std::to_string(structural_action_count(n)) + ")");
    if (a_st == 0) return EdgeOp{};
    if (a_st <= pairs) {
        const auto [i, j] = pair_from_index(n, a_st - 1);
        return EdgeOp{EdgeOpKind::kAdd, i, j};
    }
    const auto [i, j] = pair_from_index(n, a_st - 1 - pairs);
    return EdgeOp{EdgeOpKind::kRemove, i, j};
}

int encode_structural(const EdgeOp& op, int n) {
    switch (op.kind) {
    case EdgeOpKind::kVoid: return 0;
    case EdgeOpKind::kAdd: return 1 + pair_index(n, op.from, op.to);
    case EdgeOpKind::kRemove: return 1 + ordered_pair_count(n) + pair_index(n, op.from, op.to);
    }
    return 0;
}

StructuralMask structural_mask(const Dag& estimate) {
    const int n = estimate.n;
    const int pairs = ordered_pair_count(n);
    StructuralMask mask;
    mask.allowed.assign(structural_action_count(n), 0);
    mask.allowed[0] = 1; // void
    for (int e = 0; e < pairs; ++e) {
        const auto [i, j] = pair_from_index(n, e);
        if (estimate.edge(i, j))
            mask.allowed[1 + pairs + e] = 1; // remove
        else
            mask.allowed[1 + e] = 1; // add
    }
    return mask;
}

int reward_for(const EdgeOp& op, const Dag& truth) {
    switch (op.kind) {
    case EdgeOpKind::kVoid: return 0;
    case EdgeOpKind::kAdd: return truth.edge(op.from, op.to) ? 1 : -1;
    case EdgeOpKind::kRemove: return truth.edge(op.from, op.to) ? -1 : 1;
    }
    return 0;
}

EpisodeHistory::EpisodeHistory(int n, int horizon, double obs_scale)
    : n_(n), horizon_(horizon), obs_scale_(obs_scale),
      encoded_(static_cast<std::size_t>(horizon) * block_width(n), 0.0) {}

void EpisodeHistory::clear() {
    count_ = 0;
    std::fill(encoded_.begin(), encoded_.end(), 0.0);
}

double* EpisodeHistory::next_block() {
    const int bw = block_width(n_);
    if (count_ == horizon_) {
        // Slide the window: drop the oldest block.
        std::memmove(encoded_.data(), encoded_.data() + bw,
                     sizeof(double) * static_cast<std::size_t>(bw) * (horizon_ - 1));
        double* block = encoded_.data() + static_cast<std::size_t>(bw) * (horizon_ - 1);
        std::fill(block, block + bw, 0.0);
        return block;
    }
    double* block = encoded_.data() + static_cast<std::size_t>(bw) * count_;
    ++count_;
    return block;
}

void EpisodeHistory::append_observation(std::span<const double> obs) {
    double* block = next_block();
    for (int i = 0; i < n_; ++i) block[i] = obs[i] * obs_scale_;
}

void EpisodeHistory::append(std::span<const double> obs, int intervene, const EdgeOp& op) {
    double* block = next_block();
    for (int i = 0; i < n_; ++i) block[i] = obs[i] * obs_scale_;
    block[n_ + intervene] = 1.0;
    if (op.kind != EdgeOpKind::kVoid) {
        const int slot = n_ + (n_ + 1) + pair_index(n_, op.from, op.to);
        block[slot] = op.kind == EdgeOpKind::kAdd ? 1.0 : -1.0;
    }
}

CdEnv::CdEnv(const EnvConfig& cfg)
    : cfg_(cfg), truth_(cfg.n), estimate_(cfg.n),
      history_(cfg.n, cfg.horizon,
               cfg.intervention_value != 0.0 ? 1.0 / std::abs(cfg.intervention_value) : 1.0) {
    if (cfg.n < 2) throw ConfigError("environment requires n >= 2");
    if (cfg.horizon < 1) throw ConfigError("environment requires horizon >= 1");
}

std::vector<double> CdEnv::reset(std::span<const Dag> pool, Rng& rng) {
    if (pool.empty()) throw ConfigError("cannot reset from an empty graph pool");
    const Dag& g = pool[rng.uniform_below(pool.size())];
    return reset_with(sample_scm(g, cfg_.fclass, rng), rng);
}

std::vector<double> CdEnv::reset_with(Scm scm, Rng& rng) {
    if (scm.n() != cfg_.n)
        throw ConfigError("SCM has " + std::to_string(scm.n()) + " nodes, environment expects " +
                          std::to_string(cfg_.n));
    scm_ = std::move(scm);
    clear_intervention(scm_);
    truth_ = scm_.graph;
    estimate_ = Dag(cfg_.n);
    step_ = 0;
    history_.clear();
    last_obs_ = sample_observation(scm_, rng);
    history_.append_observation(last_obs_);
    return history_.encoded();
}

StepResult CdEnv::step(const ActionPair& a, Rng& rng) {
    if (step_ >= cfg_.horizon) throw ContractError("episode is finished; call reset first");
    if (a.intervene < 0 || a.intervene > cfg_.n)
        throw IndexError("intervention action " + std::to_string(a.intervene) +
                         " out of range [0, " + std::to_string(cfg_.n) + "]");
    const EdgeOp op = decode_structural(a.structural, cfg_.n);
    if (!structural_mask(estimate_).allowed[a.structural])
        throw ContractError("structural action " + std::to_string(a.structural) +
                            " is masked for the current estimate");

    if (a.intervene == cfg_.n)
        clear_intervention(scm_);
    else
        apply_intervention(scm_, a.intervene, cfg_.intervention_value);

    last_obs_ = sample_observation(scm_, rng);

    const int reward = reward_for(op, truth_);
    if (op.kind == EdgeOpKind::kAdd)
        estimate_.set_edge(op.from, op.to, true);
    else if (op.kind == EdgeOpKind::kRemove)
        estimate_.set_edge(op.from, op.to, false);

    history_.append(last_obs_, a.intervene, op);
    ++step_;

    return StepResult{history_.encoded(), reward, step_ == cfg_.horizon};
}

} // namespace corecd
