#include "corecd/dqn.hpp"

#include <cmath>
#include <limits>
#include <thread>

namespace corecd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
    ++pushed_;
}

std::optional<std::vector<const Transition*>> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
    if (storage_.size() < k) return std::nullopt;
    std::vector<const Transition*> batch(k);
    for (std::size_t i = 0; i < k; ++i) batch[i] = &storage_[rng.uniform_below(storage_.size())];
    return batch;
}

DualQ make_dual_q(int n, int horizon, std::span<const int> hidden, double lr, Rng& rng) {
    if (n < 2) throw ConfigError("dual Q setup requires n >= 2");
    const int input = horizon * EpisodeHistory::block_width(n);

    std::vector<int> sizes_st{input};
    sizes_st.insert(sizes_st.end(), hidden.begin(), hidden.end());
    sizes_st.push_back(structural_action_count(n));

    std::vector<int> sizes_in{input};
    sizes_in.insert(sizes_in.end(), hidden.begin(), hidden.end());
    sizes_in.push_back(intervention_action_count(n));

    DualQ dq;
    dq.n = n;
    dq.q_st = init_params(sizes_st, rng);
    dq.q_in = init_params(sizes_in, rng);
    dq.target_st = dq.q_st;
    dq.target_in = dq.q_in;
    dq.opt_st = make_adam(dq.q_st, lr);
    dq.opt_in = make_adam(dq.q_in, lr);
    return dq;
}

namespace {

int argmax_all(std::span<const double> q) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

int argmax_masked(std::span<const double> q, const StructuralMask& mask) {
    int best = -1;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(q.size()); ++i) {
        if (!mask.allowed[i]) continue;
        if (q[i] > best_v) {
            best_v = q[i];
            best = i;
        }
    }
    return best;
}

int uniform_masked(const StructuralMask& mask, Rng& rng) {
    int valid = 0;
    for (std::uint8_t a : mask.allowed) valid += a != 0;
    int pick = static_cast<int>(rng.uniform_below(valid));
    for (int i = 0; i < static_cast<int>(mask.allowed.size()); ++i) {
        if (!mask.allowed[i]) continue;
        if (pick-- == 0) return i;
    }
    return 0; // unreachable: void is always allowed
}

} // namespace

ActionPair select_action(const DualQ& dq, std::span<const double> history,
                         const StructuralMask& mask, double epsilon, Rng& rng) {
    ActionPair a;

    if (epsilon > 0.0 && (epsilon >= 1.0 || rng.uniform() < epsilon)) {
        a.intervene = static_cast<int>(rng.uniform_below(intervention_action_count(dq.n)));
    } else {
        a.intervene = argmax_all(forward(dq.q_in, history));
    }

    if (epsilon > 0.0 && (epsilon >= 1.0 || rng.uniform() < epsilon)) {
        a.structural = uniform_masked(mask, rng);
    } else {
        a.structural = argmax_masked(forward(dq.q_st, history), mask);
    }
    return a;
}

namespace {

/// Stacks history_after rows and runs one batch forward per target head;
/// per-row max over the valid actions.
void bootstrap_values(std::span<const Transition* const> batch, const Mlp& target_st,
                      const Mlp& target_in, std::vector<double>& max_st,
                      std::vector<double>& max_in) {
    const std::size_t k = batch.size();
    const int input = target_st.input_size();
    std::vector<double> x(k * input);
    for (std::size_t r = 0; r < k; ++r) {
        if (batch[r]->history_after.size() != static_cast<std::size_t>(input))
            throw DimensionError("transition history width does not match the network input");
        std::copy(batch[r]->history_after.begin(), batch[r]->history_after.end(),
                  x.begin() + r * input);
    }

    BatchCache cache;
    forward_batch(target_st, x, static_cast<int>(k), cache);
    max_st.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        const double* q = cache.output().data() + r * target_st.output_size();
        const StructuralMask mask = structural_mask(batch[r]->estimate_after);
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < target_st.output_size(); ++i)
            if (mask.allowed[i] && q[i] > best) best = q[i];
        max_st[r] = best;
    }

    forward_batch(target_in, x, static_cast<int>(k), cache);
    max_in.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        const double* q = cache.output().data() + r * target_in.output_size();
        double best = q[0];
        for (int i = 1; i < target_in.output_size(); ++i)
            if (q[i] > best) best = q[i];
        max_in[r] = best;
    }
}

} // namespace

TdTargets td_targets(std::span<const Transition* const> batch, const DualQ& dq, double gamma) {
    if (batch.empty()) throw ConfigError("td_targets requires a non-empty batch");

    std::vector<double> max_st, max_in;
    bootstrap_values(batch, dq.target_st, dq.target_in, max_st, max_in);

    TdTargets t;
    t.st.resize(batch.size());
    t.in.resize(batch.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const double reward = batch[r]->reward;
        if (batch[r]->done) {
            t.st[r] = reward;
            t.in[r] = reward;
        } else {
            t.st[r] = reward + gamma * max_st[r];
            t.in[r] = reward + gamma * max_in[r];
        }
    }
    return t;
}

namespace {

/// Regression of the taken action's Q-value onto its target for one head.
double head_update(Mlp& online, AdamState& opt, std::span<const double> x, int batch,
                   std::span<const double> targets, std::span<const int> actions) {
    BatchCache cache;
    forward_batch(online, x, batch, cache);

    const int out = online.output_size();
    std::vector<double> dy(static_cast<std::size_t>(batch) * out, 0.0);
    double loss = 0.0;
    for (int r = 0; r < batch; ++r) {
        const double q = cache.output()[static_cast<std::size_t>(r) * out + actions[r]];
        const double err = q - targets[r];
        loss += err * err;
        dy[static_cast<std::size_t>(r) * out + actions[r]] = 2.0 * err / batch;
    }
    loss /= batch;
    if (!std::isfinite(loss)) throw TrainingError("non-finite TD loss");

    MlpGrads grads;
    backward_batch(online, cache, dy, grads);
    optimizer_step(online, grads, opt);
    return loss;
}

} // namespace

TrainLosses train_step(DualQ& dq, std::span<const Transition* const> batch, double gamma,
                       const TrainStepOptions& opts) {
    if (batch.empty()) throw ConfigError("train_step requires a non-empty batch");

    const TdTargets targets = td_targets(batch, dq, gamma);

    const std::size_t k = batch.size();
    const int input = dq.q_st.input_size();
    std::vector<double> x(k * input);
    std::vector<int> act_st(k), act_in(k);
    for (std::size_t r = 0; r < k; ++r) {
        std::copy(batch[r]->history_before.begin(), batch[r]->history_before.end(),
                  x.begin() + r * input);
        act_st[r] = batch[r]->action.structural;
        act_in[r] = batch[r]->action.intervene;
    }

    TrainLosses losses;
    const int kb = static_cast<int>(k);
    if (opts.threads >= 2 && opts.train_st && opts.train_in) {
        std::exception_ptr st_error;
        std::thread st_thread([&] {
            try {
                losses.st = head_update(dq.q_st, dq.opt_st, x, kb, targets.st, act_st);
            } catch (...) {
                st_error = std::current_exception();
            }
        });
        try {
            losses.in = head_update(dq.q_in, dq.opt_in, x, kb, targets.in, act_in);
        } catch (...) {
            st_thread.join();
            throw;
        }
        st_thread.join();
        if (st_error) std::rethrow_exception(st_error);
    } else {
        if (opts.train_st) losses.st = head_update(dq.q_st, dq.opt_st, x, kb, targets.st, act_st);
        if (opts.train_in) losses.in = head_update(dq.q_in, dq.opt_in, x, kb, targets.in, act_in);
    }
    return losses;
}

void sync_targets(DualQ& dq) {
    dq.target_st = dq.q_st;
    dq.target_in = dq.q_in;
}

} // namespace corecd
