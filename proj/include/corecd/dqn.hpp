#pragma once

#include <optional>

#include "corecd/env.hpp"
#include "corecd/neural.hpp"

namespace corecd {

/// Everything a TD update needs. `estimate_after` reconstructs the
/// structural mask of the successor state.
struct Transition {
    std::vector<double> history_before;
    ActionPair action;
    int reward = 0;
    std::vector<double> history_after;
    bool done = false;
    Dag estimate_after;
};

/// FIFO ring of transitions with uniform with-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);

    /// nullopt while fewer than k transitions are stored. Returned pointers
    /// stay valid until the next push.
    std::optional<std::vector<const Transition*>> sample(std::size_t k, Rng& rng) const;

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t pushed() const { return pushed_; }
    const Transition& at(std::size_t idx) const { return storage_[idx]; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::uint64_t pushed_ = 0;
    std::vector<Transition> storage_;
};

/// The two Q heads (structural and intervention) with their target copies
/// and optimizer states. The heads share no parameters.
struct DualQ {
    int n = 0;
    Mlp q_st, q_in;
    Mlp target_st, target_in;
    AdamState opt_st, opt_in;
};

/// Builds both heads for an environment of `n` variables and the given
/// horizon: input width horizon * block_width(n), hidden layers as given,
/// output widths 2n(n-1)+1 and n+1. Targets start as copies of the online
/// nets.
DualQ make_dual_q(int n, int horizon, std::span<const int> hidden, double lr, Rng& rng);

/// Epsilon-greedy over both heads independently; masked structural entries
/// are treated as -inf; ties break toward the lowest index. epsilon <= 0
/// draws nothing from the RNG.
ActionPair select_action(const DualQ& dq, std::span<const double> history,
                         const StructuralMask& mask, double epsilon, Rng& rng);

struct TdTargets {
    std::vector<double> st;
    std::vector<double> in;
};

/// Bootstrapped regression targets from the target networks. Each head
/// takes the shared reward plus gamma times its own max valid Q on the
/// successor history (nothing past terminal transitions).
TdTargets td_targets(std::span<const Transition* const> batch, const DualQ& dq, double gamma);

struct TrainLosses {
    double st = 0.0;
    double in = 0.0;
};

struct TrainStepOptions {
    bool train_st = true;
    bool train_in = true;
    int threads = 1; // 2 runs the two head updates concurrently
};

/// One TD regression step per enabled head: squared error between the
/// online Q-value of the taken action and its target, averaged over the
/// batch, followed by one optimizer step. Target networks are untouched.
TrainLosses train_step(DualQ& dq, std::span<const Transition* const> batch, double gamma,
                       const TrainStepOptions& opts = {});

/// Hard copy online -> target for both heads.
void sync_targets(DualQ& dq);

} // namespace corecd
