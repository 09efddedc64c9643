#pragma once

#include <span>
#include <utility>
#include <vector>

#include "corecd/scm.hpp"

namespace corecd {

/// One joint action: an intervention index in [0, n] (n = do nothing) and a
/// structural index in [0, 2n(n-1)] (0 = void update).
struct ActionPair {
    int intervene = 0;
    int structural = 0;
};

enum class EdgeOpKind { kVoid, kAdd, kRemove };

struct EdgeOp {
    EdgeOpKind kind = EdgeOpKind::kVoid;
    int from = -1;
    int to = -1;
};

inline int ordered_pair_count(int n) { return n * (n - 1); }
inline int structural_action_count(int n) { return 2 * n * (n - 1) + 1; }
inline int intervention_action_count(int n) { return n + 1; }

/// Index of (i, j) in the lexicographic list of ordered pairs without the
/// diagonal: (0,1), (0,2), ..., (n-1, n-2).
int pair_index(int n, int i, int j);
std::pair<int, int> pair_from_index(int n, int idx);

EdgeOp decode_structural(int a_st, int n);
int encode_structural(const EdgeOp& op, int n);

/// Per-action validity of the structural dimension against the current
/// estimate: void always allowed, add(e) iff e absent, remove(e) iff e
/// present.
struct StructuralMask {
    std::vector<std::uint8_t> allowed;
};

StructuralMask structural_mask(const Dag& estimate);

/// Dense reward of a structural update against the observational ground
/// truth: add +-1 by edge membership, remove the negation, void 0.
int reward_for(const EdgeOp& op, const Dag& truth);

/// Fixed-capacity history of (observation, action) blocks, encoded as one
/// flat vector of horizon * block_width(n) entries. Per block:
/// [scaled observation (n), intervention one-hot (n+1), structural
/// edge-delta (n(n-1), entries in {-1,0,+1})]. Unused trailing blocks stay
/// zero; once full, appending drops the oldest block.
class EpisodeHistory {
public:
    EpisodeHistory(int n, int horizon, double obs_scale);

    static int block_width(int n) { return n + (n + 1) + n * (n - 1); }

    void clear();
    /// Initial observational sample: no action fields set.
    void append_observation(std::span<const double> obs);
    void append(std::span<const double> obs, int intervene, const EdgeOp& op);

    const std::vector<double>& encoded() const { return encoded_; }
    int count() const { return count_; }

private:
    double* next_block();

    int n_;
    int horizon_;
    double obs_scale_;
    int count_ = 0;
    std::vector<double> encoded_;
};

struct StepResult {
    std::vector<double> encoded;
    int reward = 0;
    bool done = false;
};

struct EnvConfig {
    int n = 3;
    int horizon = 5;
    double intervention_value = 20.0;
    FunctionClass fclass;
};

/// Episodic causal-discovery environment. Each episode runs a fixed number
/// of steps against one SCM; the agent's actions intervene on the SCM and
/// edit a graph estimate that starts empty.
class CdEnv {
public:
    explicit CdEnv(const EnvConfig& cfg);

    /// Starts an episode on a graph drawn uniformly from `pool`, with a
    /// freshly sampled SCM. Returns the encoded history holding one initial
    /// observational sample.
    std::vector<double> reset(std::span<const Dag> pool, Rng& rng);

    /// Starts an episode on the given SCM (any active intervention is
    /// cleared first).
    std::vector<double> reset_with(Scm scm, Rng& rng);

    StepResult step(const ActionPair& a, Rng& rng);

    StructuralMask mask() const { return structural_mask(estimate_); }

    const Dag& truth() const { return truth_; }
    const Dag& estimate() const { return estimate_; }
    const Scm& scm() const { return scm_; }
    const std::vector<double>& last_observation() const { return last_obs_; }
    const std::vector<double>& encoded_history() const { return history_.encoded(); }
    int step_count() const { return step_; }
    int horizon() const { return cfg_.horizon; }
    const EnvConfig& config() const { return cfg_; }

private:
    EnvConfig cfg_;
    Scm scm_;
    Dag truth_;
    Dag estimate_;
    EpisodeHistory history_;
    std::vector<double> last_obs_;
    int step_ = 0;
};

} // namespace corecd
