#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "corecd/error.hpp"
#include "corecd/rng.hpp"

namespace corecd {

/// One affine layer. `w` is out x in row-major; `wt` is its transpose,
/// kept in sync so the forward pass can stream rows of the transpose.
struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;
    std::vector<double> b;
    std::vector<double> wt;

    void sync_transpose();
};

/// Feed-forward network: rectifier on hidden layers, identity output.
struct Mlp {
    std::vector<int> sizes;
    std::vector<Layer> layers;

    int input_size() const { return sizes.front(); }
    int output_size() const { return sizes.back(); }
};

/// Weights from Uniform(-s, s) with s = sqrt(1/fan_in), biases zero.
Mlp init_params(std::span<const int> sizes, Rng& rng);
Mlp zero_params(std::span<const int> sizes);

std::vector<double> forward(const Mlp& p, std::span<const double> x);

/// Parameter gradients; shapes mirror the network's layers.
struct MlpGrads {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
};

MlpGrads zero_grads(const Mlp& p);

/// Gradients of sum(output * grad_out) with respect to every parameter.
MlpGrads backward(const Mlp& p, std::span<const double> x, std::span<const double> grad_out);

/// Activations of a batch forward pass; acts[0] is the input, acts[l] the
/// post-activation output of layer l-1. Buffers are reused across calls.
struct BatchCache {
    int batch = 0;
    std::vector<std::vector<double>> acts;

    const std::vector<double>& output() const { return acts.back(); }
};

/// X is batch x input_size row-major.
void forward_batch(const Mlp& p, std::span<const double> x, int batch, BatchCache& cache);

/// dY is batch x output_size row-major; fills `grads` (overwriting).
void backward_batch(const Mlp& p, const BatchCache& cache, std::span<const double> dy,
                    MlpGrads& grads);

/// Adam with bias correction.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState make_adam(const Mlp& p, double lr = 1e-4);
void optimizer_step(Mlp& p, const MlpGrads& grads, AdamState& st);

// Binary stream serialization; exact round trip.
void write_mlp(std::ostream& out, const Mlp& p);
Mlp read_mlp(std::istream& in);
void write_adam(std::ostream& out, const AdamState& st);
AdamState read_adam(std::istream& in);

} // namespace corecd
