#include "corecd/neural.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>

namespace corecd {

void Layer::sync_transpose() {
    wt.resize(w.size());
    for (int o = 0; o < out; ++o)
        for (int i = 0; i < in; ++i) wt[static_cast<std::size_t>(i) * out + o] = w[static_cast<std::size_t>(o) * in + i];
}

namespace {

Mlp make_shell(std::span<const int> sizes) {
    if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output size");
    for (int s : sizes)
        if (s < 1) throw ConfigError("layer sizes must be positive");

    Mlp p;
    p.sizes.assign(sizes.begin(), sizes.end());
    p.layers.resize(sizes.size() - 1);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        Layer& layer = p.layers[l];
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        layer.w.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
        layer.b.assign(layer.out, 0.0);
    }
    return p;
}

} // namespace

Mlp init_params(std::span<const int> sizes, Rng& rng) {
    Mlp p = make_shell(sizes);
    for (Layer& layer : p.layers) {
        const double scale = std::sqrt(1.0 / layer.in);
        for (double& w : layer.w) w = rng.uniform(-scale, scale);
        layer.sync_transpose();
    }
    return p;
}

Mlp zero_params(std::span<const int> sizes) {
    Mlp p = make_shell(sizes);
    for (Layer& layer : p.layers) layer.sync_transpose();
    return p;
}

void forward_batch(const Mlp& p, std::span<const double> x, int batch, BatchCache& cache) {
    if (x.size() != static_cast<std::size_t>(batch) * p.input_size())
        throw DimensionError("forward: input is " + std::to_string(x.size()) +
                             " values, expected " + std::to_string(batch * p.input_size()));

    cache.batch = batch;
    cache.acts.resize(p.layers.size() + 1);
    cache.acts[0].assign(x.begin(), x.end());

    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const Layer& layer = p.layers[l];
        const bool hidden = l + 1 < p.layers.size();
        std::vector<double>& y = cache.acts[l + 1];
        y.resize(static_cast<std::size_t>(batch) * layer.out);
        const double* in = cache.acts[l].data();

        for (int r = 0; r < batch; ++r) {
            double* yr = y.data() + static_cast<std::size_t>(r) * layer.out;
            const double* xr = in + static_cast<std::size_t>(r) * layer.in;
            const int out = layer.out;
            for (int o = 0; o < out; ++o) yr[o] = layer.b[o];

            // four input lanes per pass; zero inputs (padding, rectified
            // units) are skipped entirely
            int i = 0;
            for (; i + 4 <= layer.in; i += 4) {
                const double x0 = xr[i], x1 = xr[i + 1], x2 = xr[i + 2], x3 = xr[i + 3];
                if (x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0) continue;
                const double* w0 = layer.wt.data() + static_cast<std::size_t>(i) * out;
                const double* w1 = w0 + out;
                const double* w2 = w1 + out;
                const double* w3 = w2 + out;
                for (int o = 0; o < out; ++o)
                    yr[o] += x0 * w0[o] + x1 * w1[o] + x2 * w2[o] + x3 * w3[o];
            }
            for (; i < layer.in; ++i) {
                const double xi = xr[i];
                if (xi == 0.0) continue;
                const double* wrow = layer.wt.data() + static_cast<std::size_t>(i) * out;
                for (int o = 0; o < out; ++o) yr[o] += xi * wrow[o];
            }
            if (hidden)
                for (int o = 0; o < out; ++o) yr[o] = yr[o] > 0.0 ? yr[o] : 0.0;
        }
    }
}

std::vector<double> forward(const Mlp& p, std::span<const double> x) {
    thread_local BatchCache cache;
    forward_batch(p, x, 1, cache);
    return cache.output();
}

MlpGrads zero_grads(const Mlp& p) {
    MlpGrads g;
    g.w.resize(p.layers.size());
    g.b.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        g.w[l].assign(p.layers[l].w.size(), 0.0);
        g.b[l].assign(p.layers[l].b.size(), 0.0);
    }
    return g;
}

void backward_batch(const Mlp& p, const BatchCache& cache, std::span<const double> dy,
                    MlpGrads& grads) {
    const int batch = cache.batch;
    if (dy.size() != static_cast<std::size_t>(batch) * p.output_size())
        throw DimensionError("backward: output gradient has wrong size");

    grads.w.resize(p.layers.size());
    grads.b.resize(p.layers.size());

    std::vector<double> delta(dy.begin(), dy.end());
    std::vector<double> delta_prev;

    for (int l = static_cast<int>(p.layers.size()) - 1; l >= 0; --l) {
        const Layer& layer = p.layers[l];
        const std::vector<double>& in_act = cache.acts[l];
        std::vector<double>& gw = grads.w[l];
        std::vector<double>& gb = grads.b[l];
        gw.assign(layer.w.size(), 0.0);
        gb.assign(layer.b.size(), 0.0);

        for (int r = 0; r < batch; ++r) {
            const double* dr = delta.data() + static_cast<std::size_t>(r) * layer.out;
            const double* xr = in_act.data() + static_cast<std::size_t>(r) * layer.in;
            for (int o = 0; o < layer.out; ++o) {
                const double d = dr[o];
                if (d == 0.0) continue;
                gb[o] += d;
                double* gwrow = gw.data() + static_cast<std::size_t>(o) * layer.in;
                for (int i = 0; i < layer.in; ++i) gwrow[i] += d * xr[i];
            }
        }

        if (l == 0) break;

        delta_prev.assign(static_cast<std::size_t>(batch) * layer.in, 0.0);
        for (int r = 0; r < batch; ++r) {
            const double* dr = delta.data() + static_cast<std::size_t>(r) * layer.out;
            double* dpr = delta_prev.data() + static_cast<std::size_t>(r) * layer.in;
            const int in_w = layer.in;
            int o = 0;
            for (; o + 4 <= layer.out; o += 4) {
                const double d0 = dr[o], d1 = dr[o + 1], d2 = dr[o + 2], d3 = dr[o + 3];
                if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0 && d3 == 0.0) continue;
                const double* w0 = layer.w.data() + static_cast<std::size_t>(o) * in_w;
                const double* w1 = w0 + in_w;
                const double* w2 = w1 + in_w;
                const double* w3 = w2 + in_w;
                for (int i = 0; i < in_w; ++i)
                    dpr[i] += d0 * w0[i] + d1 * w1[i] + d2 * w2[i] + d3 * w3[i];
            }
            for (; o < layer.out; ++o) {
                const double d = dr[o];
                if (d == 0.0) continue;
                const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * in_w;
                for (int i = 0; i < in_w; ++i) dpr[i] += d * wrow[i];
            }
            // rectifier gate of the previous hidden layer
            const double* ar = in_act.data() + static_cast<std::size_t>(r) * layer.in;
            for (int i = 0; i < layer.in; ++i)
                if (ar[i] <= 0.0) dpr[i] = 0.0;
        }
        delta.swap(delta_prev);
    }
}

MlpGrads backward(const Mlp& p, std::span<const double> x, std::span<const double> grad_out) {
    BatchCache cache;
    forward_batch(p, x, 1, cache);
    MlpGrads grads;
    backward_batch(p, cache, grad_out, grads);
    return grads;
}

AdamState make_adam(const Mlp& p, double lr) {
    AdamState st;
    st.lr = lr;
    st.m_w.resize(p.layers.size());
    st.v_w.resize(p.layers.size());
    st.m_b.resize(p.layers.size());
    st.v_b.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        st.m_w[l].assign(p.layers[l].w.size(), 0.0);
        st.v_w[l].assign(p.layers[l].w.size(), 0.0);
        st.m_b[l].assign(p.layers[l].b.size(), 0.0);
        st.v_b[l].assign(p.layers[l].b.size(), 0.0);
    }
    return st;
}

void optimizer_step(Mlp& p, const MlpGrads& grads, AdamState& st) {
    if (grads.w.size() != p.layers.size())
        throw DimensionError("optimizer_step: gradient layer count mismatch");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (double g : grads.w[l])
            if (!std::isfinite(g)) throw TrainingError("non-finite weight gradient", static_cast<int>(l));
        for (double g : grads.b[l])
            if (!std::isfinite(g)) throw TrainingError("non-finite bias gradient", static_cast<int>(l));
    }

    ++st.step;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));

    auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t k = 0; k < param.size(); ++k) {
            m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g[k];
            v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g[k] * g[k];
            param[k] -= st.lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + st.eps);
        }
    };

    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        update(p.layers[l].w, grads.w[l], st.m_w[l], st.v_w[l]);
        update(p.layers[l].b, grads.b[l], st.m_b[l], st.v_b[l]);
        p.layers[l].sync_transpose();
    }
}

namespace {

template <typename T> void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T> T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError("truncated checkpoint stream", 0);
    return v;
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vec(std::istream& in) {
    const auto size = get<std::uint64_t>(in);
    std::vector<double> v(size);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(size * sizeof(double)));
    if (!in) throw ParseError("truncated checkpoint stream", 0);
    return v;
}

} // namespace

void write_mlp(std::ostream& out, const Mlp& p) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.sizes.size()));
    for (int s : p.sizes) put<std::int32_t>(out, s);
    for (const Layer& layer : p.layers) {
        put_vec(out, layer.w);
        put_vec(out, layer.b);
    }
}

Mlp read_mlp(std::istream& in) {
    const auto n_sizes = get<std::uint32_t>(in);
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) s = get<std::int32_t>(in);
    Mlp p = zero_params(sizes);
    for (Layer& layer : p.layers) {
        layer.w = get_vec(in);
        layer.b = get_vec(in);
        if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
            layer.b.size() != static_cast<std::size_t>(layer.out))
            throw SchemaError("checkpoint layer shape does not match its declared sizes");
        layer.sync_transpose();
    }
    return p;
}

void write_adam(std::ostream& out, const AdamState& st) {
    put(out, st.lr);
    put(out, st.beta1);
    put(out, st.beta2);
    put(out, st.eps);
    put<std::int64_t>(out, st.step);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(st.m_w.size()));
    for (std::size_t l = 0; l < st.m_w.size(); ++l) {
        put_vec(out, st.m_w[l]);
        put_vec(out, st.v_w[l]);
        put_vec(out, st.m_b[l]);
        put_vec(out, st.v_b[l]);
    }
}

AdamState read_adam(std::istream& in) {
    AdamState st;
    st.lr = get<double>(in);
    st.beta1 = get<double>(in);
    st.beta2 = get<double>(in);
    st.eps = get<double>(in);
    st.step = get<std::int64_t>(in);
    const auto layers = get<std::uint32_t>(in);
    st.m_w.resize(layers);
    st.v_w.resize(layers);
    st.m_b.resize(layers);
    st.v_b.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        st.m_w[l] = get_vec(in);
        st.v_w[l] = get_vec(in);
        st.m_b[l] = get_vec(in);
        st.v_b[l] = get_vec(in);
    }
    return st;
}

} // namespace corecd
