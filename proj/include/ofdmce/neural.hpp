#pragma once

// Minimal neural-network kernels: dense and 2-D convolution layers, a fixed
// bilinear upsampling layer, MSE loss, reverse-mode gradients, ADAM, and
// analytic parameter/MAC counting.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "ofdmce/common.hpp"

namespace ofdmce::neural {

struct DenseLayer {
    RMat weights;              // out x in
    std::vector<double> bias;  // out
    bool relu = false;

    std::size_t in_size() const { return weights.cols(); }
    std::size_t out_size() const { return weights.rows(); }
};

enum class Padding { Same, Valid };

struct ConvLayer {
    int n_filters = 0;
    int in_channels = 0;
    int kh = 0, kw = 0;
    int stride = 1;
    Padding padding = Padding::Same;
    bool relu = false;
    int in_h = 0, in_w = 0;
    std::vector<double> kernel;  // [n_filters][in_channels][kh][kw]
    std::vector<double> bias;    // [n_filters]

    int out_h() const {
        return padding == Padding::Same ? (in_h + stride - 1) / stride : (in_h - kh) / stride + 1;
    }
    int out_w() const {
        return padding == Padding::Same ? (in_w + stride - 1) / stride : (in_w - kw) / stride + 1;
    }
    int pad_h() const {
        if (padding == Padding::Valid) return 0;
        const int total = (out_h() - 1) * stride + kh - in_h;
        return total > 0 ? total / 2 : 0;
    }
    int pad_w() const {
        if (padding == Padding::Valid) return 0;
        const int total = (out_w() - 1) * stride + kw - in_w;
        return total > 0 ? total / 2 : 0;
    }
    std::size_t in_size() const { return static_cast<std::size_t>(in_channels) * in_h * in_w; }
    std::size_t out_size() const { return static_cast<std::size_t>(n_filters) * out_h() * out_w(); }

    void validate() const {
        if (n_filters <= 0 || in_channels <= 0 || kh <= 0 || kw <= 0 || stride <= 0)
            throw config_error("conv layer dimensions must be positive");
        if (padding == Padding::Same && (kh % 2 == 0 || kw % 2 == 0))
            throw config_error("same-padding requires odd kernel dimensions");
        if (kernel.size() != static_cast<std::size_t>(n_filters) * in_channels * kh * kw ||
            bias.size() != static_cast<std::size_t>(n_filters))
            throw config_error("conv parameter sizes inconsistent");
    }
};

/// Fixed (parameter-free) bilinear expansion from a sparse sample grid to a
/// dense one, applied per channel. Positions give the sample coordinates in
/// the output grid, matching the classical interpolator.
struct UpsampleLayer {
    int channels = 0;
    int in_h = 0, in_w = 0;
    int out_h = 0, out_w = 0;
    std::vector<int> row_positions;
    std::vector<int> col_positions;

    std::size_t in_size() const { return static_cast<std::size_t>(channels) * in_h * in_w; }
    std::size_t out_size() const { return static_cast<std::size_t>(channels) * out_h * out_w; }
};

using Layer = std::variant<DenseLayer, ConvLayer, UpsampleLayer>;

enum class Topology {
    Sequential,
    /// Input conv, then N two-conv blocks whose inputs and outputs all sum
    /// into the upsampling layer's input, then an output conv.
    BlockAccumulate,
};

struct TensorShape {
    int c = 0, h = 0, w = 0;
    std::size_t size() const {
        return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    static TensorShape flat(int n) { return {1, 1, n}; }
};

struct NetModel {
    std::vector<Layer> layers;
    Topology topology = Topology::Sequential;
    int n_blocks = 0;
    TensorShape input_shape;
    TensorShape output_shape;
};

/// Optional per-value transform applied to every layer input and every
/// post-activation layer output (fixed-point emulation hook).
using ValueHook = std::function<double(double)>;

namespace detail {

inline void apply_hook(std::vector<double>& v, const ValueHook* hook) {
    if (!hook) return;
    for (auto& x : v) x = (*hook)(x);
}

inline void apply_relu(std::vector<double>& v) {
    for (auto& x : v)
        if (x < 0.0) x = 0.0;
}

}  // namespace detail

inline std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x,
                                         std::vector<double>* pre_out = nullptr) {
    if (x.size() != layer.in_size() || layer.bias.size() != layer.out_size())
        throw config_error("dense layer shape mismatch");
    std::vector<double> y(layer.out_size());
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double* row = layer.weights.data() + o * layer.in_size();
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < x.size(); ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    if (pre_out) *pre_out = y;
    if (layer.relu) detail::apply_relu(y);
    return y;
}

inline std::vector<double> conv_forward(const ConvLayer& layer, const std::vector<double>& x,
                                        std::vector<double>* pre_out = nullptr) {
    layer.validate();
    if (x.size() != layer.in_size()) throw config_error("conv layer input shape mismatch");
    const int oh = layer.out_h(), ow = layer.out_w();
    const int ph = layer.pad_h(), pw = layer.pad_w();
    std::vector<double> y(layer.out_size());
    for (int n = 0; n < layer.n_filters; ++n)
        for (int ox = 0; ox < oh; ++ox)
            for (int oy = 0; oy < ow; ++oy) {
                double acc = layer.bias[static_cast<std::size_t>(n)];
                for (int k = 0; k < layer.in_channels; ++k)
                    for (int i = 0; i < layer.kh; ++i) {
                        const int ix = ox * layer.stride + i - ph;
                        if (ix < 0 || ix >= layer.in_h) continue;
                        for (int j = 0; j < layer.kw; ++j) {
                            const int iy = oy * layer.stride + j - pw;
                            if (iy < 0 || iy >= layer.in_w) continue;
                            acc += x[static_cast<std::size_t>((k * layer.in_h + ix) * layer.in_w + iy)] *
                                   layer.kernel[static_cast<std::size_t>(
                                       ((n * layer.in_channels + k) * layer.kh + i) * layer.kw + j)];
                        }
                    }
                y[static_cast<std::size_t>((n * oh + ox) * ow + oy)] = acc;
            }
    if (pre_out) *pre_out = y;
    if (layer.relu) detail::apply_relu(y);
    return y;
}

inline std::vector<double> upsample_forward(const UpsampleLayer& layer, const std::vector<double>& x) {
    if (x.size() != layer.in_size()) throw config_error("upsample layer input shape mismatch");
    const auto row_taps = interp_axis_taps(layer.row_positions, layer.out_h);
    const auto col_taps = interp_axis_taps(layer.col_positions, layer.out_w);
    std::vector<double> y(layer.out_size());
    for (int c = 0; c < layer.channels; ++c) {
        const double* in = x.data() + static_cast<std::size_t>(c) * layer.in_h * layer.in_w;
        double* out = y.data() + static_cast<std::size_t>(c) * layer.out_h * layer.out_w;
        for (int r = 0; r < layer.out_h; ++r) {
            const auto& rt = row_taps[static_cast<std::size_t>(r)];
            for (int s = 0; s < layer.out_w; ++s) {
                const auto& ct = col_taps[static_cast<std::size_t>(s)];
                out[r * layer.out_w + s] =
                    rt.w_lo * (ct.w_lo * in[rt.lo * layer.in_w + ct.lo] +
                               ct.w_hi * in[rt.lo * layer.in_w + ct.hi]) +
                    rt.w_hi * (ct.w_lo * in[rt.hi * layer.in_w + ct.lo] +
                               ct.w_hi * in[rt.hi * layer.in_w + ct.hi]);
            }
        }
    }
    return y;
}

inline std::size_t layer_in_size(const Layer& layer) {
    return std::visit([](const auto& l) { return l.in_size(); }, layer);
}

inline std::size_t layer_out_size(const Layer& layer) {
    return std::visit([](const auto& l) { return l.out_size(); }, layer);
}

/// Mean squared error and its gradient with respect to the prediction.
inline std::pair<double, std::vector<double>> mse_loss(const std::vector<double>& y,
                                                       const std::vector<double>& target) {
    if (y.size() != target.size() || y.empty()) throw config_error("loss vectors differ in length");
    double loss = 0.0;
    std::vector<double> grad(y.size());
    const double inv_n = 1.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - target[i];
        loss += d * d;
        grad[i] = 2.0 * inv_n * d;
    }
    return {loss * inv_n, std::move(grad)};
}

namespace detail {

struct LayerCache {
    std::vector<double> input;
    std::vector<double> pre;  // pre-activation output (dense/conv only)
};

struct ForwardPass {
    std::vector<LayerCache> cache;
    std::vector<double> output;
};

inline std::vector<double> layer_forward(const Layer& layer, std::vector<double> x,
                                         const ValueHook* hook, LayerCache* cache) {
    apply_hook(x, hook);
    std::vector<double>* pre = nullptr;
    if (cache) {
        cache->input = x;
        pre = &cache->pre;
    }
    std::vector<double> y;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        y = dense_forward(*d, x, pre);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
        y = conv_forward(*c, x, pre);
    } else {
        y = upsample_forward(std::get<UpsampleLayer>(layer), x);
    }
    apply_hook(y, hook);
    return y;
}

inline ForwardPass forward_pass(const NetModel& model, const std::vector<double>& x,
                                const ValueHook* hook, bool keep_cache) {
    if (x.size() != model.input_shape.size()) throw config_error("model input shape mismatch");
    ForwardPass fp;
    fp.cache.resize(keep_cache ? model.layers.size() : 0);
    auto cache_at = [&](std::size_t i) { return keep_cache ? &fp.cache[i] : nullptr; };

    if (model.topology == Topology::Sequential) {
        std::vector<double> cur = x;
        for (std::size_t i = 0; i < model.layers.size(); ++i)
            cur = layer_forward(model.layers[i], std::move(cur), hook, cache_at(i));
        fp.output = std::move(cur);
        return fp;
    }

    // BlockAccumulate: layers = [conv_in, (convA, convB) x n_blocks, upsample, conv_out]
    const std::size_t n_layers = model.layers.size();
    if (n_layers != 3 + 2 * static_cast<std::size_t>(model.n_blocks) || model.n_blocks < 1)
        throw config_error("block-accumulate model has unexpected layer count");

    std::vector<double> a = layer_forward(model.layers[0], x, hook, cache_at(0));
    std::vector<double> acc(a.size(), 0.0);
    for (int b = 0; b < model.n_blocks; ++b) {
        const std::size_t ia = 1 + 2 * static_cast<std::size_t>(b);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i];
        std::vector<double> v = layer_forward(model.layers[ia], a, hook, cache_at(ia));
        a = layer_forward(model.layers[ia + 1], std::move(v), hook, cache_at(ia + 1));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i];
    }
    std::vector<double> up = layer_forward(model.layers[n_layers - 2], std::move(acc), hook,
                                           cache_at(n_layers - 2));
    fp.output = layer_forward(model.layers[n_layers - 1], std::move(up), hook, cache_at(n_layers - 1));
    return fp;
}

}  // namespace detail

inline std::vector<double> forward(const NetModel& model, const std::vector<double>& x,
                                   const ValueHook* hook = nullptr) {
    return detail::forward_pass(model, x, hook, false).output;
}

struct LayerGrads {
    std::vector<double> dw;
    std::vector<double> db;
};

struct ModelGrads {
    std::vector<LayerGrads> layers;
};

inline ModelGrads zero_grads(const NetModel& model) {
    ModelGrads g;
    g.layers.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (const auto* d = std::get_if<DenseLayer>(&model.layers[i])) {
            g.layers[i].dw.assign(d->weights.size(), 0.0);
            g.layers[i].db.assign(d->bias.size(), 0.0);
        } else if (const auto* c = std::get_if<ConvLayer>(&model.layers[i])) {
            g.layers[i].dw.assign(c->kernel.size(), 0.0);
            g.layers[i].db.assign(c->bias.size(), 0.0);
        }
    }
    return g;
}

namespace detail {

inline void relu_mask(const std::vector<double>& pre, std::vector<double>& d) {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (pre[i] <= 0.0) d[i] = 0.0;  // subgradient at 0 is 0
}

inline std::vector<double> dense_backward(const DenseLayer& layer, const LayerCache& cache,
                                          std::vector<double> dpost, LayerGrads& g, double scale) {
    if (layer.relu) relu_mask(cache.pre, dpost);
    const std::size_t in = layer.in_size(), out = layer.out_size();
    std::vector<double> dx(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        const double go = dpost[o];
        g.db[o] += scale * go;
        const double* row = layer.weights.data() + o * in;
        double* grow = g.dw.data() + o * in;
        const double sg = scale * go;
        for (std::size_t i = 0; i < in; ++i) {
            grow[i] += sg * cache.input[i];
            dx[i] += row[i] * go;
        }
    }
    return dx;
}

inline std::vector<double> conv_backward(const ConvLayer& layer, const LayerCache& cache,
                                         std::vector<double> dpost, LayerGrads& g, double scale) {
    if (layer.relu) relu_mask(cache.pre, dpost);
    const int oh = layer.out_h(), ow = layer.out_w();
    const int ph = layer.pad_h(), pw = layer.pad_w();
    std::vector<double> dx(layer.in_size(), 0.0);
    for (int n = 0; n < layer.n_filters; ++n)
        for (int ox = 0; ox < oh; ++ox)
            for (int oy = 0; oy < ow; ++oy) {
                const double go = dpost[static_cast<std::size_t>((n * oh + ox) * ow + oy)];
                if (go == 0.0) continue;
                g.db[static_cast<std::size_t>(n)] += scale * go;
                for (int k = 0; k < layer.in_channels; ++k)
                    for (int i = 0; i < layer.kh; ++i) {
                        const int ix = ox * layer.stride + i - ph;
                        if (ix < 0 || ix >= layer.in_h) continue;
                        for (int j = 0; j < layer.kw; ++j) {
                            const int iy = oy * layer.stride + j - pw;
                            if (iy < 0 || iy >= layer.in_w) continue;
                            const auto xi = static_cast<std::size_t>((k * layer.in_h + ix) * layer.in_w + iy);
                            const auto wi = static_cast<std::size_t>(
                                ((n * layer.in_channels + k) * layer.kh + i) * layer.kw + j);
                            g.dw[wi] += scale * go * cache.input[xi];
                            dx[xi] += layer.kernel[wi] * go;
                        }
                    }
            }
    return dx;
}

inline std::vector<double> upsample_backward(const UpsampleLayer& layer,
                                             const std::vector<double>& dpost) {
    const auto row_taps = interp_axis_taps(layer.row_positions, layer.out_h);
    const auto col_taps = interp_axis_taps(layer.col_positions, layer.out_w);
    std::vector<double> dx(layer.in_size(), 0.0);
    for (int c = 0; c < layer.channels; ++c) {
        double* din = dx.data() + static_cast<std::size_t>(c) * layer.in_h * layer.in_w;
        const double* dout = dpost.data() + static_cast<std::size_t>(c) * layer.out_h * layer.out_w;
        for (int r = 0; r < layer.out_h; ++r) {
            const auto& rt = row_taps[static_cast<std::size_t>(r)];
            for (int s = 0; s < layer.out_w; ++s) {
                const auto& ct = col_taps[static_cast<std::size_t>(s)];
                const double go = dout[r * layer.out_w + s];
                din[rt.lo * layer.in_w + ct.lo] += rt.w_lo * ct.w_lo * go;
                din[rt.lo * layer.in_w + ct.hi] += rt.w_lo * ct.w_hi * go;
                din[rt.hi * layer.in_w + ct.lo] += rt.w_hi * ct.w_lo * go;
                din[rt.hi * layer.in_w + ct.hi] += rt.w_hi * ct.w_hi * go;
            }
        }
    }
    return dx;
}

inline std::vector<double> layer_backward(const Layer& layer, const LayerCache& cache,
                                          std::vector<double> dpost, LayerGrads& g, double scale) {
    if (const auto* d = std::get_if<DenseLayer>(&layer))
        return dense_backward(*d, cache, std::move(dpost), g, scale);
    if (const auto* c = std::get_if<ConvLayer>(&layer))
        return conv_backward(*c, cache, std::move(dpost), g, scale);
    return upsample_backward(std::get<UpsampleLayer>(layer), dpost);
}

}  // namespace detail

/// Reverse-mode gradients of mse_loss(forward(x), target) accumulated into
/// `grads` with the given scale. Returns the sample loss.
inline double backward_accumulate(const NetModel& model, const std::vector<double>& x,
                                  const std::vector<double>& target, ModelGrads& grads,
                                  double scale = 1.0) {
    if (grads.layers.size() != model.layers.size())
        throw config_error("gradient container does not match the model");
    auto fp = detail::forward_pass(model, x, nullptr, true);
    auto [loss, dy] = mse_loss(fp.output, target);

    if (model.topology == Topology::Sequential) {
        std::vector<double> d = std::move(dy);
        for (std::size_t i = model.layers.size(); i-- > 0;)
            d = detail::layer_backward(model.layers[i], fp.cache[i], std::move(d), grads.layers[i],
                                       scale);
        return loss;
    }

    const std::size_t n_layers = model.layers.size();
    std::vector<double> d_up = detail::layer_backward(model.layers[n_layers - 1],
                                                      fp.cache[n_layers - 1], std::move(dy),
                                                      grads.layers[n_layers - 1], scale);
    std::vector<double> d_acc = detail::layer_backward(model.layers[n_layers - 2],
                                                       fp.cache[n_layers - 2], std::move(d_up),
                                                       grads.layers[n_layers - 2], scale);

    // Accumulator coefficients: the first block input and the last block
    // output enter the sum once, every interior activation twice (as one
    // block's output and the next one's input).
    std::vector<double> g = d_acc;
    for (int b = model.n_blocks - 1; b >= 0; --b) {
        const std::size_t ia = 1 + 2 * static_cast<std::size_t>(b);
        std::vector<double> dv = detail::layer_backward(model.layers[ia + 1], fp.cache[ia + 1],
                                                        std::move(g), grads.layers[ia + 1], scale);
        std::vector<double> da = detail::layer_backward(model.layers[ia], fp.cache[ia],
                                                        std::move(dv), grads.layers[ia], scale);
        const double k = b >= 1 ? 2.0 : 1.0;
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += k * d_acc[i];
        g = std::move(da);
    }
    detail::layer_backward(model.layers[0], fp.cache[0], std::move(g), grads.layers[0], scale);
    return loss;
}

struct BackwardResult {
    double loss = 0.0;
    ModelGrads grads;
};

inline BackwardResult backward(const NetModel& model, const std::vector<double>& x,
                               const std::vector<double>& target) {
    BackwardResult r;
    r.grads = zero_grads(model);
    r.loss = backward_accumulate(model, x, target, r.grads, 1.0);
    return r;
}

struct AdamState {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

struct ParamRef {
    double* data = nullptr;
    std::size_t n = 0;
};

/// Mutable views of every parameter tensor, layer order, weights then bias.
inline std::vector<ParamRef> param_tensors(NetModel& model) {
    std::vector<ParamRef> refs;
    for (auto& layer : model.layers) {
        if (auto* d = std::get_if<DenseLayer>(&layer)) {
            refs.push_back({d->weights.data(), d->weights.size()});
            refs.push_back({d->bias.data(), d->bias.size()});
        } else if (auto* c = std::get_if<ConvLayer>(&layer)) {
            refs.push_back({c->kernel.data(), c->kernel.size()});
            refs.push_back({c->bias.data(), c->bias.size()});
        }
    }
    return refs;
}

inline std::vector<const std::vector<double>*> grad_tensors(const ModelGrads& grads) {
    std::vector<const std::vector<double>*> refs;
    for (const auto& lg : grads.layers) {
        if (lg.dw.empty() && lg.db.empty()) continue;
        refs.push_back(&lg.dw);
        refs.push_back(&lg.db);
    }
    return refs;
}

inline AdamState make_adam_state(NetModel& model, double learning_rate = 0.01) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& ref : param_tensors(model)) {
        state.m.emplace_back(ref.n, 0.0);
        state.v.emplace_back(ref.n, 0.0);
    }
    return state;
}

/// One ADAM update with bias correction.
inline void adam_step(AdamState& state, NetModel& model, const ModelGrads& grads) {
    auto params = param_tensors(model);
    auto gs = grad_tensors(grads);
    if (params.size() != gs.size() || params.size() != state.m.size())
        throw config_error("adam state does not match the model");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (gs[p]->size() != params[p].n) throw config_error("gradient tensor shape mismatch");
        double* w = params[p].data;
        double* m = state.m[p].data();
        double* v = state.v[p].data();
        const double* g = gs[p]->data();
        for (std::size_t i = 0; i < params[p].n; ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

struct Complexity {
    std::uint64_t learnable_parameters = 0;
    std::uint64_t mac_operations = 0;
};

/// Parameters and multiply-accumulate counts; biases count as parameters
/// but not as MACs, and the fixed upsampling layer contributes neither.
inline Complexity count_complexity(const NetModel& model) {
    Complexity c;
    for (const auto& layer : model.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            const auto in = static_cast<std::uint64_t>(d->in_size());
            const auto out = static_cast<std::uint64_t>(d->out_size());
            c.learnable_parameters += out * in + out;
            c.mac_operations += out * in;
        } else if (const auto* cv = std::get_if<ConvLayer>(&layer)) {
            const auto filt = static_cast<std::uint64_t>(cv->n_filters);
            const auto window = static_cast<std::uint64_t>(cv->in_channels) * cv->kh * cv->kw;
            c.learnable_parameters += filt * window + filt;
            c.mac_operations += filt * window * static_cast<std::uint64_t>(cv->out_h()) * cv->out_w();
        }
    }
    return c;
}

/// Glorot-uniform weight initialization from the seeded generator.
inline void glorot_fill(double* data, std::size_t n, std::size_t fan_in, std::size_t fan_out,
                        Lcg64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < n; ++i) data[i] = bound * (2.0 * rng.uniform() - 1.0);
}

}  // namespace ofdmce::neural
