#pragma once

// The two learned estimators: the LS-augmented interpolated DNN and the
// interpolation-CNN baseline, plus their shared training pipeline.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "ofdmce/classical.hpp"
#include "ofdmce/common.hpp"
#include "ofdmce/grid.hpp"
#include "ofdmce/neural.hpp"

namespace ofdmce::dlmodels {

using classical::PilotEstimate;
using grid::PhyConfig;
using neural::NetModel;

/// Fully connected estimator: flattened pilot LS estimates in, the full
/// complex grid out. Default hidden width is half the input size. The init
/// gains scale the Glorot bound per layer; the damped output layer makes the
/// short desk-scale training budget converge.
struct LsidnnConfig {
    std::vector<int> hidden_sizes = {48};
    int input_size = 24 * 2 * 2;
    int out_subcarriers = 72;
    int out_symbols = 14;
    double hidden_init_gain = 0.5;
    double output_init_gain = 0.1;

    int output_size() const { return out_subcarriers * out_symbols * 2; }

    static LsidnnConfig from_phy(const PhyConfig& phy, std::vector<int> hidden = {}) {
        LsidnnConfig cfg;
        cfg.input_size = phy.n_pilot_subcarriers * phy.n_pilot_symbols() * 2;
        cfg.out_subcarriers = phy.n_subcarriers;
        cfg.out_symbols = phy.n_symbols;
        cfg.hidden_sizes = hidden.empty() ? std::vector<int>{cfg.input_size / 2} : std::move(hidden);
        return cfg;
    }
};

/// Convolutional baseline: conv stem, accumulated two-conv neural blocks,
/// fixed bilinear upsampling, conv head.
struct IresnetConfig {
    int n_neural_blocks = 4;
    int channels = 11;
    int kernel = 3;
    int in_h = 24, in_w = 2;     // pilot subcarriers x pilot symbols
    int out_h = 72, out_w = 14;  // full grid
    std::vector<int> row_positions = {0,  3,  6,  9,  12, 15, 18, 21, 24, 27, 30, 33,
                                      36, 39, 42, 45, 48, 51, 54, 57, 60, 63, 66, 69};
    std::vector<int> col_positions = {0, 6};

    static IresnetConfig from_phy(const PhyConfig& phy, int blocks = 4, int channels = 11) {
        IresnetConfig cfg;
        cfg.n_neural_blocks = blocks;
        cfg.channels = channels;
        cfg.in_h = phy.n_pilot_subcarriers;
        cfg.in_w = phy.n_pilot_symbols();
        cfg.out_h = phy.n_subcarriers;
        cfg.out_w = phy.n_symbols;
        cfg.row_positions = phy.pilot_subcarriers();
        cfg.col_positions = phy.pilot_symbol_indices;
        return cfg;
    }
};

struct TrainSpec {
    int epochs = 250;
    int batch_size = 256;
    double learning_rate = 0.01;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    /// Returned parameters are the average of the last N epoch snapshots;
    /// 1 keeps the final iterate. Averaging removes most of the optimizer
    /// noise ball at the fixed learning rate.
    int tail_average_epochs = 1;

    void validate() const {
        if (epochs <= 0 || batch_size <= 0 || learning_rate <= 0.0)
            throw config_error("training spec values must be positive");
        if (train_fraction <= 0.0 || train_fraction > 1.0)
            throw config_error("train fraction must be in (0, 1]");
        if (tail_average_epochs < 1 || tail_average_epochs > epochs)
            throw config_error("tail averaging window must be in [1, epochs]");
    }
};

/// Column-major complex flatten, then all real parts followed by all
/// imaginary parts.
inline std::vector<double> flatten_complex(const CMat& m) {
    const std::size_t n = m.size();
    std::vector<double> out(2 * n);
    std::size_t idx = 0;
    for (std::size_t s = 0; s < m.cols(); ++s)
        for (std::size_t k = 0; k < m.rows(); ++k) {
            out[idx] = m(k, s).real();
            out[n + idx] = m(k, s).imag();
            ++idx;
        }
    return out;
}

inline std::vector<double> flatten_input(const PilotEstimate& p) { return flatten_complex(p.values); }

/// Inverse of flatten_complex for a grid of known dimensions.
inline CMat unflatten_output(const std::vector<double>& y, int n_subcarriers = 72,
                             int n_symbols = 14) {
    const std::size_t n = static_cast<std::size_t>(n_subcarriers) * n_symbols;
    if (y.size() != 2 * n) throw config_error("output vector length does not match the grid");
    CMat grid(static_cast<std::size_t>(n_subcarriers), static_cast<std::size_t>(n_symbols));
    std::size_t idx = 0;
    for (std::size_t s = 0; s < grid.cols(); ++s)
        for (std::size_t k = 0; k < grid.rows(); ++k) {
            grid(k, s) = {y[idx], y[n + idx]};
            ++idx;
        }
    return grid;
}

/// Two-channel tensor view, [re|im][subcarrier][symbol], for conv models.
inline std::vector<double> to_tensor(const CMat& m) {
    const std::size_t n = m.size();
    std::vector<double> out(2 * n);
    for (std::size_t k = 0; k < m.rows(); ++k)
        for (std::size_t s = 0; s < m.cols(); ++s) {
            out[k * m.cols() + s] = m(k, s).real();
            out[n + k * m.cols() + s] = m(k, s).imag();
        }
    return out;
}

inline std::vector<double> tensor_input(const PilotEstimate& p) { return to_tensor(p.values); }

inline CMat tensor_to_grid(const std::vector<double>& y, int n_subcarriers, int n_symbols) {
    const std::size_t n = static_cast<std::size_t>(n_subcarriers) * n_symbols;
    if (y.size() != 2 * n) throw config_error("output tensor size does not match the grid");
    CMat grid(static_cast<std::size_t>(n_subcarriers), static_cast<std::size_t>(n_symbols));
    for (int k = 0; k < n_subcarriers; ++k)
        for (int s = 0; s < n_symbols; ++s)
            grid(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) = {
                y[static_cast<std::size_t>(k * n_symbols + s)],
                y[n + static_cast<std::size_t>(k * n_symbols + s)]};
    return grid;
}

/// Dense stack: input -> hidden layers with ReLU -> linear output. The
/// output vector is the flatten_complex view of a grid whose dimensions are
/// recorded in the model's output shape.
inline NetModel build_lsidnn(const LsidnnConfig& cfg, std::uint64_t seed) {
    if (cfg.hidden_sizes.empty()) throw config_error("lsidnn needs at least one hidden layer");
    for (int h : cfg.hidden_sizes)
        if (h < 1) throw config_error("hidden sizes must be at least 1");

    NetModel model;
    model.topology = neural::Topology::Sequential;
    model.input_shape = neural::TensorShape::flat(cfg.input_size);
    model.output_shape = {2, cfg.out_subcarriers, cfg.out_symbols};

    std::vector<int> sizes;
    sizes.push_back(cfg.input_size);
    sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    sizes.push_back(cfg.output_size());

    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        neural::DenseLayer layer;
        const auto in = static_cast<std::size_t>(sizes[i]);
        const auto out = static_cast<std::size_t>(sizes[i + 1]);
        const bool is_output = i + 2 == sizes.size();
        layer.weights = RMat(out, in);
        layer.bias.assign(out, 0.0);
        layer.relu = !is_output;  // no activation on the output layer
        Lcg64 rng(mix_seed(seed, i));
        neural::glorot_fill(layer.weights.data(), layer.weights.size(), in, out, rng);
        const double gain = is_output ? cfg.output_init_gain : cfg.hidden_init_gain;
        for (auto& w : layer.weights) w *= gain;
        model.layers.emplace_back(std::move(layer));
    }
    return model;
}

namespace detail {

inline neural::ConvLayer make_conv(int in_c, int out_c, int kernel, bool relu, int in_h, int in_w,
                                   std::uint64_t seed) {
    neural::ConvLayer layer;
    layer.n_filters = out_c;
    layer.in_channels = in_c;
    layer.kh = layer.kw = kernel;
    layer.stride = 1;
    layer.padding = neural::Padding::Same;
    layer.relu = relu;
    layer.in_h = in_h;
    layer.in_w = in_w;
    layer.kernel.assign(static_cast<std::size_t>(out_c) * in_c * kernel * kernel, 0.0);
    layer.bias.assign(static_cast<std::size_t>(out_c), 0.0);
    Lcg64 rng(seed);
    neural::glorot_fill(layer.kernel.data(), layer.kernel.size(),
                        static_cast<std::size_t>(in_c) * kernel * kernel,
                        static_cast<std::size_t>(out_c) * kernel * kernel, rng);
    return layer;
}

}  // namespace detail

inline NetModel build_iresnet(const IresnetConfig& cfg, std::uint64_t seed) {
    if (cfg.n_neural_blocks < 1) throw config_error("iresnet needs at least one neural block");
    if (cfg.channels < 1) throw config_error("iresnet channel width must be at least 1");
    if (static_cast<int>(cfg.row_positions.size()) != cfg.in_h ||
        static_cast<int>(cfg.col_positions.size()) != cfg.in_w)
        throw config_error("iresnet sample positions do not match the input dimensions");

    NetModel model;
    model.topology = neural::Topology::BlockAccumulate;
    model.n_blocks = cfg.n_neural_blocks;
    model.input_shape = {2, cfg.in_h, cfg.in_w};
    model.output_shape = {2, cfg.out_h, cfg.out_w};

    std::uint64_t idx = 0;
    model.layers.emplace_back(
        detail::make_conv(2, cfg.channels, cfg.kernel, true, cfg.in_h, cfg.in_w, mix_seed(seed, idx++)));
    for (int b = 0; b < cfg.n_neural_blocks; ++b) {
        model.layers.emplace_back(detail::make_conv(cfg.channels, cfg.channels, cfg.kernel, true,
                                                    cfg.in_h, cfg.in_w, mix_seed(seed, idx++)));
        model.layers.emplace_back(detail::make_conv(cfg.channels, cfg.channels, cfg.kernel, false,
                                                    cfg.in_h, cfg.in_w, mix_seed(seed, idx++)));
    }

    neural::UpsampleLayer up;
    up.channels = cfg.channels;
    up.in_h = cfg.in_h;
    up.in_w = cfg.in_w;
    up.out_h = cfg.out_h;
    up.out_w = cfg.out_w;
    up.row_positions = cfg.row_positions;
    up.col_positions = cfg.col_positions;
    model.layers.emplace_back(std::move(up));

    model.layers.emplace_back(
        detail::make_conv(cfg.channels, 2, cfg.kernel, false, cfg.out_h, cfg.out_w, mix_seed(seed, idx++)));
    return model;
}

struct TrainSample {
    std::vector<double> input;
    std::vector<double> target;
};

struct TrainResult {
    NetModel model;
    std::vector<double> train_loss;  // one entry per epoch
    std::vector<double> val_loss;    // NaN entries when the split is empty
};

/// Mini-batch ADAM over a deterministic shuffle/split of the samples.
/// The final partial batch is kept.
inline TrainResult train(NetModel model, const std::vector<TrainSample>& samples,
                         const TrainSpec& spec) {
    spec.validate();
    if (samples.empty()) throw config_error("training needs at least one sample");
    for (const auto& s : samples)
        if (s.input.size() != model.input_shape.size() || s.target.size() != model.output_shape.size())
            throw config_error("sample shapes do not match the model");

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Lcg64 split_rng(mix_seed(spec.seed, 0x51u));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(split_rng.bounded(i))]);

    const auto n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(spec.train_fraction * static_cast<double>(samples.size())));
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, order.size())));
    std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(train_idx.size()),
                                     order.end());

    TrainResult result;
    result.model = std::move(model);
    neural::AdamState adam = neural::make_adam_state(result.model, spec.learning_rate);
    neural::ModelGrads grads = neural::zero_grads(result.model);

    std::vector<std::vector<double>> tail_sum;
    int tail_count = 0;

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        Lcg64 epoch_rng(mix_seed(spec.seed, 0x9000 + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = train_idx.size(); i > 1; --i)
            std::swap(train_idx[i - 1], train_idx[static_cast<std::size_t>(epoch_rng.bounded(i))]);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(spec.batch_size)) {
            const std::size_t stop =
                std::min(train_idx.size(), start + static_cast<std::size_t>(spec.batch_size));
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (auto& lg : grads.layers) {
                std::fill(lg.dw.begin(), lg.dw.end(), 0.0);
                std::fill(lg.db.begin(), lg.db.end(), 0.0);
            }
            for (std::size_t i = start; i < stop; ++i) {
                const auto& s = samples[train_idx[i]];
                epoch_loss += neural::backward_accumulate(result.model, s.input, s.target, grads, scale);
            }
            neural::adam_step(adam, result.model, grads);
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));

        if (epoch >= spec.epochs - spec.tail_average_epochs) {
            const auto refs = neural::param_tensors(result.model);
            if (tail_sum.empty())
                for (const auto& r : refs) tail_sum.emplace_back(r.data, r.data + r.n);
            else
                for (std::size_t p = 0; p < refs.size(); ++p)
                    for (std::size_t i = 0; i < refs[p].n; ++i) tail_sum[p][i] += refs[p].data[i];
            ++tail_count;
        }

        if (val_idx.empty()) {
            result.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            double val = 0.0;
            for (std::size_t i : val_idx) {
                const auto& s = samples[i];
                val += neural::mse_loss(neural::forward(result.model, s.input), s.target).first;
            }
            result.val_loss.push_back(val / static_cast<double>(val_idx.size()));
        }
    }

    if (tail_count > 1) {
        const auto refs = neural::param_tensors(result.model);
        for (std::size_t p = 0; p < refs.size(); ++p)
            for (std::size_t i = 0; i < refs[p].n; ++i)
                refs[p].data[i] = tail_sum[p][i] / static_cast<double>(tail_count);
    }
    return result;
}

/// Mean MSE of a model over a sample set.
inline double evaluate_loss(const NetModel& model, const std::vector<TrainSample>& samples) {
    if (samples.empty()) throw config_error("evaluation needs at least one sample");
    double total = 0.0;
    for (const auto& s : samples)
        total += neural::mse_loss(neural::forward(model, s.input), s.target).first;
    return total / static_cast<double>(samples.size());
}

inline CMat lsidnn_estimate(const NetModel& model, const PilotEstimate& p,
                            const neural::ValueHook* hook = nullptr) {
    const auto y = neural::forward(model, flatten_input(p), hook);
    return unflatten_output(y, model.output_shape.h, model.output_shape.w);
}

inline CMat iresnet_estimate(const NetModel& model, const PilotEstimate& p,
                             const neural::ValueHook* hook = nullptr) {
    const auto y = neural::forward(model, tensor_input(p), hook);
    return tensor_to_grid(y, model.output_shape.h, model.output_shape.w);
}

}  // namespace ofdmce::dlmodels
