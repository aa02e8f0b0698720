#pragma once

// Fixed-point (W, I) arithmetic emulation and the two-phase word-length
// selection procedure.

#include <cmath>
#include <functional>

#include "ofdmce/common.hpp"
#include "ofdmce/neural.hpp"

namespace ofdmce::fxp {

/// Signed fixed-point format: W total bits, I integer bits (sign included),
/// F = W - I fractional bits. Representable range [-2^(I-1), 2^(I-1) - 2^-F]
/// with step 2^-F.
struct FixedFormat {
    int total_bits = 32;    // W
    int integer_bits = 8;   // I

    int fractional_bits() const { return total_bits - integer_bits; }
    double step() const { return std::ldexp(1.0, -fractional_bits()); }
    double max_value() const { return std::ldexp(1.0, integer_bits - 1) - step(); }
    double min_value() const { return -std::ldexp(1.0, integer_bits - 1); }

    void validate() const {
        if (integer_bits < 1 || integer_bits > total_bits || total_bits > 64)
            throw config_error("fixed format requires 1 <= I <= W <= 64");
    }
};

/// Round to the nearest representable value (ties away from zero) and
/// saturate to the format's range.
inline double quantize(double x, const FixedFormat& f) {
    f.validate();
    if (!std::isfinite(x)) throw numerical_error("cannot quantize a non-finite value");
    const double scaled = std::round(std::ldexp(x, f.fractional_bits()));
    const double value = std::ldexp(scaled, -f.fractional_bits());
    if (value > f.max_value()) return f.max_value();
    if (value < f.min_value()) return f.min_value();
    return value;
}

inline cplx quantize(cplx x, const FixedFormat& f) {
    return {quantize(x.real(), f), quantize(x.imag(), f)};
}

/// A forward-pass hook that rounds every layer boundary value.
inline neural::ValueHook make_hook(const FixedFormat& f) {
    f.validate();
    return [f](double x) { return quantize(x, f); };
}

/// Quantize all weights and biases of a model. Running the result with the
/// matching hook additionally rounds every layer input and post-activation
/// output while keeping the accumulations wide.
inline neural::NetModel quantize_model(const neural::NetModel& model, const FixedFormat& f) {
    f.validate();
    neural::NetModel q = model;
    for (const auto& ref : neural::param_tensors(q))
        for (std::size_t i = 0; i < ref.n; ++i) ref.data[i] = quantize(ref.data[i], f);
    return q;
}

using MseEvaluator = std::function<double(const FixedFormat&)>;

/// Smallest integer-bit count whose MSE at a wide probe word length stays
/// within `tol` of the reference MSE.
inline int select_integer_bits(const MseEvaluator& evaluate_mse, int probe_bits, double reference_mse,
                               double tol) {
    if (probe_bits < 2 || probe_bits > 64) throw config_error("probe word length out of range");
    for (int i = 1; i < probe_bits; ++i) {
        if (evaluate_mse(FixedFormat{probe_bits, i}) <= reference_mse * (1.0 + tol)) return i;
    }
    throw numerical_error("no integer bit count meets the MSE criterion");
}

/// Smallest total word length at the chosen integer bits whose MSE stays
/// within `tol` of the reference MSE.
inline int select_word_length(const MseEvaluator& evaluate_mse, int integer_bits,
                              double reference_mse, double tol) {
    if (integer_bits < 1 || integer_bits >= 64) throw config_error("integer bits out of range");
    for (int w = integer_bits + 1; w <= 64; ++w) {
        if (evaluate_mse(FixedFormat{w, integer_bits}) <= reference_mse * (1.0 + tol)) return w;
    }
    throw numerical_error("no word length up to 64 bits meets the MSE criterion");
}

}  // namespace ofdmce::fxp
