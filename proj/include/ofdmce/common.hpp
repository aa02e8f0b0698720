#pragma once

// Shared numeric plumbing: dynamic matrices, deterministic RNG streams,
// error types and the two-point linear interpolation kernel used by both
// the classical estimators and the neural upsampling layer.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ofdmce {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised for malformed configuration or inputs (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a computation breaks down numerically (CLI exit code 3).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal dense row-major matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMat = Matrix<cplx>;
using RMat = Matrix<double>;

/// SplitMix64 finalizer; combines a base seed with a counter so that
/// parallel and serial evaluation orders derive identical substreams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// 64-bit linear congruential generator (Knuth MMIX constants). The same
/// recurrence generates the pilot sequence, so its constants are part of
/// the wire contract and must not change.
class Lcg64 {
public:
    static constexpr std::uint64_t kMul = 6364136223846793005ULL;
    static constexpr std::uint64_t kInc = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * kMul + kInc;
        return state_;
    }

    /// Top two bits of the freshly advanced state; selects a QPSK point.
    unsigned next_2bits() { return static_cast<unsigned>(next() >> 62); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t bounded(std::uint64_t n) { return next() % n; }

    /// Two independent N(0,1) draws (Box-Muller).
    std::pair<double, double> normal_pair() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return {radius * std::cos(2.0 * kPi * u2), radius * std::sin(2.0 * kPi * u2)};
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    cplx cnormal() {
        auto [re, im] = normal_pair();
        return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
    }

private:
    std::uint64_t state_;
};

/// One output position expressed as a weighted pair of sample positions.
/// Positions outside the sampled span reuse the nearest segment, which
/// turns the interior formula into a linear extrapolation.
struct InterpTap {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double w_lo = 1.0;
    double w_hi = 0.0;
};

/// Two-point weights for every integer output position along one axis.
/// `positions` are the strictly increasing sample coordinates.
inline std::vector<InterpTap> interp_axis_taps(const std::vector<int>& positions, int out_len) {
    if (positions.size() < 2) throw config_error("interpolation needs at least two sample positions");
    std::vector<InterpTap> taps(static_cast<std::size_t>(out_len));
    std::size_t seg = 0;
    for (int x = 0; x < out_len; ++x) {
        while (seg + 2 < positions.size() && positions[seg + 1] <= x) ++seg;
        const double lo = positions[seg];
        const double hi = positions[seg + 1];
        const double d = hi - lo;
        taps[static_cast<std::size_t>(x)] = {seg, seg + 1, (hi - x) / d, (x - lo) / d};
    }
    return taps;
}

/// Expand a sparse sample matrix onto a dense integer grid: first linearly
/// along columns (time), then along rows (frequency). Both steps use the
/// two-point form, so positions outside the sampled span extrapolate.
template <typename T>
Matrix<T> bilinear_from_samples(const Matrix<T>& samples,
                                const std::vector<int>& row_positions,
                                const std::vector<int>& col_positions,
                                int out_rows, int out_cols) {
    if (samples.rows() != row_positions.size() || samples.cols() != col_positions.size())
        throw config_error("sample matrix does not match position lists");
    const auto col_taps = interp_axis_taps(col_positions, out_cols);
    const auto row_taps = interp_axis_taps(row_positions, out_rows);

    Matrix<T> wide(samples.rows(), static_cast<std::size_t>(out_cols));
    for (std::size_t r = 0; r < samples.rows(); ++r)
        for (int c = 0; c < out_cols; ++c) {
            const auto& t = col_taps[static_cast<std::size_t>(c)];
            wide(r, static_cast<std::size_t>(c)) =
                samples(r, t.lo) * t.w_lo + samples(r, t.hi) * t.w_hi;
        }

    Matrix<T> full(static_cast<std::size_t>(out_rows), static_cast<std::size_t>(out_cols));
    for (int r = 0; r < out_rows; ++r) {
        const auto& t = row_taps[static_cast<std::size_t>(r)];
        for (int c = 0; c < out_cols; ++c)
            full(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                wide(t.lo, static_cast<std::size_t>(c)) * t.w_lo +
                wide(t.hi, static_cast<std::size_t>(c)) * t.w_hi;
    }
    return full;
}

}  // namespace ofdmce
