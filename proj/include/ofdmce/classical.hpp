#pragma once

// Classical estimators: least squares at pilot cells, bilinear expansion to
// the full grid, and LMMSE with learned correlation matrices backed by an
// LU-based complex matrix inverse.

#include <cstdint>
#include <vector>

#include "ofdmce/channel.hpp"
#include "ofdmce/common.hpp"
#include "ofdmce/grid.hpp"

namespace ofdmce::classical {

using channel::TrueChannel;
using grid::PhyConfig;

/// Raw channel estimates at pilot cells, [pilot subcarrier x pilot symbol].
struct PilotEstimate {
    CMat values;
};

/// Second-order channel statistics learned offline from prior channels.
struct LmmseStatistics {
    CMat r_h_hp;    // n_subcarriers x n_pilot_subcarriers
    CMat r_hp_hp;   // n_pilot_subcarriers x n_pilot_subcarriers
    std::uint64_t n_samples = 0;
};

/// Element-wise Y/X at the pilot cells, spelled as the six-multiply
/// two-divide decomposition used by the hardware datapath.
inline PilotEstimate ls_estimate(const CMat& y_pilot, const CMat& x_pilot) {
    if (!y_pilot.same_shape(x_pilot)) throw config_error("pilot grids differ in shape");
    PilotEstimate est;
    est.values = CMat(y_pilot.rows(), y_pilot.cols());
    for (std::size_t s = 0; s < y_pilot.cols(); ++s)
        for (std::size_t k = 0; k < y_pilot.rows(); ++k) {
            const double a = y_pilot(k, s).real(), b = y_pilot(k, s).imag();
            const double c = x_pilot(k, s).real(), d = x_pilot(k, s).imag();
            const double den = c * c + d * d;
            if (den == 0.0) throw numerical_error("zero pilot value in LS estimate");
            est.values(k, s) = {(a * c + b * d) / den, (b * c - a * d) / den};
        }
    return est;
}

/// Pull the pilot cells out of a received grid.
inline CMat extract_pilots(const CMat& cells, const PhyConfig& cfg) {
    CMat out(static_cast<std::size_t>(cfg.n_pilot_subcarriers),
             static_cast<std::size_t>(cfg.n_pilot_symbols()));
    const auto subs = cfg.pilot_subcarriers();
    for (std::size_t s = 0; s < out.cols(); ++s)
        for (std::size_t k = 0; k < out.rows(); ++k)
            out(k, s) = cells(static_cast<std::size_t>(subs[k]),
                              static_cast<std::size_t>(cfg.pilot_symbol_indices[s]));
    return out;
}

/// Expand pilot estimates to the full grid: linear along time between (and
/// beyond) the two pilot symbols, then linear along frequency between
/// adjacent pilot subcarriers, extrapolating past the last one.
inline CMat bilinear_interpolate(const PilotEstimate& p, const PhyConfig& cfg) {
    return bilinear_from_samples(p.values, cfg.pilot_subcarriers(), cfg.pilot_symbol_indices,
                                 cfg.n_subcarriers, cfg.n_symbols);
}

/// Accumulate cross- and auto-correlation of the channel against its pilot
/// entries; both pilot symbols of every frame contribute one sample each.
inline LmmseStatistics learn_statistics(const std::vector<TrueChannel>& channels,
                                        const PhyConfig& cfg) {
    if (channels.empty()) throw config_error("statistics need at least one channel realization");
    const auto nsc = static_cast<std::size_t>(cfg.n_subcarriers);
    const auto np = static_cast<std::size_t>(cfg.n_pilot_subcarriers);
    const auto subs = cfg.pilot_subcarriers();

    LmmseStatistics stats;
    stats.r_h_hp = CMat(nsc, np);
    stats.r_hp_hp = CMat(np, np);
    for (const auto& tc : channels) {
        for (int ps : cfg.pilot_symbol_indices) {
            const auto s = static_cast<std::size_t>(ps);
            for (std::size_t j = 0; j < np; ++j) {
                const cplx hp_conj = std::conj(tc.H(static_cast<std::size_t>(subs[j]), s));
                for (std::size_t i = 0; i < nsc; ++i) stats.r_h_hp(i, j) += tc.H(i, s) * hp_conj;
            }
        }
        stats.n_samples += static_cast<std::uint64_t>(cfg.n_pilot_symbols());
    }
    const double inv_n = 1.0 / static_cast<double>(stats.n_samples);
    for (auto& v : stats.r_h_hp) v *= inv_n;
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            stats.r_hp_hp(i, j) = stats.r_h_hp(static_cast<std::size_t>(subs[i]), j);
    return stats;
}

/// Complex matrix inverse via LU decomposition with partial pivoting and
/// per-column forward/back substitution.
inline CMat lu_invert(const CMat& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw config_error("matrix must be square");
    const std::size_t n = a.rows();
    CMat lu = a;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(lu(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(lu(r, col));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best < 1e-300) throw numerical_error("matrix is singular to working precision");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu(col, c), lu(pivot, c));
            std::swap(perm[col], perm[pivot]);
        }
        const cplx inv_pivot = 1.0 / lu(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const cplx factor = lu(r, col) * inv_pivot;
            lu(r, col) = factor;
            for (std::size_t c = col + 1; c < n; ++c) lu(r, c) -= factor * lu(col, c);
        }
    }

    CMat inv(n, n);
    std::vector<cplx> x(n);
    for (std::size_t unit = 0; unit < n; ++unit) {
        for (std::size_t i = 0; i < n; ++i) x[i] = perm[i] == unit ? cplx(1.0, 0.0) : cplx{};
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
            x[i] /= lu(i, i);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, unit) = x[i];
    }
    return inv;
}

/// LMMSE per pilot symbol followed by the same time interpolation step as
/// the bilinear path. The 1/SNR loading goes onto the real diagonal only.
inline CMat lmmse_estimate(const PilotEstimate& p, const LmmseStatistics& stats, double snr_db,
                           const PhyConfig& cfg) {
    const auto np = static_cast<std::size_t>(cfg.n_pilot_subcarriers);
    const auto nsc = static_cast<std::size_t>(cfg.n_subcarriers);
    if (stats.r_hp_hp.rows() != np || stats.r_h_hp.rows() != nsc || stats.r_h_hp.cols() != np)
        throw config_error("statistics dimensions do not match the pilot layout");
    if (p.values.rows() != np || p.values.cols() != static_cast<std::size_t>(cfg.n_pilot_symbols()))
        throw config_error("pilot estimate dimensions do not match the layout");

    const double inv_snr = channel::noise_variance(snr_db);
    CMat loaded = stats.r_hp_hp;
    for (std::size_t i = 0; i < np; ++i)
        loaded(i, i) = {loaded(i, i).real() + inv_snr, loaded(i, i).imag()};
    const CMat inv = lu_invert(loaded);

    CMat weight(nsc, np);
    for (std::size_t i = 0; i < nsc; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            cplx acc{};
            for (std::size_t k = 0; k < np; ++k) acc += stats.r_h_hp(i, k) * inv(k, j);
            weight(i, j) = acc;
        }

    CMat columns(nsc, p.values.cols());
    for (std::size_t s = 0; s < p.values.cols(); ++s)
        for (std::size_t i = 0; i < nsc; ++i) {
            cplx acc{};
            for (std::size_t k = 0; k < np; ++k) acc += weight(i, k) * p.values(k, s);
            columns(i, s) = acc;
        }

    const auto taps = interp_axis_taps(cfg.pilot_symbol_indices, cfg.n_symbols);
    CMat full(nsc, static_cast<std::size_t>(cfg.n_symbols));
    for (std::size_t s = 0; s < full.cols(); ++s) {
        const auto& t = taps[s];
        for (std::size_t i = 0; i < nsc; ++i)
            full(i, s) = columns(i, t.lo) * t.w_lo + columns(i, t.hi) * t.w_hi;
    }
    return full;
}

}  // namespace ofdmce::classical
