#pragma once

// OFDM frame construction: QPSK mapping, pilot placement, unitary DFT and
// cyclic-prefix (de)modulation.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "ofdmce/common.hpp"

namespace ofdmce::grid {

/// Static PHY parameters of the simulated link. Defaults match a 72-carrier,
/// 14-symbol frame with comb pilots on symbols 0 and 6.
struct PhyConfig {
    int n_subcarriers = 72;
    int n_symbols = 14;
    std::vector<int> pilot_symbol_indices = {0, 6};
    int n_pilot_subcarriers = 24;
    int pilot_spacing = 3;
    int fft_size = 128;
    int cp_length = 16;
    double subcarrier_spacing_hz = 15e3;
    double carrier_frequency_hz = 2.1e9;
    std::uint64_t pilot_seed = 0x5D;

    int n_pilot_symbols() const { return static_cast<int>(pilot_symbol_indices.size()); }
    int samples_per_symbol() const { return fft_size + cp_length; }
    int n_samples() const { return n_symbols * samples_per_symbol(); }
    double sample_rate_hz() const { return fft_size * subcarrier_spacing_hz; }
    double symbol_duration_s() const { return samples_per_symbol() / sample_rate_hz(); }
    int n_data_symbols() const { return n_symbols - n_pilot_symbols(); }
    int n_data_cells() const { return n_subcarriers * n_data_symbols(); }
    int n_data_bits() const { return 2 * n_data_cells(); }

    bool is_pilot_symbol(int s) const {
        for (int p : pilot_symbol_indices)
            if (p == s) return true;
        return false;
    }

    /// FFT bin of subcarrier k: the lower half maps to -N/2..-1, the upper
    /// half to +1..+N/2, leaving DC unused.
    int fft_bin(int k) const {
        const int half = n_subcarriers / 2;
        return k < half ? k - half : k - half + 1;
    }

    std::vector<int> pilot_subcarriers() const {
        std::vector<int> idx(static_cast<std::size_t>(n_pilot_subcarriers));
        for (int i = 0; i < n_pilot_subcarriers; ++i) idx[static_cast<std::size_t>(i)] = i * pilot_spacing;
        return idx;
    }

    void validate() const {
        if (n_subcarriers <= 0 || n_symbols <= 0) throw config_error("grid dimensions must be positive");
        if (n_subcarriers % 2 != 0) throw config_error("subcarrier count must be even");
        if (n_pilot_subcarriers * pilot_spacing != n_subcarriers)
            throw config_error("pilot subcarriers times spacing must equal subcarrier count");
        if (pilot_symbol_indices.empty()) throw config_error("at least one pilot symbol required");
        for (std::size_t i = 0; i < pilot_symbol_indices.size(); ++i) {
            if (pilot_symbol_indices[i] < 0 || pilot_symbol_indices[i] >= n_symbols)
                throw config_error("pilot symbol index out of range");
            if (i > 0 && pilot_symbol_indices[i] <= pilot_symbol_indices[i - 1])
                throw config_error("pilot symbol indices must be strictly increasing");
        }
        if (fft_size < n_subcarriers + 1) throw config_error("fft size must exceed subcarrier count (DC unused)");
        if ((fft_size & (fft_size - 1)) != 0) throw config_error("fft size must be a power of two");
        if (cp_length < 0 || cp_length >= fft_size) throw config_error("cyclic prefix length out of range");
    }
};

enum class CellKind : std::uint8_t { Data, Pilot, Null };

/// One frame of frequency-time cells plus their roles.
struct ResourceGrid {
    CMat cells;
    Matrix<CellKind> kind;
};

struct TimeSignal {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;
};

/// Gray-labeled unit-energy QPSK: bit 0 selects the real sign, bit 1 the
/// imaginary sign, 0 -> positive.
inline cplx qpsk_map(int b0, int b1) {
    constexpr double a = 0.70710678118654752440;
    return {b0 ? -a : a, b1 ? -a : a};
}

/// Hard decision back to bits; a zero component decides toward bit 0.
inline std::pair<int, int> qpsk_demap(cplx symbol) {
    return {symbol.real() < 0.0 ? 1 : 0, symbol.imag() < 0.0 ? 1 : 0};
}

/// Deterministic pseudo-random pilot values, one per pilot cell, laid out as
/// [pilot subcarrier x pilot symbol]. The LCG advances pilot-symbol-major,
/// subcarrier fastest; the top two state bits pick the QPSK point.
inline CMat pilot_values(const PhyConfig& cfg) {
    Lcg64 rng(cfg.pilot_seed);
    CMat values(static_cast<std::size_t>(cfg.n_pilot_subcarriers),
                static_cast<std::size_t>(cfg.n_pilot_symbols()));
    for (std::size_t s = 0; s < values.cols(); ++s)
        for (std::size_t k = 0; k < values.rows(); ++k) {
            const unsigned bits = rng.next_2bits();
            values(k, s) = qpsk_map((bits >> 1) & 1, bits & 1);
        }
    return values;
}

/// Assemble one frame: pilots from the deterministic sequence, nulls on the
/// remaining pilot-symbol cells, data bits QPSK-mapped subcarrier-major over
/// the data symbols in time order.
inline ResourceGrid build_frame(const std::vector<int>& data_bits, const PhyConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(data_bits.size()) != cfg.n_data_bits())
        throw config_error("expected " + std::to_string(cfg.n_data_bits()) + " data bits, got " +
                           std::to_string(data_bits.size()));

    ResourceGrid frame;
    frame.cells = CMat(static_cast<std::size_t>(cfg.n_subcarriers), static_cast<std::size_t>(cfg.n_symbols));
    frame.kind = Matrix<CellKind>(frame.cells.rows(), frame.cells.cols(), CellKind::Null);

    const CMat pilots = pilot_values(cfg);
    for (int ps = 0; ps < cfg.n_pilot_symbols(); ++ps) {
        const auto s = static_cast<std::size_t>(cfg.pilot_symbol_indices[static_cast<std::size_t>(ps)]);
        for (int p = 0; p < cfg.n_pilot_subcarriers; ++p) {
            const auto k = static_cast<std::size_t>(p * cfg.pilot_spacing);
            frame.cells(k, s) = pilots(static_cast<std::size_t>(p), static_cast<std::size_t>(ps));
            frame.kind(k, s) = CellKind::Pilot;
        }
    }

    std::size_t bit = 0;
    for (int s = 0; s < cfg.n_symbols; ++s) {
        if (cfg.is_pilot_symbol(s)) continue;
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            const int b0 = data_bits[bit++];
            const int b1 = data_bits[bit++];
            frame.cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) = qpsk_map(b0, b1);
            frame.kind(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) = CellKind::Data;
        }
    }
    return frame;
}

/// Unitary radix-2 DFT, scale 1/sqrt(N) in both directions.
inline std::vector<cplx> dft(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0) throw config_error("dft length must be a power of two");

    std::vector<cplx> a = x;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : a) v *= scale;
    return a;
}

/// Map one symbol column onto FFT bins, inverse-transform and prepend the
/// cyclic prefix.
inline TimeSignal ofdm_modulate(const ResourceGrid& frame, const PhyConfig& cfg) {
    cfg.validate();
    TimeSignal sig;
    sig.sample_rate_hz = cfg.sample_rate_hz();
    sig.samples.resize(static_cast<std::size_t>(cfg.n_samples()));

    std::vector<cplx> spectrum(static_cast<std::size_t>(cfg.fft_size));
    for (int s = 0; s < cfg.n_symbols; ++s) {
        std::fill(spectrum.begin(), spectrum.end(), cplx{});
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            const int bin = cfg.fft_bin(k);
            const auto idx = static_cast<std::size_t>(bin < 0 ? bin + cfg.fft_size : bin);
            spectrum[idx] = frame.cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s));
        }
        const std::vector<cplx> body = dft(spectrum, true);
        cplx* out = sig.samples.data() + static_cast<std::size_t>(s) * cfg.samples_per_symbol();
        for (int i = 0; i < cfg.cp_length; ++i)
            out[i] = body[static_cast<std::size_t>(cfg.fft_size - cfg.cp_length + i)];
        for (int i = 0; i < cfg.fft_size; ++i) out[cfg.cp_length + i] = body[static_cast<std::size_t>(i)];
    }
    return sig;
}

/// Strip the cyclic prefix, forward-transform and gather the used bins.
inline CMat ofdm_demodulate(const TimeSignal& sig, const PhyConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(sig.samples.size()) != cfg.n_samples())
        throw config_error("time signal length does not match frame layout");

    CMat cells(static_cast<std::size_t>(cfg.n_subcarriers), static_cast<std::size_t>(cfg.n_symbols));
    std::vector<cplx> body(static_cast<std::size_t>(cfg.fft_size));
    for (int s = 0; s < cfg.n_symbols; ++s) {
        const cplx* in = sig.samples.data() + static_cast<std::size_t>(s) * cfg.samples_per_symbol() +
                         cfg.cp_length;
        body.assign(in, in + cfg.fft_size);
        const std::vector<cplx> spectrum = dft(body, false);
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            const int bin = cfg.fft_bin(k);
            const auto idx = static_cast<std::size_t>(bin < 0 ? bin + cfg.fft_size : bin);
            cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) = spectrum[idx];
        }
    }
    return cells;
}

}  // namespace ofdmce::grid
