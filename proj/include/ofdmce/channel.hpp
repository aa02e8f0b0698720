#pragma once

// 3GPP tapped-delay-line Rayleigh fading (EPA/EVA/ETU), Jakes Doppler via
// sum-of-sinusoids, AWGN and exact ground-truth channel matrices.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "ofdmce/common.hpp"
#include "ofdmce/grid.hpp"

namespace ofdmce::channel {

using grid::PhyConfig;
using grid::ResourceGrid;
using grid::TimeSignal;

struct ChannelProfile {
    std::string name;
    std::vector<double> path_delays_ns;
    std::vector<double> path_gains_db;
};

inline const ChannelProfile& epa_profile() {
    static const ChannelProfile p{"EPA",
                                  {0, 30, 70, 90, 110, 190, 410},
                                  {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8}};
    return p;
}

inline const ChannelProfile& eva_profile() {
    static const ChannelProfile p{"EVA",
                                  {0, 30, 150, 310, 370, 710, 1090, 1730, 2510},
                                  {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9}};
    return p;
}

inline const ChannelProfile& etu_profile() {
    static const ChannelProfile p{"ETU",
                                  {0, 50, 120, 200, 230, 500, 1600, 2300, 5000},
                                  {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0}};
    return p;
}

inline ChannelProfile profile_by_name(std::string name) {
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "epa") return epa_profile();
    if (name == "eva") return eva_profile();
    if (name == "etu") return etu_profile();
    throw config_error("unknown channel profile: " + name);
}

/// Plain-text profile: `name`, `delays_ns` and `gains_db` lines, `#` comments.
inline ChannelProfile parse_profile(std::istream& in) {
    ChannelProfile p;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "name") {
            ls >> p.name;
        } else if (key == "delays_ns") {
            double v;
            while (ls >> v) p.path_delays_ns.push_back(v);
        } else if (key == "gains_db") {
            double v;
            while (ls >> v) p.path_gains_db.push_back(v);
        } else {
            throw config_error("unknown profile key: " + key);
        }
    }
    if (p.name.empty() || p.path_delays_ns.empty()) throw config_error("incomplete channel profile");
    if (p.path_delays_ns.size() != p.path_gains_db.size())
        throw config_error("profile delay and gain lists differ in length");
    return p;
}

inline ChannelProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open channel profile: " + path);
    return parse_profile(in);
}

/// Per-symbol complex tap gains of one frame. Total expected tap power is
/// normalized to one.
struct ChannelRealization {
    std::vector<int> tap_sample_delays;
    CMat tap_gains;  // n_taps x n_symbols
    double doppler_hz = 0.0;
    std::uint64_t seed = 0;
};

/// Exact frequency response per subcarrier and symbol.
struct TrueChannel {
    CMat H;
};

namespace detail {
// Number of equally spaced arrival angles in the sum-of-sinusoids fading
// generator. Large enough that each tap is Gaussian to good approximation.
inline constexpr int kNumSinusoids = 64;
}  // namespace detail

/// Draw one frame of the fading process: tap delays rounded to the sample
/// grid, each tap an independent sum-of-sinusoids Jakes process sampled once
/// per OFDM symbol.
inline ChannelRealization realize_channel(const ChannelProfile& profile, double doppler_hz,
                                          std::uint64_t seed, const PhyConfig& cfg) {
    if (profile.path_delays_ns.empty()) throw config_error("channel profile has no paths");
    if (!(doppler_hz >= 0.0)) throw config_error("doppler must be non-negative");

    const std::size_t n_taps = profile.path_delays_ns.size();
    ChannelRealization r;
    r.doppler_hz = doppler_hz;
    r.seed = seed;
    r.tap_sample_delays.resize(n_taps);
    r.tap_gains = CMat(n_taps, static_cast<std::size_t>(cfg.n_symbols));

    const double fs = cfg.sample_rate_hz();
    double total_power = 0.0;
    for (double g : profile.path_gains_db) total_power += std::pow(10.0, g / 10.0);

    const double t_sym = cfg.symbol_duration_s();
    constexpr int m_sin = detail::kNumSinusoids;
    for (std::size_t l = 0; l < n_taps; ++l) {
        r.tap_sample_delays[l] =
            static_cast<int>(std::lround(profile.path_delays_ns[l] * 1e-9 * fs));

        const double power = std::pow(10.0, profile.path_gains_db[l] / 10.0) / total_power;
        const double amp = std::sqrt(power / m_sin);

        Lcg64 rng(mix_seed(seed, l));
        std::vector<double> phase(m_sin), rate(m_sin);
        for (int m = 0; m < m_sin; ++m) {
            const double angle = 2.0 * kPi * (m + 0.5) / m_sin;
            rate[static_cast<std::size_t>(m)] = 2.0 * kPi * doppler_hz * std::cos(angle);
            phase[static_cast<std::size_t>(m)] = 2.0 * kPi * rng.uniform();
        }
        for (int s = 0; s < cfg.n_symbols; ++s) {
            const double t = s * t_sym;
            cplx sum{};
            for (int m = 0; m < m_sin; ++m) {
                const double arg = rate[static_cast<std::size_t>(m)] * t + phase[static_cast<std::size_t>(m)];
                sum += cplx(std::cos(arg), std::sin(arg));
            }
            r.tap_gains(l, static_cast<std::size_t>(s)) = amp * sum;
        }
    }
    return r;
}

/// H[k][s] = sum_l g_l[s] * exp(-j 2 pi bin(k) d_l / N).
inline TrueChannel true_channel(const ChannelRealization& r, const PhyConfig& cfg) {
    TrueChannel tc;
    tc.H = CMat(static_cast<std::size_t>(cfg.n_subcarriers), static_cast<std::size_t>(cfg.n_symbols));
    for (int k = 0; k < cfg.n_subcarriers; ++k) {
        const double bin = cfg.fft_bin(k);
        for (int s = 0; s < cfg.n_symbols; ++s) {
            cplx h{};
            for (std::size_t l = 0; l < r.tap_sample_delays.size(); ++l) {
                const double arg = -2.0 * kPi * bin * r.tap_sample_delays[l] / cfg.fft_size;
                h += r.tap_gains(l, static_cast<std::size_t>(s)) * cplx(std::cos(arg), std::sin(arg));
            }
            tc.H(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) = h;
        }
    }
    return tc;
}

/// Noise variance per cell for an Es/N0 given in dB; +inf disables noise.
inline double noise_variance(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    if (!std::isfinite(snr_db)) throw config_error("snr must be finite or +inf");
    return std::pow(10.0, -snr_db / 10.0);
}

/// Frequency-domain channel: Y = H .* X + Z with circularly-symmetric
/// complex Gaussian Z of per-cell variance 10^(-snr/10).
inline CMat apply_freq(const ResourceGrid& frame, const TrueChannel& tc, double snr_db,
                       std::uint64_t noise_seed) {
    if (!frame.cells.same_shape(tc.H)) throw config_error("grid and channel shapes differ");
    const double sigma2 = noise_variance(snr_db);
    const double sigma = std::sqrt(sigma2);

    CMat y(frame.cells.rows(), frame.cells.cols());
    Lcg64 rng(noise_seed);
    for (std::size_t s = 0; s < y.cols(); ++s)
        for (std::size_t k = 0; k < y.rows(); ++k) {
            cplx v = tc.H(k, s) * frame.cells(k, s);
            if (sigma2 > 0.0) v += sigma * rng.cnormal();
            y(k, s) = v;
        }
    return y;
}

/// Time-domain channel: per-symbol convolution with the tap filter (gains
/// held constant within a symbol) plus AWGN at matching per-sample variance.
/// Requires every tap to fall inside the cyclic prefix.
inline TimeSignal apply_time(const TimeSignal& sig, const ChannelRealization& r, double snr_db,
                             std::uint64_t noise_seed, const PhyConfig& cfg) {
    if (static_cast<int>(sig.samples.size()) != cfg.n_samples())
        throw config_error("time signal length does not match frame layout");
    for (int d : r.tap_sample_delays)
        if (d >= cfg.cp_length)
            throw config_error("tap delay of " + std::to_string(d) +
                               " samples reaches beyond the cyclic prefix");

    const double sigma2 = noise_variance(snr_db);
    const double sigma = std::sqrt(sigma2);
    const int sps = cfg.samples_per_symbol();

    TimeSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.assign(sig.samples.size(), cplx{});
    for (int i = 0; i < static_cast<int>(sig.samples.size()); ++i) {
        const auto s = static_cast<std::size_t>(i / sps);
        cplx acc{};
        for (std::size_t l = 0; l < r.tap_sample_delays.size(); ++l) {
            const int j = i - r.tap_sample_delays[l];
            if (j >= 0) acc += r.tap_gains(l, s) * sig.samples[static_cast<std::size_t>(j)];
        }
        out.samples[static_cast<std::size_t>(i)] = acc;
    }
    if (sigma2 > 0.0) {
        Lcg64 rng(noise_seed);
        for (auto& v : out.samples) v += sigma * rng.cnormal();
    }
    return out;
}

}  // namespace ofdmce::channel
