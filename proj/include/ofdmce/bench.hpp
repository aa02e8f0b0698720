#pragma once

// End-to-end harness: metrics, dataset generation and persistence, the
// estimator catalogue, the link runner and the parameter sweeps.

#include <cstdint>
#include <limits>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ofdmce/channel.hpp"
#include "ofdmce/classical.hpp"
#include "ofdmce/common.hpp"
#include "ofdmce/dlmodels.hpp"
#include "ofdmce/fxp.hpp"
#include "ofdmce/grid.hpp"
#include "ofdmce/io.hpp"
#include "ofdmce/neural.hpp"

namespace ofdmce::bench {

using channel::ChannelProfile;
using channel::TrueChannel;
using classical::LmmseStatistics;
using classical::PilotEstimate;
using grid::PhyConfig;

// ---------------------------------------------------------------------------
// Metrics

/// Normalized mean squared error, Frobenius.
inline double nmse(const CMat& est, const CMat& truth) {
    if (!est.same_shape(truth)) throw config_error("nmse grids differ in shape");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        err += std::norm(est.data()[i] - truth.data()[i]);
        ref += std::norm(truth.data()[i]);
    }
    if (ref == 0.0) throw config_error("nmse reference grid has zero norm");
    return err / ref;
}

/// Mean squared error per grid cell.
inline double mse(const CMat& est, const CMat& truth) {
    if (!est.same_shape(truth) || est.size() == 0) throw config_error("mse grids differ in shape");
    double err = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) err += std::norm(est.data()[i] - truth.data()[i]);
    return err / static_cast<double>(est.size());
}

inline double ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits) {
    if (tx_bits.size() != rx_bits.size() || tx_bits.empty())
        throw config_error("bit vectors differ in length");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx_bits.size(); ++i)
        if (tx_bits[i] != rx_bits[i]) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

struct EqualizedBits {
    std::vector<int> bits;
    std::size_t floored = 0;  // data cells where the estimate was zero
};

/// Zero-forcing equalization over the data cells followed by hard QPSK
/// demapping; bit order matches frame construction.
inline EqualizedBits equalize_and_demap(const CMat& received, const CMat& h_est,
                                        const PhyConfig& cfg) {
    if (!received.same_shape(h_est)) throw config_error("received grid and estimate differ in shape");
    EqualizedBits out;
    out.bits.reserve(static_cast<std::size_t>(cfg.n_data_bits()));
    for (int s = 0; s < cfg.n_symbols; ++s) {
        if (cfg.is_pilot_symbol(s)) continue;
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            cplx h = h_est(static_cast<std::size_t>(k), static_cast<std::size_t>(s));
            if (h == cplx{}) {
                h = cplx{1e-12, 0.0};
                ++out.floored;
            }
            const cplx x = received(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) / h;
            const auto [b0, b1] = grid::qpsk_demap(x);
            out.bits.push_back(b0);
            out.bits.push_back(b1);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetRecord {
    std::string profile;
    double snr_db = 0.0;
    double doppler_hz = 0.0;
    std::uint64_t seed = 0;
    CMat pilot_ls;  // pilot subcarriers x pilot symbols
    CMat true_h;    // subcarriers x symbols
};

struct Dataset {
    std::vector<DatasetRecord> records;
};

struct SnrPolicy {
    enum class Kind { Fixed, TrainMix, Noiseless };
    Kind kind = Kind::TrainMix;
    double fixed_db = 10.0;
    // Training draws lean on the upper half of the evaluated SNR range; the
    // low-SNR frames are noise-dominated and waste the short training budget.
    std::vector<double> mix = {10.0, 15.0, 20.0, 25.0};

    static SnrPolicy fixed(double db) { return {Kind::Fixed, db, {}}; }
    static SnrPolicy train_mix() { return {}; }
    static SnrPolicy noiseless() { return {Kind::Noiseless, 0.0, {}}; }

    double draw(Lcg64& rng) const {
        switch (kind) {
            case Kind::Fixed: return fixed_db;
            case Kind::Noiseless: return std::numeric_limits<double>::infinity();
            case Kind::TrainMix: break;
        }
        if (mix.empty()) throw config_error("empty SNR mix");
        return mix[static_cast<std::size_t>(rng.bounded(mix.size()))];
    }
};

namespace detail {
// Fixed substream labels hung off each frame seed.
inline constexpr std::uint64_t kBitsStream = 1;
inline constexpr std::uint64_t kChannelStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;
inline constexpr std::uint64_t kSnrStream = 4;

inline std::vector<int> random_bits(std::uint64_t seed, int n) {
    Lcg64 rng(seed);
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (auto& b : bits) b = static_cast<int>(rng.next() >> 63);
    return bits;
}
}  // namespace detail

/// One record per frame: realize the channel, run the pilot front-end at the
/// drawn SNR and store the LS estimates together with the true channel.
inline Dataset gen_dataset(const ChannelProfile& profile, double doppler_hz, int n_frames,
                           const SnrPolicy& policy, std::uint64_t seed, const PhyConfig& cfg) {
    if (n_frames < 1) throw config_error("dataset needs at least one frame");
    const CMat x_pilot = grid::pilot_values(cfg);

    Dataset ds;
    ds.records.reserve(static_cast<std::size_t>(n_frames));
    for (int i = 0; i < n_frames; ++i) {
        const std::uint64_t frame_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
        Lcg64 snr_rng(mix_seed(frame_seed, detail::kSnrStream));
        const double snr_db = policy.draw(snr_rng);

        const auto bits = detail::random_bits(mix_seed(frame_seed, detail::kBitsStream), cfg.n_data_bits());
        const auto frame = grid::build_frame(bits, cfg);
        const auto realization =
            channel::realize_channel(profile, doppler_hz, mix_seed(frame_seed, detail::kChannelStream), cfg);
        const auto truth = channel::true_channel(realization, cfg);
        const CMat y = channel::apply_freq(frame, truth, snr_db, mix_seed(frame_seed, detail::kNoiseStream));

        DatasetRecord rec;
        rec.profile = profile.name;
        rec.snr_db = snr_db;
        rec.doppler_hz = doppler_hz;
        rec.seed = frame_seed;
        rec.pilot_ls = classical::ls_estimate(classical::extract_pilots(y, cfg), x_pilot).values;
        rec.true_h = truth.H;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

inline constexpr char kDatasetMagic[9] = "CEDATA01";

inline void save_dataset(std::ostream& out, const Dataset& ds) {
    if (ds.records.empty()) throw config_error("refusing to write an empty dataset");
    const auto& first = ds.records.front();
    io::write_magic(out, kDatasetMagic);
    io::write_u32(out, 1);  // version
    io::write_u32(out, static_cast<std::uint32_t>(ds.records.size()));
    io::write_u32(out, static_cast<std::uint32_t>(first.pilot_ls.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(first.pilot_ls.cols()));
    io::write_u32(out, static_cast<std::uint32_t>(first.true_h.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(first.true_h.cols()));
    for (const auto& rec : ds.records) {
        if (!rec.pilot_ls.same_shape(first.pilot_ls) || !rec.true_h.same_shape(first.true_h))
            throw config_error("dataset records are not homogeneous");
        char tag[8] = {};
        rec.profile.copy(tag, sizeof tag);
        out.write(tag, sizeof tag);
        io::write_f64(out, rec.snr_db);
        io::write_f64(out, rec.doppler_hz);
        io::write_u64(out, rec.seed);
        for (std::size_t s = 0; s < rec.pilot_ls.cols(); ++s)
            for (std::size_t k = 0; k < rec.pilot_ls.rows(); ++k) {
                io::write_f64(out, rec.pilot_ls(k, s).real());
                io::write_f64(out, rec.pilot_ls(k, s).imag());
            }
        for (std::size_t s = 0; s < rec.true_h.cols(); ++s)
            for (std::size_t k = 0; k < rec.true_h.rows(); ++k) {
                io::write_f64(out, rec.true_h(k, s).real());
                io::write_f64(out, rec.true_h(k, s).imag());
            }
    }
}

inline Dataset load_dataset(std::istream& in) {
    io::expect_magic(in, kDatasetMagic);
    if (io::read_u32(in) != 1) throw config_error("unsupported dataset version");
    const std::uint32_t n = io::read_u32(in);
    const std::uint32_t np = io::read_u32(in);
    const std::uint32_t nps = io::read_u32(in);
    const std::uint32_t nsc = io::read_u32(in);
    const std::uint32_t nsym = io::read_u32(in);

    Dataset ds;
    ds.records.resize(n);
    for (auto& rec : ds.records) {
        char tag[9] = {};
        in.read(tag, 8);
        if (!in) throw config_error("unexpected end of dataset file");
        rec.profile = tag;
        rec.snr_db = io::read_f64(in);
        rec.doppler_hz = io::read_f64(in);
        rec.seed = io::read_u64(in);
        rec.pilot_ls = CMat(np, nps);
        for (std::size_t s = 0; s < nps; ++s)
            for (std::size_t k = 0; k < np; ++k) {
                const double re = io::read_f64(in);
                const double im = io::read_f64(in);
                rec.pilot_ls(k, s) = {re, im};
            }
        rec.true_h = CMat(nsc, nsym);
        for (std::size_t s = 0; s < nsym; ++s)
            for (std::size_t k = 0; k < nsc; ++k) {
                const double re = io::read_f64(in);
                const double im = io::read_f64(in);
                rec.true_h(k, s) = {re, im};
            }
    }
    return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    save_dataset(out, ds);
    if (!out) throw config_error("failed writing dataset file: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open dataset file: " + path);
    return load_dataset(in);
}

/// Order-sensitive fingerprint of a dataset, for model sidecar metadata.
inline std::uint64_t hash_dataset(const Dataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_f64 = [&h](double v) { h = io::fnv1a(&v, sizeof v, h); };
    for (const auto& rec : ds.records) {
        h = io::fnv1a(rec.profile.data(), rec.profile.size(), h);
        mix_f64(rec.snr_db);
        mix_f64(rec.doppler_hz);
        h = io::fnv1a(&rec.seed, sizeof rec.seed, h);
        for (const auto& v : rec.pilot_ls) {
            mix_f64(v.real());
            mix_f64(v.imag());
        }
    }
    return h;
}

/// Dense training view: flattened LS input, flattened true grid target.
inline std::vector<dlmodels::TrainSample> dense_samples(const Dataset& ds) {
    std::vector<dlmodels::TrainSample> out;
    out.reserve(ds.records.size());
    for (const auto& rec : ds.records)
        out.push_back({dlmodels::flatten_complex(rec.pilot_ls), dlmodels::flatten_complex(rec.true_h)});
    return out;
}

/// Two-channel tensor training view for the convolutional models.
inline std::vector<dlmodels::TrainSample> tensor_samples(const Dataset& ds) {
    std::vector<dlmodels::TrainSample> out;
    out.reserve(ds.records.size());
    for (const auto& rec : ds.records)
        out.push_back({dlmodels::to_tensor(rec.pilot_ls), dlmodels::to_tensor(rec.true_h)});
    return out;
}

/// Desk-scale training protocol: the full-scale optimizer settings on a
/// reduced frame and epoch budget, with a smaller batch and tail averaging
/// so the short run still converges. TrainSpec's defaults are the
/// full-scale protocol.
inline dlmodels::TrainSpec desk_train_spec(std::uint64_t seed = 7) {
    dlmodels::TrainSpec spec;
    spec.epochs = 50;
    spec.batch_size = 128;
    spec.tail_average_epochs = 10;
    spec.seed = seed;
    return spec;
}

/// Correlation statistics from freshly drawn channel realizations.
inline LmmseStatistics learn_lmmse_statistics(const ChannelProfile& profile, double doppler_hz,
                                              int n_realizations, std::uint64_t seed,
                                              const PhyConfig& cfg) {
    if (n_realizations < 1) throw config_error("statistics need at least one realization");
    std::vector<TrueChannel> channels;
    channels.reserve(static_cast<std::size_t>(n_realizations));
    for (int i = 0; i < n_realizations; ++i)
        channels.push_back(channel::true_channel(
            channel::realize_channel(profile, doppler_hz, mix_seed(seed, static_cast<std::uint64_t>(i)), cfg),
            cfg));
    return classical::learn_statistics(channels, cfg);
}

inline LmmseStatistics statistics_from_dataset(const Dataset& ds, const PhyConfig& cfg) {
    std::vector<TrueChannel> channels;
    channels.reserve(ds.records.size());
    for (const auto& rec : ds.records) channels.push_back(TrueChannel{rec.true_h});
    return classical::learn_statistics(channels, cfg);
}

// ---------------------------------------------------------------------------
// Estimators

struct EstimatorInput {
    const CMat& y_pilot;
    const CMat& x_pilot;
    const PilotEstimate& pilot_ls;
    double snr_db;
    const TrueChannel& truth;
};

struct Estimator {
    std::string name;
    std::function<CMat(const EstimatorInput&)> estimate;
};

/// LS front-end with every input, coefficient and produced value rounded to
/// the fixed-point format; accumulations stay wide.
inline PilotEstimate ls_estimate_fixed(const CMat& y_pilot, const CMat& x_pilot,
                                       const fxp::FixedFormat& fmt) {
    if (!y_pilot.same_shape(x_pilot)) throw config_error("pilot grids differ in shape");
    PilotEstimate est;
    est.values = CMat(y_pilot.rows(), y_pilot.cols());
    for (std::size_t s = 0; s < y_pilot.cols(); ++s)
        for (std::size_t k = 0; k < y_pilot.rows(); ++k) {
            const double a = fxp::quantize(y_pilot(k, s).real(), fmt);
            const double b = fxp::quantize(y_pilot(k, s).imag(), fmt);
            const double c = fxp::quantize(x_pilot(k, s).real(), fmt);
            const double d = fxp::quantize(x_pilot(k, s).imag(), fmt);
            const double den = c * c + d * d;
            if (den == 0.0) throw numerical_error("zero pilot value in LS estimate");
            est.values(k, s) = {fxp::quantize((a * c + b * d) / den, fmt),
                                fxp::quantize((b * c - a * d) / den, fmt)};
        }
    return est;
}

inline CMat bilinear_interpolate_fixed(const PilotEstimate& p, const PhyConfig& cfg,
                                       const fxp::FixedFormat& fmt) {
    auto q = [&fmt](cplx v) { return fxp::quantize(v, fmt); };
    const auto col_taps = interp_axis_taps(cfg.pilot_symbol_indices, cfg.n_symbols);
    const auto row_taps = interp_axis_taps(cfg.pilot_subcarriers(), cfg.n_subcarriers);

    CMat wide(p.values.rows(), static_cast<std::size_t>(cfg.n_symbols));
    for (std::size_t r = 0; r < wide.rows(); ++r)
        for (std::size_t c = 0; c < wide.cols(); ++c) {
            const auto& t = col_taps[c];
            wide(r, c) = q(p.values(r, t.lo) * fxp::quantize(t.w_lo, fmt) +
                           p.values(r, t.hi) * fxp::quantize(t.w_hi, fmt));
        }
    CMat full(static_cast<std::size_t>(cfg.n_subcarriers), wide.cols());
    for (std::size_t r = 0; r < full.rows(); ++r) {
        const auto& t = row_taps[r];
        for (std::size_t c = 0; c < full.cols(); ++c)
            full(r, c) = q(wide(t.lo, c) * fxp::quantize(t.w_lo, fmt) +
                           wide(t.hi, c) * fxp::quantize(t.w_hi, fmt));
    }
    return full;
}

inline Estimator make_ls_estimator(const PhyConfig& cfg,
                                   std::optional<fxp::FixedFormat> fmt = std::nullopt) {
    Estimator e;
    e.name = "ls";
    e.estimate = [cfg, fmt](const EstimatorInput& in) {
        if (!fmt) return classical::bilinear_interpolate(in.pilot_ls, cfg);
        const auto p = ls_estimate_fixed(in.y_pilot, in.x_pilot, *fmt);
        return bilinear_interpolate_fixed(p, cfg, *fmt);
    };
    return e;
}

inline Estimator make_lmmse_estimator(LmmseStatistics stats, const PhyConfig& cfg) {
    Estimator e;
    e.name = "lmmse";
    auto shared = std::make_shared<const LmmseStatistics>(std::move(stats));
    e.estimate = [shared, cfg](const EstimatorInput& in) {
        return classical::lmmse_estimate(in.pilot_ls, *shared, in.snr_db, cfg);
    };
    return e;
}

inline Estimator make_lsidnn_estimator(neural::NetModel model,
                                       std::optional<fxp::FixedFormat> fmt = std::nullopt) {
    Estimator e;
    e.name = "lsidnn";
    if (fmt) model = fxp::quantize_model(model, *fmt);
    auto shared = std::make_shared<const neural::NetModel>(std::move(model));
    if (fmt) {
        auto hook = std::make_shared<neural::ValueHook>(fxp::make_hook(*fmt));
        e.estimate = [shared, hook](const EstimatorInput& in) {
            return dlmodels::lsidnn_estimate(*shared, in.pilot_ls, hook.get());
        };
    } else {
        e.estimate = [shared](const EstimatorInput& in) {
            return dlmodels::lsidnn_estimate(*shared, in.pilot_ls);
        };
    }
    return e;
}

inline Estimator make_iresnet_estimator(neural::NetModel model,
                                        std::optional<fxp::FixedFormat> fmt = std::nullopt) {
    Estimator e;
    e.name = "iresnet";
    if (fmt) model = fxp::quantize_model(model, *fmt);
    auto shared = std::make_shared<const neural::NetModel>(std::move(model));
    if (fmt) {
        auto hook = std::make_shared<neural::ValueHook>(fxp::make_hook(*fmt));
        e.estimate = [shared, hook](const EstimatorInput& in) {
            return dlmodels::iresnet_estimate(*shared, in.pilot_ls, hook.get());
        };
    } else {
        e.estimate = [shared](const EstimatorInput& in) {
            return dlmodels::iresnet_estimate(*shared, in.pilot_ls);
        };
    }
    return e;
}

/// Genie estimator; lower-bounds every practical scheme.
inline Estimator make_perfect_estimator() {
    return {"perfect", [](const EstimatorInput& in) { return in.truth.H; }};
}

// ---------------------------------------------------------------------------
// Link runner

struct RunConfig {
    ChannelProfile profile = channel::epa_profile();
    double doppler_hz = 97.0;
    std::vector<double> snr_grid = {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    int n_frames = 500;
    std::uint64_t seed = 1;
    PhyConfig phy;
};

struct MetricsRecord {
    std::string estimator;
    std::string profile;
    double doppler_hz = 0.0;
    double snr_db = 0.0;
    int n_frames = 0;
    double nmse = 0.0;
    double mse = 0.0;
    double ber = 0.0;
};

/// Average NMSE/MSE/BER per SNR point over fresh frames; all estimators see
/// the same frames, and per-frame seeds derive from (run seed, frame index).
inline std::vector<MetricsRecord> run_link(const RunConfig& cfg,
                                           const std::vector<Estimator>& estimators) {
    if (cfg.snr_grid.empty()) throw config_error("snr grid must not be empty");
    if (cfg.n_frames < 1) throw config_error("run needs at least one frame");
    cfg.phy.validate();
    const CMat x_pilot = grid::pilot_values(cfg.phy);

    std::vector<MetricsRecord> records;
    std::uint64_t floored_cells = 0;
    for (std::size_t si = 0; si < cfg.snr_grid.size(); ++si) {
        const double snr_db = cfg.snr_grid[si];
        std::vector<double> nmse_sum(estimators.size(), 0.0), mse_sum(estimators.size(), 0.0);
        std::vector<std::uint64_t> bit_errors(estimators.size(), 0);
        std::uint64_t total_bits = 0;

        const std::uint64_t point_seed = mix_seed(cfg.seed, si);
        for (int f = 0; f < cfg.n_frames; ++f) {
            const std::uint64_t frame_seed = mix_seed(point_seed, static_cast<std::uint64_t>(f));
            const auto bits =
                detail::random_bits(mix_seed(frame_seed, detail::kBitsStream), cfg.phy.n_data_bits());
            const auto frame = grid::build_frame(bits, cfg.phy);
            const auto realization = channel::realize_channel(
                cfg.profile, cfg.doppler_hz, mix_seed(frame_seed, detail::kChannelStream), cfg.phy);
            const auto truth = channel::true_channel(realization, cfg.phy);
            const CMat y = channel::apply_freq(frame, truth, snr_db,
                                               mix_seed(frame_seed, detail::kNoiseStream));
            const CMat y_pilot = classical::extract_pilots(y, cfg.phy);
            const PilotEstimate pilot_ls = classical::ls_estimate(y_pilot, x_pilot);
            total_bits += static_cast<std::uint64_t>(bits.size());

            const EstimatorInput input{y_pilot, x_pilot, pilot_ls, snr_db, truth};
            for (std::size_t e = 0; e < estimators.size(); ++e) {
                const CMat est = estimators[e].estimate(input);
                nmse_sum[e] += nmse(est, truth.H);
                mse_sum[e] += mse(est, truth.H);
                const auto eq = equalize_and_demap(y, est, cfg.phy);
                floored_cells += eq.floored;
                for (std::size_t b = 0; b < bits.size(); ++b)
                    if (eq.bits[b] != bits[b]) ++bit_errors[e];
            }
        }

        for (std::size_t e = 0; e < estimators.size(); ++e) {
            MetricsRecord rec;
            rec.estimator = estimators[e].name;
            rec.profile = cfg.profile.name;
            rec.doppler_hz = cfg.doppler_hz;
            rec.snr_db = snr_db;
            rec.n_frames = cfg.n_frames;
            rec.nmse = nmse_sum[e] / cfg.n_frames;
            rec.mse = mse_sum[e] / cfg.n_frames;
            rec.ber = static_cast<double>(bit_errors[e]) / static_cast<double>(total_bits);
            records.push_back(std::move(rec));
        }
    }
    if (floored_cells > 0)
        std::cerr << "note: " << floored_cells << " data cells hit the zero-estimate equalizer floor\n";
    return records;
}

inline std::vector<MetricsRecord> run_link(const RunConfig& cfg, const Estimator& estimator) {
    return run_link(cfg, std::vector<Estimator>{estimator});
}

// ---------------------------------------------------------------------------
// Sweeps

inline std::vector<MetricsRecord> sweep_doppler(RunConfig cfg,
                                                const std::vector<Estimator>& estimators,
                                                const std::vector<double>& doppler_list) {
    if (doppler_list.empty()) throw config_error("doppler list must not be empty");
    std::vector<MetricsRecord> all;
    for (double d : doppler_list) {
        cfg.doppler_hz = d;
        auto records = run_link(cfg, estimators);
        all.insert(all.end(), records.begin(), records.end());
    }
    return all;
}

struct DatasetSizeResult {
    int size = 0;
    std::vector<MetricsRecord> records;
};

/// Train one dense estimator per requested size on prefixes of a fixed
/// shuffle of the training dataset, then evaluate all of them on common
/// fresh frames.
inline std::vector<DatasetSizeResult> sweep_dataset_size(const std::vector<int>& sizes,
                                                         const dlmodels::TrainSpec& base_spec,
                                                         const Dataset& train_data,
                                                         const dlmodels::LsidnnConfig& arch,
                                                         const RunConfig& eval_cfg) {
    if (sizes.empty()) throw config_error("size list must not be empty");
    for (int s : sizes) {
        if (s < 1) throw config_error("dataset sizes must be positive");
        if (static_cast<std::size_t>(s) > train_data.records.size())
            throw config_error("requested size exceeds the training dataset");
    }

    std::vector<std::size_t> order(train_data.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Lcg64 rng(mix_seed(base_spec.seed, 0xD5u));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.bounded(i))]);

    std::vector<DatasetSizeResult> results;
    for (int size : sizes) {
        Dataset subset;
        subset.records.reserve(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) subset.records.push_back(train_data.records[order[static_cast<std::size_t>(i)]]);

        auto trained = dlmodels::train(dlmodels::build_lsidnn(arch, base_spec.seed),
                                       dense_samples(subset), base_spec);
        auto est = make_lsidnn_estimator(std::move(trained.model));
        est.name = "lsidnn-" + std::to_string(size);
        results.push_back({size, run_link(eval_cfg, est)});
    }
    return results;
}

struct WordlengthRow {
    fxp::FixedFormat format;
    double mse = 0.0;
};

struct WordlengthResult {
    std::vector<WordlengthRow> rows;
    fxp::FixedFormat selected;
    double reference_mse = 0.0;
};

/// Average per-cell MSE of a format-parameterized estimator over a fixed
/// evaluation dataset. An empty format runs the floating-point path.
inline double dataset_mse(const std::function<Estimator(std::optional<fxp::FixedFormat>)>& make,
                          const std::optional<fxp::FixedFormat>& fmt, const Dataset& eval,
                          const PhyConfig& cfg) {
    if (eval.records.empty()) throw config_error("evaluation dataset is empty");
    const Estimator est = make(fmt);
    const CMat x_pilot = grid::pilot_values(cfg);
    double total = 0.0;
    for (const auto& rec : eval.records) {
        // Reconstruct the received pilots from the stored LS estimates.
        CMat y_pilot(rec.pilot_ls.rows(), rec.pilot_ls.cols());
        for (std::size_t i = 0; i < y_pilot.size(); ++i)
            y_pilot.data()[i] = rec.pilot_ls.data()[i] * x_pilot.data()[i];
        const PilotEstimate p{rec.pilot_ls};
        const TrueChannel truth{rec.true_h};
        const CMat h = est.estimate({y_pilot, x_pilot, p, rec.snr_db, truth});
        total += mse(h, rec.true_h);
    }
    return total / static_cast<double>(eval.records.size());
}

/// Two-phase word-length search: minimum integer bits at a wide probe word,
/// then the minimum total word length. Every probed format is recorded.
inline WordlengthResult sweep_wordlength(
    const std::function<Estimator(std::optional<fxp::FixedFormat>)>& make, const Dataset& eval,
    const PhyConfig& cfg, int probe_bits = 32, double tol = 0.01) {
    WordlengthResult result;
    result.reference_mse = dataset_mse(make, std::nullopt, eval, cfg);
    fxp::MseEvaluator evaluator = [&](const fxp::FixedFormat& f) {
        const double m = dataset_mse(make, f, eval, cfg);
        result.rows.push_back({f, m});
        return m;
    };
    const int i_bits = fxp::select_integer_bits(evaluator, probe_bits, result.reference_mse, tol);
    const int w_bits = fxp::select_word_length(evaluator, i_bits, result.reference_mse, tol);
    result.selected = {w_bits, i_bits};
    return result;
}

/// Evaluate an explicit list of formats instead of the automatic search.
inline WordlengthResult sweep_wordlength_formats(
    const std::function<Estimator(std::optional<fxp::FixedFormat>)>& make, const Dataset& eval,
    const PhyConfig& cfg, const std::vector<fxp::FixedFormat>& formats) {
    if (formats.empty()) throw config_error("format list must not be empty");
    WordlengthResult result;
    result.reference_mse = dataset_mse(make, std::nullopt, eval, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : formats) {
        const double m = dataset_mse(make, f, eval, cfg);
        result.rows.push_back({f, m});
        if (m < best) {
            best = m;
            result.selected = f;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string metrics_csv(const std::vector<MetricsRecord>& records) {
    std::string out = "estimator,profile,doppler_hz,snr_db,n_frames,nmse,mse,ber\n";
    for (const auto& r : records) {
        out += r.estimator;
        out += ',';
        out += r.profile;
        out += ',';
        out += io::format_double(r.doppler_hz);
        out += ',';
        out += io::format_double(r.snr_db);
        out += ',';
        out += std::to_string(r.n_frames);
        out += ',';
        out += io::format_double(r.nmse);
        out += ',';
        out += io::format_double(r.mse);
        out += ',';
        out += io::format_double(r.ber);
        out += '\n';
    }
    return out;
}

inline std::string wordlength_csv(const std::string& estimator, const std::string& profile,
                                  const WordlengthResult& result) {
    std::string out = "estimator,profile,total_bits,integer_bits,mse\n";
    out += estimator + "," + profile + ",reference,reference," + io::format_double(result.reference_mse) + "\n";
    for (const auto& row : result.rows) {
        out += estimator;
        out += ',';
        out += profile;
        out += ',';
        out += std::to_string(row.format.total_bits);
        out += ',';
        out += std::to_string(row.format.integer_bits);
        out += ',';
        out += io::format_double(row.mse);
        out += '\n';
    }
    return out;
}

/// Sidecar text record stored next to trained model files.
struct ModelMeta {
    std::string architecture;
    std::string profile;
    double doppler_hz = 0.0;
    std::uint64_t dataset_hash = 0;
    dlmodels::TrainSpec spec;
};

inline std::string format_model_meta(const ModelMeta& meta) {
    std::string out;
    out += "architecture=" + meta.architecture + "\n";
    out += "profile=" + meta.profile + "\n";
    out += "doppler_hz=" + io::format_double(meta.doppler_hz) + "\n";
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(meta.dataset_hash));
    out += std::string("dataset_hash=") + hash + "\n";
    out += "epochs=" + std::to_string(meta.spec.epochs) + "\n";
    out += "batch_size=" + std::to_string(meta.spec.batch_size) + "\n";
    out += "learning_rate=" + io::format_double(meta.spec.learning_rate) + "\n";
    out += "train_fraction=" + io::format_double(meta.spec.train_fraction) + "\n";
    out += "seed=" + std::to_string(meta.spec.seed) + "\n";
    return out;
}

}  // namespace ofdmce::bench
