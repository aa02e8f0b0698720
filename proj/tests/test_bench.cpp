#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ofdmce/bench.hpp"

using namespace ofdmce;
using namespace ofdmce::bench;
using Catch::Approx;

namespace {

CMat random_cmat(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Lcg64 rng(seed);
    CMat m(rows, cols);
    for (auto& v : m) v = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    return m;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("nmse and mse behave on the canonical cases", "[bench][metrics]") {
    const CMat truth = random_cmat(72, 14, 3);
    CHECK(nmse(truth, truth) == 0.0);

    CMat zero(72, 14);
    CHECK(nmse(zero, truth) == Approx(1.0));

    CMat twice(72, 14);
    for (std::size_t i = 0; i < truth.size(); ++i) twice.data()[i] = 2.0 * truth.data()[i];
    CHECK(nmse(twice, truth) == Approx(1.0));

    CHECK_THROWS_AS(nmse(truth, zero), config_error);

    double direct = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) direct += std::norm(truth.data()[i]);
    CHECK(mse(zero, truth) == Approx(direct / (72.0 * 14.0)));
}

TEST_CASE("bit error rate is the normalized Hamming distance", "[bench][metrics]") {
    std::vector<int> tx(1728, 0);
    std::vector<int> rx = tx;
    CHECK(ber(tx, rx) == 0.0);

    for (auto& b : rx) b = 1;
    CHECK(ber(tx, rx) == 1.0);

    rx = tx;
    rx[100] = 1;
    CHECK(ber(tx, rx) == Approx(1.0 / 1728.0));

    CHECK_THROWS_AS(ber(tx, std::vector<int>(10, 0)), config_error);
}

TEST_CASE("zero-forcing equalization recovers bits under perfect estimates", "[bench][equalize]") {
    grid::PhyConfig cfg;
    const auto bits = detail::random_bits(1, cfg.n_data_bits());
    const auto frame = grid::build_frame(bits, cfg);
    const auto realization = channel::realize_channel(channel::eva_profile(), 97.0, 2, cfg);
    const auto truth = channel::true_channel(realization, cfg);
    const auto y = channel::apply_freq(frame, truth, std::numeric_limits<double>::infinity(), 0);

    const auto eq = equalize_and_demap(y, truth.H, cfg);
    CHECK(eq.bits == bits);
    CHECK(eq.floored == 0);

    // positive real scaling leaves the decisions unchanged
    CMat scaled(72, 14);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled.data()[i] = 2.7 * truth.H.data()[i];
    CHECK(equalize_and_demap(y, scaled, cfg).bits == bits);
}

TEST_CASE("zero estimates fall back to the floor and are counted", "[bench][equalize]") {
    grid::PhyConfig cfg;
    const auto bits = detail::random_bits(5, cfg.n_data_bits());
    const auto frame = grid::build_frame(bits, cfg);
    CMat est(72, 14, cplx(1.0, 0.0));
    est(0, 1) = cplx{};  // one data cell
    const auto eq = equalize_and_demap(frame.cells, est, cfg);
    CHECK(eq.floored == 1);
    CHECK(eq.bits.size() == static_cast<std::size_t>(cfg.n_data_bits()));
}

TEST_CASE("datasets are deterministic and carry distinct frame seeds", "[bench][dataset]") {
    grid::PhyConfig cfg;
    const auto a = gen_dataset(channel::epa_profile(), 97.0, 10, SnrPolicy::train_mix(), 55, cfg);
    const auto b = gen_dataset(channel::epa_profile(), 97.0, 10, SnrPolicy::train_mix(), 55, cfg);
    REQUIRE(a.records.size() == 10);
    CHECK(hash_dataset(a) == hash_dataset(b));

    for (std::size_t i = 0; i < a.records.size(); ++i)
        for (std::size_t j = i + 1; j < a.records.size(); ++j)
            CHECK(a.records[i].seed != a.records[j].seed);
}

TEST_CASE("noiseless datasets store the channel itself at pilot cells", "[bench][dataset]") {
    grid::PhyConfig cfg;
    const auto ds = gen_dataset(channel::etu_profile(), 50.0, 5, SnrPolicy::noiseless(), 66, cfg);
    const auto subs = cfg.pilot_subcarriers();
    for (const auto& rec : ds.records)
        for (std::size_t j = 0; j < subs.size(); ++j)
            for (std::size_t s = 0; s < 2; ++s) {
                const auto truth = rec.true_h(static_cast<std::size_t>(subs[j]),
                                              static_cast<std::size_t>(cfg.pilot_symbol_indices[s]));
                CHECK(std::abs(rec.pilot_ls(j, s) - truth) < 1e-12);
            }
}

TEST_CASE("dataset files round-trip bit-exactly", "[bench][io]") {
    grid::PhyConfig cfg;
    const auto ds = gen_dataset(channel::eva_profile(), 97.0, 7, SnrPolicy::train_mix(), 77, cfg);
    const auto path = temp_file("ofdmce_test_dataset.bin");
    save_dataset(path.string(), ds);
    const auto back = load_dataset(path.string());
    std::filesystem::remove(path);

    REQUIRE(back.records.size() == ds.records.size());
    CHECK(hash_dataset(back) == hash_dataset(ds));
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].profile == ds.records[i].profile);
        CHECK(back.records[i].snr_db == ds.records[i].snr_db);
        CHECK(back.records[i].doppler_hz == ds.records[i].doppler_hz);
        CHECK(back.records[i].seed == ds.records[i].seed);
        for (std::size_t j = 0; j < ds.records[i].true_h.size(); ++j)
            CHECK(back.records[i].true_h.data()[j] == ds.records[i].true_h.data()[j]);
    }
}

TEST_CASE("model files round-trip to an identical forward pass", "[bench][io]") {
    const auto model = dlmodels::build_lsidnn(dlmodels::LsidnnConfig{}, 88);
    const auto path = temp_file("ofdmce_test_model.bin");
    io::save_model(path.string(), model);
    const auto back = io::load_model(path.string());
    std::filesystem::remove(path.string());

    Lcg64 rng(9);
    std::vector<double> x(96);
    for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
    CHECK(neural::forward(model, x) == neural::forward(back, x));

    // the conv topology round-trips too
    const auto conv = dlmodels::build_iresnet(dlmodels::IresnetConfig{}, 89);
    io::save_model(path.string(), conv);
    const auto conv_back = io::load_model(path.string());
    std::filesystem::remove(path.string());
    CHECK(conv_back.topology == neural::Topology::BlockAccumulate);
    CHECK(conv_back.n_blocks == 4);
    std::vector<double> t(2 * 24 * 2);
    for (auto& v : t) v = 2.0 * rng.uniform() - 1.0;
    CHECK(neural::forward(conv, t) == neural::forward(conv_back, t));
}

TEST_CASE("statistics files round-trip bit-exactly", "[bench][io]") {
    grid::PhyConfig cfg;
    const auto stats = learn_lmmse_statistics(channel::epa_profile(), 97.0, 50, 4, cfg);
    const auto path = temp_file("ofdmce_test_stats.bin");
    io::save_statistics(path.string(), stats);
    const auto back = io::load_statistics(path.string());
    std::filesystem::remove(path);

    CHECK(back.n_samples == stats.n_samples);
    for (std::size_t i = 0; i < stats.r_h_hp.size(); ++i)
        CHECK(back.r_h_hp.data()[i] == stats.r_h_hp.data()[i]);
    for (std::size_t i = 0; i < stats.r_hp_hp.size(); ++i)
        CHECK(back.r_hp_hp.data()[i] == stats.r_hp_hp.data()[i]);
}

TEST_CASE("the link runner reports one record per estimator and SNR point", "[bench][run]") {
    grid::PhyConfig cfg;
    RunConfig rc;
    rc.n_frames = 20;
    rc.snr_grid = {0.0, 10.0, 20.0};
    rc.seed = 5;
    const auto recs = run_link(rc, std::vector<Estimator>{make_ls_estimator(cfg), make_perfect_estimator()});
    REQUIRE(recs.size() == 6);
    for (const auto& r : recs) {
        CHECK(r.n_frames == 20);
        CHECK(r.ber >= 0.0);
        CHECK(r.ber <= 1.0);
        CHECK(r.nmse >= 0.0);
    }
}

TEST_CASE("perfect knowledge at infinite SNR yields zero errors", "[bench][run]") {
    RunConfig rc;
    rc.n_frames = 3;
    rc.snr_grid = {std::numeric_limits<double>::infinity()};
    rc.seed = 6;
    const auto recs = run_link(rc, make_perfect_estimator());
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].ber == 0.0);
    CHECK(recs[0].nmse == 0.0);
}

TEST_CASE("interpolated LS is exact on a static single-tap channel", "[bench][run]") {
    grid::PhyConfig cfg;
    RunConfig rc;
    rc.profile = channel::ChannelProfile{"FLAT", {0.0}, {0.0}};
    rc.doppler_hz = 0.0;
    rc.n_frames = 5;
    rc.snr_grid = {std::numeric_limits<double>::infinity()};
    rc.seed = 7;
    const auto recs = run_link(rc, make_ls_estimator(cfg));
    CHECK(recs[0].nmse <= 1e-20);
    CHECK(recs[0].ber == 0.0);
}

TEST_CASE("estimator quality improves monotonically with SNR", "[bench][run][statistics]") {
    grid::PhyConfig cfg;
    const auto stats = learn_lmmse_statistics(channel::epa_profile(), 97.0, 1000, 5, cfg);
    RunConfig rc;
    rc.n_frames = 500;
    rc.snr_grid = {0.0, 5.0, 10.0, 15.0, 20.0};
    rc.seed = 8;
    const auto recs = run_link(rc, std::vector<Estimator>{make_ls_estimator(cfg),
                                                          make_lmmse_estimator(stats, cfg),
                                                          make_perfect_estimator()});
    // records are grouped by SNR point, estimators inside
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t s = 1; s < rc.snr_grid.size(); ++s)
            CHECK(recs[3 * s + e].nmse < recs[3 * (s - 1) + e].nmse);

    // the genie lower-bounds everyone's bit error rate
    for (std::size_t s = 0; s < rc.snr_grid.size(); ++s) {
        CHECK(recs[3 * s + 2].ber <= recs[3 * s + 0].ber);
        CHECK(recs[3 * s + 2].ber <= recs[3 * s + 1].ber);
    }
}

TEST_CASE("dataset-size sweeps are deterministic in structure", "[bench][sweep]") {
    grid::PhyConfig cfg;
    const auto ds = gen_dataset(channel::epa_profile(), 97.0, 12, SnrPolicy::train_mix(), 99, cfg);
    dlmodels::TrainSpec spec;
    spec.epochs = 2;
    spec.batch_size = 4;
    spec.seed = 1;
    RunConfig eval_cfg;
    eval_cfg.n_frames = 5;
    eval_cfg.snr_grid = {10.0};
    eval_cfg.seed = 2;

    const auto results = sweep_dataset_size({3, 3}, spec, ds, dlmodels::LsidnnConfig{}, eval_cfg);
    REQUIRE(results.size() == 2);
    CHECK(results[0].records[0].nmse == results[1].records[0].nmse);
    CHECK(results[0].records[0].ber == results[1].records[0].ber);

    CHECK_THROWS_AS(sweep_dataset_size({13}, spec, ds, dlmodels::LsidnnConfig{}, eval_cfg), config_error);
    CHECK_THROWS_AS(sweep_dataset_size({}, spec, ds, dlmodels::LsidnnConfig{}, eval_cfg), config_error);
}

TEST_CASE("word-length sweeps drive the two-phase selection", "[bench][sweep]") {
    grid::PhyConfig cfg;
    const auto eval = gen_dataset(channel::epa_profile(), 97.0, 60, SnrPolicy::fixed(10.0), 111, cfg);
    auto make = [&cfg](std::optional<fxp::FixedFormat> f) { return make_ls_estimator(cfg, f); };

    const auto result = sweep_wordlength(make, eval, cfg, 32, 0.01);
    CHECK(result.reference_mse > 0.0);
    CHECK(result.rows.size() >= 2);
    CHECK(result.selected.integer_bits >= 1);
    CHECK(result.selected.total_bits > result.selected.integer_bits);

    // within the W phase (fixed selected I), the probed MSE is plateau-like:
    // non-increasing as W grows, up to a small noise allowance
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& row : result.rows) {
        if (row.format.integer_bits != result.selected.integer_bits ||
            row.format.total_bits == 32)
            continue;
        CHECK(row.mse <= previous * 1.05);
        previous = row.mse;
    }

    const auto listed = sweep_wordlength_formats(make, eval, cfg,
                                                 {fxp::FixedFormat{12, 4}, fxp::FixedFormat{12, 3}});
    CHECK(listed.rows.size() == 2);
}

TEST_CASE("metric CSV output is stable and carries the fixed schema", "[bench][csv]") {
    MetricsRecord rec;
    rec.estimator = "ls";
    rec.profile = "EPA";
    rec.doppler_hz = 97.0;
    rec.snr_db = -5.0;
    rec.n_frames = 500;
    rec.nmse = 0.125;
    rec.mse = 0.0625;
    rec.ber = 1.0 / 3.0;
    const auto csv = metrics_csv({rec});
    CHECK(csv == metrics_csv({rec}));
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "estimator,profile,doppler_hz,snr_db,n_frames,nmse,mse,ber");
    CHECK(row == "ls,EPA,97,-5,500,0.125,0.0625,0.3333333333333333");
}

TEST_CASE("doppler sweeps stack one run per shift", "[bench][sweep]") {
    grid::PhyConfig cfg;
    RunConfig rc;
    rc.n_frames = 10;
    rc.snr_grid = {10.0, 20.0};
    rc.seed = 13;
    const std::vector<Estimator> ests{make_ls_estimator(cfg), make_perfect_estimator()};
    const auto recs = sweep_doppler(rc, ests, {0.0, 97.0, 300.0});
    REQUIRE(recs.size() == 3 * 2 * 2);
    CHECK(recs[0].doppler_hz == 0.0);
    CHECK(recs[4].doppler_hz == 97.0);
    CHECK(recs[8].doppler_hz == 300.0);

    const auto again = sweep_doppler(rc, ests, {0.0, 97.0, 300.0});
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].nmse == again[i].nmse);
        CHECK(recs[i].ber == again[i].ber);
    }
    CHECK_THROWS_AS(sweep_doppler(rc, ests, {}), config_error);
}

TEST_CASE("model sidecar metadata lists the training provenance", "[bench][io]") {
    ModelMeta meta;
    meta.architecture = "lsidnn-48";
    meta.profile = "EPA";
    meta.doppler_hz = 97.0;
    meta.dataset_hash = 0xdeadbeef12345678ULL;
    meta.spec.epochs = 50;
    meta.spec.batch_size = 128;
    meta.spec.seed = 7;
    const auto text = format_model_meta(meta);
    CHECK(text.find("architecture=lsidnn-48\n") != std::string::npos);
    CHECK(text.find("profile=EPA\n") != std::string::npos);
    CHECK(text.find("doppler_hz=97\n") != std::string::npos);
    CHECK(text.find("dataset_hash=deadbeef12345678\n") != std::string::npos);
    CHECK(text.find("epochs=50\n") != std::string::npos);
    CHECK(text.find("seed=7\n") != std::string::npos);
}
