#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "ofdmce/grid.hpp"

using namespace ofdmce;
using namespace ofdmce::grid;
using Catch::Approx;

namespace {

// O(N^2) reference transform, unitary scaling, independent of the fast path.
std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = sign * 2.0 * kPi * static_cast<double>(k * i % n) / static_cast<double>(n);
            acc += x[i] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    return v;
}

std::vector<int> random_bits(std::size_t n, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<int> bits(n);
    for (auto& b : bits) b = static_cast<int>(rng.next() >> 63);
    return bits;
}

}  // namespace

TEST_CASE("qpsk mapping hits the Gray-labeled unit-energy constellation", "[grid]") {
    const double a = std::sqrt(0.5);
    CHECK(qpsk_map(0, 0) == cplx(a, a));
    CHECK(qpsk_map(0, 1) == cplx(a, -a));
    CHECK(qpsk_map(1, 0) == cplx(-a, a));
    CHECK(qpsk_map(1, 1) == cplx(-a, -a));
    for (int b0 : {0, 1})
        for (int b1 : {0, 1}) CHECK(std::abs(qpsk_map(b0, b1)) == Approx(1.0).margin(1e-15));
}

TEST_CASE("qpsk demapping is nearest-quadrant with ties toward bit 0", "[grid]") {
    CHECK(qpsk_demap({0.9, 0.8}) == std::pair{0, 0});
    CHECK(qpsk_demap({-0.1, 2.0}) == std::pair{1, 0});
    CHECK(qpsk_demap({0.0, -0.3}) == std::pair{0, 1});
    for (int b0 : {0, 1})
        for (int b1 : {0, 1}) CHECK(qpsk_demap(qpsk_map(b0, b1)) == std::pair{b0, b1});
}

TEST_CASE("frame construction places pilots, nulls and data cells", "[grid]") {
    PhyConfig cfg;
    const auto bits = random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 3);
    const auto frame = build_frame(bits, cfg);

    int pilots = 0, data = 0, nulls = 0;
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            switch (frame.kind(static_cast<std::size_t>(k), static_cast<std::size_t>(s))) {
                case CellKind::Pilot:
                    ++pilots;
                    CHECK((s == 0 || s == 6));
                    CHECK(k % 3 == 0);
                    break;
                case CellKind::Data:
                    ++data;
                    break;
                case CellKind::Null:
                    ++nulls;
                    CHECK(frame.cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) == cplx{});
                    break;
            }
        }
    CHECK(pilots == 48);
    CHECK(data == 864);
    CHECK(nulls == 96);
}

TEST_CASE("all-zero data bits map every data cell to the first corner", "[grid]") {
    PhyConfig cfg;
    const auto frame = build_frame(std::vector<int>(static_cast<std::size_t>(cfg.n_data_bits()), 0), cfg);
    const double a = std::sqrt(0.5);
    for (std::size_t i = 0; i < frame.cells.size(); ++i)
        if (frame.kind.data()[i] == CellKind::Data) CHECK(frame.cells.data()[i] == cplx(a, a));
}

TEST_CASE("frame construction rejects a wrong bit count", "[grid]") {
    PhyConfig cfg;
    CHECK_THROWS_AS(build_frame(std::vector<int>(100, 0), cfg), config_error);
}

TEST_CASE("pilot cells are identical across frames for a fixed seed", "[grid]") {
    PhyConfig cfg;
    const auto a = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 1), cfg);
    const auto b = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 2), cfg);
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        if (a.kind.data()[i] == CellKind::Pilot) CHECK(a.cells.data()[i] == b.cells.data()[i]);

    const auto p1 = pilot_values(cfg);
    const auto p2 = pilot_values(cfg);
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1.data()[i] == p2.data()[i]);
}

TEST_CASE("impulse transforms to a flat spectrum", "[grid][dft]") {
    std::vector<cplx> x(128);
    x[0] = 1.0;
    const auto y = dft(x, false);
    for (const auto& v : y) {
        CHECK(v.real() == Approx(1.0 / std::sqrt(128.0)).margin(1e-14));
        CHECK(v.imag() == Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("inverse transform undoes the forward transform", "[grid][dft]") {
    const auto x = random_vector(128, 17);
    const auto back = dft(dft(x, false), true);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
}

TEST_CASE("fast transform matches the direct N^2 evaluation", "[grid][dft]") {
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        const auto x = random_vector(128, seed);
        const auto fast = dft(x, false);
        const auto slow = naive_dft(x, false);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
    }
}

TEST_CASE("transform preserves the l2 norm", "[grid][dft]") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const std::size_t n = std::size_t{1} << (3 + seed % 5);
        const auto x = random_vector(n, seed);
        const auto y = dft(x, seed % 2 == 0);
        double nx = 0.0, ny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nx += std::norm(x[i]);
            ny += std::norm(y[i]);
        }
        CHECK(ny == Approx(nx).epsilon(1e-12));
    }
}

TEST_CASE("transform rejects non-power-of-two lengths", "[grid][dft]") {
    CHECK_THROWS_AS(dft(std::vector<cplx>(12), false), config_error);
    CHECK_THROWS_AS(dft({}, false), config_error);
}

TEST_CASE("modulation emits one cyclic-prefixed body per symbol", "[grid][ofdm]") {
    PhyConfig cfg;
    const auto frame = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 11), cfg);
    const auto sig = ofdm_modulate(frame, cfg);
    REQUIRE(sig.samples.size() == 2016);
    CHECK(sig.sample_rate_hz == Approx(1.92e6));

    // Cyclic prefix equals the body tail.
    for (int s = 0; s < cfg.n_symbols; ++s) {
        const cplx* sym = sig.samples.data() + static_cast<std::size_t>(s) * 144;
        for (int i = 0; i < 16; ++i) CHECK(sym[i] == sym[16 + 112 + i]);
    }
}

TEST_CASE("a single active subcarrier modulates to a complex exponential", "[grid][ofdm]") {
    PhyConfig cfg;
    ResourceGrid frame;
    frame.cells = CMat(72, 14);
    frame.kind = Matrix<CellKind>(72, 14, CellKind::Null);
    const int k = 40;  // bin +5
    frame.cells(k, 0) = {1.0, 0.0};
    const auto sig = ofdm_modulate(frame, cfg);
    const int bin = cfg.fft_bin(k);
    for (int n = 0; n < 128; ++n) {
        const double ang = 2.0 * kPi * bin * n / 128.0;
        const cplx expected = cplx(std::cos(ang), std::sin(ang)) / std::sqrt(128.0);
        CHECK(std::abs(sig.samples[static_cast<std::size_t>(16 + n)] - expected) < 1e-12);
    }
}

TEST_CASE("symbol body energy equals grid symbol energy", "[grid][ofdm]") {
    PhyConfig cfg;
    const auto frame = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 23), cfg);
    const auto sig = ofdm_modulate(frame, cfg);
    for (int s = 0; s < cfg.n_symbols; ++s) {
        double grid_e = 0.0, body_e = 0.0;
        for (int k = 0; k < cfg.n_subcarriers; ++k)
            grid_e += std::norm(frame.cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)));
        for (int n = 0; n < cfg.fft_size; ++n)
            body_e += std::norm(sig.samples[static_cast<std::size_t>(s * 144 + 16 + n)]);
        CHECK(body_e == Approx(grid_e).margin(1e-12));
    }
}

TEST_CASE("demodulation inverts modulation", "[grid][ofdm]") {
    PhyConfig cfg;
    const auto frame = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 29), cfg);
    const auto cells = ofdm_demodulate(ofdm_modulate(frame, cfg), cfg);
    for (std::size_t i = 0; i < cells.size(); ++i)
        CHECK(std::abs(cells.data()[i] - frame.cells.data()[i]) < 1e-12);
}

TEST_CASE("all-zero signal demodulates to an all-zero grid", "[grid][ofdm]") {
    PhyConfig cfg;
    TimeSignal sig;
    sig.samples.assign(2016, cplx{});
    sig.sample_rate_hz = cfg.sample_rate_hz();
    const auto cells = ofdm_demodulate(sig, cfg);
    for (const auto& v : cells) CHECK(v == cplx{});
}

TEST_CASE("demodulation rejects a wrong signal length", "[grid][ofdm]") {
    PhyConfig cfg;
    TimeSignal sig;
    sig.samples.assign(2000, cplx{});
    CHECK_THROWS_AS(ofdm_demodulate(sig, cfg), config_error);
}

TEST_CASE("an on-grid one-sample delay applies the closed-form phase ramp", "[grid][ofdm]") {
    PhyConfig cfg;
    const auto frame = build_frame(random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 31), cfg);
    const auto sig = ofdm_modulate(frame, cfg);

    TimeSignal delayed;
    delayed.sample_rate_hz = sig.sample_rate_hz;
    delayed.samples.assign(sig.samples.size(), cplx{});
    for (std::size_t i = 1; i < sig.samples.size(); ++i) delayed.samples[i] = sig.samples[i - 1];

    const auto cells = ofdm_demodulate(delayed, cfg);
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            const double ang = -2.0 * kPi * cfg.fft_bin(k) / 128.0;
            const cplx expected = frame.cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) *
                                  cplx(std::cos(ang), std::sin(ang));
            CHECK(std::abs(cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)) - expected) <
                  1e-9);
        }
}

TEST_CASE("bits survive the loopback chain without a channel", "[grid][ofdm]") {
    PhyConfig cfg;
    const auto bits = random_bits(static_cast<std::size_t>(cfg.n_data_bits()), 37);
    const auto frame = build_frame(bits, cfg);
    const auto cells = ofdm_demodulate(ofdm_modulate(frame, cfg), cfg);

    std::vector<int> recovered;
    for (int s = 0; s < cfg.n_symbols; ++s) {
        if (cfg.is_pilot_symbol(s)) continue;
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
            const auto [b0, b1] = qpsk_demap(cells(static_cast<std::size_t>(k), static_cast<std::size_t>(s)));
            recovered.push_back(b0);
            recovered.push_back(b1);
        }
    }
    CHECK(recovered == bits);
}

TEST_CASE("configuration invariants are enforced", "[grid]") {
    PhyConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    PhyConfig bad = cfg;
    bad.pilot_spacing = 4;  // 24 * 4 != 72
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.pilot_symbol_indices = {6, 0};
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.fft_size = 72;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.fft_size = 130;
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("subcarriers map to the signed bins around DC", "[grid]") {
    PhyConfig cfg;
    CHECK(cfg.fft_bin(0) == -36);
    CHECK(cfg.fft_bin(35) == -1);
    CHECK(cfg.fft_bin(36) == 1);
    CHECK(cfg.fft_bin(71) == 36);
}
