#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ofdmce/dlmodels.hpp"
#include "ofdmce/fxp.hpp"

using namespace ofdmce;
using namespace ofdmce::fxp;
using Catch::Approx;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale) {
    Lcg64 rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
    return v;
}

}  // namespace

TEST_CASE("quantization rounds to the grid and saturates", "[fxp]") {
    const FixedFormat f{12, 4};  // step 2^-8, range [-8, 8 - 2^-8]
    CHECK(quantize(0.5, f) == 0.5);
    CHECK(quantize(100.0, f) == Approx(7.99609375));
    CHECK(quantize(-100.0, f) == Approx(-8.0));
    CHECK(quantize(0.001, f) == 0.0);
    CHECK(quantize(1.0 / 3.0, f) == Approx(85.0 / 256.0));
}

TEST_CASE("quantization is idempotent", "[fxp]") {
    const FixedFormat f{10, 3};
    for (double x : random_vec(200, 3, 12.0)) {
        const double q = quantize(x, f);
        CHECK(quantize(q, f) == q);
    }
}

TEST_CASE("quantization is monotone non-decreasing", "[fxp]") {
    const FixedFormat f{8, 4};
    auto xs = random_vec(400, 5, 20.0);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) CHECK(quantize(xs[i], f) >= quantize(xs[i - 1], f));
}

TEST_CASE("in-range error is bounded by half a step", "[fxp]") {
    const FixedFormat f{14, 3};
    const double half_step = std::ldexp(1.0, -(f.fractional_bits() + 1));
    for (double x : random_vec(300, 7, 3.5)) {
        if (x < f.min_value() || x > f.max_value()) continue;
        CHECK(std::abs(quantize(x, f) - x) <= half_step + 1e-18);
    }
}

TEST_CASE("widening the fraction never increases the error", "[fxp]") {
    for (double x : random_vec(200, 9, 3.9)) {
        double previous = std::numeric_limits<double>::infinity();
        for (int w = 6; w <= 20; ++w) {
            const double err = std::abs(quantize(x, FixedFormat{w, 3}) - x);
            CHECK(err <= previous + 1e-18);
            previous = err;
        }
    }
}

TEST_CASE("invalid formats and values are rejected", "[fxp]") {
    CHECK_THROWS_AS(quantize(1.0, FixedFormat{12, 0}), config_error);
    CHECK_THROWS_AS(quantize(1.0, FixedFormat{12, 13}), config_error);
    CHECK_THROWS_AS(quantize(1.0, FixedFormat{65, 4}), config_error);
    CHECK_THROWS_AS(quantize(std::numeric_limits<double>::infinity(), FixedFormat{12, 4}),
                    numerical_error);
    CHECK_THROWS_AS(quantize(std::nan(""), FixedFormat{12, 4}), numerical_error);
}

TEST_CASE("complex values quantize component-wise", "[fxp]") {
    const FixedFormat f{12, 4};
    const cplx q = quantize(cplx(1.0 / 3.0, -100.0), f);
    CHECK(q.real() == quantize(1.0 / 3.0, f));
    CHECK(q.imag() == quantize(-100.0, f));
}

TEST_CASE("a very wide fraction leaves model parameters in place", "[fxp][model]") {
    auto model = dlmodels::build_lsidnn(dlmodels::LsidnnConfig{}, 11);
    const auto q = quantize_model(model, FixedFormat{64, 4});  // 60 fractional bits
    auto orig = neural::param_tensors(model);
    auto quant = neural::param_tensors(const_cast<neural::NetModel&>(q));
    for (std::size_t p = 0; p < orig.size(); ++p)
        for (std::size_t i = 0; i < orig[p].n; ++i)
            CHECK(std::abs(quant[p].data[i] - orig[p].data[i]) <= 1e-15);
}

TEST_CASE("quantized parameters land on the representable grid", "[fxp][model]") {
    const FixedFormat f{12, 4};
    auto model = dlmodels::build_lsidnn(dlmodels::LsidnnConfig{}, 13);
    const auto q = quantize_model(model, f);
    for (const auto& ref : neural::param_tensors(const_cast<neural::NetModel&>(q)))
        for (std::size_t i = 0; i < ref.n; ++i) {
            const double scaled = std::ldexp(ref.data[i], f.fractional_bits());
            CHECK(scaled == std::round(scaled));
        }
}

TEST_CASE("hooked forward equals a manually quantized layer chain", "[fxp][model]") {
    const FixedFormat f{16, 4};
    const auto model = dlmodels::build_lsidnn(
        dlmodels::LsidnnConfig{.hidden_sizes = {8}, .input_size = 12, .out_subcarriers = 5, .out_symbols = 2}, 15);
    const auto q = quantize_model(model, f);
    const auto hook = make_hook(f);

    const auto x = random_vec(12, 16, 2.0);
    const auto fast = neural::forward(q, x, &hook);

    // manual: quantize input, dense, quantize output, dense, quantize output
    std::vector<double> manual = x;
    for (auto& v : manual) v = quantize(v, f);
    manual = neural::dense_forward(std::get<neural::DenseLayer>(q.layers[0]), manual);
    for (auto& v : manual) v = quantize(v, f);
    manual = neural::dense_forward(std::get<neural::DenseLayer>(q.layers[1]), manual);
    for (auto& v : manual) v = quantize(v, f);

    CHECK(fast == manual);
}

TEST_CASE("integer-bit selection finds the smallest adequate format", "[fxp][select]") {
    const double ref = 0.125;

    // an evaluator already at the reference selects a single integer bit
    CHECK(select_integer_bits([&](const FixedFormat&) { return ref; }, 32, ref, 0.01) == 1);

    // a step evaluator that only settles from four bits onward
    auto step = [&](const FixedFormat& f) { return f.integer_bits < 4 ? 10.0 * ref : ref; };
    CHECK(select_integer_bits(step, 32, ref, 0.01) == 4);

    // a smooth monotone evaluator agrees with an exhaustive scan
    auto smooth = [&](const FixedFormat& f) { return ref * (1.0 + 4.0 / (1 << f.integer_bits)); };
    const int direct = select_integer_bits(smooth, 32, ref, 0.05);
    int scan = 0;
    for (int i = 1; i < 32; ++i)
        if (smooth(FixedFormat{32, i}) <= ref * 1.05) {
            scan = i;
            break;
        }
    CHECK(direct == scan);

    auto hopeless = [&](const FixedFormat&) { return 10.0 * ref; };
    CHECK_THROWS_AS(select_integer_bits(hopeless, 32, ref, 0.01), numerical_error);
}

TEST_CASE("word-length selection finds the plateau", "[fxp][select]") {
    const double ref = 0.06;

    CHECK(select_word_length([&](const FixedFormat&) { return ref; }, 4, ref, 0.01) == 5);

    auto plateau = [&](const FixedFormat& f) { return f.total_bits < 12 ? 3.0 * ref : ref; };
    CHECK(select_word_length(plateau, 4, ref, 0.01) == 12);

    auto smooth = [&](const FixedFormat& f) { return ref * (1.0 + 64.0 / (1u << f.total_bits)); };
    const int direct = select_word_length(smooth, 4, ref, 0.02);
    int scan = 0;
    for (int w = 5; w <= 64; ++w)
        if (smooth(FixedFormat{w, 4}) <= ref * 1.02) {
            scan = w;
            break;
        }
    CHECK(direct == scan);

    auto hopeless = [&](const FixedFormat&) { return 10.0 * ref; };
    CHECK_THROWS_AS(select_word_length(hopeless, 4, ref, 0.01), numerical_error);
}
