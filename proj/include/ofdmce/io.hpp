#pragma once

// Binary persistence for models and learned statistics plus small CSV and
// text helpers. All multi-byte fields are little-endian; floating point is
// 64-bit IEEE-754.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ofdmce/classical.hpp"
#include "ofdmce/common.hpp"
#include "ofdmce/neural.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace ofdmce::io {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw config_error("unexpected end of file");
    return v;
}

inline std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw config_error("unexpected end of file");
    return v;
}

inline double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw config_error("unexpected end of file");
    return v;
}

inline void write_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

inline void expect_magic(std::istream& in, const char (&magic)[9]) {
    char buf[8];
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0)
        throw config_error(std::string("bad file magic, expected ") + magic);
}

/// Shortest round-trippable decimal rendering, stable across runs.
inline std::string format_double(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        char ibuf[32];
        std::snprintf(ibuf, sizeof ibuf, "%.0f", v);
        return ibuf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char trial[40];
            std::snprintf(trial, sizeof trial, "%.*g", prec, v);
            std::sscanf(trial, "%lf", &back);
            if (back == v) return trial;
        }
    }
    return buf;
}

// ---------------------------------------------------------------------------
// Model container: magic, layer count, input/output shapes, one descriptor
// per layer (kind, dims, flags), then all parameters row-major.

inline constexpr char kModelMagic[9] = "CEMODEL1";
inline constexpr std::uint32_t kLayerDense = 0;
inline constexpr std::uint32_t kLayerConv = 1;
inline constexpr std::uint32_t kLayerUpsample = 2;

inline void save_model(std::ostream& out, const neural::NetModel& model) {
    write_magic(out, kModelMagic);
    write_u32(out, static_cast<std::uint32_t>(model.layers.size()));
    for (int v : {model.input_shape.c, model.input_shape.h, model.input_shape.w,
                  model.output_shape.c, model.output_shape.h, model.output_shape.w})
        write_u32(out, static_cast<std::uint32_t>(v));

    for (const auto& layer : model.layers) {
        if (const auto* d = std::get_if<neural::DenseLayer>(&layer)) {
            write_u32(out, kLayerDense);
            write_u32(out, static_cast<std::uint32_t>(d->out_size()));
            write_u32(out, static_cast<std::uint32_t>(d->in_size()));
            write_u32(out, d->relu ? 1u : 0u);
        } else if (const auto* c = std::get_if<neural::ConvLayer>(&layer)) {
            write_u32(out, kLayerConv);
            for (int v : {c->n_filters, c->in_channels, c->kh, c->kw, c->stride,
                          c->padding == neural::Padding::Same ? 0 : 1, c->in_h, c->in_w})
                write_u32(out, static_cast<std::uint32_t>(v));
            write_u32(out, c->relu ? 1u : 0u);
        } else {
            const auto& u = std::get<neural::UpsampleLayer>(layer);
            write_u32(out, kLayerUpsample);
            for (int v : {u.channels, u.in_h, u.in_w, u.out_h, u.out_w})
                write_u32(out, static_cast<std::uint32_t>(v));
            for (int v : u.row_positions) write_u32(out, static_cast<std::uint32_t>(v));
            for (int v : u.col_positions) write_u32(out, static_cast<std::uint32_t>(v));
            write_u32(out, 0u);
        }
    }
    for (const auto& layer : model.layers) {
        if (const auto* d = std::get_if<neural::DenseLayer>(&layer)) {
            for (double v : d->weights) write_f64(out, v);
            for (double v : d->bias) write_f64(out, v);
        } else if (const auto* c = std::get_if<neural::ConvLayer>(&layer)) {
            for (double v : c->kernel) write_f64(out, v);
            for (double v : c->bias) write_f64(out, v);
        }
    }
}

inline neural::NetModel load_model(std::istream& in) {
    expect_magic(in, kModelMagic);
    const std::uint32_t n_layers = read_u32(in);
    neural::NetModel model;
    model.input_shape = {static_cast<int>(read_u32(in)), static_cast<int>(read_u32(in)),
                         static_cast<int>(read_u32(in))};
    model.output_shape = {static_cast<int>(read_u32(in)), static_cast<int>(read_u32(in)),
                          static_cast<int>(read_u32(in))};

    int n_conv = 0;
    bool has_upsample = false;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const std::uint32_t kind = read_u32(in);
        if (kind == kLayerDense) {
            neural::DenseLayer d;
            const std::uint32_t out = read_u32(in), in_n = read_u32(in);
            d.relu = read_u32(in) != 0;
            d.weights = RMat(out, in_n);
            d.bias.assign(out, 0.0);
            model.layers.emplace_back(std::move(d));
        } else if (kind == kLayerConv) {
            neural::ConvLayer c;
            c.n_filters = static_cast<int>(read_u32(in));
            c.in_channels = static_cast<int>(read_u32(in));
            c.kh = static_cast<int>(read_u32(in));
            c.kw = static_cast<int>(read_u32(in));
            c.stride = static_cast<int>(read_u32(in));
            c.padding = read_u32(in) == 0 ? neural::Padding::Same : neural::Padding::Valid;
            c.in_h = static_cast<int>(read_u32(in));
            c.in_w = static_cast<int>(read_u32(in));
            c.relu = read_u32(in) != 0;
            c.kernel.assign(static_cast<std::size_t>(c.n_filters) * c.in_channels * c.kh * c.kw, 0.0);
            c.bias.assign(static_cast<std::size_t>(c.n_filters), 0.0);
            ++n_conv;
            model.layers.emplace_back(std::move(c));
        } else if (kind == kLayerUpsample) {
            neural::UpsampleLayer u;
            u.channels = static_cast<int>(read_u32(in));
            u.in_h = static_cast<int>(read_u32(in));
            u.in_w = static_cast<int>(read_u32(in));
            u.out_h = static_cast<int>(read_u32(in));
            u.out_w = static_cast<int>(read_u32(in));
            u.row_positions.resize(static_cast<std::size_t>(u.in_h));
            for (auto& v : u.row_positions) v = static_cast<int>(read_u32(in));
            u.col_positions.resize(static_cast<std::size_t>(u.in_w));
            for (auto& v : u.col_positions) v = static_cast<int>(read_u32(in));
            read_u32(in);  // flags, unused
            has_upsample = true;
            model.layers.emplace_back(std::move(u));
        } else {
            throw config_error("unknown layer kind in model file");
        }
    }
    if (has_upsample) {
        model.topology = neural::Topology::BlockAccumulate;
        if (n_conv < 2 || (n_conv - 2) % 2 != 0)
            throw config_error("model file has an inconsistent block structure");
        model.n_blocks = (n_conv - 2) / 2;
    }
    for (auto& layer : model.layers) {
        if (auto* d = std::get_if<neural::DenseLayer>(&layer)) {
            for (auto& v : d->weights) v = read_f64(in);
            for (auto& v : d->bias) v = read_f64(in);
        } else if (auto* c = std::get_if<neural::ConvLayer>(&layer)) {
            for (auto& v : c->kernel) v = read_f64(in);
            for (auto& v : c->bias) v = read_f64(in);
        }
    }
    return model;
}

inline void save_model(const std::string& path, const neural::NetModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    save_model(out, model);
    if (!out) throw config_error("failed writing model file: " + path);
}

inline neural::NetModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open model file: " + path);
    return load_model(in);
}

// ---------------------------------------------------------------------------
// Learned-statistics container: a small list of complex matrices plus a
// sample count.

inline constexpr char kMatrixMagic[9] = "CEMATRX1";

inline void write_cmat(std::ostream& out, const CMat& m) {
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (const auto& v : m) {
        write_f64(out, v.real());
        write_f64(out, v.imag());
    }
}

inline CMat read_cmat(std::istream& in) {
    const std::uint32_t rows = read_u32(in), cols = read_u32(in);
    CMat m(rows, cols);
    for (auto& v : m) {
        const double re = read_f64(in);
        const double im = read_f64(in);
        v = {re, im};
    }
    return m;
}

inline void save_statistics(const std::string& path, const classical::LmmseStatistics& stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    write_magic(out, kMatrixMagic);
    write_u32(out, 2);
    write_u64(out, stats.n_samples);
    write_cmat(out, stats.r_h_hp);
    write_cmat(out, stats.r_hp_hp);
    if (!out) throw config_error("failed writing statistics file: " + path);
}

inline classical::LmmseStatistics load_statistics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open statistics file: " + path);
    expect_magic(in, kMatrixMagic);
    if (read_u32(in) != 2) throw config_error("statistics file must hold two matrices");
    classical::LmmseStatistics stats;
    stats.n_samples = read_u64(in);
    stats.r_h_hp = read_cmat(in);
    stats.r_hp_hp = read_cmat(in);
    return stats;
}

// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    out << contents;
    if (!out) throw config_error("failed writing: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

/// FNV-1a over arbitrary bytes; used to fingerprint datasets in sidecar
/// metadata.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace ofdmce::io
