// Command-line front end: dataset generation, estimator training, link-level
// evaluation and the parameter sweeps, all emitting the fixed CSV schema.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ofdmce/ofdmce.hpp"

namespace {

using namespace ofdmce;

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string profile = "epa";
    double doppler_hz = 97.0;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--profile", opts.profile, "channel profile: epa, eva, etu or a profile file path");
    cmd->add_option("--doppler-hz", opts.doppler_hz, "maximum Doppler shift in Hz");
    cmd->add_option("--seed", opts.seed, "base seed for all derived random streams");
    std::string dummy;
    cmd->add_option("--config", dummy, "plain-text key=value file overriding the defaults");
}

// Expand `--config FILE` into ordinary long options placed right after the
// subcommand, so explicit command-line flags keep precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    std::size_t subcommand = args.size();
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-') {
            subcommand = i;
            break;
        }
    if (subcommand == args.size()) throw config_error("--config requires a subcommand");

    std::istringstream in(io::read_text_file(path));
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw config_error("config line is not key=value: " + line);
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config line is not key=value: " + line);

        bool overridden = false;
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) overridden = true;
        if (!overridden) injected.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(subcommand) + 1, injected.begin(),
                injected.end());
    return args;
}

channel::ChannelProfile resolve_profile(const std::string& name) {
    if (name == "epa" || name == "eva" || name == "etu" || name == "EPA" || name == "EVA" ||
        name == "ETU")
        return channel::profile_by_name(name);
    return channel::load_profile(name);
}

fxp::FixedFormat parse_format(const std::string& text) {
    int w = 0, i = 0;
    if (std::sscanf(text.c_str(), "%d,%d", &w, &i) != 2)
        throw config_error("--format expects W,I (for example 12,4)");
    fxp::FixedFormat f{w, i};
    f.validate();
    return f;
}

std::vector<fxp::FixedFormat> parse_format_list(const std::string& text) {
    std::vector<fxp::FixedFormat> formats;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto stop = text.find(';', start);
        formats.push_back(parse_format(text.substr(start, stop - start)));
        if (stop == std::string::npos) break;
        start = stop + 1;
    }
    return formats;
}

void write_output(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
        return;
    }
    io::write_text_file(path, contents);
}

// Assemble the estimators requested on the command line. Learned estimators
// come from model/statistics files when given, otherwise they are prepared
// in-process at the training Doppler with the desk-scale protocol.
struct EstimatorBank {
    std::vector<bench::Estimator> estimators;

    static EstimatorBank build(const std::vector<std::string>& names, const CommonOpts& common,
                               const grid::PhyConfig& phy, const std::string& model_path,
                               const std::string& stats_path, int stats_frames, int train_frames,
                               const dlmodels::TrainSpec& spec, double train_doppler,
                               std::optional<fxp::FixedFormat> fmt) {
        EstimatorBank bank;
        const auto profile = resolve_profile(common.profile);
        for (const auto& name : names) {
            if (name == "ls") {
                bank.estimators.push_back(bench::make_ls_estimator(phy, fmt));
            } else if (name == "perfect") {
                bank.estimators.push_back(bench::make_perfect_estimator());
            } else if (name == "lmmse") {
                classical::LmmseStatistics stats;
                if (!stats_path.empty()) {
                    stats = io::load_statistics(stats_path);
                } else {
                    std::cerr << "note: learning lmmse statistics from " << stats_frames
                              << " realizations at " << train_doppler << " Hz\n";
                    stats = bench::learn_lmmse_statistics(profile, train_doppler, stats_frames,
                                                          mix_seed(common.seed, 0x57A7), phy);
                }
                bank.estimators.push_back(bench::make_lmmse_estimator(std::move(stats), phy));
            } else if (name == "lsidnn" || name == "iresnet") {
                neural::NetModel model;
                if (!model_path.empty()) {
                    model = io::load_model(model_path);
                } else {
                    std::cerr << "note: training " << name << " in-process on " << train_frames
                              << " frames at " << train_doppler << " Hz\n";
                    const auto ds = bench::gen_dataset(profile, train_doppler, train_frames,
                                                       bench::SnrPolicy::train_mix(),
                                                       mix_seed(common.seed, 0xDA7A), phy);
                    if (name == "lsidnn") {
                        model = dlmodels::train(
                                    dlmodels::build_lsidnn(dlmodels::LsidnnConfig::from_phy(phy), spec.seed),
                                    bench::dense_samples(ds), spec)
                                    .model;
                    } else {
                        model = dlmodels::train(
                                    dlmodels::build_iresnet(dlmodels::IresnetConfig::from_phy(phy), spec.seed),
                                    bench::tensor_samples(ds), spec)
                                    .model;
                    }
                }
                bank.estimators.push_back(name == "lsidnn" ? bench::make_lsidnn_estimator(std::move(model), fmt)
                                                           : bench::make_iresnet_estimator(std::move(model), fmt));
            } else {
                throw config_error("unknown estimator: " + name);
            }
        }
        return bank;
    }
};

int run(std::vector<std::string> args) {
    CLI::App app{"Pilot-based OFDM channel-estimation workbench"};
    app.require_subcommand(1);
    grid::PhyConfig phy;

    // gen-dataset ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen-dataset", "generate a dataset of pilot LS estimates and true channels");
    CommonOpts gen_common;
    add_common(gen, gen_common);
    int gen_frames = 2000;
    std::string gen_out;
    double gen_snr = std::numeric_limits<double>::quiet_NaN();
    std::string gen_policy = "mix";
    gen->add_option("--frames", gen_frames, "number of frames");
    gen->add_option("--snr", gen_snr, "fixed SNR in dB (overrides --snr-policy)");
    gen->add_option("--snr-policy", gen_policy, "mix | noiseless");
    gen->add_option("--out", gen_out, "output dataset file")->required();

    // train ------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train an estimator and write its model or statistics file");
    CommonOpts train_common;
    add_common(train, train_common);
    std::string train_dataset, train_model_out, train_estimator = "lsidnn", train_hidden;
    int train_epochs = 50, train_batch = 128, train_tail = 10, train_blocks = 4, train_channels = 11;
    double train_lr = 0.01;
    train->add_option("--dataset", train_dataset, "training dataset file")->required();
    train->add_option("--estimator", train_estimator, "lsidnn | iresnet | lmmse");
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--batch", train_batch, "mini-batch size");
    train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--tail-avg", train_tail, "epochs averaged into the returned parameters");
    train->add_option("--hidden", train_hidden, "comma-separated hidden layer sizes (lsidnn)");
    train->add_option("--blocks", train_blocks, "neural block count (iresnet)");
    train->add_option("--channels", train_channels, "channel width (iresnet)");
    train->add_option("--model", train_model_out, "output model/statistics file")->required();

    // eval -------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate one estimator over fresh frames");
    CommonOpts eval_common;
    add_common(eval, eval_common);
    std::string eval_estimator = "ls", eval_model, eval_stats, eval_out, eval_format;
    std::vector<double> eval_snr = {-5, 0, 5, 10, 15, 20};
    int eval_frames = 500, eval_stats_frames = 1000, eval_train_frames = 2000;
    eval->add_option("--estimator", eval_estimator, "ls | lmmse | lsidnn | iresnet | perfect");
    eval->add_option("--model", eval_model, "model file for the learned estimators");
    eval->add_option("--stats", eval_stats, "statistics file for lmmse");
    eval->add_option("--snr", eval_snr, "SNR grid in dB")->delimiter(',');
    eval->add_option("--frames", eval_frames, "frames per SNR point");
    eval->add_option("--format", eval_format, "fixed-point format W,I for the estimator arithmetic");
    eval->add_option("--stats-frames", eval_stats_frames, "realizations for in-process lmmse statistics");
    eval->add_option("--train-frames", eval_train_frames, "frames for in-process model training");
    eval->add_option("--out", eval_out, "output CSV path (default stdout)");

    // sweep-snr ----------------------------------------------------------
    auto* snr = app.add_subcommand("sweep-snr", "compare estimators over an SNR grid");
    CommonOpts snr_common;
    add_common(snr, snr_common);
    std::vector<std::string> snr_estimators = {"ls", "lmmse"};
    std::vector<double> snr_grid = {-5, 0, 5, 10, 15, 20};
    std::string snr_model, snr_stats, snr_out;
    int snr_frames = 500, snr_stats_frames = 1000, snr_train_frames = 2000;
    snr->add_option("--estimators", snr_estimators, "comma-separated estimator list")->delimiter(',');
    snr->add_option("--snr", snr_grid, "SNR grid in dB")->delimiter(',');
    snr->add_option("--frames", snr_frames, "frames per SNR point");
    snr->add_option("--model", snr_model, "model file for lsidnn/iresnet");
    snr->add_option("--stats", snr_stats, "statistics file for lmmse");
    snr->add_option("--stats-frames", snr_stats_frames, "realizations for in-process lmmse statistics");
    snr->add_option("--train-frames", snr_train_frames, "frames for in-process model training");
    snr->add_option("--out", snr_out, "output CSV path (default stdout)");

    // sweep-doppler -------------------------------------------------------
    auto* dop = app.add_subcommand("sweep-doppler", "evaluate estimators across Doppler shifts");
    CommonOpts dop_common;
    add_common(dop, dop_common);
    std::vector<std::string> dop_estimators = {"ls", "lmmse", "lsidnn"};
    std::vector<double> dop_list = {0, 50, 97, 150, 200};
    std::vector<double> dop_snr = {10.0, 20.0};
    std::string dop_model, dop_stats, dop_out;
    int dop_frames = 500, dop_stats_frames = 1000, dop_train_frames = 2000;
    double dop_train_doppler = 97.0;
    dop->add_option("--estimators", dop_estimators, "comma-separated estimator list")->delimiter(',');
    dop->add_option("--dopplers", dop_list, "Doppler shifts to evaluate, Hz")->delimiter(',');
    dop->add_option("--snr", dop_snr, "SNR grid in dB")->delimiter(',');
    dop->add_option("--frames", dop_frames, "frames per point");
    dop->add_option("--model", dop_model, "model file for lsidnn/iresnet");
    dop->add_option("--stats", dop_stats, "statistics file for lmmse");
    dop->add_option("--stats-frames", dop_stats_frames, "realizations for in-process lmmse statistics");
    dop->add_option("--train-frames", dop_train_frames, "frames for in-process model training");
    dop->add_option("--train-doppler", dop_train_doppler,
                    "Doppler used for in-process training and statistics (models are not retrained per point)");
    dop->add_option("--out", dop_out, "output CSV path (default stdout)");

    // sweep-dataset-size ---------------------------------------------------
    auto* dss = app.add_subcommand("sweep-dataset-size", "train on dataset prefixes and compare");
    CommonOpts dss_common;
    add_common(dss, dss_common);
    std::vector<int> dss_sizes = {5, 50, 500, 2000};
    std::string dss_dataset, dss_out;
    std::vector<double> dss_snr = {10.0};
    int dss_frames = 500, dss_epochs = 50, dss_batch = 128, dss_tail = 10;
    double dss_lr = 0.01;
    dss->add_option("--sizes", dss_sizes, "training-set sizes")->delimiter(',');
    dss->add_option("--dataset", dss_dataset, "training dataset file (generated when omitted)");
    dss->add_option("--snr", dss_snr, "evaluation SNR grid in dB")->delimiter(',');
    dss->add_option("--frames", dss_frames, "evaluation frames per point");
    dss->add_option("--epochs", dss_epochs, "training epochs");
    dss->add_option("--batch", dss_batch, "mini-batch size");
    dss->add_option("--lr", dss_lr, "learning rate");
    dss->add_option("--tail-avg", dss_tail, "epochs averaged into the returned parameters");
    dss->add_option("--out", dss_out, "output CSV path (default stdout)");

    // sweep-wordlength -----------------------------------------------------
    auto* wl = app.add_subcommand("sweep-wordlength", "fixed-point word-length analysis");
    CommonOpts wl_common;
    add_common(wl, wl_common);
    std::string wl_estimator = "ls", wl_model, wl_formats, wl_out, wl_dataset;
    int wl_eval_frames = 500, wl_probe = 32;
    double wl_snr = 20.0, wl_tol = 0.01;
    wl->add_option("--estimator", wl_estimator, "ls | lsidnn | iresnet");
    wl->add_option("--model", wl_model, "model file for the learned estimators");
    wl->add_option("--dataset", wl_dataset, "evaluation dataset file (generated when omitted)");
    wl->add_option("--eval-frames", wl_eval_frames, "evaluation frames when generating");
    wl->add_option("--snr", wl_snr, "evaluation SNR when generating");
    wl->add_option("--probe-bits", wl_probe, "wide word length used while selecting integer bits");
    wl->add_option("--tol", wl_tol, "allowed relative MSE increase over the reference");
    wl->add_option("--formats", wl_formats, "explicit list W,I;W,I;... instead of the automatic search");
    wl->add_option("--out", wl_out, "output CSV path (default stdout)");

    // complexity -----------------------------------------------------------
    auto* cx = app.add_subcommand("complexity", "analytic parameter and MAC counts");
    std::string cx_out;
    cx->add_option("--out", cx_out, "output CSV path (default stdout)");

    try {
        args = expand_config(std::move(args));
        std::vector<const char*> argv{"ofdmce"};
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or help text
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    if (gen->parsed()) {
        bench::SnrPolicy policy = bench::SnrPolicy::train_mix();
        if (!std::isnan(gen_snr)) policy = bench::SnrPolicy::fixed(gen_snr);
        else if (gen_policy == "noiseless") policy = bench::SnrPolicy::noiseless();
        else if (gen_policy != "mix") throw config_error("unknown snr policy: " + gen_policy);
        const auto ds = bench::gen_dataset(resolve_profile(gen_common.profile), gen_common.doppler_hz,
                                           gen_frames, policy, gen_common.seed, phy);
        bench::save_dataset(gen_out, ds);
        std::cerr << "wrote " << ds.records.size() << " records to " << gen_out << "\n";
        return kExitOk;
    }

    if (train->parsed()) {
        const auto ds = bench::load_dataset(train_dataset);
        if (train_estimator == "lmmse") {
            io::save_statistics(train_model_out, bench::statistics_from_dataset(ds, phy));
            std::cerr << "wrote statistics from " << ds.records.size() << " frames to " << train_model_out << "\n";
            return kExitOk;
        }
        dlmodels::TrainSpec spec;
        spec.epochs = train_epochs;
        spec.batch_size = train_batch;
        spec.learning_rate = train_lr;
        spec.tail_average_epochs = train_tail;
        spec.seed = train_common.seed;

        neural::NetModel model;
        std::string arch;
        if (train_estimator == "lsidnn") {
            auto cfg = dlmodels::LsidnnConfig::from_phy(phy);
            if (!train_hidden.empty()) {
                cfg.hidden_sizes.clear();
                std::stringstream ss(train_hidden);
                for (int v = 0; ss >> v;) {
                    cfg.hidden_sizes.push_back(v);
                    if (ss.peek() == ',') ss.ignore();
                }
            }
            arch = "lsidnn";
            for (int h : cfg.hidden_sizes) arch += "-" + std::to_string(h);
            model = dlmodels::train(dlmodels::build_lsidnn(cfg, spec.seed), bench::dense_samples(ds), spec).model;
        } else if (train_estimator == "iresnet") {
            auto cfg = dlmodels::IresnetConfig::from_phy(phy, train_blocks, train_channels);
            arch = "iresnet-" + std::to_string(train_blocks) + "x" + std::to_string(train_channels);
            model = dlmodels::train(dlmodels::build_iresnet(cfg, spec.seed), bench::tensor_samples(ds), spec).model;
        } else {
            throw config_error("unknown estimator: " + train_estimator);
        }
        io::save_model(train_model_out, model);
        bench::ModelMeta meta;
        meta.architecture = arch;
        meta.profile = ds.records.front().profile;
        meta.doppler_hz = ds.records.front().doppler_hz;
        meta.dataset_hash = bench::hash_dataset(ds);
        meta.spec = spec;
        io::write_text_file(train_model_out + ".meta", bench::format_model_meta(meta));
        std::cerr << "wrote model to " << train_model_out << "\n";
        return kExitOk;
    }

    if (eval->parsed()) {
        std::optional<fxp::FixedFormat> fmt;
        if (!eval_format.empty()) fmt = parse_format(eval_format);
        dlmodels::TrainSpec spec = bench::desk_train_spec(eval_common.seed);
        auto bank = EstimatorBank::build({eval_estimator}, eval_common, phy, eval_model, eval_stats,
                                         eval_stats_frames, eval_train_frames, spec,
                                         eval_common.doppler_hz, fmt);
        bench::RunConfig rc;
        rc.profile = resolve_profile(eval_common.profile);
        rc.doppler_hz = eval_common.doppler_hz;
        rc.snr_grid = eval_snr;
        rc.n_frames = eval_frames;
        rc.seed = eval_common.seed;
        rc.phy = phy;
        write_output(eval_out, bench::metrics_csv(bench::run_link(rc, bank.estimators)));
        return kExitOk;
    }

    if (snr->parsed()) {
        dlmodels::TrainSpec spec = bench::desk_train_spec(snr_common.seed);
        auto bank = EstimatorBank::build(snr_estimators, snr_common, phy, snr_model, snr_stats,
                                         snr_stats_frames, snr_train_frames, spec,
                                         snr_common.doppler_hz, std::nullopt);
        bench::RunConfig rc;
        rc.profile = resolve_profile(snr_common.profile);
        rc.doppler_hz = snr_common.doppler_hz;
        rc.snr_grid = snr_grid;
        rc.n_frames = snr_frames;
        rc.seed = snr_common.seed;
        rc.phy = phy;
        write_output(snr_out, bench::metrics_csv(bench::run_link(rc, bank.estimators)));
        return kExitOk;
    }

    if (dop->parsed()) {
        dlmodels::TrainSpec spec = bench::desk_train_spec(dop_common.seed);
        auto bank = EstimatorBank::build(dop_estimators, dop_common, phy, dop_model, dop_stats,
                                         dop_stats_frames, dop_train_frames, spec, dop_train_doppler,
                                         std::nullopt);
        bench::RunConfig rc;
        rc.profile = resolve_profile(dop_common.profile);
        rc.snr_grid = dop_snr;
        rc.n_frames = dop_frames;
        rc.seed = dop_common.seed;
        rc.phy = phy;
        write_output(dop_out, bench::metrics_csv(bench::sweep_doppler(rc, bank.estimators, dop_list)));
        return kExitOk;
    }

    if (dss->parsed()) {
        bench::Dataset ds;
        if (!dss_dataset.empty()) {
            ds = bench::load_dataset(dss_dataset);
        } else {
            int max_size = 0;
            for (int s : dss_sizes) max_size = std::max(max_size, s);
            ds = bench::gen_dataset(resolve_profile(dss_common.profile), dss_common.doppler_hz, max_size,
                                    bench::SnrPolicy::train_mix(), mix_seed(dss_common.seed, 0xDA7A), phy);
        }
        dlmodels::TrainSpec spec;
        spec.epochs = dss_epochs;
        spec.batch_size = dss_batch;
        spec.learning_rate = dss_lr;
        spec.tail_average_epochs = dss_tail;
        spec.seed = dss_common.seed;
        bench::RunConfig rc;
        rc.profile = resolve_profile(dss_common.profile);
        rc.doppler_hz = dss_common.doppler_hz;
        rc.snr_grid = dss_snr;
        rc.n_frames = dss_frames;
        rc.seed = mix_seed(dss_common.seed, 0xE7A1);
        rc.phy = phy;
        const auto results = bench::sweep_dataset_size(dss_sizes, spec, ds,
                                                       dlmodels::LsidnnConfig::from_phy(phy), rc);
        std::vector<bench::MetricsRecord> rows;
        for (const auto& r : results) rows.insert(rows.end(), r.records.begin(), r.records.end());
        write_output(dss_out, bench::metrics_csv(rows));
        return kExitOk;
    }

    if (wl->parsed()) {
        bench::Dataset eval_ds;
        if (!wl_dataset.empty()) {
            eval_ds = bench::load_dataset(wl_dataset);
        } else {
            eval_ds = bench::gen_dataset(resolve_profile(wl_common.profile), wl_common.doppler_hz,
                                         wl_eval_frames, bench::SnrPolicy::fixed(wl_snr),
                                         mix_seed(wl_common.seed, 0xE7A2), phy);
        }

        std::function<bench::Estimator(std::optional<fxp::FixedFormat>)> make;
        if (wl_estimator == "ls") {
            make = [&phy](std::optional<fxp::FixedFormat> f) { return bench::make_ls_estimator(phy, f); };
        } else if (wl_estimator == "lsidnn" || wl_estimator == "iresnet") {
            if (wl_model.empty()) throw config_error("--model is required for the learned estimators");
            auto model = std::make_shared<neural::NetModel>(io::load_model(wl_model));
            const bool dense = wl_estimator == "lsidnn";
            make = [model, dense](std::optional<fxp::FixedFormat> f) {
                return dense ? bench::make_lsidnn_estimator(*model, f)
                             : bench::make_iresnet_estimator(*model, f);
            };
        } else {
            throw config_error("unknown estimator: " + wl_estimator);
        }

        bench::WordlengthResult result;
        if (!wl_formats.empty()) {
            result = bench::sweep_wordlength_formats(make, eval_ds, phy, parse_format_list(wl_formats));
        } else {
            result = bench::sweep_wordlength(make, eval_ds, phy, wl_probe, wl_tol);
            std::cerr << "selected word length (" << result.selected.total_bits << ","
                      << result.selected.integer_bits << ")\n";
        }
        write_output(wl_out, bench::wordlength_csv(wl_estimator, wl_common.profile, result));
        return kExitOk;
    }

    if (cx->parsed()) {
        struct Row {
            std::string name;
            neural::Complexity c;
        };
        std::vector<Row> rows;
        for (const auto& hidden : std::vector<std::vector<int>>{{48}, {1024}, {1056}, {48, 48}, {1024, 1024}}) {
            dlmodels::LsidnnConfig cfg;
            cfg.hidden_sizes = hidden;
            std::string name = "LSiDNN";
            for (std::size_t i = 0; i < hidden.size(); ++i)
                name += (i == 0 ? " " : "-") + std::to_string(hidden[i]);
            rows.push_back({name, neural::count_complexity(dlmodels::build_lsidnn(cfg, 1))});
        }
        for (int blocks : {2, 3, 4}) {
            dlmodels::IresnetConfig cfg;
            cfg.n_neural_blocks = blocks;
            rows.push_back({"iResNet_" + std::to_string(blocks),
                            neural::count_complexity(dlmodels::build_iresnet(cfg, 1))});
        }
        std::string csv = "architecture,learnable_parameters,mac_operations\n";
        std::printf("%-18s %22s %16s\n", "Architecture", "# Learnable Parameters", "# MAC operations");
        for (const auto& row : rows) {
            std::printf("%-18s %22llu %16llu\n", row.name.c_str(),
                        static_cast<unsigned long long>(row.c.learnable_parameters),
                        static_cast<unsigned long long>(row.c.mac_operations));
            csv += row.name + "," + std::to_string(row.c.learnable_parameters) + "," +
                   std::to_string(row.c.mac_operations) + "\n";
        }
        if (!cx_out.empty()) io::write_text_file(cx_out, csv);
        return kExitOk;
    }

    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
}
