// Command-line front end: dataset synthesis, demodulator training and
// evaluation, experiment sweeps, and waveform-image dumps.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "owd/bench.hpp"
#include "owd/rasterizer.hpp"
#include "owd/serialize.hpp"

namespace {

using namespace owd;

struct GenerateArgs {
    std::string scheme = "ook";
    int n = 40;
    int k = 1000;
    double snr_db = 30.0;
    std::optional<double> distance_cm;
    double sigma = 0.05;
    double ref_distance_cm = 10.0;
    double path_exponent = 2.0;
    double ref_gain = 1.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "binary";
};

int run_generate(const GenerateArgs& args) {
    auto scheme = scheme_from_name(args.scheme);
    ChannelConfig channel;
    if (args.distance_cm) {
        channel.mode = ChannelMode::distance;
        channel.distance_cm = *args.distance_cm;
        channel.ref_distance_cm = args.ref_distance_cm;
        channel.path_exponent = args.path_exponent;
        channel.ref_gain = args.ref_gain;
        channel.noise_sigma = args.sigma;
    } else {
        channel.snr_db = args.snr_db;
    }
    int n = effective_n(scheme.kind, args.n);
    auto ds = build_dataset(scheme, n, args.k, channel, args.seed);
    save(ds, args.out,
         args.format == "text" ? DatasetFormat::text : DatasetFormat::binary);
    std::printf("wrote %d frames (scheme=%s n=%d snr_db=%.3f) to %s\n", ds.k(),
                std::string(scheme_name(ds.scheme.kind)).c_str(), ds.n,
                ds.snr_db(), args.out.c_str());
    return 0;
}

struct TrainArgs {
    std::string demod = "adaboost";
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    int epochs = 0;          // 0: per-demodulator default
    int pretrain_epochs = 0;
    int batch = 0;
    double rate = 0.0;
    std::vector<int> dbn_hidden;
    int q = 0;
};

int run_train(const TrainArgs& args) {
    auto demod = demod_from_name(args.demod);
    auto train_set = load(args.data);

    HyperParams hp;
    if (args.epochs > 0) {
        hp.cnn_epochs = args.epochs;
        hp.dbn_bp_epochs = args.epochs;
    }
    if (args.pretrain_epochs > 0) hp.dbn_pretrain_epochs = args.pretrain_epochs;
    if (args.batch > 0) {
        hp.cnn_batch = args.batch;
        hp.dbn_batch = args.batch;
    }
    if (args.rate > 0.0) {
        hp.cnn_rate = args.rate;
        hp.dbn_rate = args.rate;
    }
    if (!args.dbn_hidden.empty()) {
        if (args.dbn_hidden.size() != 3)
            throw Error("--dbn-hidden needs exactly three sizes");
        hp.dbn_hidden = {args.dbn_hidden[0], args.dbn_hidden[1],
                         args.dbn_hidden[2]};
    }
    if (args.q > 0) hp.adaboost_q = args.q;

    auto model = train_demodulator(demod, train_set, hp, args.seed);
    std::visit([&](const auto& m) { save_model(m, args.out); }, model);
    std::printf("trained %s on %d frames (%s), model written to %s\n",
                std::string(demod_name(demod)).c_str(), train_set.k(),
                std::string(scheme_name(train_set.scheme.kind)).c_str(),
                args.out.c_str());
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path) {
    auto model = load_model(model_path);
    auto test_set = load(data_path);
    double acc = evaluate(model, test_set);
    double abr = acc * test_set.scheme.bits_per_symbol;
    std::printf("accuracy=%.6f\naccurate_bit_rate=%.6f\n", acc, abr);
    return 0;
}

struct SweepArgs {
    std::string config;
    std::string out;
    bool timings = false;
    bool summary = false;
    // flag-level overrides
    std::vector<std::string> demods, schemes;
    std::string axis;
    std::vector<double> values;
    int trials = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double size_factor = 0.0;
    int n = 0;
    int epochs = 0;
    int q = 0;
    double snr_db = std::numeric_limits<double>::quiet_NaN();
};

int run_sweep_cmd(const SweepArgs& args) {
    SweepSpec spec;
    if (!args.config.empty())
        spec = parse_sweep_config(detail::read_file(args.config));
    if (!args.demods.empty()) {
        spec.demodulators.clear();
        for (const auto& d : args.demods)
            spec.demodulators.push_back(demod_from_name(d));
    }
    if (!args.schemes.empty()) {
        spec.schemes.clear();
        for (const auto& s : args.schemes)
            spec.schemes.push_back(scheme_from_name(s).kind);
    }
    if (!args.axis.empty()) spec.axis = args.axis;
    if (!args.values.empty()) spec.axis_values = args.values;
    if (args.trials > 0) spec.trials = args.trials;
    if (args.seed_set) spec.seed = args.seed;
    if (args.size_factor > 0.0) spec.size_factor = args.size_factor;
    if (args.n > 0) spec.n = args.n;
    if (args.epochs > 0) {
        spec.hp.cnn_epochs = args.epochs;
        spec.hp.dbn_bp_epochs = args.epochs;
    }
    if (args.q > 0) spec.hp.adaboost_q = args.q;
    if (!std::isnan(args.snr_db)) spec.snr_db = args.snr_db;

    auto rows = run_sweep(spec);
    if (args.out.empty()) {
        emit_csv(rows, std::cout, args.timings);
    } else {
        emit_csv(rows, args.out, args.timings);
        std::printf("wrote %zu rows to %s\n", rows.size(), args.out.c_str());
    }
    if (args.summary) std::fputs(summarize(rows).c_str(), stdout);
    return 0;
}

int run_raster_dump(const std::string& data_path, const std::string& out_dir,
                    int count) {
    auto ds = load(data_path);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    int total = count > 0 ? std::min(count, ds.k()) : ds.k();
    for (int i = 0; i < total; ++i) {
        auto img = visualize(ds.frames[std::size_t(i)]);
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%05d_label_%03d.pgm", i,
                      ds.frames[std::size_t(i)].label);
        write_pgm(img, (fs::path(out_dir) / name).string());
    }
    std::printf("wrote %d images to %s\n", total, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optical waveform demodulation toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "synthesize a dataset");
    generate->add_option("--scheme", gen.scheme, "modulation scheme")->required();
    generate->add_option("--n", gen.n, "samples per period");
    generate->add_option("--k", gen.k, "number of frames")->required();
    generate->add_option("--snr-db", gen.snr_db, "target SNR in dB");
    double distance_tmp = 0.0;
    auto* dist_opt = generate->add_option("--distance-cm", distance_tmp,
                                          "link distance (distance mode)");
    generate->add_option("--sigma", gen.sigma, "noise sigma (distance mode)");
    generate->add_option("--ref-distance-cm", gen.ref_distance_cm,
                         "reference distance");
    generate->add_option("--path-exponent", gen.path_exponent, "path exponent");
    generate->add_option("--ref-gain", gen.ref_gain, "gain at the reference");
    generate->add_option("--seed", gen.seed, "dataset seed");
    generate->add_option("--out", gen.out, "output file")->required();
    generate->add_option("--format", gen.format, "binary or text")
        ->check(CLI::IsMember({"binary", "text"}));

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "train a demodulator");
    train->add_option("--demod", tr.demod, "cnn, dbn, adaboost or mld")
        ->required();
    train->add_option("--data", tr.data, "training dataset file")->required();
    train->add_option("--out", tr.out, "model output file")->required();
    train->add_option("--seed", tr.seed, "training seed");
    train->add_option("--epochs", tr.epochs, "training epochs");
    train->add_option("--pretrain-epochs", tr.pretrain_epochs,
                      "DBN pretraining epochs");
    train->add_option("--batch", tr.batch, "mini-batch size");
    train->add_option("--rate", tr.rate, "learning rate");
    train->add_option("--dbn-hidden", tr.dbn_hidden,
                      "DBN hidden sizes (three values)");
    train->add_option("--q", tr.q, "AdaBoost rounds");

    std::string eval_model, eval_data;
    auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--data", eval_data, "dataset file")->required();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
    sweep->add_option("--config", sw.config, "key=value sweep config file");
    sweep->add_option("--demod", sw.demods, "demodulators");
    sweep->add_option("--scheme", sw.schemes, "schemes");
    sweep->add_option("--axis", sw.axis, "snr, distance, n, k or epochs");
    sweep->add_option("--values", sw.values, "axis values (increasing)");
    sweep->add_option("--trials", sw.trials, "trials per point");
    auto* seed_opt = sweep->add_option("--seed", sw.seed, "master seed");
    sweep->add_option("--size-factor", sw.size_factor,
                      "scale on the reference pool sizes");
    sweep->add_option("--n", sw.n, "samples per period");
    sweep->add_option("--snr-db", sw.snr_db, "fixed SNR for non-snr axes");
    sweep->add_option("--epochs", sw.epochs, "training epochs");
    sweep->add_option("--q", sw.q, "AdaBoost rounds");
    sweep->add_option("--out", sw.out, "CSV output path (stdout if omitted)");
    sweep->add_flag("--timings", sw.timings, "append a wall_time_s column");
    sweep->add_flag("--summary", sw.summary, "print a per-group summary");

    std::string dump_data, dump_out;
    int dump_count = 0;
    auto* dump = app.add_subcommand("raster-dump",
                                    "export frames as waveform images");
    dump->add_option("--data", dump_data, "dataset file")->required();
    dump->add_option("--out", dump_out, "output directory")->required();
    dump->add_option("--count", dump_count, "number of frames (0: all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) {
            if (*dist_opt) gen.distance_cm = distance_tmp;
            return run_generate(gen);
        }
        if (*train) return run_train(tr);
        if (*eval) return run_eval(eval_model, eval_data);
        if (*sweep) {
            sw.seed_set = seed_opt->count() > 0;
            return run_sweep_cmd(sw);
        }
        if (*dump) return run_raster_dump(dump_data, dump_out, dump_count);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
