#include "gwkae/cli.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gwkae/errors.hpp"
#include "gwkae/pipeline.hpp"

namespace gwkae {

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch;
    std::optional<double> grid_res;
    std::optional<int> top_k;
    std::optional<double> r;
    std::optional<double> merge_threshold;
    std::optional<double> L;
    std::optional<std::string> out;
    std::optional<std::string> pairs;
    std::optional<std::string> column;
    bool fail_on_damage = false;
};

PipelineConfig resolve(const Overrides& o) {
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.lr) cfg.train.learning_rate = *o.lr;
    if (o.batch) cfg.train.batch_size = *o.batch;
    if (o.grid_res) cfg.imaging.resolution_mm = *o.grid_res;
    if (o.top_k) cfg.imaging.mrapid.top_k = *o.top_k;
    if (o.r) cfg.imaging.mrapid.r = *o.r;
    if (o.merge_threshold) cfg.merge.distance_threshold_mm = *o.merge_threshold;
    if (o.L) cfg.metrics.L_mm = *o.L;
    if (o.out) cfg.out_dir = *o.out;
    if (o.pairs) cfg.pairs_file = *o.pairs;
    if (o.column) cfg.pairs_column = *o.column;
    cfg.validate();
    return cfg;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Baseline-free guided-wave damage detection and localization"};
    app.require_subcommand(1, 1);
    Overrides o;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "pipeline config (JSON)");
        sub->add_option("--seed", o.seed, "seed for every random stream");
        sub->add_option("--out", o.out, "output directory");
    };
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
    auto* train = app.add_subcommand("train", "train the autoencoder on baseline signals");
    auto* calibrate = app.add_subcommand("calibrate", "calibrate per-region thresholds on pristine data");
    auto* detect = app.add_subcommand("detect", "health report per region");
    auto* localize = app.add_subcommand("localize", "damage maps and merged damage locations");
    auto* evaluate = app.add_subcommand("evaluate", "localization metrics against ground truth");
    for (auto* sub : {simulate, train, calibrate, detect, localize, evaluate}) add_common(sub);

    train->add_option("--epochs", o.epochs);
    train->add_option("--lr", o.lr);
    train->add_option("--batch", o.batch);
    detect->add_flag("--fail-on-damage", o.fail_on_damage, "exit 4 when any region is damaged");
    localize->add_option("--grid-res", o.grid_res, "pixel size, mm");
    localize->add_option("--top-k", o.top_k, "image with the k largest-DI paths only");
    localize->add_option("--r", o.r, "ellipse width parameter");
    localize->add_option("--merge-threshold", o.merge_threshold, "duplicate merge distance, mm");
    evaluate->add_option("--L", o.L, "characteristic length for MRE, mm");
    evaluate->add_option("--pairs", o.pairs, "JSON file of (truth, prediction) pairs");
    evaluate->add_option("--column", o.column, "prediction column of a multi-column pairs file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    try {
        const PipelineConfig cfg = resolve(o);
        const std::string name = app.get_subcommands().front()->get_name();
        out << "gwkae " << name << " config_hash=" << hex64(config_hash(cfg)) << " seed=" << cfg.seed << '\n';
        if (name == "simulate") {
            cmd_simulate(cfg, out);
        } else if (name == "train") {
            cmd_train(cfg, out);
        } else if (name == "calibrate") {
            cmd_calibrate(cfg, out);
        } else if (name == "detect") {
            const bool damaged = cmd_detect(cfg, out);
            if (damaged && o.fail_on_damage) return kExitDamageFound;
        } else if (name == "localize") {
            cmd_localize(cfg, out);
        } else {
            cmd_evaluate(cfg, out);
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainingError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return kExitNumeric;
    }
}

}  // namespace gwkae
