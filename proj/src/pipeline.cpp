#include "gwkae/pipeline.hpp"

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>

#include "gwkae/errors.hpp"
#include "gwkae/model_io.hpp"
#include "gwkae/signal_io.hpp"

namespace gwkae {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path or_default(const fs::path& p, const fs::path& dir, const char* name) { return p.empty() ? dir / name : p; }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError("unknown config key '" + section + (section.empty() ? "" : ".") + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, fs::path& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
}

json grid_json(const BSplineGrid& g) {
    return {{"order", g.order}, {"intervals", g.intervals}, {"lo", g.lo}, {"hi", g.hi}};
}

json sim_params_json(const SimParams& p) {
    return {{"center_freq_hz", p.center_freq_hz},
            {"cycles", p.cycles},
            {"sample_rate_hz", p.sample_rate_hz},
            {"n_samples", p.n_samples},
            {"group_velocity_mm_s", p.group_velocity_mm_s},
            {"attenuation_per_mm", p.attenuation_per_mm},
            {"noise_sigma", p.noise_sigma},
            {"scatter_coeff", p.scatter_coeff},
            {"shadow_depth", p.shadow_depth},
            {"shadow_width", p.shadow_width}};
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(file.parent_path(), ec);
    }
}

void write_text(const fs::path& file, const std::string& text) {
    ensure_parent(file);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << text;
    if (!out) throw DataError("write failed for " + file.string());
}

json read_json(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + file.string() + ": " + e.what());
    }
}

// "1e-06" -> "1e-6"
std::string compact_number(double v) {
    std::string s = format_double(v);
    const auto e = s.find('e');
    if (e != std::string::npos) {
        std::size_t digits = e + 1;
        if (digits < s.size() && (s[digits] == '-' || s[digits] == '+')) ++digits;
        while (digits + 1 < s.size() && s[digits] == '0') s.erase(digits, 1);
    }
    return s;
}

std::vector<GWSignal> load_normalized(const fs::path& file, const SensorLayout& layout, double fs_hz) {
    return normalize_all(load_dataset(file, layout, fs_hz));
}

std::vector<int> repetitions_of(const std::vector<GWSignal>& signals) {
    std::set<int> reps;
    for (const auto& s : signals) reps.insert(s.repetition);
    return {reps.begin(), reps.end()};
}

std::map<int, double> load_thresholds(const fs::path& file, const SensorLayout& layout) {
    std::map<int, double> thr;
    try {
        thr = thresholds_from_json(read_json(file));
    } catch (const json::exception& e) {
        throw DataError("malformed thresholds file " + file.string() + ": " + e.what());
    }
    for (const auto& region : layout.regions()) {
        if (!thr.contains(region.id)) {
            throw DataError(file.string() + " has no threshold for region " + std::to_string(region.id));
        }
    }
    return thr;
}

std::vector<Point2> points_of(const json& arr, const char* what) {
    std::vector<Point2> out;
    for (const auto& d : arr) {
        out.push_back({d.at("x_mm").get<double>(), d.at("y_mm").get<double>()});
    }
    if (out.empty()) throw DataError(std::string("no ") + what + " to evaluate");
    return out;
}

std::vector<EvaluationPair> load_pairs(const fs::path& file, const std::string& column) {
    const json j = read_json(file);
    try {
        if (j.is_array()) return pairs_from_json(j);
        const auto& truth = j.at("truth");
        const auto& predictions = j.at("predictions");
        if (column.empty()) throw ConfigError("pairs file " + file.string() + " holds several columns; choose one");
        if (!predictions.contains(column)) throw ConfigError("pairs file has no column '" + column + "'");
        const auto& pred = predictions.at(column);
        if (pred.size() != truth.size()) throw DataError("column '" + column + "' length differs from truth");
        std::vector<EvaluationPair> pairs;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            pairs.push_back({{truth[i].at(0).get<double>(), truth[i].at(1).get<double>()},
                             {pred[i].at(0).get<double>(), pred[i].at(1).get<double>()}});
        }
        return pairs;
    } catch (const json::exception& e) {
        throw DataError("malformed pairs file " + file.string() + ": " + e.what());
    }
}

}  // namespace

void PipelineConfig::validate() const {
    train.validate();
    grid.validate();
    if (hidden_widths.empty()) throw ConfigError("hidden_widths must not be empty");
    for (int w : hidden_widths) {
        if (w < 1) throw ConfigError("hidden widths must be >= 1");
    }
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be > 0");
    if (measurement_repetition < 0) throw ConfigError("measurement_repetition must be >= 0");
    ImagingGrid{Rect{0.0, 0.0, 1.0, 1.0}, imaging.resolution_mm}.validate();
    imaging.mrapid.validate();
    if (imaging.peaks.max_peaks < 1 || !(imaging.peaks.min_separation_mm >= 0.0) ||
        !(imaging.peaks.rel_threshold >= 0.0 && imaging.peaks.rel_threshold <= 1.0)) {
        throw ConfigError("peak parameters out of range");
    }
    if (!(merge.distance_threshold_mm > 0.0)) throw ConfigError("merge distance must be > 0");
    if (!(metrics.L_mm > 0.0)) throw ConfigError("L_mm must be > 0");
    simulation.params.validate();
    if (simulation.repetitions < 1 || simulation.damaged_repetitions < 1) {
        throw ConfigError("simulation repetitions must be >= 1");
    }
}

fs::path PipelineConfig::layout_path() const { return or_default(layout_file, out_dir, "layout.json"); }
fs::path PipelineConfig::baseline_path() const { return or_default(baseline_csv, out_dir, "baseline.csv"); }
fs::path PipelineConfig::damaged_path() const { return or_default(damaged_csv, out_dir, "damaged.csv"); }
fs::path PipelineConfig::truth_path() const { return or_default(truth_file, out_dir, "truth.json"); }
fs::path PipelineConfig::model_path() const { return or_default(model_file, out_dir, "model.json"); }
fs::path PipelineConfig::thresholds_path() const { return or_default(thresholds_file, out_dir, "thresholds.json"); }
fs::path PipelineConfig::damages_path() const { return or_default(damages_file, out_dir, "damages.json"); }

json to_json(const PipelineConfig& cfg) {
    json damages = json::array();
    for (const auto& d : cfg.simulation.damages) {
        damages.push_back({{"x_mm", d.x_mm}, {"y_mm", d.y_mm}, {"diameter_mm", d.diameter_mm}});
    }
    const auto& sl = cfg.simulation.layout;
    return {
        {"seed", cfg.seed},
        {"out_dir", cfg.out_dir.string()},
        {"layout_file", cfg.layout_file.string()},
        {"baseline_csv", cfg.baseline_csv.string()},
        {"damaged_csv", cfg.damaged_csv.string()},
        {"calibration_csv", cfg.calibration_csv.string()},
        {"truth_file", cfg.truth_file.string()},
        {"model_file", cfg.model_file.string()},
        {"thresholds_file", cfg.thresholds_file.string()},
        {"damages_file", cfg.damages_file.string()},
        {"pairs_file", cfg.pairs_file.string()},
        {"pairs_column", cfg.pairs_column},
        {"sample_rate_hz", cfg.sample_rate_hz},
        {"model", {{"hidden_widths", cfg.hidden_widths}, {"reduction", to_string(cfg.reduction)},
                   {"grid", grid_json(cfg.grid)}}},
        {"train", {{"learning_rate", cfg.train.learning_rate},
                   {"batch_size", cfg.train.batch_size},
                   {"epochs", cfg.train.epochs},
                   {"weight_decay", cfg.train.weight_decay},
                   {"gamma", cfg.train.gamma},
                   {"split_fraction", cfg.train.split_fraction}}},
        {"measurement_repetition", cfg.measurement_repetition},
        {"imaging", {{"resolution_mm", cfg.imaging.resolution_mm},
                     {"r", cfg.imaging.mrapid.r},
                     {"top_k", cfg.imaging.mrapid.top_k ? json(*cfg.imaging.mrapid.top_k) : json(nullptr)},
                     {"max_peaks", cfg.imaging.peaks.max_peaks},
                     {"min_separation_mm", cfg.imaging.peaks.min_separation_mm},
                     {"rel_threshold", cfg.imaging.peaks.rel_threshold}}},
        {"merge", {{"distance_threshold_mm", cfg.merge.distance_threshold_mm}}},
        {"metrics", {{"L_mm", cfg.metrics.L_mm}}},
        {"simulation", {{"layout", {{"rows", sl.rows}, {"cols", sl.cols}, {"spacing_mm", sl.spacing_mm},
                                    {"region_size", sl.region_size}, {"region_stride", sl.region_stride}}},
                        {"params", sim_params_json(cfg.simulation.params)},
                        {"repetitions", cfg.simulation.repetitions},
                        {"damaged_repetitions", cfg.simulation.damaged_repetitions},
                        {"damages", damages}}},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    try {
        check_keys(j, {"seed", "out_dir", "layout_file", "baseline_csv", "damaged_csv", "calibration_csv", "truth_file",
                       "model_file", "thresholds_file", "damages_file", "pairs_file", "pairs_column", "sample_rate_hz",
                       "model", "train", "measurement_repetition", "imaging", "merge", "metrics", "simulation"},
                   "");
        read(j, "seed", c.seed);
        read_path(j, "out_dir", c.out_dir);
        read_path(j, "layout_file", c.layout_file);
        read_path(j, "baseline_csv", c.baseline_csv);
        read_path(j, "damaged_csv", c.damaged_csv);
        read_path(j, "calibration_csv", c.calibration_csv);
        read_path(j, "truth_file", c.truth_file);
        read_path(j, "model_file", c.model_file);
        read_path(j, "thresholds_file", c.thresholds_file);
        read_path(j, "damages_file", c.damages_file);
        read_path(j, "pairs_file", c.pairs_file);
        read(j, "pairs_column", c.pairs_column);
        read(j, "sample_rate_hz", c.sample_rate_hz);
        read(j, "measurement_repetition", c.measurement_repetition);
        if (j.contains("model")) {
            const auto& m = j.at("model");
            check_keys(m, {"hidden_widths", "reduction", "grid"}, "model");
            read(m, "hidden_widths", c.hidden_widths);
            if (m.contains("reduction")) c.reduction = reduction_from_string(m.at("reduction").get<std::string>());
            if (m.contains("grid")) {
                const auto& g = m.at("grid");
                check_keys(g, {"order", "intervals", "lo", "hi"}, "model.grid");
                read(g, "order", c.grid.order);
                read(g, "intervals", c.grid.intervals);
                read(g, "lo", c.grid.lo);
                read(g, "hi", c.grid.hi);
            }
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            check_keys(t, {"learning_rate", "batch_size", "epochs", "weight_decay", "gamma", "split_fraction"}, "train");
            read(t, "learning_rate", c.train.learning_rate);
            read(t, "batch_size", c.train.batch_size);
            read(t, "epochs", c.train.epochs);
            read(t, "weight_decay", c.train.weight_decay);
            read(t, "gamma", c.train.gamma);
            read(t, "split_fraction", c.train.split_fraction);
        }
        if (j.contains("imaging")) {
            const auto& im = j.at("imaging");
            check_keys(im, {"resolution_mm", "r", "top_k", "max_peaks", "min_separation_mm", "rel_threshold"},
                       "imaging");
            read(im, "resolution_mm", c.imaging.resolution_mm);
            read(im, "r", c.imaging.mrapid.r);
            if (im.contains("top_k") && !im.at("top_k").is_null()) c.imaging.mrapid.top_k = im.at("top_k").get<int>();
            read(im, "max_peaks", c.imaging.peaks.max_peaks);
            read(im, "min_separation_mm", c.imaging.peaks.min_separation_mm);
            read(im, "rel_threshold", c.imaging.peaks.rel_threshold);
        }
        if (j.contains("merge")) {
            check_keys(j.at("merge"), {"distance_threshold_mm"}, "merge");
            read(j.at("merge"), "distance_threshold_mm", c.merge.distance_threshold_mm);
        }
        if (j.contains("metrics")) {
            check_keys(j.at("metrics"), {"L_mm"}, "metrics");
            read(j.at("metrics"), "L_mm", c.metrics.L_mm);
        }
        if (j.contains("simulation")) {
            const auto& s = j.at("simulation");
            check_keys(s, {"layout", "params", "repetitions", "damaged_repetitions", "damages"}, "simulation");
            if (s.contains("layout")) {
                const auto& l = s.at("layout");
                check_keys(l, {"rows", "cols", "spacing_mm", "region_size", "region_stride"}, "simulation.layout");
                read(l, "rows", c.simulation.layout.rows);
                read(l, "cols", c.simulation.layout.cols);
                read(l, "spacing_mm", c.simulation.layout.spacing_mm);
                read(l, "region_size", c.simulation.layout.region_size);
                read(l, "region_stride", c.simulation.layout.region_stride);
            }
            if (s.contains("params")) {
                const auto& p = s.at("params");
                check_keys(p, {"center_freq_hz", "cycles", "sample_rate_hz", "n_samples", "group_velocity_mm_s",
                               "attenuation_per_mm", "noise_sigma", "scatter_coeff", "shadow_depth", "shadow_width"},
                           "simulation.params");
                auto& sp = c.simulation.params;
                read(p, "center_freq_hz", sp.center_freq_hz);
                read(p, "cycles", sp.cycles);
                read(p, "sample_rate_hz", sp.sample_rate_hz);
                read(p, "n_samples", sp.n_samples);
                read(p, "group_velocity_mm_s", sp.group_velocity_mm_s);
                read(p, "attenuation_per_mm", sp.attenuation_per_mm);
                read(p, "noise_sigma", sp.noise_sigma);
                read(p, "scatter_coeff", sp.scatter_coeff);
                read(p, "shadow_depth", sp.shadow_depth);
                read(p, "shadow_width", sp.shadow_width);
            }
            read(s, "repetitions", c.simulation.repetitions);
            read(s, "damaged_repetitions", c.simulation.damaged_repetitions);
            if (s.contains("damages")) {
                c.simulation.damages.clear();
                for (const auto& d : s.at("damages")) {
                    check_keys(d, {"x_mm", "y_mm", "diameter_mm"}, "simulation.damages[]");
                    DamageSpec spec;
                    read(d, "x_mm", spec.x_mm);
                    read(d, "y_mm", spec.y_mm);
                    read(d, "diameter_mm", spec.diameter_mm);
                    c.simulation.damages.push_back(spec);
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

PipelineConfig load_config(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed config file " + file.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : to_json(cfg).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

void cmd_simulate(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto& sl = cfg.simulation.layout;
    const SensorLayout layout = cfg.layout_file.empty()
                                    ? grid_layout(sl.rows, sl.cols, sl.spacing_mm, sl.region_size, sl.region_stride)
                                    : load_layout(cfg.layout_file);
    SimParams params = cfg.simulation.params;
    params.seed = cfg.seed;
    const Scenario sc = generate_scenario(layout, cfg.simulation.damages, cfg.simulation.repetitions, params,
                                          cfg.simulation.damaged_repetitions);
    write_scenario(sc, layout, cfg.out_dir);
    log << "simulated " << layout.all_region_paths().size() << " paths x " << cfg.simulation.repetitions
        << " baseline repetitions, " << sc.truth.size() << " damage(s) -> " << cfg.out_dir.string() << '\n';
}

void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto& t = cfg.train;
    log << "lr=" << compact_number(t.learning_rate) << " batch=" << t.batch_size << " epochs=" << t.epochs
        << " wd=" << compact_number(t.weight_decay) << " gamma=" << compact_number(t.gamma) << '\n';

    const SensorLayout layout = load_layout(cfg.layout_path());
    const auto baselines = load_normalized(cfg.baseline_path(), layout, cfg.sample_rate_hz);
    if (baselines.empty()) throw DataError("no baseline signals in " + cfg.baseline_path().string());

    std::vector<int> widths{static_cast<int>(baselines.front().samples.size())};
    widths.insert(widths.end(), cfg.hidden_widths.begin(), cfg.hidden_widths.end());
    KAEModel model = KAEModel::random(widths, cfg.grid, cfg.seed, cfg.reduction);

    TrainConfig tc = t;
    tc.seed = cfg.seed;
    std::string history = "epoch,train_loss,val_loss\n";
    train(model, baselines, tc, [&](int epoch, double tl, double vl) {
        history += std::to_string(epoch) + "," + format_double(tl) + "," + format_double(vl) + "\n";
        log << "epoch " << epoch << " train_loss=" << format_double(tl) << " val_loss=" << format_double(vl) << '\n';
    });
    ensure_parent(cfg.model_path());
    save_model(model, cfg.model_path());
    write_text(cfg.out_dir / "history.csv", history);
    log << "model -> " << cfg.model_path().string() << '\n';
}

void cmd_calibrate(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    const SensorLayout layout = load_layout(cfg.layout_path());
    const KAEModel model = load_model(cfg.model_path());
    std::vector<GWSignal> pristine;
    std::vector<int> reps;
    if (!cfg.calibration_csv.empty()) {
        pristine = load_normalized(cfg.calibration_csv, layout, cfg.sample_rate_hz);
        reps = repetitions_of(pristine);
    } else {
        pristine = load_normalized(cfg.baseline_path(), layout, cfg.sample_rate_hz);
        const auto split = split_dataset(pristine, cfg.train.split_fraction);
        std::set<int> held_out;
        for (std::size_t i : split.validation) held_out.insert(pristine[i].repetition);
        reps.assign(held_out.begin(), held_out.end());
    }
    const auto sets = score_all(model, layout, pristine, reps);
    const auto thresholds = calibrate_thresholds(layout, sets);
    write_text(cfg.thresholds_path(), thresholds_to_json(thresholds).dump(2) + "\n");
    for (const auto& [id, thr] : thresholds) {
        log << "region " << id << " ThrV=" << format_double(thr) << '\n';
    }
    log << "calibrated on " << reps.size() << " pristine repetition(s) -> " << cfg.thresholds_path().string()
        << '\n';
}

bool cmd_detect(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    const SensorLayout layout = load_layout(cfg.layout_path());
    const KAEModel model = load_model(cfg.model_path());
    const auto thresholds = load_thresholds(cfg.thresholds_path(), layout);
    const auto signals = load_normalized(cfg.damaged_path(), layout, cfg.sample_rate_hz);
    json reports = json::array();
    bool any = false;
    for (const auto& region : layout.regions()) {
        const auto set = score_region(model, layout, region, signals, cfg.measurement_repetition);
        const auto report = detect(set, thresholds);
        any = any || report.damaged;
        reports.push_back(to_json(report));
        log << "region " << report.region_id << " HI=" << format_double(report.hi)
            << " ThrV=" << format_double(report.threshold) << (report.damaged ? " damaged" : " pristine") << '\n';
    }
    write_text(cfg.out_dir / "health.json", reports.dump(2) + "\n");
    return any;
}

void cmd_localize(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    const SensorLayout layout = load_layout(cfg.layout_path());
    const KAEModel model = load_model(cfg.model_path());
    const auto thresholds = load_thresholds(cfg.thresholds_path(), layout);
    const auto signals = load_normalized(cfg.damaged_path(), layout, cfg.sample_rate_hz);
    const auto result = localize_all(layout, signals, cfg.measurement_repetition, model, thresholds, cfg.imaging);

    ensure_parent(cfg.out_dir / "map");
    for (const auto& outcome : result.regions) {
        if (!outcome.map) continue;
        const std::string stem = "map_region_" + std::to_string(outcome.report.region_id);
        write_map_csv(*outcome.map, cfg.out_dir / (stem + ".csv"));
        write_map_pgm(*outcome.map, cfg.out_dir / (stem + ".pgm"));
        log << "region " << outcome.report.region_id << " imaged, " << outcome.map->peaks.size() << " peak(s)\n";
    }
    const auto finals = merge_duplicates(result.candidates, cfg.merge);
    const json out{{"damages", to_json(finals)}, {"candidates", candidates_to_json(result.candidates)}};
    write_text(cfg.damages_path(), out.dump(2) + "\n");
    for (const auto& d : finals) {
        log << "damage at (" << format_double(d.x_mm) << ", " << format_double(d.y_mm) << ") mm\n";
    }
    log << result.candidates.size() << " candidate(s), " << finals.size() << " final damage(s) -> "
        << cfg.damages_path().string() << '\n';
}

EvaluationReport cmd_evaluate(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::vector<EvaluationPair> pairs;
    if (!cfg.pairs_file.empty()) {
        pairs = load_pairs(cfg.pairs_file, cfg.pairs_column);
    } else {
        const json truth = read_json(cfg.truth_path());
        const json damages = read_json(cfg.damages_path());
        try {
            pairs = match_predictions(points_of(truth.at("damages"), "true damages"),
                                      points_of(damages.at("damages"), "predicted damages"));
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed truth or damages file: ") + e.what());
        }
    }
    const auto report = evaluate(pairs, cfg.metrics);
    write_text(cfg.out_dir / "evaluation.json", to_json(report).dump(2) + "\n");
    log << "n=" << report.n << " rmse_mm=" << format_double(report.rmse_mm)
        << " mre_percent=" << format_double(report.mre_percent) << '\n';
    return report;
}

}  // namespace gwkae
