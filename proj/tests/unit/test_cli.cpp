#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gwkae/cli.hpp"
#include "gwkae/pipeline.hpp"

using namespace gwkae;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gwkae");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// 2x2 sensors, six paths, 400 samples at 1 MHz and a tiny autoencoder.
fs::path tiny_config(const std::string& name, const nlohmann::json& extra = nlohmann::json::object()) {
    const auto dir = fs::temp_directory_path() / "gwkae_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    nlohmann::json cfg = {
        {"seed", 3},
        {"out_dir", dir.string()},
        {"sample_rate_hz", 1e6},
        {"model", {{"hidden_widths", {8, 4, 2}}}},
        {"simulation",
         {{"layout", {{"rows", 2}, {"cols", 2}, {"spacing_mm", 100}, {"region_size", 2}, {"region_stride", 1}}},
          {"params", {{"sample_rate_hz", 1e6}, {"n_samples", 400}}},
          {"repetitions", 10},
          {"damages", {{{"x_mm", 50}, {"y_mm", 2}, {"diameter_mm", 10}}}}}},
    };
    cfg.merge_patch(extra);
    std::ofstream(dir / "config.json") << cfg.dump(2);
    return dir;
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
    EXPECT_EQ(cli({"train", "--no-such-flag"}).code, kExitUsage);
    EXPECT_EQ(cli({"train", "--epochs", "abc"}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MissingLayoutFileNamesPath) {
    const auto dir = tiny_config("missing_layout", {{"layout_file", "/no/such/layout.json"}});
    const auto r = cli({"simulate", "--config", (dir / "config.json").string()});
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("/no/such/layout.json"), std::string::npos) << r.err;
}

TEST(Cli, BadConfigIsDataError) {
    const auto dir = tiny_config("bad_config", {{"train", {{"batch_size", 0}}}});
    EXPECT_EQ(cli({"simulate", "--config", (dir / "config.json").string()}).code, kExitData);
    const auto dir2 = tiny_config("unknown_key", {{"colour", "red"}});
    EXPECT_EQ(cli({"simulate", "--config", (dir2 / "config.json").string()}).code, kExitData);
    EXPECT_EQ(cli({"simulate", "--config", "/no/such/config.json"}).code, kExitData);
}

TEST(Cli, SimulateIsReproducible) {
    const auto dir = tiny_config("simulate");
    const auto cfg = (dir / "config.json").string();
    const auto r = cli({"simulate", "--config", cfg});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("config_hash="), std::string::npos);
    EXPECT_NE(r.out.find("seed=3"), std::string::npos);
    for (const char* f : {"baseline.csv", "damaged.csv", "truth.json", "layout.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto first = slurp(dir / "baseline.csv");
    const auto first_damaged = slurp(dir / "damaged.csv");
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    EXPECT_EQ(slurp(dir / "baseline.csv"), first);
    EXPECT_EQ(slurp(dir / "damaged.csv"), first_damaged);
    ASSERT_EQ(cli({"simulate", "--config", cfg, "--seed", "4"}).code, kExitOk);
    EXPECT_NE(slurp(dir / "baseline.csv"), first);
}

TEST(Cli, SeedOverrideChangesHash) {
    PipelineConfig a;
    PipelineConfig b;
    b.seed = 1;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a), config_hash(config_from_json(to_json(a))));
}

TEST(Cli, TrainZeroEpochsPersistsInitialModel) {
    const auto dir = tiny_config("epochs0");
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    const auto r = cli({"train", "--config", cfg, "--epochs", "0"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(slurp(dir / "history.csv"), "epoch,train_loss,val_loss\n");
    ASSERT_TRUE(fs::exists(dir / "model.json"));
    const auto once = slurp(dir / "model.json");
    ASSERT_EQ(cli({"train", "--config", cfg, "--epochs", "0"}).code, kExitOk);
    EXPECT_EQ(slurp(dir / "model.json"), once);
}

TEST(Cli, FullPipelineWithDefaultTraining) {
    const auto dir = tiny_config("pipeline");
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    const auto t = cli({"train", "--config", cfg});
    ASSERT_EQ(t.code, kExitOk) << t.err;
    EXPECT_NE(t.out.find("lr=0.001 batch=16 epochs=100 wd=1e-6 gamma=0.95"), std::string::npos) << t.out;

    std::ifstream hist(dir / "history.csv");
    std::string line;
    std::getline(hist, line);
    EXPECT_EQ(line, "epoch,train_loss,val_loss");
    std::vector<double> val;
    while (std::getline(hist, line)) val.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    ASSERT_EQ(val.size(), 100u);
    EXPECT_LT(val.back(), val.front());

    ASSERT_EQ(cli({"calibrate", "--config", cfg}).code, kExitOk);
    const auto thr = nlohmann::json::parse(slurp(dir / "thresholds.json"));
    EXPECT_EQ(thr.at("thresholds").size(), 1u);

    ASSERT_EQ(cli({"detect", "--config", cfg}).code, kExitOk);
    const auto health = nlohmann::json::parse(slurp(dir / "health.json"));
    ASSERT_EQ(health.size(), 1u);
    EXPECT_EQ(health[0].at("per_path").size(), 6u);

    ASSERT_EQ(cli({"localize", "--config", cfg, "--top-k", "9"}).code, kExitOk);
    const auto dmg = nlohmann::json::parse(slurp(dir / "damages.json"));
    EXPECT_TRUE(dmg.contains("damages"));
    EXPECT_TRUE(dmg.contains("candidates"));
}

TEST(Cli, FailOnDamageExitCode) {
    const auto dir = tiny_config("fail_on_damage");
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    ASSERT_EQ(cli({"train", "--config", cfg, "--epochs", "1"}).code, kExitOk);
    // a negative threshold marks every region damaged
    std::ofstream(dir / "thresholds.json") << R"({"thresholds": [{"region_id": 1, "ThrV": -1.0}]})";
    EXPECT_EQ(cli({"detect", "--config", cfg}).code, kExitOk);
    EXPECT_EQ(cli({"detect", "--config", cfg, "--fail-on-damage"}).code, kExitDamageFound);
    std::ofstream(dir / "thresholds.json") << R"({"thresholds": [{"region_id": 7, "ThrV": 1.0}]})";
    EXPECT_EQ(cli({"detect", "--config", cfg}).code, kExitData);
}

TEST(Cli, DivergentTrainingIsNumericFailure) {
    const auto dir = tiny_config("diverge", {{"train", {{"learning_rate", 1e300}}}});
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    const auto r = cli({"train", "--config", cfg, "--epochs", "5"});
    EXPECT_EQ(r.code, kExitNumeric) << r.out << r.err;
}

TEST(Cli, MissingInputsAreDataErrors) {
    const auto dir = tiny_config("missing_inputs");
    const auto cfg = (dir / "config.json").string();
    EXPECT_EQ(cli({"train", "--config", cfg}).code, kExitData);
    EXPECT_EQ(cli({"calibrate", "--config", cfg}).code, kExitData);
    EXPECT_EQ(cli({"evaluate", "--config", cfg}).code, kExitData);
}

TEST(Cli, EvaluateReferencePairs) {
    const auto dir = tiny_config("evaluate");
    const std::string pairs = std::string(GWKAE_FIXTURE_DIR) + "/reference_pairs.json";
    const auto cfg = (dir / "config.json").string();
    const auto r = cli({"evaluate", "--config", cfg, "--pairs", pairs, "--column", "kae_mrapid"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rep = nlohmann::json::parse(slurp(dir / "evaluation.json"));
    EXPECT_EQ(rep.at("n"), 8);
    EXPECT_NEAR(rep.at("rmse_mm").get<double>(), 14.20, 0.05);
    EXPECT_NEAR(rep.at("mre_percent").get<double>(), 5.51, 0.01);
    EXPECT_EQ(rep.at("L_mm"), 200.0);
    EXPECT_TRUE(rep.at("mape_percent").is_number());
    EXPECT_EQ(cli({"evaluate", "--config", cfg, "--pairs", pairs}).code, kExitData);
    ASSERT_EQ(cli({"evaluate", "--config", cfg, "--pairs", pairs, "--column", "rapid", "--L", "100"}).code, kExitOk);
    const auto rapid = nlohmann::json::parse(slurp(dir / "evaluation.json"));
    EXPECT_NEAR(rapid.at("rmse_mm").get<double>(), 42.43, 0.05);
    EXPECT_EQ(rapid.at("L_mm"), 100.0);
}

TEST(Cli, EvaluateAgainstTruth) {
    const auto dir = tiny_config("evaluate_truth");
    std::ofstream(dir / "truth.json") << R"({"damages": [{"x_mm": 10, "y_mm": 20, "diameter_mm": 5}]})";
    std::ofstream(dir / "damages.json")
        << R"({"damages": [{"x_mm": 13, "y_mm": 24, "score": 1, "contributing_regions": [1]}], "candidates": []})";
    ASSERT_EQ(cli({"evaluate", "--config", (dir / "config.json").string()}).code, kExitOk);
    const auto rep = nlohmann::json::parse(slurp(dir / "evaluation.json"));
    EXPECT_DOUBLE_EQ(rep.at("rmse_mm").get<double>(), 5.0);
}

TEST(Cli, DetectOnPristineDataFlagsNothing) {
    const auto dir = tiny_config("pristine", {{"model", {{"hidden_widths", {32, 16, 4}}}},
                                              {"train", {{"epochs", 30}}},
                                              {"simulation",
                                               {{"layout", {{"rows", 3}, {"cols", 3}, {"spacing_mm", 150}, {"region_size", 3}}},
                                                {"params", {{"n_samples", 500}}},
                                                {"repetitions", 20},
                                                {"damages", nlohmann::json::array()}}}});
    const auto cfg = (dir / "config.json").string();
    for (const char* c : {"simulate", "train", "calibrate"}) ASSERT_EQ(cli({c, "--config", cfg}).code, kExitOk) << c;
    EXPECT_EQ(cli({"detect", "--config", cfg, "--fail-on-damage"}).code, kExitOk);
    for (const auto& r : nlohmann::json::parse(slurp(dir / "health.json"))) EXPECT_FALSE(r.at("damaged").get<bool>());
}

TEST(Cli, LocalizeCreatesFreshOutputDirectory) {
    const auto dir = tiny_config("fresh_out");
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(cli({"simulate", "--config", cfg}).code, kExitOk);
    ASSERT_EQ(cli({"train", "--config", cfg, "--epochs", "1"}).code, kExitOk);
    std::ofstream(dir / "thresholds.json") << R"({"thresholds": [{"region_id": 1, "ThrV": -1.0}]})";

    const auto out = dir / "nested" / "maps";
    const auto cfg2 = tiny_config("fresh_out_inputs", {{"layout_file", (dir / "layout.json").string()},
                                                      {"damaged_csv", (dir / "damaged.csv").string()},
                                                      {"model_file", (dir / "model.json").string()},
                                                      {"thresholds_file", (dir / "thresholds.json").string()}});
    const auto r = cli({"localize", "--config", (cfg2 / "config.json").string(), "--out", out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(out / "map_region_1.csv"));
    EXPECT_TRUE(fs::exists(out / "map_region_1.pgm"));
    EXPECT_TRUE(fs::exists(out / "damages.json"));
}
