#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace gwkae {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct EvaluationPair {
    Point2 truth;
    Point2 prediction;
};

struct MetricConfig {
    double L_mm = 200.0;  // characteristic length normalising MRE
};

// sqrt(mean ||pred - truth||^2), mm.
double rmse(std::span<const EvaluationPair> pairs);
// mean(||pred - truth|| / L) * 100, percent.
double mre(std::span<const EvaluationPair> pairs, const MetricConfig& cfg = {});
// Mean of |pred - truth| / |truth| over both coordinates of every pair, percent.
double mape(std::span<const EvaluationPair> pairs);

struct EvaluationReport {
    std::size_t n = 0;
    double rmse_mm = 0.0;
    double mre_percent = 0.0;
    std::optional<double> mape_percent;  // empty when a true coordinate is 0
    double L_mm = 0.0;
};

EvaluationReport evaluate(std::span<const EvaluationPair> pairs, const MetricConfig& cfg = {});
nlohmann::json to_json(const EvaluationReport& report);

// Greedy nearest matching of predictions to truths (globally smallest
// distance first). Unmatched truths/predictions are left out.
std::vector<EvaluationPair> match_predictions(const std::vector<Point2>& truths, const std::vector<Point2>& predictions);

// Reads [{"truth": [x, y], "prediction": [x, y]}, ...].
std::vector<EvaluationPair> pairs_from_json(const nlohmann::json& j);

}  // namespace gwkae
