#include "gwkae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gwkae/errors.hpp"

namespace gwkae {

namespace {

void require_pairs(std::span<const EvaluationPair> pairs) {
    if (pairs.empty()) {
        throw UsageError("metrics need at least one (truth, prediction) pair");
    }
    for (const auto& p : pairs) {
        if (!std::isfinite(p.truth.x) || !std::isfinite(p.truth.y) || !std::isfinite(p.prediction.x) ||
            !std::isfinite(p.prediction.y)) {
            throw DataError("evaluation pair with non-finite coordinates");
        }
    }
}

double distance(const EvaluationPair& p) { return std::hypot(p.prediction.x - p.truth.x, p.prediction.y - p.truth.y); }

}  // namespace

double rmse(std::span<const EvaluationPair> pairs) {
    require_pairs(pairs);
    double acc = 0.0;
    for (const auto& p : pairs) {
        const double dx = p.prediction.x - p.truth.x;
        const double dy = p.prediction.y - p.truth.y;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(pairs.size()));
}

double mre(std::span<const EvaluationPair> pairs, const MetricConfig& cfg) {
    require_pairs(pairs);
    if (!(cfg.L_mm > 0.0)) {
        throw ConfigError("MRE length L must be > 0");
    }
    double acc = 0.0;
    for (const auto& p : pairs) acc += distance(p) / cfg.L_mm;
    return 100.0 * acc / static_cast<double>(pairs.size());
}

double mape(std::span<const EvaluationPair> pairs) {
    require_pairs(pairs);
    double acc = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (p.truth.x == 0.0 || p.truth.y == 0.0) {
            throw DataError("MAPE undefined: pair " + std::to_string(i) + " has a zero true coordinate");
        }
        acc += std::abs((p.prediction.x - p.truth.x) / p.truth.x);
        acc += std::abs((p.prediction.y - p.truth.y) / p.truth.y);
    }
    return 100.0 * acc / (2.0 * static_cast<double>(pairs.size()));
}

EvaluationReport evaluate(std::span<const EvaluationPair> pairs, const MetricConfig& cfg) {
    EvaluationReport r;
    r.n = pairs.size();
    r.rmse_mm = rmse(pairs);
    r.mre_percent = mre(pairs, cfg);
    try {
        r.mape_percent = mape(pairs);
    } catch (const DataError&) {
        r.mape_percent.reset();
    }
    r.L_mm = cfg.L_mm;
    return r;
}

nlohmann::json to_json(const EvaluationReport& report) {
    return {{"n", report.n},
            {"rmse_mm", report.rmse_mm},
            {"mre_percent", report.mre_percent},
            {"mape_percent", report.mape_percent ? nlohmann::json(*report.mape_percent) : nlohmann::json(nullptr)},
            {"L_mm", report.L_mm}};
}

std::vector<EvaluationPair> match_predictions(const std::vector<Point2>& truths, const std::vector<Point2>& predictions) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    for (std::size_t t = 0; t < truths.size(); ++t) {
        for (std::size_t p = 0; p < predictions.size(); ++p) {
            edges.emplace_back(std::hypot(truths[t].x - predictions[p].x, truths[t].y - predictions[p].y), t, p);
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<bool> used_t(truths.size(), false);
    std::vector<bool> used_p(predictions.size(), false);
    std::vector<std::pair<std::size_t, EvaluationPair>> matched;
    for (const auto& [d, t, p] : edges) {
        if (used_t[t] || used_p[p]) continue;
        used_t[t] = used_p[p] = true;
        matched.push_back({t, {truths[t], predictions[p]}});
    }
    std::sort(matched.begin(), matched.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EvaluationPair> out;
    for (auto& [t, pair] : matched) out.push_back(pair);
    return out;
}

std::vector<EvaluationPair> pairs_from_json(const nlohmann::json& j) {
    std::vector<EvaluationPair> out;
    try {
        for (const auto& e : j) {
            const auto& t = e.at("truth");
            const auto& p = e.at("prediction");
            out.push_back({{t.at(0).get<double>(), t.at(1).get<double>()}, {p.at(0).get<double>(), p.at(1).get<double>()}});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed evaluation pairs: ") + e.what());
    }
    return out;
}

}  // namespace gwkae
