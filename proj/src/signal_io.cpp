#include "gwkae/signal_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "gwkae/errors.hpp"

namespace gwkae {

namespace {

using nlohmann::json;

std::string row_ctx(std::size_t row) { return "row " + std::to_string(row); }

template <typename T>
T parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
        cell.remove_suffix(1);
    }
    T value{};
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw DataError(row_ctx(row) + ", column " + std::to_string(col) + ": non-numeric cell '" +
                        std::string(cell) + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw DataError("cannot format value");
    }
    return std::string(buf, ptr);
}

SensorLayout load_layout(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open layout file " + file.string());
    }
    json j;
    try {
        in >> j;
        std::vector<Sensor> sensors;
        for (const auto& s : j.at("sensors")) {
            sensors.push_back({s.at("id").get<int>(), s.at("x_mm").get<double>(), s.at("y_mm").get<double>()});
        }
        std::vector<Region> regions;
        for (const auto& r : j.at("regions")) {
            Region reg;
            reg.id = r.at("id").get<int>();
            reg.sensor_ids = r.at("sensor_ids").get<std::vector<int>>();
            const auto& b = r.at("bounds");
            reg.bounds = {b.at("x0").get<double>(), b.at("y0").get<double>(), b.at("x1").get<double>(),
                          b.at("y1").get<double>()};
            regions.push_back(std::move(reg));
        }
        return SensorLayout(std::move(sensors), std::move(regions));
    } catch (const json::exception& e) {
        throw ConfigError("malformed layout file " + file.string() + ": " + e.what());
    }
}

void save_layout(const SensorLayout& layout, const std::filesystem::path& file) {
    json j;
    j["sensors"] = json::array();
    for (const auto& s : layout.sensors()) {
        j["sensors"].push_back({{"id", s.id}, {"x_mm", s.x_mm}, {"y_mm", s.y_mm}});
    }
    j["regions"] = json::array();
    for (const auto& r : layout.regions()) {
        j["regions"].push_back({{"id", r.id},
                                {"sensor_ids", r.sensor_ids},
                                {"bounds", {{"x0", r.bounds.x0}, {"y0", r.bounds.y0}, {"x1", r.bounds.x1}, {"y1", r.bounds.y1}}}});
    }
    std::ofstream out(file);
    if (!out) {
        throw ConfigError("cannot write layout file " + file.string());
    }
    out << j.dump(2) << '\n';
}

std::vector<GWSignal> load_dataset(const std::filesystem::path& file, const SensorLayout& layout,
                                   double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) {
        throw ConfigError("sample rate must be positive");
    }
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open signal file " + file.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(file.string() + ": missing header row");
    }
    if (!line.starts_with("actuator_id,sensor_id,repetition")) {
        throw DataError(file.string() + ": header must start with actuator_id,sensor_id,repetition");
    }

    std::vector<GWSignal> signals;
    std::size_t width = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        while (true) {
            auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cells.size() < 4) {
            throw DataError(row_ctx(row) + ": expected ids, repetition and at least one sample");
        }
        const std::size_t m = cells.size() - 3;
        if (width == 0) {
            width = m;
        } else if (m != width) {
            throw DataError(row_ctx(row) + ": ragged row with " + std::to_string(m) + " samples, expected " +
                            std::to_string(width));
        }
        const int a = parse_cell<int>(cells[0], row, 0);
        const int b = parse_cell<int>(cells[1], row, 1);
        for (int id : {a, b}) {
            if (!layout.has_sensor(id)) {
                throw DataError(row_ctx(row) + ": unknown sensor id " + std::to_string(id));
            }
        }
        if (a == b) {
            throw DataError(row_ctx(row) + ": actuator and sensor are both " + std::to_string(a));
        }
        GWSignal sig;
        sig.path = canonical_path(a, b);
        sig.repetition = parse_cell<int>(cells[2], row, 2);
        sig.sample_rate_hz = sample_rate_hz;
        sig.samples.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            sig.samples[k] = parse_cell<double>(cells[k + 3], row, k + 3);
            if (!std::isfinite(sig.samples[k])) {
                throw DataError(row_ctx(row) + ": non-finite sample in column " + std::to_string(k + 3));
            }
        }
        signals.push_back(std::move(sig));
    }
    return signals;
}

void write_dataset(const std::vector<GWSignal>& signals, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw DataError("cannot write signal file " + file.string());
    }
    const std::size_t m = signals.empty() ? 0 : signals.front().samples.size();
    std::string buf = "actuator_id,sensor_id,repetition";
    for (std::size_t k = 0; k < m; ++k) {
        buf += ",s" + std::to_string(k);
    }
    buf += '\n';
    out << buf;
    for (const auto& s : signals) {
        if (s.samples.size() != m) {
            throw DataError("dataset rows must share one sample count");
        }
        buf.clear();
        buf += std::to_string(s.path.actuator_id) + ',' + std::to_string(s.path.sensor_id) + ',' +
               std::to_string(s.repetition);
        for (double v : s.samples) {
            buf += ',';
            buf += format_double(v);
        }
        buf += '\n';
        out << buf;
    }
}

}  // namespace gwkae
