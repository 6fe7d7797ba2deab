#include "gwkae/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "gwkae/errors.hpp"
#include "gwkae/signal_io.hpp"

namespace gwkae {

namespace {

void write_array(std::ostream& out, std::span<const double> values) {
    out << '[';
    std::string buf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buf += ',';
        buf += format_double(values[i]);
        if (buf.size() > 1 << 16) {
            out << buf;
            buf.clear();
        }
    }
    out << buf << ']';
}

void write_ints(std::ostream& out, const std::vector<int>& values) {
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << (i ? "," : "") << values[i];
    }
    out << ']';
}

void read_array(const nlohmann::json& j, std::span<double> dst, const std::string& what) {
    if (!j.is_array() || j.size() != dst.size()) {
        throw PersistenceError("model file: " + what + " has the wrong length");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = j[i].get<double>();
    }
}

}  // namespace

void save_model(const KAEModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw PersistenceError("cannot write model file " + file.string());
    }
    const auto& g = model.grid();
    out << "{\n\"format_version\": " << kModelFormatVersion << ",\n";
    out << "\"widths\": {\"encoder\": ";
    write_ints(out, model.encoder_widths());
    out << ", \"decoder\": ";
    write_ints(out, model.decoder_widths());
    out << "},\n";
    out << "\"grid\": {\"order\": " << g.order << ", \"intervals\": " << g.intervals
        << ", \"lo\": " << format_double(g.lo) << ", \"hi\": " << format_double(g.hi) << "},\n";
    out << "\"reduction\": \"" << to_string(model.reduction()) << "\",\n";
    out << "\"layers\": [\n";
    const auto layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const KANLayer& layer = *layers[l];
        out << "{\"name\": \"" << model.layer_name(l) << "\", \"in_dim\": " << layer.in_dim()
            << ", \"out_dim\": " << layer.out_dim() << ",\n\"coeffs\": ";
        write_array(out, layer.coeffs());
        out << ",\n\"w_base\": ";
        write_array(out, layer.w_base());
        out << ",\n\"w_spline\": ";
        write_array(out, layer.w_spline());
        out << (l + 1 < layers.size() ? "},\n" : "}\n");
    }
    out << "]\n}\n";
    if (!out) {
        throw PersistenceError("failed while writing model file " + file.string());
    }
}

KAEModel load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw PersistenceError("cannot open model file " + file.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw PersistenceError("corrupt model file " + file.string() + ": " + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw PersistenceError("unsupported model format_version " + std::to_string(version) + " (expected " +
                                   std::to_string(kModelFormatVersion) + ")");
        }
        BSplineGrid grid;
        const auto& jg = j.at("grid");
        grid.order = jg.at("order").get<int>();
        grid.intervals = jg.at("intervals").get<int>();
        grid.lo = jg.at("lo").get<double>();
        grid.hi = jg.at("hi").get<double>();
        auto widths = j.at("widths").at("encoder").get<std::vector<int>>();
        const auto decoder = j.at("widths").at("decoder").get<std::vector<int>>();
        if (decoder != std::vector<int>(widths.rbegin(), widths.rend())) {
            throw PersistenceError("model file: decoder widths do not mirror the encoder");
        }
        const Reduction reduction = reduction_from_string(j.value("reduction", std::string("mean")));
        KAEModel model(std::move(widths), grid, reduction);
        const auto& jl = j.at("layers");
        auto layers = model.layers();
        if (!jl.is_array() || jl.size() != layers.size()) {
            throw PersistenceError("model file: expected " + std::to_string(layers.size()) + " layers");
        }
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& e = jl[l];
            if (e.at("in_dim").get<int>() != layers[l]->in_dim() || e.at("out_dim").get<int>() != layers[l]->out_dim()) {
                throw PersistenceError("model file: layer " + std::to_string(l) + " dimensions disagree with widths");
            }
            const std::string name = model.layer_name(l);
            read_array(e.at("coeffs"), layers[l]->coeffs(), name + ".coeffs");
            read_array(e.at("w_base"), layers[l]->w_base(), name + ".w_base");
            read_array(e.at("w_spline"), layers[l]->w_spline(), name + ".w_spline");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw PersistenceError("corrupt model file " + file.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw PersistenceError("invalid model file " + file.string() + ": " + e.what());
    } catch (const ShapeError& e) {
        throw PersistenceError("invalid model file " + file.string() + ": " + e.what());
    }
}

}  // namespace gwkae
