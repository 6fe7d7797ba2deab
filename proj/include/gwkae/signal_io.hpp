#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gwkae/signal_model.hpp"

namespace gwkae {

// Shortest decimal that reads back to the same double (at most 17
// significant digits).
std::string format_double(double v);

SensorLayout load_layout(const std::filesystem::path& file);
void save_layout(const SensorLayout& layout, const std::filesystem::path& file);

// Signal CSV: header `actuator_id,sensor_id,repetition,s0,...,s{m-1}`, one
// waveform per row. Paths are canonicalized on read; every referenced sensor
// must exist in `layout` and every row must carry the same sample count.
std::vector<GWSignal> load_dataset(const std::filesystem::path& file, const SensorLayout& layout,
                                   double sample_rate_hz = 12e6);
void write_dataset(const std::vector<GWSignal>& signals, const std::filesystem::path& file);

}  // namespace gwkae
