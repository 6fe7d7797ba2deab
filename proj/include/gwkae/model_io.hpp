#pragma once

#include <filesystem>

#include "gwkae/kae_model.hpp"

namespace gwkae {

inline constexpr int kModelFormatVersion = 1;

// JSON model file: format_version, widths {encoder, decoder}, grid
// {order, intervals, lo, hi}, reduction, and per-layer coefficient arrays in
// shortest round-trip decimal form, so load(save(m)) is bit-exact.
void save_model(const KAEModel& model, const std::filesystem::path& file);
KAEModel load_model(const std::filesystem::path& file);

}  // namespace gwkae
