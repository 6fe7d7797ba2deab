#pragma once

#include <iosfwd>

namespace gwkae {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitDamageFound = 4;

// gwkae <simulate|train|calibrate|detect|localize|evaluate> [flags]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gwkae
