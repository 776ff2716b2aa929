#pragma once

namespace pmu {

inline constexpr const char* kProjectName = "pmu-imbalance";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace pmu
