#pragma once

namespace vlab {

// CODATA 2018 exact values (SI).
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHbar = kPlanck / (2.0 * kPi);

inline constexpr double kGhz = 1e9;
inline constexpr double kMhz = 1e6;
inline constexpr double kAttofarad = 1e-18;
inline constexpr double kFemtofarad = 1e-15;
inline constexpr double kNanohenry = 1e-9;
inline constexpr double kNanosecond = 1e-9;

}  // namespace vlab
