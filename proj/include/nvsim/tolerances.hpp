#pragma once

namespace nvsim::tol {

inline constexpr double kHermitian = 1e-12;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsd = 1e-10;
inline constexpr double kAxisNorm = 1e-12;
// |L| may exceed one by this much before it is treated as a CCE artifact.
inline constexpr double kCoherenceExcess = 1e-9;
// Cumulant denominators below this magnitude are replaced by one.
inline constexpr double kCumulantGuard = 1e-8;

}  // namespace nvsim::tol
