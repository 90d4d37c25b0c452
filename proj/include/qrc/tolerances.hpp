#pragma once

#include <cstddef>

namespace qrc::tol {

/// Structural checks: hermiticity, unit trace, positivity of density matrices.
inline constexpr double kStructural = 1e-10;

/// Numerical results: eigen-reconstruction, imaginary part of tr(rho O).
inline constexpr double kNumerical = 1e-8;

/// Trace drift in the integrator: renormalize above kTraceRenorm, abort above kInstability.
inline constexpr double kTraceRenorm = 1e-12;
inline constexpr double kInstability = 1e-6;

/// Floor on per-feature standard deviation in the readout standardizer.
inline constexpr double kStdFloor = 1e-12;

/// Largest matrix dimension produced by kron (2^12).
inline constexpr std::size_t kMaxDim = std::size_t{1} << 12;

/// Largest random matrix / chain Hilbert space dimension (2^9).
inline constexpr std::size_t kMaxRandomDim = 512;
inline constexpr int kMaxSpins = 9;

}  // namespace qrc::tol
