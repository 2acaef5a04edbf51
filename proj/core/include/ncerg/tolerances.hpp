#pragma once

// Central tolerance configuration.  All numerical cutoffs used by the
// library live here; operations record the tolerance they actually used
// in their result metadata.

namespace ncerg::tol {

inline constexpr double kEigOffdiagRel   = 1e-13; // Jacobi stop, x ||x||_F
inline constexpr int    kEigSweepBudget  = 100;
inline constexpr double kSelfAdjoint     = 1e-12;
inline constexpr double kProjectionRound = 1e-12;
inline constexpr double kReconstructRel  = 1e-10;
inline constexpr double kClusterGap      = 1e-10; // eigenvalue cluster width
inline constexpr double kSupportCutRel   = 1e-10; // x ||x||_inf
inline constexpr double kUnitary         = 1e-10;
inline constexpr double kPositive        = 1e-12;
inline constexpr double kInvertibleMinEig = 1e-8;

} // namespace ncerg::tol
