#pragma once

namespace genesis {

inline constexpr const char* kVersion = "0.1.0";

/// Central numeric configuration: every tolerance, iteration limit and size
/// cap used across the library, with library-wide defaults.
struct NumericOptions {
  // Matrix-exponential series truncation.
  double expm_tol = 1e-12;
  // Power-iteration path for Metzler spectral abscissa.
  double power_tol = 1e-10;
  int power_max_iter = 10000;
  // Largest dimension handled by the dense QR eigensolver.
  int dense_eig_max = 2000;
  // Reject subgenerators whose reciprocal condition number falls below this.
  double rcond_min = 1e-14;
  // Largest admissible dimension of the stability bound matrix.
  int bound_dim_cap = 4096;
  // Largest admissible exact-chain state count (structure-only queries).
  long long state_cap = 20000;
  // Largest exact-chain state count for which eigensolves are attempted.
  long long exact_eig_cap = 2000;
  // Hard cap on simulated events in unbounded (extinction) runs.
  unsigned long long event_cap = 10000000ULL;
};

inline const NumericOptions& default_options() {
  static const NumericOptions opts{};
  return opts;
}

}  // namespace genesis

