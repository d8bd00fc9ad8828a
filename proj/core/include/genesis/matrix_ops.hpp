#pragma once

#include <Eigen/Core>

#include "genesis/config.hpp"

namespace genesis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Kronecker product: block (i,j) of the result equals a(i,j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker sum a ⊗ I + I ⊗ b of two square matrices.
/// Throws std::invalid_argument on non-square input.
Matrix kron_sum(const Matrix& a, const Matrix& b);

/// True iff every off-diagonal entry is >= 0 (exact comparison).
bool is_metzler(const Matrix& m);

/// Maximum real part over the eigenvalues, via a dense Schur (Hessenberg +
/// QR iteration) solve. Throws NumericalError on non-convergence and
/// SizeCapError above opts.dense_eig_max rows.
double spectral_abscissa(const Matrix& m,
                         const NumericOptions& opts = default_options());

/// Spectral abscissa of a Metzler matrix via shift-and-power iteration:
/// with s = max|diag| + 1 the shifted matrix m + sI is nonnegative, its
/// Perron value is found by power iteration and s is subtracted again.
/// Throws std::invalid_argument if m is not Metzler, NumericalError if the
/// iteration does not meet opts.power_tol within opts.power_max_iter steps.
double spectral_abscissa_power(const Matrix& m,
                               const NumericOptions& opts = default_options());

/// Action of the matrix exponential: returns exp(m * t) * v.
/// Metzler matrices take the uniformization path (every series term is
/// nonnegative, so nonnegativity of exp(m t) is preserved exactly); other
/// matrices fall back to scaling and squaring with a truncated series.
Vector expm_action(const Matrix& m, const Vector& v, double t,
                   const NumericOptions& opts = default_options());

}  // namespace genesis

