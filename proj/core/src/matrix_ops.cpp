#include "genesis/matrix_ops.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

#include "genesis/errors.hpp"

namespace genesis {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("kron_sum requires square matrices");
  const Eigen::Index p = a.rows(), q = b.rows();
  return kron(a, Matrix::Identity(q, q)) + kron(Matrix::Identity(p, p), b);
}

bool is_metzler(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < 0.0) return false;
  return true;
}

double spectral_abscissa(const Matrix& m, const NumericOptions& opts) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_abscissa requires a square matrix");
  if (m.rows() > opts.dense_eig_max)
    throw SizeCapError("dense eigensolve of dimension " +
                       std::to_string(m.rows()) + " exceeds cap " +
                       std::to_string(opts.dense_eig_max));
  if (m.rows() == 0) throw std::invalid_argument("empty matrix");
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("QR eigensolver failed to converge");
  return solver.eigenvalues().real().maxCoeff();
}

double spectral_abscissa_power(const Matrix& m, const NumericOptions& opts) {
  if (!is_metzler(m))
    throw std::invalid_argument("power path requires a Metzler matrix");
  const Eigen::Index n = m.rows();
  if (n == 1) return m(0, 0);

  const double shift = m.diagonal().cwiseAbs().maxCoeff() + 1.0;
  Matrix shifted = m;
  shifted.diagonal().array() += shift;  // nonnegative, positive diagonal

  Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double value = 0.0;
  for (int it = 0; it < opts.power_max_iter; ++it) {
    Vector y = shifted * x;
    const double norm = y.norm();
    if (norm == 0.0) return -shift;  // m maps everything to -shift * x
    y /= norm;
    const double next = y.dot(shifted * y);
    if (it > 0 && std::abs(next - value) <= opts.power_tol * std::max(1.0, std::abs(next))) {
      // Rayleigh quotient has settled; residual confirms the Perron pair.
      const double residual = (shifted * y - next * y).norm();
      if (residual <= 1e3 * opts.power_tol * std::max(1.0, next))
        return next - shift;
    }
    value = next;
    x = y;
  }
  throw NumericalError("power iteration did not converge within " +
                       std::to_string(opts.power_max_iter) + " iterations");
}

namespace {

// Uniformization: exp(m t) v = e^{-st} sum_k (st)^k / k! P^k v with
// P = I + m/s, s >= max(-diag). Every term is nonnegative when m is Metzler.
// Time is split into steps so the Poisson weights stay representable.
Vector expm_action_uniformized(const Matrix& m, Vector v, double t,
                               double tol) {
  const Eigen::Index n = m.rows();
  double s = 1e-300;
  for (Eigen::Index i = 0; i < n; ++i) s = std::max(s, -m(i, i));
  // Off-diagonal mass also feeds the series growth; include it in the scale
  // so step sizing stays conservative for Metzler matrices with positive
  // row sums (e.g. stability bound matrices).
  double row_excess = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) off += m(i, j);
    row_excess = std::max(row_excess, off);
  }
  const double scale = s + row_excess;

  Matrix p = m / s;
  p.diagonal().array() += 1.0;

  const int steps = std::max(1, static_cast<int>(std::ceil(scale * t / 30.0)));
  const double dt = t / steps;
  for (int step = 0; step < steps; ++step) {
    const double st = s * dt;
    Vector term = v;
    Vector acc = v;
    double log_weight_bound = 0.0;  // log of (st)^k / k!
    for (int k = 1; k < 10000; ++k) {
      term = (p * term) * (st / k);
      acc += term;
      log_weight_bound += std::log(st / k);
      // Remaining tail is negligible once the term is tiny relative to the
      // accumulated sum and k has passed the Poisson mode.
      if (k > st && term.cwiseAbs().maxCoeff() <=
                        tol * std::max(1e-300, acc.cwiseAbs().maxCoeff()))
        break;
    }
    v = std::exp(-st) * acc;
  }
  return v;
}

// Scaling and squaring with a truncated Taylor series, general fallback.
Vector expm_action_taylor(const Matrix& m, const Vector& v, double t,
                          double tol) {
  const double norm = (m * t).cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double factor = 1.0;
  while (norm * factor > 0.5 && squarings < 60) {
    factor *= 0.5;
    ++squarings;
  }
  Matrix a = m * (t * factor);
  Matrix e = Matrix::Identity(m.rows(), m.cols());
  Matrix term = e;
  for (int k = 1; k < 60; ++k) {
    term = (term * a) / k;
    e += term;
    if (term.cwiseAbs().maxCoeff() <= tol) break;
  }
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e * v;
}

}  // namespace

Vector expm_action(const Matrix& m, const Vector& v, double t,
                   const NumericOptions& opts) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("expm_action requires a square matrix");
  if (m.cols() != v.size())
    throw std::invalid_argument("expm_action dimension mismatch");
  if (t < 0.0) throw std::invalid_argument("expm_action requires t >= 0");
  if (t == 0.0 || m.cwiseAbs().maxCoeff() == 0.0) return v;
  if (is_metzler(m)) return expm_action_uniformized(m, v, t, opts.expm_tol);
  return expm_action_taylor(m, v, t, opts.expm_tol);
}

}  // namespace genesis
