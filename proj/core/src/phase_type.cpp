#include "genesis/phase_type.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include "genesis/errors.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace genesis {

using detail::format17;

double PhaseType::pdf(double t, const NumericOptions& opts) const {
  if (t < 0.0) throw std::invalid_argument("pdf requires t >= 0");
  const Vector w = expm_action(subgenerator.transpose(), initial, t, opts);
  return std::max(0.0, w.dot(exit));
}

double PhaseType::cdf(double t, const NumericOptions& opts) const {
  if (t < 0.0) throw std::invalid_argument("cdf requires t >= 0");
  const Vector w = expm_action(subgenerator.transpose(), initial, t, opts);
  const double survival = w.sum();
  return std::min(1.0, std::max(0.0, 1.0 - survival));
}

double PhaseType::moment(int k) const {
  if (k < 1) throw std::invalid_argument("moment order must be >= 1");
  Eigen::PartialPivLU<Matrix> lu(subgenerator);
  Vector u = Vector::Ones(order());
  double factorial = 1.0;
  double sign = 1.0;
  for (int j = 1; j <= k; ++j) {
    u = lu.solve(u);
    factorial *= j;
    sign = -sign;
  }
  const double value = sign * factorial * initial.dot(u);
  if (!std::isfinite(value) || value <= 0.0)
    throw NumericalError("moment computation produced a nonpositive value; subgenerator near-singular");
  return value;
}

double PhaseType::variance() const {
  const double m1 = moment(1);
  return moment(2) - m1 * m1;
}

double PhaseType::sample(Rng& rng) const {
  const Eigen::Index p = order();
  Eigen::Index phase = rng.discrete(initial);
  double t = 0.0;
  while (true) {
    const double rate = -subgenerator(phase, phase);
    t += rng.exponential(rate);
    const double u = rng.uniform() * rate;
    double acc = 0.0;
    Eigen::Index next = -1;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == phase) continue;
      acc += subgenerator(phase, j);
      if (u < acc) {
        next = j;
        break;
      }
    }
    if (next < 0) return t;  // absorbed (exit(phase) fills the remainder)
    phase = next;
  }
}

PhaseType make_phase_type(Vector initial, Matrix subgenerator, std::string meta,
                          const NumericOptions& opts) {
  const Eigen::Index p = initial.size();
  if (p < 1) throw std::invalid_argument("phase-type order must be >= 1");
  if (subgenerator.rows() != p || subgenerator.cols() != p)
    throw std::invalid_argument("subgenerator shape does not match initial vector");
  if ((initial.array() < 0.0).any())
    throw std::invalid_argument("initial vector has a negative entry");
  if (std::abs(initial.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("initial vector does not sum to 1");
  if (!is_metzler(subgenerator))
    throw std::invalid_argument("subgenerator has a negative off-diagonal entry");

  const double scale = std::max(1.0, subgenerator.cwiseAbs().maxCoeff());
  Vector exit = -subgenerator.rowwise().sum();
  bool any_positive = false;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (exit(i) < -1e-12 * scale)
      throw std::invalid_argument("subgenerator has a positive row sum");
    if (exit(i) <= 0.0) exit(i) = 0.0;
    if (exit(i) > 0.0) any_positive = true;
  }
  if (!any_positive)
    throw std::invalid_argument("no exit rate: absorption impossible");

  Eigen::PartialPivLU<Matrix> lu(subgenerator);
  if (!(lu.rcond() >= opts.rcond_min))
    throw std::invalid_argument("subgenerator numerically singular");

  PhaseType d;
  d.initial = std::move(initial);
  d.subgenerator = std::move(subgenerator);
  d.exit = std::move(exit);
  d.meta = std::move(meta);
  return d;
}

PhaseType ph_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  Vector phi = Vector::Ones(1);
  Matrix t(1, 1);
  t(0, 0) = -rate;
  return make_phase_type(phi, t, "exponential(" + format17(rate) + ")");
}

PhaseType ph_erlang(int shape, double rate) {
  if (shape < 1) throw std::invalid_argument("shape must be >= 1");
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  Vector phi = Vector::Zero(shape);
  phi(0) = 1.0;
  Matrix t = Matrix::Zero(shape, shape);
  for (int i = 0; i < shape; ++i) {
    t(i, i) = -rate;
    if (i + 1 < shape) t(i, i + 1) = rate;
  }
  return make_phase_type(phi, t,
                         "erlang(" + std::to_string(shape) + "," + format17(rate) + ")");
}

PhaseType ph_hyperexponential(const std::vector<double>& weights,
                              const std::vector<double>& rates) {
  std::vector<int> shapes(weights.size(), 1);
  PhaseType d = ph_hyper_erlang(weights, shapes, rates);
  d.meta = "hyperexponential";
  return d;
}

PhaseType ph_hyper_erlang(const std::vector<double>& weights,
                          const std::vector<int>& shapes,
                          const std::vector<double>& rates) {
  const size_t branches = weights.size();
  if (branches == 0) throw std::invalid_argument("no branches");
  if (shapes.size() != branches || rates.size() != branches)
    throw std::invalid_argument("weights/shapes/rates length mismatch");
  double wsum = 0.0;
  int p = 0;
  for (size_t b = 0; b < branches; ++b) {
    if (weights[b] < 0.0) throw std::invalid_argument("negative weight");
    if (shapes[b] < 1) throw std::invalid_argument("shape must be >= 1");
    if (!(rates[b] > 0.0)) throw std::invalid_argument("rate must be positive");
    wsum += weights[b];
    p += shapes[b];
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("weights do not sum to 1");

  Vector phi = Vector::Zero(p);
  Matrix t = Matrix::Zero(p, p);
  int offset = 0;
  for (size_t b = 0; b < branches; ++b) {
    phi(offset) = weights[b];
    for (int i = 0; i < shapes[b]; ++i) {
      t(offset + i, offset + i) = -rates[b];
      if (i + 1 < shapes[b]) t(offset + i, offset + i + 1) = rates[b];
    }
    offset += shapes[b];
  }
  return make_phase_type(phi, t, "hyper_erlang");
}

std::pair<double, double> lognormal_params(double mean, double variance) {
  if (!(mean > 0.0)) throw std::invalid_argument("mean must be positive");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  const double s2 = std::log1p(variance / (mean * mean));
  const double m = std::log(mean) - 0.5 * s2;
  return {m, std::sqrt(s2)};
}

std::string to_json(const PhaseType& d) {
  nlohmann::json j;
  j["order"] = d.order();
  j["initial"] = std::vector<double>(d.initial.data(), d.initial.data() + d.order());
  std::vector<double> t;
  t.reserve(static_cast<size_t>(d.order()) * d.order());
  for (Eigen::Index i = 0; i < d.order(); ++i)
    for (Eigen::Index k = 0; k < d.order(); ++k) t.push_back(d.subgenerator(i, k));
  j["subgenerator"] = t;
  j["meta"] = d.meta;
  return j.dump(2);
}

PhaseType phase_type_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("order") || !j.contains("initial") || !j.contains("subgenerator"))
    throw ParseError(0, "phase-type JSON needs order, initial, subgenerator");
  const Eigen::Index p = j["order"].get<Eigen::Index>();
  const auto init = j["initial"].get<std::vector<double>>();
  const auto sub = j["subgenerator"].get<std::vector<double>>();
  if (static_cast<Eigen::Index>(init.size()) != p)
    throw ParseError(0, "initial vector length does not match order");
  if (static_cast<Eigen::Index>(sub.size()) != p * p)
    throw ParseError(0, "subgenerator length does not match order^2");
  Vector phi(p);
  for (Eigen::Index i = 0; i < p; ++i) phi(i) = init[static_cast<size_t>(i)];
  Matrix t(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index k = 0; k < p; ++k)
      t(i, k) = sub[static_cast<size_t>(i * p + k)];
  std::string meta = j.value("meta", std::string());
  return make_phase_type(std::move(phi), std::move(t), std::move(meta));
}

std::string digest(const PhaseType& d) {
  std::string blob = std::to_string(d.order());
  for (Eigen::Index i = 0; i < d.order(); ++i) blob += "," + format17(d.initial(i));
  for (Eigen::Index i = 0; i < d.order(); ++i)
    for (Eigen::Index k = 0; k < d.order(); ++k)
      blob += "," + format17(d.subgenerator(i, k));
  return detail::hex16(detail::fnv1a(blob));
}

}  // namespace genesis
