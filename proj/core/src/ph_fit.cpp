#include "genesis/ph_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "genesis/errors.hpp"

namespace genesis {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Branch parameters of a hyper-Erlang mixture; shapes are fixed per
// structure, EM moves only weights and rates.
struct Mixture {
  std::vector<double> weights;
  std::vector<int> shapes;
  std::vector<double> rates;

  int order() const {
    int total = 0;
    for (int k : shapes) total += k;
    return total;
  }
};

std::string structure_label(const Mixture& m) {
  std::string out;
  for (size_t i = 0; i < m.shapes.size(); ++i) {
    if (i) out += "+";
    out += std::to_string(m.shapes[i]);
  }
  return out;
}

double rising_factorial(int k, int r) {
  double out = 1.0;
  for (int i = 0; i < r; ++i) out *= k + i;
  return out;
}

double log_erlang_pdf(double x, int k, double rate) {
  return k * std::log(rate) + (k - 1) * std::log(x) - rate * x -
         std::lgamma(static_cast<double>(k));
}

double mixture_pdf(const Mixture& m, double x) {
  if (x < 0.0) return 0.0;
  double out = 0.0;
  for (size_t b = 0; b < m.weights.size(); ++b) {
    if (m.weights[b] <= 0.0) continue;
    if (x == 0.0) {
      if (m.shapes[b] == 1) out += m.weights[b] * m.rates[b];
      continue;
    }
    out += m.weights[b] * std::exp(log_erlang_pdf(x, m.shapes[b], m.rates[b]));
  }
  return out;
}

double mixture_moment(const Mixture& m, int r) {
  double out = 0.0;
  for (size_t b = 0; b < m.weights.size(); ++b)
    out += m.weights[b] * rising_factorial(m.shapes[b], r) /
           std::pow(m.rates[b], r);
  return out;
}

double log_likelihood(const Mixture& m, const std::vector<double>& xs) {
  const size_t branches = m.weights.size();
  std::vector<double> logs(branches);
  double total = 0.0;
  for (double x : xs) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < branches; ++b) {
      logs[b] = m.weights[b] > 0.0
                    ? std::log(m.weights[b]) + log_erlang_pdf(x, m.shapes[b], m.rates[b])
                    : -std::numeric_limits<double>::infinity();
      best = std::max(best, logs[b]);
    }
    double acc = 0.0;
    for (size_t b = 0; b < branches; ++b) acc += std::exp(logs[b] - best);
    total += best + std::log(acc);
  }
  return total;
}

struct EmOutcome {
  Mixture mixture;
  double ll = 0.0;  // total log-likelihood at the last iterate
  int iterations = 0;
  bool converged = true;
};

EmOutcome em_refine(Mixture init, const std::vector<double>& xs,
                    const FitOptions& opts) {
  const size_t branches = init.weights.size();
  const size_t count = xs.size();
  EmOutcome out;
  out.mixture = std::move(init);

  Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(count));
  Eigen::ArrayXd logx = x.log();
  std::vector<Eigen::ArrayXd> logf(branches);
  Eigen::ArrayXd peak(count), den(count), gamma(count);

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_em_iters; ++it) {
    Mixture& m = out.mixture;
    peak.setConstant(-std::numeric_limits<double>::infinity());
    for (size_t b = 0; b < branches; ++b) {
      if (m.weights[b] <= 0.0) {
        logf[b].setConstant(count, -std::numeric_limits<double>::infinity());
        continue;
      }
      const double c = std::log(m.weights[b]) + m.shapes[b] * std::log(m.rates[b]) -
                       std::lgamma(static_cast<double>(m.shapes[b]));
      logf[b] = c + (m.shapes[b] - 1) * logx - m.rates[b] * x;
      peak = peak.max(logf[b]);
    }
    den.setZero();
    for (size_t b = 0; b < branches; ++b)
      if (m.weights[b] > 0.0) den += (logf[b] - peak).exp();
    const double ll = (peak + den.log()).sum();

    out.iterations = it;
    out.ll = ll;
    if (ll < prev_ll - 1e-9 * static_cast<double>(count)) {
      out.converged = false;  // numerically decreasing likelihood
      return out;
    }
    if (ll - prev_ll < opts.ll_gain_tol * static_cast<double>(count) && it > 1)
      return out;
    prev_ll = ll;

    for (size_t b = 0; b < branches; ++b) {
      if (m.weights[b] <= 0.0) continue;
      gamma = (logf[b] - peak).exp() / den;
      const double mass = gamma.sum();
      if (mass <= 1e-300 * static_cast<double>(count)) {
        m.weights[b] = 0.0;
        continue;
      }
      const double mass_x = (gamma * x).sum();
      m.weights[b] = mass / static_cast<double>(count);
      m.rates[b] = m.shapes[b] * mass / mass_x;
    }
  }
  out.converged = false;  // ran out of iterations before the gain tolerance
  return out;
}

// Mean/second/third raw moments of a density by expanding trapezoid
// quadrature; segments grow geometrically until the third moment settles.
void density_moments(const std::function<double(double)>& density, double scale,
                     double& m1, double& m2, double& m3) {
  double mass = 0.0;
  m1 = m2 = m3 = 0.0;
  double lo = 0.0;
  double width = 10.0 * scale;
  for (int segment = 0; segment < 24; ++segment) {
    const int intervals = 4000;
    const double h = width / intervals;
    double seg_mass = 0.0, seg1 = 0.0, seg2 = 0.0, seg3 = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double t = lo + h * i;
      const double f = std::max(0.0, density(t));
      const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
      seg_mass += w * f;
      seg1 += w * f * t;
      seg2 += w * f * t * t;
      seg3 += w * f * t * t * t;
    }
    mass += seg_mass * h;
    m1 += seg1 * h;
    m2 += seg2 * h;
    m3 += seg3 * h;
    if (segment > 0 && seg3 * h < 1e-12 * std::max(m3, 1e-300) &&
        seg_mass * h < 1e-12)
      break;
    lo += width;
    width *= 2.0;
  }
  if (mass <= 0.0)
    throw std::invalid_argument("target density has no mass on the probe range");
  m1 /= mass;
  m2 /= mass;
  m3 /= mass;
}

// Two-branch hyper-Erlang matching m1 and m2 exactly where feasible,
// choosing the weight grid point and quadratic root that best match m3.
// Branch means are k1*t and k2*u with t, u the per-stage means.
bool two_branch_match(int k1, int k2, double m1, double m2, double m3,
                      Mixture& out) {
  const double r2a = rising_factorial(k1, 2);
  const double r2b = rising_factorial(k2, 2);
  double best_err = std::numeric_limits<double>::infinity();
  for (int wi = 1; wi <= 19; ++wi) {
    const double w = 0.05 * wi;
    const double denom = (1.0 - w) * k2 * k2;
    const double a = w * r2a + w * w * k1 * k1 * r2b / denom;
    const double b = -2.0 * w * k1 * m1 * r2b / denom;
    const double c = m1 * m1 * r2b / denom - m2;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    for (double t : {(-b + root) / (2.0 * a), (-b - root) / (2.0 * a)}) {
      if (!(t > 0.0)) continue;
      const double u = (m1 - w * k1 * t) / ((1.0 - w) * k2);
      if (!(u > 0.0)) continue;
      Mixture m;
      m.weights = {w, 1.0 - w};
      m.shapes = {k1, k2};
      m.rates = {1.0 / t, 1.0 / u};
      const double model_m3 = mixture_moment(m, 3);
      const double err = std::abs(model_m3 - m3) / std::max(m3, 1e-300);
      if (err < best_err) {
        best_err = err;
        out = m;
      }
    }
  }
  return best_err < std::numeric_limits<double>::infinity();
}

// Split sorted samples into `branches` equal groups and seed one Erlang
// branch per group from its mean.
Mixture quantile_init(const std::vector<double>& sorted, std::vector<int> shapes) {
  const size_t branches = shapes.size();
  Mixture m;
  m.shapes = std::move(shapes);
  for (size_t b = 0; b < branches; ++b) {
    const size_t begin = b * sorted.size() / branches;
    const size_t end = (b + 1) * sorted.size() / branches;
    const double mean =
        std::accumulate(sorted.begin() + static_cast<long>(begin),
                        sorted.begin() + static_cast<long>(end), 0.0) /
        std::max<size_t>(1, end - begin);
    m.weights.push_back(1.0 / branches);
    m.rates.push_back(m.shapes[b] / std::max(mean, 1e-300));
  }
  return m;
}

// Non-increasing integer partitions of `total` into at most `max_parts`
// parts, largest part first.
void enumerate_partitions(int total, int max_parts, int largest,
                          std::vector<int>& prefix,
                          std::vector<std::vector<int>>& out) {
  if (total == 0) {
    out.push_back(prefix);
    return;
  }
  if (max_parts == 0) return;
  for (int part = std::min(total, largest); part >= 1; --part) {
    prefix.push_back(part);
    enumerate_partitions(total - part, max_parts - 1, part, prefix, out);
    prefix.pop_back();
  }
}

std::vector<Mixture> build_candidates(double m1, double m2, double m3, int p,
                                      const std::vector<double>& sorted) {
  std::vector<Mixture> out;
  auto push_single = [&](int k) {
    for (const Mixture& m : out)
      if (m.shapes.size() == 1 && m.shapes[0] == k) return;
    out.push_back({{1.0}, {k}, {k / m1}});
  };
  const double cv2 = std::max((m2 - m1 * m1) / (m1 * m1), 1e-6);
  push_single(std::clamp(static_cast<int>(std::lround(1.0 / cv2)), 1, p));
  push_single(p);
  push_single(1);

  // Moment-matched two-branch structures where the quadratic is feasible.
  if (p >= 2) {
    std::vector<std::pair<int, int>> allocations = {
        {1, p - 1}, {p / 2, p - p / 2}, {1, std::max(1, p / 2)}};
    if (p >= 4) allocations.push_back({2, p - 2});
    std::sort(allocations.begin(), allocations.end());
    allocations.erase(std::unique(allocations.begin(), allocations.end()),
                      allocations.end());
    for (auto [k1, k2] : allocations) {
      Mixture m;
      if (two_branch_match(k1, k2, m1, m2, m3, m))
        out.push_back(std::move(m));
    }
  }

  // Every partition of p into 2..4 branches, quantile-initialized. Shape
  // order against the quantile blocks is not symmetric (a sharp low mode
  // wants the large shape on the low block), so seed both orders.
  std::vector<std::vector<int>> partitions;
  std::vector<int> prefix;
  enumerate_partitions(p, 4, p, prefix, partitions);
  std::vector<Mixture> pool;
  for (const std::vector<int>& part : partitions) {
    if (part.size() < 2) continue;
    pool.push_back(quantile_init(sorted, part));
    if (part.front() != part.back()) {
      std::vector<int> reversed(part.rbegin(), part.rend());
      pool.push_back(quantile_init(sorted, std::move(reversed)));
    }
  }
  // Keep the pool bounded for large p; stride thinning preserves diversity.
  const size_t pool_cap = 150;
  if (pool.size() > pool_cap) {
    std::vector<Mixture> thinned;
    const size_t stride = (pool.size() + pool_cap - 1) / pool_cap;
    for (size_t i = 0; i < pool.size(); i += stride)
      thinned.push_back(std::move(pool[i]));
    pool = std::move(thinned);
  }
  for (Mixture& m : pool) out.push_back(std::move(m));
  return out;
}

// Trapezoid L1 distance between a mixture density and a reference density
// sampled on the diagnostics grid.
double grid_l1(const std::function<double(double)>& fitted,
               const std::function<double(double)>& reference, double mean,
               const FitOptions& opts) {
  const int points = std::max(2, opts.grid_points);
  const double h = opts.grid_span * mean / (points - 1);
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = h * i;
    const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    total += w * std::abs(fitted(t) - reference(t));
  }
  return total * h;
}

}  // namespace

FitTarget lognormal_target(double mean, double variance) {
  const auto [location, scale] = lognormal_params(mean, variance);
  FitTarget target;
  target.density = [location, scale](double x) {
    if (x <= 0.0) return 0.0;
    const double z = (std::log(x) - location) / scale;
    return std::exp(-0.5 * z * z) / (x * scale * std::sqrt(2.0 * kPi));
  };
  target.sampler = [location, scale](Rng& rng) {
    return rng.lognormal(location, scale);
  };
  target.mean_hint = mean;
  return target;
}

FitTarget erlang_target(int shape, double rate) {
  if (shape < 1 || !(rate > 0.0)) throw std::invalid_argument("bad Erlang target");
  FitTarget target;
  target.density = [shape, rate](double x) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return shape == 1 ? rate : 0.0;
    return std::exp(log_erlang_pdf(x, shape, rate));
  };
  target.sampler = [shape, rate](Rng& rng) {
    double total = 0.0;
    for (int i = 0; i < shape; ++i) total += rng.exponential(rate);
    return total;
  };
  target.mean_hint = shape / rate;
  return target;
}

FitTarget exponential_target(double rate) { return erlang_target(1, rate); }

FitTarget sample_target(std::vector<double> samples) {
  FitTarget target;
  target.samples = std::move(samples);
  return target;
}

FitResult ph_fit(const FitTarget& target, int p, const FitOptions& fit_opts,
                 uint64_t seed, const NumericOptions& opts) {
  if (p < 1) throw std::invalid_argument("fit order must be >= 1");

  Rng rng(seed);
  std::vector<double> xs;
  if (!target.samples.empty()) {
    if (target.samples.size() < 1000)
      throw std::invalid_argument("sample targets need at least 1000 samples");
    xs = target.samples;
    for (double x : xs)
      if (!(x > 0.0))
        throw std::invalid_argument("sample targets must be strictly positive");
  } else if (target.sampler) {
    xs.resize(static_cast<size_t>(fit_opts.em_sample_count));
    for (double& x : xs) x = target.sampler(rng);
  } else {
    throw std::invalid_argument("fit target has neither samples nor sampler");
  }

  const double sample_mean =
      std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double m1, m2, m3;
  if (target.density) {
    const double scale = target.mean_hint > 0.0 ? target.mean_hint : sample_mean;
    density_moments(target.density, scale, m1, m2, m3);
  } else {
    m1 = m2 = m3 = 0.0;
    for (double x : xs) {
      m1 += x;
      m2 += x * x;
      m3 += x * x * x;
    }
    m1 /= xs.size();
    m2 /= xs.size();
    m3 /= xs.size();
  }

  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Mixture> candidates = build_candidates(m1, m2, m3, p, sorted);

  // Screening pass: a short EM on a deterministic subsample ranks the
  // structures far more reliably than the likelihood at the raw inits.
  const size_t sub_count = std::min<size_t>(xs.size(), 10000);
  const std::vector<double> sub(xs.begin(),
                                xs.begin() + static_cast<long>(sub_count));
  FitOptions screen_opts = fit_opts;
  screen_opts.max_em_iters = 40;
  std::vector<std::pair<double, size_t>> ranked;  // per-sample LL on `sub`
  std::vector<Mixture> screened(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    EmOutcome em = em_refine(candidates[i], sub, screen_opts);
    ranked.emplace_back(em.ll / static_cast<double>(sub_count), i);
    screened[i] = std::move(em.mixture);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const size_t refine =
      std::min<size_t>(std::max(1, fit_opts.candidate_count), ranked.size());

  struct Scored {
    Mixture mixture;
    double ll;
    int iterations;
    bool converged;
  };
  std::vector<Scored> finalists;
  for (size_t i = 0; i < refine; ++i) {
    const Mixture& init = candidates[ranked[i].second];
    finalists.push_back(
        {init, log_likelihood(init, xs), 0, true});  // pre-refinement
    EmOutcome em = em_refine(screened[ranked[i].second], xs, fit_opts);
    finalists.push_back({std::move(em.mixture), em.ll, em.iterations, em.converged});
  }

  // Density targets are judged by the density distance the diagnostics
  // report; sample targets by likelihood.
  size_t best = 0;
  if (target.density) {
    double best_l1 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < finalists.size(); ++i) {
      const Mixture& m = finalists[i].mixture;
      const double l1 = grid_l1([&](double t) { return mixture_pdf(m, t); },
                                target.density, m1, fit_opts);
      if (l1 < best_l1) {
        best_l1 = l1;
        best = i;
      }
    }
  } else {
    for (size_t i = 1; i < finalists.size(); ++i)
      if (finalists[i].ll > finalists[best].ll) best = i;
  }
  Scored& winner = finalists[best];

  // Drop extinguished branches and absorb roundoff into the heaviest weight.
  Mixture pruned;
  for (size_t b = 0; b < winner.mixture.weights.size(); ++b) {
    if (winner.mixture.weights[b] < 1e-12) continue;
    pruned.weights.push_back(winner.mixture.weights[b]);
    pruned.shapes.push_back(winner.mixture.shapes[b]);
    pruned.rates.push_back(winner.mixture.rates[b]);
  }
  const size_t heaviest =
      std::max_element(pruned.weights.begin(), pruned.weights.end()) -
      pruned.weights.begin();
  double others = 0.0;
  for (size_t b = 0; b < pruned.weights.size(); ++b)
    if (b != heaviest) others += pruned.weights[b];
  pruned.weights[heaviest] = 1.0 - others;

  FitResult result;
  result.fitted = ph_hyper_erlang(pruned.weights, pruned.shapes, pruned.rates);
  result.fitted.meta = "fit:hyper-erlang:" + structure_label(pruned);

  result.diagnostics.structure = structure_label(pruned);
  result.diagnostics.em_iterations = winner.iterations;
  result.diagnostics.em_converged = winner.converged;
  result.diagnostics.log_likelihood =
      log_likelihood(pruned, xs) / static_cast<double>(xs.size());
  if (target.density) {
    result.diagnostics.l1_error =
        fit_l1_error(result.fitted, target.density, m1, fit_opts, opts);
  } else {
    // No analytic reference: compare against a histogram on the grid.
    const int points = std::max(2, fit_opts.grid_points);
    const double h = fit_opts.grid_span * m1 / (points - 1);
    std::vector<double> hist(static_cast<size_t>(points), 0.0);
    for (double x : xs) {
      const int bin = static_cast<int>(x / h);
      if (bin >= 0 && bin < points) hist[static_cast<size_t>(bin)] += 1.0;
    }
    for (double& v : hist) v /= xs.size() * h;
    result.diagnostics.l1_error = grid_l1(
        [&](double t) {
          const double value = result.fitted.pdf(t, opts);
          return value;
        },
        [&](double t) {
          const int bin = std::min(points - 1, static_cast<int>(t / h));
          return hist[static_cast<size_t>(bin)];
        },
        m1, fit_opts);
  }
  return result;
}

double fit_l1_error(const PhaseType& d,
                    const std::function<double(double)>& target_density,
                    double mean, const FitOptions& fit_opts,
                    const NumericOptions& opts) {
  if (!(mean > 0.0)) throw std::invalid_argument("mean must be positive");
  return grid_l1([&](double t) { return d.pdf(t, opts); }, target_density, mean,
                 fit_opts);
}

}  // namespace genesis
