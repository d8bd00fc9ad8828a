#include "genesis/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <stdexcept>
#include <thread>

#include "genesis/errors.hpp"
#include "genesis/model.hpp"
#include "genesis/stability.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace genesis {

namespace {

std::string format_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

void parallel_for(int workers, size_t count,
                  const std::function<void(size_t)>& task) {
  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  workers = static_cast<int>(
      std::min<size_t>(static_cast<size_t>(workers), std::max<size_t>(1, count)));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        task(i);
    });
  for (std::thread& t : pool) t.join();
}

struct ResolvedLaw {
  PhaseType dist;
  double l1 = 0.0;
  std::string error;
};

std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string LawSpec::label() const {
  switch (kind) {
    case Kind::Exponential: return "exp";
    case Kind::LogNormal: return "lognormal-v" + format_g(variance_factor);
  }
  return "?";
}

namespace {

LawSpec law_from_string(const std::string& text) {
  LawSpec law;
  if (text == "exp" || text == "exponential") return law;
  const std::string prefix = "lognormal";
  if (text.rfind(prefix, 0) == 0) {
    law.kind = LawSpec::Kind::LogNormal;
    if (text.size() > prefix.size()) {
      if (text[prefix.size()] != ':')
        throw ParseError(0, "bad law spec '" + text + "', expected lognormal:FACTOR");
      law.variance_factor = std::stod(text.substr(prefix.size() + 1));
      if (!(law.variance_factor > 0.0))
        throw ParseError(0, "variance factor must be positive in '" + text + "'");
    }
    return law;
  }
  throw ParseError(0, "unknown law '" + text + "' (want exp or lognormal[:FACTOR])");
}

}  // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid config JSON: ") + e.what());
  }
  SweepConfig config;
  if (j.contains("transmission"))
    for (const auto& s : j["transmission"])
      config.transmission_menu.push_back(law_from_string(s.get<std::string>()));
  if (j.contains("recovery"))
    for (const auto& s : j["recovery"])
      config.recovery_menu.push_back(law_from_string(s.get<std::string>()));
  if (j.contains("mu_trans"))
    config.mu_trans_grid = j["mu_trans"].get<std::vector<double>>();
  if (j.contains("mu_rec"))
    config.mu_rec_grid = j["mu_rec"].get<std::vector<double>>();
  config.fit_order = j.value("fit_order", 10);
  config.seed = j.value("seed", static_cast<uint64_t>(0));
  config.workers = j.value("workers", 0);
  config.timestamp = j.value("timestamp", true);
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    config.fit_options.max_em_iters = f.value("max_em_iters", 500);
    config.fit_options.em_sample_count = f.value("em_sample_count", 100000);
    config.fit_options.ll_gain_tol = f.value("ll_gain_tol", 1e-7);
    config.fit_options.candidate_count = f.value("candidate_count", 4);
  }
  return config;
}

SweepResult run_sweep(const Network& network, const SweepConfig& config,
                      const NumericOptions& opts) {
  if (config.transmission_menu.empty() || config.recovery_menu.empty())
    throw std::invalid_argument("distribution menus must be nonempty");
  if (config.mu_trans_grid.empty() || config.mu_rec_grid.empty())
    throw std::invalid_argument("mu grids must be nonempty");
  for (double mu : config.mu_trans_grid)
    if (!(mu > 0.0)) throw std::invalid_argument("mu_trans values must be positive");
  for (double mu : config.mu_rec_grid)
    if (!(mu > 0.0)) throw std::invalid_argument("mu_rec values must be positive");
  if (config.fit_order < 1) throw std::invalid_argument("fit order must be >= 1");

  SweepResult result;
  result.lambda_max = spectral_radius(network, opts);
  result.graph_digest = digest(network);
  result.seed = config.seed;

  // Content-addressed fit cache: one entry per distinct (law, mean, order,
  // fit options) regardless of how many cells share it. Entries are fitted
  // in parallel up front; cell evaluation then only reads the cache.
  struct FitJob {
    LawSpec law;
    double mu;
    std::string key;
  };
  std::map<std::string, ResolvedLaw> cache;
  std::vector<FitJob> jobs;
  auto cache_key = [&](const LawSpec& law, double mu) {
    return law.label() + "|mu=" + detail::format17(mu) +
           "|p=" + std::to_string(config.fit_order) +
           "|em=" + std::to_string(config.fit_options.max_em_iters) +
           "|n=" + std::to_string(config.fit_options.em_sample_count) +
           "|tol=" + detail::format17(config.fit_options.ll_gain_tol) +
           "|cand=" + std::to_string(config.fit_options.candidate_count);
  };
  auto enqueue = [&](const std::vector<LawSpec>& menu, const std::vector<double>& grid) {
    for (const LawSpec& law : menu)
      for (double mu : grid) {
        const std::string key = cache_key(law, mu);
        if (cache.count(key)) continue;
        cache.emplace(key, ResolvedLaw{});
        jobs.push_back({law, mu, key});
      }
  };
  enqueue(config.transmission_menu, config.mu_trans_grid);
  enqueue(config.recovery_menu, config.mu_rec_grid);

  parallel_for(config.workers, jobs.size(), [&](size_t i) {
    const FitJob& job = jobs[i];
    ResolvedLaw& slot = cache.at(job.key);  // key set is frozen; safe to read
    try {
      if (job.law.kind == LawSpec::Kind::Exponential) {
        slot.dist = ph_exponential(1.0 / job.mu);
        slot.l1 = 0.0;
      } else {
        const double variance = job.law.variance_factor * job.mu * job.mu;
        const uint64_t fit_seed =
            derive_seed(config.seed, detail::fnv1a(job.key));
        FitResult fit = ph_fit(lognormal_target(job.mu, variance),
                               config.fit_order, config.fit_options, fit_seed, opts);
        slot.dist = std::move(fit.fitted);
        slot.l1 = fit.diagnostics.l1_error;
      }
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  const size_t cell_count = config.transmission_menu.size() *
                            config.recovery_menu.size() *
                            config.mu_trans_grid.size() *
                            config.mu_rec_grid.size();
  result.cells.resize(cell_count);
  parallel_for(config.workers, cell_count, [&](size_t index) {
    size_t rest = index;
    const size_t nr = config.mu_rec_grid.size();
    const size_t nt = config.mu_trans_grid.size();
    const size_t nwr = config.recovery_menu.size();
    const double mu_r = config.mu_rec_grid[rest % nr];
    rest /= nr;
    const double mu_t = config.mu_trans_grid[rest % nt];
    rest /= nt;
    const LawSpec& rec_law = config.recovery_menu[rest % nwr];
    rest /= nwr;
    const LawSpec& trans_law = config.transmission_menu[rest];

    SweepCell& cell = result.cells[index];
    cell.panel_trans = trans_law.label();
    cell.panel_rec = rec_law.label();
    cell.mu_t = mu_t;
    cell.mu_r = mu_r;
    cell.mu_r_norm = mu_r / result.lambda_max;
    const ResolvedLaw& trans = cache.at(cache_key(trans_law, mu_t));
    const ResolvedLaw& rec = cache.at(cache_key(rec_law, mu_r));
    if (!trans.error.empty() || !rec.error.empty()) {
      cell.error = !trans.error.empty() ? "transmission fit: " + trans.error
                                        : "recovery fit: " + rec.error;
      return;
    }
    cell.fit_l1_trans = trans.l1;
    cell.fit_l1_rec = rec.l1;
    try {
      const GenesisModel model = make_model(network, trans.dist, rec.dist, {0});
      cell.bound_rate = decay_rate_bound(model, opts);
      cell.eta_a = -cell.bound_rate;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return result;
}

std::string SweepResult::to_csv(bool timestamp,
                                const std::string& canonical_edges) const {
  std::string out;
  if (timestamp) {
    char stamp[64];
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
    out += std::string("# generated ") + stamp + "\n";
  }
  out += "# graph " + graph_digest + "\n";
  out += "# lambda_max " + detail::format17(lambda_max) + "\n";
  out += "# seed " + std::to_string(seed) + "\n";
  std::string edges = canonical_edges;
  for (char& c : edges) {
    if (c == '\n') c = ';';
    if (c == ' ') c = '-';
  }
  if (!edges.empty() && edges.back() == ';') edges.pop_back();
  out += "# edges " + edges + "\n";
  out += "panel_trans,panel_rec,mu_t,mu_r_norm,eta_A,bound_rate,"
         "fit_l1_trans,fit_l1_rec,graph_hash,seed,error\n";
  for (const SweepCell& cell : cells) {
    out += cell.panel_trans + "," + cell.panel_rec + "," +
           detail::format17(cell.mu_t) + "," + detail::format17(cell.mu_r_norm) +
           "," + detail::format17(cell.eta_a) + "," +
           detail::format17(cell.bound_rate) + "," +
           detail::format17(cell.fit_l1_trans) + "," +
           detail::format17(cell.fit_l1_rec) + "," + graph_digest + "," +
           std::to_string(seed) + "," + sanitize_csv_field(cell.error) + "\n";
  }
  return out;
}

}  // namespace genesis
