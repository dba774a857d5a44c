#include "alphatree/inference.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "alphatree/parallel.hpp"
#include "alphatree/stats.hpp"

namespace alphatree {

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tolerance) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return (lo + hi) / 2.0;
}

FitResult mle_alpha(const Tree& t, std::size_t grid_points, bool refine) {
  if (t.leaf_count() < 4) {
    throw std::domain_error("mle_alpha requires at least 4 leaves (smaller trees have one shape)");
  }
  if (grid_points < 2) throw std::domain_error("mle_alpha requires at least 2 grid points");
  const ShapeLikelihood likelihood(t);
  auto log_lik = [&](double a) { return likelihood.log_prob(AlphaParam(std::clamp(a, 0.0, 1.0))); };

  FitResult fit;
  fit.n_leaves = t.leaf_count();
  fit.log_likelihood_curve.reserve(grid_points);
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const double ll = log_lik(a);
    fit.log_likelihood_curve.emplace_back(a, ll);
    if (ll > fit.log_likelihood_curve[best].second) best = i;
  }
  fit.alpha_hat = fit.log_likelihood_curve[best].first;
  fit.log_likelihood = fit.log_likelihood_curve[best].second;

  if (refine) {
    const double lo = fit.log_likelihood_curve[best == 0 ? 0 : best - 1].first;
    const double hi = fit.log_likelihood_curve[std::min(best + 1, grid_points - 1)].first;
    const double candidate = golden_section_maximize(log_lik, lo, hi, 1e-6);
    const double candidate_ll = log_lik(candidate);
    // The grid stays authoritative: refinement is kept only if it improves.
    if (candidate_ll > fit.log_likelihood) {
      fit.alpha_hat = candidate;
      fit.log_likelihood = candidate_ll;
      fit.refined = true;
    }
  }
  return fit;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::domain_error("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SummaryRow summarize(const std::string& group, const std::vector<double>& values) {
  SummaryRow row;
  row.group = group;
  row.count = values.size();
  if (values.empty()) return row;
  row.min = *std::min_element(values.begin(), values.end());
  row.max = *std::max_element(values.begin(), values.end());
  row.q1 = quantile_type7(values, 0.25);
  row.median = quantile_type7(values, 0.5);
  row.q3 = quantile_type7(values, 0.75);
  row.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return row;
}

CorpusFit corpus_fit(const CorpusReport& corpus, const CorpusFitOptions& options) {
  CorpusFit out;
  out.fits.resize(corpus.trees.size());
  parallel_for(corpus.trees.size(), options.threads, [&](std::size_t i) {
    const ParsedTree& p = corpus.trees[i];
    out.fits[i] = {p.source, p.method_tag, mle_alpha(*p.tree, options.grid_points, options.refine)};
  });
  if (out.fits.empty()) return out;

  std::vector<double> all;
  std::map<std::string, std::vector<double>> by_method;
  for (const auto& f : out.fits) {
    all.push_back(f.fit.alpha_hat);
    if (f.method) by_method[*f.method].push_back(f.fit.alpha_hat);
  }
  out.summary.push_back(summarize("all", all));
  for (const auto& [method, values] : by_method) out.summary.push_back(summarize(method, values));
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string corpus_fit_csv(const CorpusFit& fit, const std::vector<CorpusIssue>& errors,
                           std::span<const PValueReport> pvalues) {
  if (!pvalues.empty() && pvalues.size() != fit.fits.size()) {
    throw std::invalid_argument("corpus_fit_csv: one p-value report per fitted tree expected");
  }
  std::ostringstream os;
  os << "tree_id,method,n_leaves,alpha_hat,loglik,refined";
  if (!pvalues.empty()) {
    for (Statistic s : all_statistics()) os << ",p_" << statistic_name(s);
  }
  os << ",error\n";
  for (std::size_t i = 0; i < fit.fits.size(); ++i) {
    const auto& f = fit.fits[i];
    os << csv_escape(f.tree_id) << ',' << csv_escape(f.method.value_or("")) << ',' << f.fit.n_leaves << ','
       << full(f.fit.alpha_hat) << ',' << full(f.fit.log_likelihood) << ',' << (f.fit.refined ? 1 : 0);
    if (!pvalues.empty()) {
      for (Statistic s : all_statistics()) {
        os << ',';
        if (auto it = pvalues[i].tests.find(s); it != pvalues[i].tests.end()) os << full(it->second.p_value);
      }
    }
    os << ",\n";
  }
  const std::size_t blanks = 5 + (pvalues.empty() ? 0 : all_statistics().size());
  for (const auto& e : errors) {
    std::string message = e.message;
    if (e.offset) message += " at offset " + std::to_string(*e.offset);
    os << csv_escape(e.source) << std::string(blanks, ',') << ',' << csv_escape(message) << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "group,count,min,q1,median,mean,q3,max\n";
  for (const auto& r : rows) {
    os << csv_escape(r.group) << ',' << r.count << ',' << full(r.min) << ',' << full(r.q1) << ','
       << full(r.median) << ',' << full(r.mean) << ',' << full(r.q3) << ',' << full(r.max) << '\n';
  }
  return os.str();
}

const std::vector<Statistic>& all_statistics() {
  static const std::vector<Statistic> stats{Statistic::colless, Statistic::cherries, Statistic::sackin,
                                            Statistic::max_depth, Statistic::probability};
  return stats;
}

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::colless: return "colless";
    case Statistic::cherries: return "cherries";
    case Statistic::sackin: return "sackin";
    case Statistic::max_depth: return "maxdepth";
    case Statistic::probability: return "prob";
  }
  return "unknown";
}

std::optional<Statistic> parse_statistic(const std::string& name) {
  for (Statistic s : all_statistics()) {
    if (statistic_name(s) == name) return s;
  }
  if (name == "max_depth") return Statistic::max_depth;
  if (name == "probability") return Statistic::probability;
  return std::nullopt;
}

double statistic_value(Statistic s, const Tree& t, AlphaParam alpha) {
  if (s == Statistic::probability) return shape_log_prob(t, alpha);
  const StatRecord r = compute_stats(t);
  switch (s) {
    case Statistic::colless: return static_cast<double>(r.colless);
    case Statistic::cherries: return static_cast<double>(r.cherries);
    case Statistic::sackin: return static_cast<double>(r.sackin);
    case Statistic::max_depth: return static_cast<double>(r.max_depth);
    case Statistic::probability: break;
  }
  return 0;
}

double two_sided_mc_pvalue(std::size_t n_greater_equal, std::size_t n_less_equal, std::size_t n_sim) {
  const double denom = static_cast<double>(n_sim) + 1.0;
  const double upper = (1.0 + static_cast<double>(n_greater_equal)) / denom;
  const double lower = (1.0 + static_cast<double>(n_less_equal)) / denom;
  return std::min(1.0, 2.0 * std::min(upper, lower));
}

PValueReport mc_pvalue(const Tree& t, AlphaParam alpha, const std::vector<Statistic>& statistics,
                       std::size_t n_sim, std::uint64_t seed, unsigned threads) {
  const std::size_t n = t.leaf_count();
  if (n < 4) throw std::domain_error("mc_pvalue requires at least 4 leaves");
  if (n_sim == 0) throw std::domain_error("mc_pvalue requires n_sim >= 1");
  PValueReport report;
  report.alpha = alpha.value();
  report.n_leaves = n;
  report.n_sim = n_sim;
  report.seed = seed;
  if (n_sim < kMinRecommendedSimulations) {
    report.warnings.push_back("n_sim = " + std::to_string(n_sim) + " is below " +
                              std::to_string(kMinRecommendedSimulations) +
                              "; p-value resolution is coarser than 1/" +
                              std::to_string(kMinRecommendedSimulations));
  }

  std::vector<std::vector<double>> simulated(statistics.size(), std::vector<double>(n_sim));
  parallel_for(n_sim, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    const Tree sim = sample_shape(n, alpha, rng);
    for (std::size_t s = 0; s < statistics.size(); ++s) {
      simulated[s][i] = statistic_value(statistics[s], sim, alpha);
    }
  });

  for (std::size_t s = 0; s < statistics.size(); ++s) {
    const auto& values = simulated[s];
    StatisticTest test;
    test.observed = statistic_value(statistics[s], t, alpha);
    double sum = 0, sum_sq = 0;
    test.sim_min = std::numeric_limits<double>::infinity();
    test.sim_max = -std::numeric_limits<double>::infinity();
    for (double v : values) {
      if (v >= test.observed) ++test.n_greater_equal;
      if (v <= test.observed) ++test.n_less_equal;
      sum += v;
      sum_sq += v * v;
      test.sim_min = std::min(test.sim_min, v);
      test.sim_max = std::max(test.sim_max, v);
    }
    const double count = static_cast<double>(n_sim);
    test.sim_mean = sum / count;
    test.sim_sd = n_sim > 1 ? std::sqrt(std::max(0.0, (sum_sq - count * test.sim_mean * test.sim_mean) / (count - 1.0)))
                            : 0.0;
    test.p_value = two_sided_mc_pvalue(test.n_greater_equal, test.n_less_equal, n_sim);
    report.tests[statistics[s]] = test;
  }
  return report;
}

std::string pvalue_report_json(const PValueReport& report) {
  nlohmann::json j;
  j["alpha"] = report.alpha;
  j["n_leaves"] = report.n_leaves;
  j["n_sim"] = report.n_sim;
  j["seed"] = report.seed;
  j["warnings"] = report.warnings;
  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [s, test] : report.tests) {
    stats[statistic_name(s)] = {{"observed", test.observed},
                                {"sim_mean", test.sim_mean},
                                {"sim_sd", test.sim_sd},
                                {"sim_min", test.sim_min},
                                {"sim_max", test.sim_max},
                                {"n_greater_equal", test.n_greater_equal},
                                {"n_less_equal", test.n_less_equal},
                                {"p_value", test.p_value}};
  }
  j["statistics"] = stats;
  return j.dump(2);
}

std::vector<QQPoint> qq_export(const std::vector<PValueReport>& reports) {
  std::map<Statistic, std::vector<double>> by_stat;
  for (const auto& r : reports) {
    for (const auto& [s, test] : r.tests) by_stat[s].push_back(test.p_value);
  }
  std::vector<QQPoint> out;
  for (auto& [s, values] : by_stat) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      out.push_back({s, k + 1, (static_cast<double>(k) + 0.5) / n, values[k]});
    }
  }
  return out;
}

std::string qq_csv(const std::vector<QQPoint>& points) {
  std::ostringstream os;
  os << "statistic,rank,uniform_quantile,p_value\n";
  for (const auto& p : points) {
    os << statistic_name(p.statistic) << ',' << p.rank << ',' << full(p.uniform_quantile) << ','
       << full(p.p_value) << '\n';
  }
  return os.str();
}

double ks_distance_uniform(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace alphatree
