#pragma once

// Maximum-likelihood estimation of alpha for observed tree shapes and
// Monte-Carlo goodness-of-fit tests of the fitted model.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alphatree/alpha_model.hpp"
#include "alphatree/newick.hpp"
#include "alphatree/tree.hpp"

namespace alphatree {

struct FitResult {
  double alpha_hat = 0;
  double log_likelihood = 0;  // at alpha_hat
  /// (alpha, log P(shape | alpha)) on the grid; alphas are i/(grid_points-1).
  std::vector<std::pair<double, double>> log_likelihood_curve;
  bool refined = false;  // golden-section refinement moved the estimate off the grid
  std::size_t n_leaves = 0;
};

inline constexpr std::size_t kDefaultGridPoints = 1000;

/// Grid search over grid_points equally spaced alphas in [0, 1], endpoints
/// included, optionally refined by golden-section search on the bracket
/// around the best grid point. Requires n >= 4 leaves.
FitResult mle_alpha(const Tree& t, std::size_t grid_points = kDefaultGridPoints, bool refine = true);

/// Maximizes f on [lo, hi] by golden-section search; returns the argmax.
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance = 1e-6);

struct SummaryRow {
  std::string group;  // "all" or a method tag
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

/// Quantile with linear interpolation between order statistics (R type 7).
double quantile_type7(std::vector<double> values, double p);

SummaryRow summarize(const std::string& group, const std::vector<double>& values);

struct TreeFit {
  std::string tree_id;
  std::optional<std::string> method;
  FitResult fit;
};

struct CorpusFitOptions {
  std::size_t grid_points = kDefaultGridPoints;
  bool refine = true;
  unsigned threads = 1;
};

struct CorpusFit {
  std::vector<TreeFit> fits;
  std::vector<SummaryRow> summary;  // "all" first, then one row per method tag
};

CorpusFit corpus_fit(const CorpusReport& corpus, const CorpusFitOptions& options = {});


enum class Statistic { colless, cherries, sackin, max_depth, probability };

const std::vector<Statistic>& all_statistics();
std::string statistic_name(Statistic s);
std::optional<Statistic> parse_statistic(const std::string& name);

/// Value of a statistic on a tree; `probability` is log P(shape | alpha).
double statistic_value(Statistic s, const Tree& t, AlphaParam alpha);

struct StatisticTest {
  double observed = 0;
  double sim_mean = 0;
  double sim_sd = 0;
  double sim_min = 0;
  double sim_max = 0;
  std::size_t n_greater_equal = 0;
  std::size_t n_less_equal = 0;
  double p_value = 1;
};

struct PValueReport {
  double alpha = 0;
  std::size_t n_leaves = 0;
  std::size_t n_sim = 0;
  std::uint64_t seed = 0;
  std::map<Statistic, StatisticTest> tests;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinRecommendedSimulations = 100;

/// Two-sided Monte-Carlo p-value with add-one smoothing:
/// p = min(1, 2 min(r+, r-)), r+ = (1 + #{sim >= obs})/(n_sim + 1),
/// r- = (1 + #{sim <= obs})/(n_sim + 1).
double two_sided_mc_pvalue(std::size_t n_greater_equal, std::size_t n_less_equal, std::size_t n_sim);

/// Simulates n_sim shapes with the same leaf count at `alpha` and compares
/// each statistic of t with its simulated distribution. Simulation i uses
/// make_stream(seed, i), so the report does not depend on `threads`.
PValueReport mc_pvalue(const Tree& t, AlphaParam alpha, const std::vector<Statistic>& statistics,
                       std::size_t n_sim, std::uint64_t seed, unsigned threads = 1);

std::string pvalue_report_json(const PValueReport& report);

/// Per-tree table; errors become rows with only tree_id and error filled in.
/// When `pvalues` is non-empty (one report per fit) p_<statistic> columns are added.
std::string corpus_fit_csv(const CorpusFit& fit, const std::vector<CorpusIssue>& errors = {},
                           std::span<const PValueReport> pvalues = {});
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct QQPoint {
  Statistic statistic;
  std::size_t rank;        // 1-based
  double uniform_quantile;  // (rank - 0.5)/N
  double p_value;
};

/// Sorted p-values per statistic paired with uniform quantiles.
std::vector<QQPoint> qq_export(const std::vector<PValueReport>& reports);
std::string qq_csv(const std::vector<QQPoint>& points);

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and U(0,1).
double ks_distance_uniform(std::vector<double> values);

}  // namespace alphatree
