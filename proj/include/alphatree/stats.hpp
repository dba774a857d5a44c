#pragma once

// Tree balance statistics and their expectations under the alpha model.
//
// Depth conventions: d(r, v) counts edges from the root vertex, which sits
// above the root edge, so a one-leaf tree has its leaf at depth 1. Sackin's
// index measures depth from the first branch point, i.e. d(r, v) - 1.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "alphatree/alpha_model.hpp"
#include "alphatree/tree.hpp"

namespace alphatree {

struct StatRecord {
  std::uint64_t sackin = 0;
  std::uint64_t colless = 0;
  std::uint64_t cherries = 0;
  std::uint64_t max_depth = 0;
  std::uint64_t v_min_sum = 0;  // sum over internal vertices of min(L_v, R_v)
  std::uint64_t n_leaves = 0;
};

StatRecord compute_stats(const Tree& t);

std::uint64_t sackin(const Tree& t);
/// Sackin's index as the sum of N_v (leaves below v) over internal vertices.
std::uint64_t sackin_by_internal(const Tree& t);
std::uint64_t colless(const Tree& t);
std::uint64_t cherries(const Tree& t);
std::uint64_t max_leaf_depth(const Tree& t);
std::uint64_t v_min_sum(const Tree& t);

struct TKL {
  std::uint64_t T = 0;  // sum of leaf depths
  std::uint64_t K = 0;  // sum of internal vertex depths
  std::uint64_t L = 0;  // sum over internal v of internal vertices below and including v
};

TKL tkl(const Tree& t);

/// 0 <= S - C <= n log2 n.
bool sackin_colless_gap_bound_check(const Tree& t);

/// Exact expectation of L under the alpha model, from L(1) = 0 and
/// L(n+1) = L(n)(n+1)/(n-alpha) + (2n-1)(1-alpha)/(n-alpha).
double expected_L(AlphaParam alpha, std::size_t n);
/// L(1..n_max), index 0 unused.
std::vector<double> expected_L_curve(AlphaParam alpha, std::size_t n_max);
double expected_sackin(AlphaParam alpha, std::size_t n);

/// Closed-form mean number of cherries for m >= 3 leaves, alpha in [0, 1).
double cherry_mean_exact(AlphaParam alpha, std::size_t m);

struct CherryMoments {
  AlphaParam alpha{0.0};
  std::vector<double> mean;      // index m; entries below 2 unused
  std::vector<double> variance;  // index m
};

/// Iterates the mean and variance recurrences from mu_2 = 1, var_2 = 0.
CherryMoments cherry_moments_recurrence(AlphaParam alpha, std::size_t m_max);

/// Limits of mu_m/m and var_m/m.
double cherry_mean_slope(AlphaParam alpha);
double cherry_variance_slope(AlphaParam alpha);

/// Number of cherries of an m-leaf alpha tree, simulated through the Markov
/// chain that insertion induces on the cherry count: with C cherries among m
/// leaves, the next insertion adds a cherry with probability
/// (1-alpha)(m-2C)/(m-alpha) and otherwise leaves C unchanged.
std::uint64_t sample_cherry_count(std::size_t m, AlphaParam alpha, Rng& rng);

struct NormalityReport {
  double alpha = 0;
  std::size_t m = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double sample_mean = 0;
  double sample_variance = 0;
  double exact_mean = 0;
  double asymptotic_variance = 0;  // slope * m
  double standardized_mean = 0;    // mean of (C - exact_mean)/sqrt(asymptotic_variance)
  double standardized_mean_se = 0;
  double skewness = 0;
  double excess_kurtosis = 0;
  double jarque_bera = 0;
};

/// Samples cherry counts at m leaves and reports moment diagnostics of the
/// standardized counts. Samples are drawn from independent per-index streams
/// and may be spread over `threads` workers without changing the result.
NormalityReport normality_diagnostic(AlphaParam alpha, std::size_t m, std::size_t n_samples,
                                     std::uint64_t seed, unsigned threads = 1);

}  // namespace alphatree
