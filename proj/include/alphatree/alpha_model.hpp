#pragma once

// The alpha model of random cladograms and tree shapes.
//
// A tree grows one leaf at a time. Every leaf edge carries weight 1-alpha and
// every other edge (the root edge included) carries weight alpha; the new leaf
// is attached to an edge picked proportionally to its weight. alpha = 0, 1/2
// and 1 give the Yule, Uniform and Comb models.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "alphatree/random.hpp"
#include "alphatree/tree.hpp"

namespace alphatree {

class AlphaParam {
 public:
  explicit AlphaParam(double value);
  double value() const { return value_; }

 private:
  double value_;
};

class BetaParam {
 public:
  /// Finite beta > -2.
  explicit BetaParam(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Conditional split distribution q(a, b): the probability that a tree with
/// a+b leaves has first split (a, b).
struct SplitDistribution {
  std::function<double(std::size_t, std::size_t)> q;
  bool symmetric = true;

  double operator()(std::size_t a, std::size_t b) const { return q(a, b); }
};

/// (n-1-alpha)(n-2-alpha)...(1-alpha), with gamma_alpha(1) = 1.
double gamma_alpha(AlphaParam alpha, std::size_t n);

double q_alpha(AlphaParam alpha, std::size_t a, std::size_t b);

/// q(a,b) + q(b,a) for a != b, q(a,a) otherwise.
double q_hat(AlphaParam alpha, std::size_t a, std::size_t b);

SplitDistribution alpha_split_distribution(AlphaParam alpha);

/// Attaches one leaf to an edge chosen by alpha weights. In fat mode the new
/// leaf lands on the left or right of its new sibling with probability 1/2.
/// A single-leaf input always gives the 2-leaf tree.
Tree alpha_insert(const Tree& t, AlphaParam alpha, Rng& rng,
                  std::optional<Label> label = std::nullopt);

/// n-1 insertions from the one-leaf tree, returned as a canonical shape.
/// n = 0 gives the empty tree.
Tree sample_shape(std::size_t n, AlphaParam alpha, Rng& rng);

/// Fat shape (unlabeled, children in insertion orientation).
Tree sample_fat_shape(std::size_t n, AlphaParam alpha, Rng& rng);

/// Insertion-labeled fat cladogram followed by a uniform label permutation.
Tree sample_cladogram(std::size_t n, AlphaParam alpha, Rng& rng);

/// log P(shape). Shapes whose probability is zero give -infinity.
///
/// P(shape) = 2^(n-1-k) * prod over splits of q(a,b), where k counts the
/// symmetric branch points. This is the product of q_hat over the splits
/// whenever no split {a,a} has two different subtrees; when one does, the two
/// orientations of that branch point are distinct and contribute twice.
double shape_log_prob(const Tree& t, AlphaParam alpha);

/// log P(cladogram) = log(2^k / n!) + shape_log_prob = log(2^(n-1)/n!) + sum log q.
double cladogram_log_prob(const Tree& t, AlphaParam alpha);

/// Sum of log q(a,b) over a precomputed split multiset, plus the 2^(n-1-k)
/// orientation term. Used by likelihood scans that reuse one tree's splits.
class ShapeLikelihood {
 public:
  explicit ShapeLikelihood(const Tree& shape);
  double log_prob(AlphaParam alpha) const;
  std::size_t leaf_count() const { return n_; }

 private:
  std::size_t n_;
  std::size_t orientation_exponent_;
  std::vector<std::pair<SplitMultiset::Entry, std::size_t>> splits_;
};

/// Residual of the deletion-stability condition for a Markovian self-similar
/// split distribution; zero iff the condition holds at (x, y).
double deletion_stability_residual(const SplitDistribution& q, std::size_t x, std::size_t y);
double deletion_stability_residual(AlphaParam alpha, std::size_t x, std::size_t y);

/// Aldous' beta split distribution, normalized over the row n = a+b.
double beta_split_q(BetaParam beta, std::size_t a, std::size_t b);
SplitDistribution beta_split_distribution(BetaParam beta);

struct AlphaBetaPoint {
  double alpha;
  double ratio_15_24;  // alpha model q(1,5)/q(2,4)
  double ratio_24_33;  // alpha model q(2,4)/q(3,3)
  double beta_from_first;
  double beta_from_second;
  double discrepancy;  // |beta_from_first - beta_from_second|
};

struct AlphaBetaReport {
  std::vector<AlphaBetaPoint> points;
  /// Grid alphas where the implied betas agree within `agreement_tol`.
  std::vector<double> coincidences;
};

/// For each alpha in the grid, matches the six-leaf split ratios of the alpha
/// model with those of the beta model and reports the two implied betas. The
/// models coincide only where the two betas agree. alpha = 1 is skipped (the
/// ratios are undefined there).
AlphaBetaReport alpha_beta_distinct_check(const std::vector<double>& alphas,
                                          double agreement_tol = 1e-9);
AlphaBetaReport alpha_beta_distinct_check();

}  // namespace alphatree
