#include "alphatree/alpha_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace alphatree {

AlphaParam::AlphaParam(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1], got " + std::to_string(value));
  }
}

BetaParam::BetaParam(double value) : value_(value) {
  if (!(value > -2.0) || !std::isfinite(value)) {
    throw std::domain_error("beta must be finite and > -2, got " + std::to_string(value));
  }
}

double gamma_alpha(AlphaParam alpha, std::size_t n) {
  if (n == 0) throw std::domain_error("gamma_alpha requires n >= 1");
  double product = 1.0;
  for (std::size_t k = 1; k < n; ++k) product *= static_cast<double>(k) - alpha.value();
  return product;
}

double q_alpha(AlphaParam alpha, std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw std::domain_error("q_alpha requires a, b >= 1");
  if (a == 1 && b == 1) return 1.0;
  const double al = alpha.value();
  const std::size_t small = std::min(a, b);
  const std::size_t large = std::max(a, b);
  const double n = static_cast<double>(a + b);

  // Gamma_a(a)Gamma_a(b)/Gamma_a(a+b) * C(a+b-2, a-1), paired factor by factor
  // so that every term stays O(1).
  double product = 1.0;
  for (std::size_t j = 1; j < small; ++j) {
    const double jd = static_cast<double>(j);
    const double top = static_cast<double>(large - 1 + j);
    product *= (jd - al) / jd * top / (top - al);
  }
  product /= n - 1.0 - al;
  const double bracket =
      al * n * (n - 1.0) / (2.0 * static_cast<double>(small) * static_cast<double>(large)) + 1.0 -
      2.0 * al;
  return product * bracket;
}

double q_hat(AlphaParam alpha, std::size_t a, std::size_t b) {
  const double q = q_alpha(alpha, a, b);
  return a == b ? q : 2.0 * q;
}

SplitDistribution alpha_split_distribution(AlphaParam alpha) {
  return {[alpha](std::size_t a, std::size_t b) { return q_alpha(alpha, a, b); }, true};
}

namespace {

enum class EdgeKind { leaf, internal };

struct EdgeChoice {
  EdgeKind kind;
  std::size_t index;  // preorder index among nodes of that kind
};

EdgeChoice choose_edge(std::size_t n, double alpha, Rng& rng) {
  if (n == 1) return {EdgeKind::leaf, 0};
  const double nd = static_cast<double>(n);
  const double leaf_mass = nd * (1.0 - alpha) / (nd - alpha);
  if (uniform01(rng) < leaf_mass) return {EdgeKind::leaf, uniform_index(rng, n)};
  return {EdgeKind::internal, uniform_index(rng, n - 1)};
}

Tree attach(const Tree& sibling, const Tree& fresh, bool fresh_left) {
  return fresh_left ? Tree::join(fresh, sibling) : Tree::join(sibling, fresh);
}

// Rebuilds t with the new leaf attached above the chosen node. `leaf_seen` and
// `internal_seen` count nodes of each kind visited so far in preorder.
Tree insert_above(const Tree& t, const EdgeChoice& choice, const Tree& fresh, bool fresh_left,
                  std::size_t& leaf_seen, std::size_t& internal_seen) {
  if (t.is_leaf()) {
    const bool hit = choice.kind == EdgeKind::leaf && leaf_seen == choice.index;
    ++leaf_seen;
    return hit ? attach(t, fresh, fresh_left) : t;
  }
  const bool hit = choice.kind == EdgeKind::internal && internal_seen == choice.index;
  ++internal_seen;
  if (hit) return attach(t, fresh, fresh_left);

  const Tree l = t.left();
  const Tree r = t.right();
  // Skip whole subtrees that cannot contain the target.
  const std::size_t l_leaves = l.leaf_count();
  const std::size_t l_internal = l_leaves - 1;
  const bool in_left = choice.kind == EdgeKind::leaf ? choice.index < leaf_seen + l_leaves
                                                     : choice.index < internal_seen + l_internal;
  if (in_left) {
    Tree nl = insert_above(l, choice, fresh, fresh_left, leaf_seen, internal_seen);
    return Tree::join(nl, r);
  }
  leaf_seen += l_leaves;
  internal_seen += l_internal;
  Tree nr = insert_above(r, choice, fresh, fresh_left, leaf_seen, internal_seen);
  return Tree::join(l, nr);
}

// Mutable arena used by the samplers: O(1) per insertion.
class GrowingTree {
 public:
  explicit GrowingTree(std::size_t capacity) {
    left_.reserve(2 * capacity);
    right_.reserve(2 * capacity);
    parent_.reserve(2 * capacity);
    leaves_.reserve(capacity);
    internals_.reserve(capacity);
    root_ = new_node();
    leaves_.push_back(root_);
  }

  std::size_t leaf_count() const { return leaves_.size(); }

  void grow(double alpha, Rng& rng) {
    const EdgeChoice choice = choose_edge(leaves_.size(), alpha, rng);
    const int target = choice.kind == EdgeKind::leaf ? leaves_[choice.index]
                                                     : internals_[choice.index];
    const int joint = new_node();
    const int fresh = new_node();
    const int up = parent_[target];
    if (up < 0) {
      root_ = joint;
    } else if (left_[up] == target) {
      left_[up] = joint;
    } else {
      right_[up] = joint;
    }
    parent_[joint] = up;
    if (fair_coin(rng)) {
      left_[joint] = fresh;
      right_[joint] = target;
    } else {
      left_[joint] = target;
      right_[joint] = fresh;
    }
    parent_[target] = joint;
    parent_[fresh] = joint;
    leaves_.push_back(fresh);
    internals_.push_back(joint);
  }

  // Leaf k (in insertion order) receives labels[k]; empty span means unlabeled.
  Tree freeze(std::span<const Label> labels) const {
    std::vector<Label> label_of_node(left_.size(), 0);
    if (!labels.empty()) {
      for (std::size_t k = 0; k < leaves_.size(); ++k) label_of_node[leaves_[k]] = labels[k];
    }
    // Iterative postorder so that deep combs do not exhaust the stack.
    std::vector<Tree> built(left_.size());
    std::vector<std::pair<int, bool>> stack{{root_, false}};
    while (!stack.empty()) {
      auto [node, expanded] = stack.back();
      stack.pop_back();
      if (left_[node] < 0) {
        built[node] = labels.empty() ? Tree::leaf() : Tree::leaf(label_of_node[node]);
      } else if (expanded) {
        built[node] = Tree::join(built[left_[node]], built[right_[node]]);
        built[left_[node]] = Tree();
        built[right_[node]] = Tree();
      } else {
        stack.emplace_back(node, true);
        stack.emplace_back(right_[node], false);
        stack.emplace_back(left_[node], false);
      }
    }
    return built[root_];
  }

 private:
  int new_node() {
    left_.push_back(-1);
    right_.push_back(-1);
    parent_.push_back(-1);
    return static_cast<int>(left_.size() - 1);
  }

  std::vector<int> left_;
  std::vector<int> right_;
  std::vector<int> parent_;
  std::vector<int> leaves_;
  std::vector<int> internals_;
  int root_;
};

GrowingTree grow(std::size_t n, AlphaParam alpha, Rng& rng) {
  GrowingTree tree(n);
  while (tree.leaf_count() < n) tree.grow(alpha.value(), rng);
  return tree;
}

}  // namespace

Tree alpha_insert(const Tree& t, AlphaParam alpha, Rng& rng, std::optional<Label> label) {
  if (t.empty()) throw TreeError("alpha_insert on an empty tree");
  const EdgeChoice choice = choose_edge(t.leaf_count(), alpha.value(), rng);
  const bool fresh_left = fair_coin(rng);
  std::size_t leaf_seen = 0;
  std::size_t internal_seen = 0;
  return insert_above(t, choice, Tree::leaf(label), fresh_left, leaf_seen, internal_seen);
}

Tree sample_fat_shape(std::size_t n, AlphaParam alpha, Rng& rng) {
  if (n == 0) return Tree();
  return grow(n, alpha, rng).freeze({});
}

Tree sample_shape(std::size_t n, AlphaParam alpha, Rng& rng) {
  return canonical_form(sample_fat_shape(n, alpha, rng));
}

Tree sample_cladogram(std::size_t n, AlphaParam alpha, Rng& rng) {
  if (n == 0) return Tree();
  const GrowingTree tree = grow(n, alpha, rng);
  std::vector<Label> labels(n);
  std::iota(labels.begin(), labels.end(), Label{1});
  // Uniform permutation of the insertion labels (Fisher-Yates).
  for (std::size_t i = n - 1; i > 0; --i) std::swap(labels[i], labels[uniform_index(rng, i + 1)]);
  return tree.freeze(labels);
}

ShapeLikelihood::ShapeLikelihood(const Tree& shape) : n_(shape.leaf_count()) {
  if (shape.empty()) throw TreeError("likelihood of an empty tree");
  orientation_exponent_ = n_ - 1 - symmetric_branchpoint_count(shape);
  splits_ = splits(shape, SplitMode::thin).counted();
}

double ShapeLikelihood::log_prob(AlphaParam alpha) const {
  double total = static_cast<double>(orientation_exponent_) * std::log(2.0);
  for (const auto& [split, count] : splits_) {
    const double q = q_alpha(alpha, split.first, split.second);
    if (q <= 0.0) return -std::numeric_limits<double>::infinity();
    total += static_cast<double>(count) * std::log(q);
  }
  return total;
}

double shape_log_prob(const Tree& t, AlphaParam alpha) {
  return ShapeLikelihood(t).log_prob(alpha);
}

double cladogram_log_prob(const Tree& t, AlphaParam alpha) {
  if (!is_cladogram(t)) throw TreeError("cladogram_log_prob requires leaves labeled 1..n");
  const std::size_t n = t.leaf_count();
  const double k = static_cast<double>(symmetric_branchpoint_count(t));
  return k * std::log(2.0) - std::lgamma(static_cast<double>(n) + 1.0) + shape_log_prob(t, alpha);
}

double deletion_stability_residual(const SplitDistribution& q, std::size_t x, std::size_t y) {
  if (x == 0 || y == 0) throw std::domain_error("deletion_stability_residual requires x, y >= 1");
  const double n1 = static_cast<double>(x + y + 1);
  const double stay = 1.0 / (1.0 - (q(1, x + y) + q(x + y, 1)) / n1);
  const double grow = q(x + 1, y) * static_cast<double>(x + 1) / n1 +
                      q(x, y + 1) * static_cast<double>(y + 1) / n1;
  return q(x, y) - stay * grow;
}

double deletion_stability_residual(AlphaParam alpha, std::size_t x, std::size_t y) {
  return deletion_stability_residual(alpha_split_distribution(alpha), x, y);
}

double beta_split_q(BetaParam beta, std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw std::domain_error("beta_split_q requires a, b >= 1");
  const std::size_t n = a + b;
  const double be = beta.value();
  auto log_weight = [&](std::size_t m) {
    const double md = static_cast<double>(m);
    const double rd = static_cast<double>(n - m);
    return std::lgamma(be + md + 1.0) + std::lgamma(be + rd + 1.0) - std::lgamma(md + 1.0) -
           std::lgamma(rd + 1.0);
  };
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < n; ++m) peak = std::max(peak, log_weight(m));
  double normalizer = 0.0;
  for (std::size_t m = 1; m < n; ++m) normalizer += std::exp(log_weight(m) - peak);
  return std::exp(log_weight(a) - peak) / normalizer;
}

SplitDistribution beta_split_distribution(BetaParam beta) {
  return {[beta](std::size_t a, std::size_t b) { return beta_split_q(beta, a, b); }, true};
}

AlphaBetaReport alpha_beta_distinct_check(const std::vector<double>& alphas, double agreement_tol) {
  AlphaBetaReport report;
  for (double a : alphas) {
    if (a >= 1.0) continue;
    const AlphaParam alpha(a);
    AlphaBetaPoint p{};
    p.alpha = a;
    p.ratio_15_24 = q_alpha(alpha, 1, 5) / q_alpha(alpha, 2, 4);
    p.ratio_24_33 = q_alpha(alpha, 2, 4) / q_alpha(alpha, 3, 3);
    // Beta model: q(1,5)/q(2,4) = (b+5)/(b+2) * 2/5 and q(2,4)/q(3,3) = (b+4)/(b+3) * 3/4.
    const double r1 = p.ratio_15_24 * 5.0 / 2.0;
    const double r2 = p.ratio_24_33 * 4.0 / 3.0;
    p.beta_from_first = (5.0 - 2.0 * r1) / (r1 - 1.0);
    p.beta_from_second = (4.0 - 3.0 * r2) / (r2 - 1.0);
    p.discrepancy = std::abs(p.beta_from_first - p.beta_from_second);
    if (p.discrepancy <= agreement_tol) report.coincidences.push_back(a);
    report.points.push_back(p);
  }
  return report;
}

AlphaBetaReport alpha_beta_distinct_check() {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(i / 100.0);
  return alpha_beta_distinct_check(grid);
}

}  // namespace alphatree
