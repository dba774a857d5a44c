#pragma once

// Exhaustive exact ground truth for small trees.
//
// Every shape with n <= 12 leaves is enumerated explicitly; probabilities under
// the alpha model are evaluated in exact rational arithmetic at rational alpha.
// No floating point enters this module.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "alphatree/tree.hpp"

namespace alphatree {

class RationalAlpha {
 public:
  RationalAlpha(long numerator, long denominator);
  explicit RationalAlpha(const mpq_class& value);

  const mpq_class& value() const { return value_; }
  double to_double() const { return value_.get_d(); }
  std::string to_string() const { return value_.get_str(); }

  /// Parses "p/q" or an integer.
  static RationalAlpha parse(const std::string& text);

 private:
  mpq_class value_;
};

inline constexpr std::size_t kMaxEnumerationLeaves = 12;
inline constexpr std::size_t kMaxDistributionLeaves = 10;

/// A(n), the number of tree shapes with n leaves (Wedderburn-Etherington).
std::uint64_t shape_count(std::size_t n);

/// All shapes with n leaves, each once, in canonical form, sorted by
/// canonical_compare. Requires 1 <= n <= 12.
std::vector<Tree> enumerate_shapes(std::size_t n);

mpq_class exact_q_alpha(const RationalAlpha& alpha, std::size_t a, std::size_t b);
mpq_class exact_q_hat(const RationalAlpha& alpha, std::size_t a, std::size_t b);
mpq_class exact_shape_prob(const Tree& t, const RationalAlpha& alpha);

struct ShapeTableEntry {
  Tree shape;  // canonical
  mpq_class probability;
  std::uint64_t cladogram_count = 0;
};

struct ShapeTable {
  std::size_t n = 0;
  std::vector<ShapeTableEntry> entries;

  mpq_class total_probability() const;
  /// Entry index for a shape (any orientation), or npos.
  std::size_t find(const Tree& shape) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const ShapeTable& a, const ShapeTable& b);
};

/// Exact alpha-model distribution over shapes with n <= 10 leaves.
ShapeTable shape_distribution(std::size_t n, const RationalAlpha& alpha);

/// Table over all n-leaf shapes with the given probabilities (in enumeration order).
ShapeTable make_shape_table(std::size_t n, const std::vector<mpq_class>& probabilities);

/// Exact law of the shape left after deleting a uniform random leaf from a
/// tree drawn from `table`. The result lists every (n-1)-leaf shape.
ShapeTable brute_force_delete_pushforward(const ShapeTable& table);

using IntegerStatistic = std::function<std::uint64_t(const Tree&)>;

mpq_class brute_force_expectation(const ShapeTable& table, const IntegerStatistic& statistic);
/// E[statistic^2] - E[statistic]^2.
mpq_class brute_force_variance(const ShapeTable& table, const IntegerStatistic& statistic);

/// CSV with header n,canonical_newick,probability_numerator,probability_denominator,cladogram_count.
std::string shape_table_csv(const ShapeTable& table);

}  // namespace alphatree
