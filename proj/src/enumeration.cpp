#include "alphatree/enumeration.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace alphatree {

RationalAlpha::RationalAlpha(long numerator, long denominator) {
  if (denominator == 0) throw std::domain_error("alpha denominator must be nonzero");
  value_ = mpq_class(numerator, denominator);
  value_.canonicalize();
  if (value_ < 0 || value_ > 1) throw std::domain_error("alpha must lie in [0, 1], got " + value_.get_str());
}

RationalAlpha::RationalAlpha(const mpq_class& value) : value_(value) {
  value_.canonicalize();
  if (value_ < 0 || value_ > 1) throw std::domain_error("alpha must lie in [0, 1], got " + value_.get_str());
}

RationalAlpha RationalAlpha::parse(const std::string& text) {
  mpq_class value;
  if (text.empty() || value.set_str(text, 10) != 0) {
    throw std::invalid_argument("not a rational number: '" + text + "'");
  }
  mpq_class den = value.get_den();
  if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return RationalAlpha(value);
}

std::uint64_t shape_count(std::size_t n) {
  if (n > 40) throw std::domain_error("shape_count supports n <= 40");
  std::vector<std::uint64_t> a(n + 1, 0);
  if (n >= 1) a[1] = 1;
  for (std::size_t m = 2; m <= n; ++m) {
    std::uint64_t total = 0;
    for (std::size_t i = 1; 2 * i < m; ++i) total += a[i] * a[m - i];
    if (m % 2 == 0) {
      const std::uint64_t h = a[m / 2];
      total += h * (h - 1) / 2 + h;
    }
    a[m] = total;
  }
  return a[n];
}

namespace {

std::vector<Tree> enumerate_unsorted(std::size_t n, std::map<std::size_t, std::vector<Tree>>& memo) {
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  std::vector<Tree> out;
  if (n == 1) {
    out.push_back(Tree::leaf());
  } else {
    for (std::size_t small = 1; 2 * small <= n; ++small) {
      const std::size_t large = n - small;
      const auto lefts = enumerate_unsorted(small, memo);
      const auto rights = enumerate_unsorted(large, memo);
      for (std::size_t i = 0; i < lefts.size(); ++i) {
        for (std::size_t j = (small == large ? i : 0); j < rights.size(); ++j) {
          out.push_back(Tree::join(lefts[i], rights[j]));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Tree& a, const Tree& b) { return canonical_compare(a, b) < 0; });
  memo[n] = out;
  return out;
}

void collect_q(const Tree& t, const RationalAlpha& alpha, mpq_class& product) {
  if (!t.is_internal()) return;
  product *= exact_q_alpha(alpha, t.left().leaf_count(), t.right().leaf_count());
  collect_q(t.left(), alpha, product);
  collect_q(t.right(), alpha, product);
}

}  // namespace

std::vector<Tree> enumerate_shapes(std::size_t n) {
  if (n < 1 || n > kMaxEnumerationLeaves) {
    throw std::domain_error("enumerate_shapes supports 1 <= n <= " +
                            std::to_string(kMaxEnumerationLeaves) + ", got " + std::to_string(n));
  }
  std::map<std::size_t, std::vector<Tree>> memo;
  return enumerate_unsorted(n, memo);
}

mpq_class exact_q_alpha(const RationalAlpha& alpha, std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw std::domain_error("exact_q_alpha requires a, b >= 1");
  if (a == 1 && b == 1) return mpq_class(1);
  const mpq_class& al = alpha.value();
  auto gamma = [&](std::size_t m) {
    mpq_class g(1);
    for (std::size_t k = 1; k < m; ++k) g *= mpq_class(static_cast<unsigned long>(k)) - al;
    return g;
  };
  auto binomial = [](std::size_t top, std::size_t bottom) {
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), top, bottom);
    return mpq_class(c);
  };
  const std::size_t n = a + b;
  // Gamma_a(n) vanishes only at alpha = 1, where q(a,b) = 1/2 for {1, n-1}, else 0.
  if (al == 1) return (a == 1 || b == 1) ? mpq_class(1, 2) : mpq_class(0);
  mpq_class q = gamma(a) * gamma(b) / gamma(n);
  q *= al / 2 * binomial(n, a) + (1 - 2 * al) * binomial(n - 2, a - 1);
  q.canonicalize();
  return q;
}

mpq_class exact_q_hat(const RationalAlpha& alpha, std::size_t a, std::size_t b) {
  mpq_class q = exact_q_alpha(alpha, a, b);
  return a == b ? q : mpq_class(2 * q);
}

mpq_class exact_shape_prob(const Tree& t, const RationalAlpha& alpha) {
  if (t.empty()) throw TreeError("exact_shape_prob of an empty tree");
  mpq_class product(1);
  collect_q(t, alpha, product);
  const std::size_t exponent = t.leaf_count() - 1 - symmetric_branchpoint_count(t);
  mpz_class orientations;
  mpz_ui_pow_ui(orientations.get_mpz_t(), 2, exponent);
  product *= orientations;
  product.canonicalize();
  return product;
}

mpq_class ShapeTable::total_probability() const {
  mpq_class total(0);
  for (const auto& e : entries) total += e.probability;
  return total;
}

std::size_t ShapeTable::find(const Tree& shape) const {
  const Tree key = canonical_form(forget_labels(shape));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].shape == key) return i;
  }
  return npos;
}

bool operator==(const ShapeTable& a, const ShapeTable& b) {
  if (a.n != b.n || a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (!(x.shape == y.shape) || x.probability != y.probability ||
        x.cladogram_count != y.cladogram_count) {
      return false;
    }
  }
  return true;
}

ShapeTable make_shape_table(std::size_t n, const std::vector<mpq_class>& probabilities) {
  const auto shapes = enumerate_shapes(n);
  if (probabilities.size() != shapes.size()) {
    throw std::invalid_argument("expected " + std::to_string(shapes.size()) + " probabilities for n = " +
                                std::to_string(n));
  }
  ShapeTable table;
  table.n = n;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    table.entries.push_back({shapes[i], probabilities[i], cladogram_count_for_shape(shapes[i])});
  }
  return table;
}

ShapeTable shape_distribution(std::size_t n, const RationalAlpha& alpha) {
  if (n < 1 || n > kMaxDistributionLeaves) {
    throw std::domain_error("shape_distribution supports 1 <= n <= " +
                            std::to_string(kMaxDistributionLeaves));
  }
  std::vector<mpq_class> probabilities;
  for (const Tree& s : enumerate_shapes(n)) probabilities.push_back(exact_shape_prob(s, alpha));
  return make_shape_table(n, probabilities);
}

ShapeTable brute_force_delete_pushforward(const ShapeTable& table) {
  if (table.n < 2) throw std::domain_error("deletion pushforward requires n >= 2");
  const auto targets = enumerate_shapes(table.n - 1);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < targets.size(); ++i) index[targets[i].to_string()] = i;

  std::vector<mpq_class> mass(targets.size(), mpq_class(0));
  const mpq_class per_leaf(1, static_cast<unsigned long>(table.n));
  for (const auto& entry : table.entries) {
    for (std::size_t leaf = 0; leaf < table.n; ++leaf) {
      const Tree reduced = canonical_form(delete_leaf_at(entry.shape, leaf));
      mass[index.at(reduced.to_string())] += entry.probability * per_leaf;
    }
  }
  for (auto& m : mass) m.canonicalize();
  return make_shape_table(table.n - 1, mass);
}

mpq_class brute_force_expectation(const ShapeTable& table, const IntegerStatistic& statistic) {
  mpq_class total(0);
  for (const auto& e : table.entries) {
    total += e.probability * mpq_class(mpz_class(std::to_string(statistic(e.shape))));
  }
  total.canonicalize();
  return total;
}

mpq_class brute_force_variance(const ShapeTable& table, const IntegerStatistic& statistic) {
  mpq_class first(0);
  mpq_class second(0);
  for (const auto& e : table.entries) {
    const mpq_class v(mpz_class(std::to_string(statistic(e.shape))));
    first += e.probability * v;
    second += e.probability * v * v;
  }
  mpq_class var = second - first * first;
  var.canonicalize();
  return var;
}

namespace {

void shape_newick(const Tree& t, std::string& out) {
  if (t.is_leaf()) return;
  out += '(';
  shape_newick(t.left(), out);
  out += ',';
  shape_newick(t.right(), out);
  out += ')';
}

}  // namespace

std::string shape_table_csv(const ShapeTable& table) {
  std::ostringstream os;
  os << "n,canonical_newick,probability_numerator,probability_denominator,cladogram_count\n";
  for (const auto& e : table.entries) {
    std::string newick;
    shape_newick(e.shape, newick);
    newick += ';';
    // The Newick field contains commas, so it is always quoted.
    os << table.n << ",\"" << newick << "\"," << e.probability.get_num().get_str() << ','
       << e.probability.get_den().get_str() << ',' << e.cladogram_count << '\n';
  }
  return os.str();
}

}  // namespace alphatree
