#include <doctest.h>

#include <map>
#include <numeric>
#include <vector>

#include "alphatree/alpha_model.hpp"
#include "alphatree/enumeration.hpp"
#include "alphatree/tree.hpp"

using namespace alphatree;

namespace {

Tree L(Label x) { return Tree::leaf(x); }
Tree J(const Tree& a, const Tree& b) { return Tree::join(a, b); }
Tree S() { return Tree::leaf(); }

// Exact mixture for uniform leaf deletion, written from the recursive definition
// D(t1*t2) = |t1|/n D(t1)*t2 + |t2|/n t1*D(t2), keyed by canonical string.
std::map<std::string, double> deletion_mixture(const Tree& t) {
  std::map<std::string, double> out;
  if (t.is_leaf()) {
    out["<empty>"] = 1.0;
    return out;
  }
  const double n = static_cast<double>(t.leaf_count());
  const auto key = [](const Tree& x) { return x.empty() ? std::string("<empty>") : canonical_form(x).to_string(); };
  const auto side = [&](const Tree& del, const Tree& keep, bool del_left) {
    const double w = static_cast<double>(del.leaf_count()) / n;
    if (del.is_leaf()) {
      out[key(keep)] += w;
      return;
    }
    // Recurse by enumerating individual leaves of `del` with equal weight.
    for (std::size_t i = 0; i < del.leaf_count(); ++i) {
      const Tree d = delete_leaf_at(del, i);
      const Tree joined = del_left ? root_join(d, keep) : root_join(keep, d);
      out[key(joined)] += w / static_cast<double>(del.leaf_count());
    }
  };
  side(t.left(), t.right(), true);
  side(t.right(), t.left(), false);
  return out;
}

}  // namespace

TEST_CASE("root join and leaf counts") {
  const Tree e;
  CHECK(e.empty());
  CHECK(leaf_count(e) == 0);
  CHECK(root_join(e, L(1)) == L(1));
  CHECK(root_join(L(1), e) == L(1));
  const Tree two = root_join(S(), S());
  CHECK(two.leaf_count() == 2);
  CHECK(canonical_form(two) == J(S(), S()));
  const Tree t = J(J(L(1), L(2)), L(3));
  CHECK(t.leaf_count() == 3);
  CHECK(root_join(t.left(), t.right()) == t);
  CHECK(L(4).leaf_count() == 1);
}

TEST_CASE("splits") {
  CHECK(splits(S()).size() == 0);
  CHECK_THROWS_AS(splits(Tree()), TreeError);

  const Tree comb4 = make_comb(4);
  const SplitMultiset expected({{1, 3}, {1, 2}, {1, 1}}, SplitMode::thin);
  CHECK(splits(comb4) == expected);

  // 6-leaf worked example: a 4-leaf comb joined with a cherry.
  const Tree ex = J(make_comb(4), J(S(), S()));
  const SplitMultiset ex_splits({{4, 2}, {1, 1}, {1, 3}, {2, 1}, {1, 1}}, SplitMode::thin);
  CHECK(splits(ex) == ex_splits);

  const auto fat = splits(J(S(), J(S(), S())), SplitMode::fat);
  const SplitMultiset fat_expected({{1, 2}, {1, 1}}, SplitMode::fat);
  CHECK(fat == fat_expected);
  CHECK(!(splits(J(J(S(), S()), S()), SplitMode::fat) == fat_expected));

  Rng rng = make_stream(3, 0);
  for (int i = 0; i < 50; ++i) {
    const Tree t = sample_fat_shape(2 + uniform_index(rng, 40), AlphaParam(0.4), rng);
    const SplitMultiset sp = splits(t);
    CHECK(sp.size() == t.leaf_count() - 1);
    std::size_t max_sum = 0;
    for (const auto& [a, b] : sp.entries()) {
      CHECK(a >= 1);
      CHECK(b >= 1);
      max_sum = std::max(max_sum, a + b);
    }
    CHECK(max_sum == t.leaf_count());
  }
}

TEST_CASE("canonical form") {
  const Tree comb3 = make_comb(3);
  CHECK(canonical_form(J(comb3, S())) == canonical_form(J(S(), comb3)));
  Rng rng = make_stream(11, 0);
  for (int i = 0; i < 100; ++i) {
    const Tree t = sample_cladogram(1 + uniform_index(rng, 30), AlphaParam(0.5), rng);
    const Tree c = canonical_form(t);
    CHECK(canonical_form(c) == c);
    CHECK(thin_equal(t, c));
  }
  // Same thin cladogram drawn with different orientations.
  const Tree a = J(J(L(1), L(2)), J(L(3), J(L(4), L(5))));
  const Tree b = J(J(J(L(5), L(4)), L(3)), J(L(2), L(1)));
  CHECK_FALSE(a == b);
  CHECK(canonical_form(a) == canonical_form(b));
  CHECK(thin_equal(a, b));
  CHECK_FALSE(thin_equal(a, J(J(L(1), L(3)), J(L(2), J(L(4), L(5))))));
  CHECK(canonical_compare(S(), J(S(), S())) == std::strong_ordering::less);
}

TEST_CASE("forget labels") {
  CHECK(forget_labels(L(1)) == S());
  CHECK_FALSE(forget_labels(L(1)).has_labels());
  CHECK(forget_labels(J(L(2), L(1))) == J(S(), S()));
}

TEST_CASE("symmetric branch points and cladogram counts") {
  // Root and both cherries are symmetric: 4!/2^3 = 3 cladograms.
  CHECK(symmetric_branchpoint_count(make_balanced(2)) == 3);
  for (std::size_t n = 3; n <= 12; ++n) CHECK(symmetric_branchpoint_count(make_comb(n)) == 1);
  CHECK(symmetric_branchpoint_count(make_balanced(3)) == 7);
  CHECK(cladogram_count_for_shape(make_comb(4)) == 12);
  CHECK(cladogram_count_for_shape(make_balanced(2)) == 3);
  CHECK(cladogram_total(4) == 15);
  for (std::size_t n = 2; n <= 10; ++n) {
    std::uint64_t total = 0;
    for (const auto& s : enumerate_shapes(n)) total += cladogram_count_for_shape(s);
    std::uint64_t dfact = 1;
    for (std::uint64_t k = 1; k <= 2 * n - 3; k += 2) dfact *= k;
    CHECK(total == dfact);
    CHECK(cladogram_total(n) == dfact);
  }
}

TEST_CASE("labelled deletion") {
  CHECK(delete_leaf_labeled(L(1), 1).empty());
  const Tree two = J(L(1), L(2));
  CHECK(delete_leaf_labeled(two, 3) == two);
  const Tree t = J(J(L(1), L(2)), L(3));
  CHECK(delete_leaf_labeled(t, 2) == J(L(1), L(3)));
  CHECK(delete_leaf_labeled(t, 3) == J(L(1), L(2)));
}

TEST_CASE("random deletion") {
  Rng rng = make_stream(5, 0);
  for (int i = 0; i < 20; ++i) {
    CHECK(delete_random_leaf(S(), rng).empty());
    CHECK(delete_random_leaf(J(S(), S()), rng).is_leaf());
  }
  // Fixed 5-leaf tree: ((*,*),(*,(*,*)))
  const Tree t = J(J(S(), S()), J(S(), J(S(), S())));
  const auto exact = deletion_mixture(t);
  double exact_total = 0;
  for (const auto& [k, p] : exact) exact_total += p;
  CHECK(exact_total == doctest::Approx(1.0));

  const std::size_t draws = 100000;
  std::map<std::string, double> empirical;
  for (std::size_t i = 0; i < draws; ++i) {
    empirical[canonical_form(delete_random_leaf(t, rng)).to_string()] += 1.0 / draws;
  }
  double tv = 0;
  std::map<std::string, double> keys = exact;
  for (const auto& [k, p] : empirical) keys[k] += 0;
  for (const auto& [k, unused] : keys) {
    tv += std::abs((exact.count(k) ? exact.at(k) : 0.0) - (empirical.count(k) ? empirical.at(k) : 0.0));
  }
  tv /= 2;
  CHECK(tv < 0.02);
}

TEST_CASE("label permutations") {
  // Cherries {1,2} and {4,5} under a common parent, 3 hanging off the root.
  const Tree t = J(J(J(L(1), L(2)), J(L(4), L(5))), L(3));
  const std::vector<Label> id{1, 2, 3, 4, 5};
  const std::vector<Label> p1{2, 1, 3, 5, 4};  // (12)(3)(45)
  const std::vector<Label> p2{4, 5, 3, 1, 2};  // (14)(25)(3)
  const std::vector<Label> p3{3, 2, 1, 4, 5};  // (13)
  CHECK(permute_labels(t, id) == t);
  CHECK(thin_equal(permute_labels(t, p1), t));
  CHECK(thin_equal(permute_labels(t, p2), t));
  CHECK_FALSE(thin_equal(permute_labels(t, p3), t));
  CHECK(forget_labels(permute_labels(t, p3)) == forget_labels(t));

  const std::vector<Label> short_sigma{1, 2};
  CHECK_THROWS_AS(permute_labels(t, short_sigma), TreeError);
  const std::vector<Label> not_perm{1, 1, 3, 4, 5};
  CHECK_THROWS_AS(permute_labels(t, not_perm), TreeError);
}

TEST_CASE("cladogram validity and builders") {
  CHECK(is_cladogram(J(L(2), L(1))));
  CHECK_FALSE(is_cladogram(J(L(2), L(3))));
  CHECK_FALSE(is_cladogram(J(S(), S())));
  CHECK(is_cladogram(relabel_preorder(make_comb(6))));
  CHECK(make_comb(7).leaf_count() == 7);
  CHECK(make_balanced(4).leaf_count() == 16);
  CHECK(make_balanced(4).height() == 4);
  CHECK(make_comb(1).is_leaf());
}
