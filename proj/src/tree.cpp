#include "alphatree/tree.hpp"

#include <algorithm>
#include <numeric>

namespace alphatree {

Tree Tree::leaf(std::optional<Label> label) {
  if (label && *label == 0) throw TreeError("leaf labels must be positive");
  auto node = std::make_shared<Node>();
  node->label = label;
  return Tree(std::move(node));
}

Tree Tree::join(const Tree& left, const Tree& right) {
  if (left.empty()) return right;
  if (right.empty()) return left;
  auto node = std::make_shared<Node>();
  node->left = left.root_;
  node->right = right.root_;
  node->leaves = left.root_->leaves + right.root_->leaves;
  node->height = 1 + std::max(left.root_->height, right.root_->height);
  return Tree(std::move(node));
}

Tree Tree::left() const {
  if (!is_internal()) throw TreeError("left() on a tree without children");
  return Tree(root_->left);
}

Tree Tree::right() const {
  if (!is_internal()) throw TreeError("right() on a tree without children");
  return Tree(root_->right);
}

std::optional<Label> Tree::label() const {
  if (!is_leaf()) throw TreeError("label() on a non-leaf");
  return root_->label;
}

namespace {

void collect_labels(const Tree& t, std::vector<Label>& out) {
  if (t.is_leaf()) {
    if (auto l = t.label()) out.push_back(*l);
    return;
  }
  collect_labels(t.left(), out);
  collect_labels(t.right(), out);
}

void append_encoding(const Tree& t, std::string& out) {
  if (t.is_leaf()) {
    auto l = t.label();
    out += l ? std::to_string(*l) : "*";
    return;
  }
  out += '(';
  append_encoding(t.left(), out);
  out += ',';
  append_encoding(t.right(), out);
  out += ')';
}

}  // namespace

std::vector<Label> Tree::labels() const {
  std::vector<Label> out;
  if (!empty()) collect_labels(*this, out);
  return out;
}

bool Tree::has_labels() const {
  if (empty()) return false;
  if (is_leaf()) return root_->label.has_value();
  return left().has_labels() || right().has_labels();
}

bool operator==(const Tree& a, const Tree& b) {
  if (a.root_ == b.root_) return true;
  if (!a.root_ || !b.root_) return false;
  if (a.root_->leaves != b.root_->leaves) return false;
  if (a.is_leaf()) return a.root_->label == b.root_->label;
  return a.left() == b.left() && a.right() == b.right();
}

std::string Tree::to_string() const {
  if (empty()) return "()";
  std::string out;
  append_encoding(*this, out);
  return out;
}

SplitMultiset::SplitMultiset(std::vector<Entry> entries, SplitMode mode)
    : entries_(std::move(entries)), mode_(mode) {
  if (mode_ == SplitMode::thin) {
    for (auto& [a, b] : entries_) {
      if (a > b) std::swap(a, b);
    }
  }
  std::sort(entries_.begin(), entries_.end());
}

std::vector<std::pair<SplitMultiset::Entry, std::size_t>> SplitMultiset::counted() const {
  std::vector<std::pair<Entry, std::size_t>> out;
  for (const auto& e : entries_) {
    if (!out.empty() && out.back().first == e) {
      ++out.back().second;
    } else {
      out.emplace_back(e, 1);
    }
  }
  return out;
}

Tree root_join(const Tree& left, const Tree& right) {
  return Tree::join(left, right);
}

std::size_t leaf_count(const Tree& t) {
  return t.leaf_count();
}

namespace {

void collect_splits(const Tree& t, std::vector<SplitMultiset::Entry>& out) {
  if (!t.is_internal()) return;
  const Tree l = t.left();
  const Tree r = t.right();
  out.emplace_back(l.leaf_count(), r.leaf_count());
  collect_splits(l, out);
  collect_splits(r, out);
}

std::strong_ordering compare_shape(const Tree& a, const Tree& b) {
  if (auto c = a.leaf_count() <=> b.leaf_count(); c != 0) return c;
  if (a.is_leaf()) return std::strong_ordering::equal;
  if (auto c = compare_shape(a.left(), b.left()); c != 0) return c;
  return compare_shape(a.right(), b.right());
}

// Assumes equal shapes.
std::strong_ordering compare_labels(const Tree& a, const Tree& b) {
  if (a.is_leaf()) {
    auto la = a.label();
    auto lb = b.label();
    if (la == lb) return std::strong_ordering::equal;
    if (!la) return std::strong_ordering::less;
    if (!lb) return std::strong_ordering::greater;
    return *la <=> *lb;
  }
  if (auto c = compare_labels(a.left(), b.left()); c != 0) return c;
  return compare_labels(a.right(), b.right());
}

}  // namespace

SplitMultiset splits(const Tree& t, SplitMode mode) {
  if (t.empty()) throw TreeError("splits of an empty tree");
  std::vector<SplitMultiset::Entry> entries;
  entries.reserve(t.leaf_count() - 1);
  collect_splits(t, entries);
  return SplitMultiset(std::move(entries), mode);
}

std::strong_ordering canonical_compare(const Tree& a, const Tree& b) {
  if (a.empty() || b.empty()) return b.empty() <=> a.empty();
  if (auto c = compare_shape(a, b); c != 0) return c;
  return compare_labels(a, b);
}

Tree canonical_form(const Tree& t) {
  if (!t.is_internal()) return t;
  Tree l = canonical_form(t.left());
  Tree r = canonical_form(t.right());
  if (canonical_compare(l, r) > 0) std::swap(l, r);
  return Tree::join(l, r);
}

bool thin_equal(const Tree& a, const Tree& b) {
  return canonical_form(a) == canonical_form(b);
}

Tree forget_labels(const Tree& t) {
  if (t.empty()) return t;
  if (t.is_leaf()) return Tree::leaf();
  return Tree::join(forget_labels(t.left()), forget_labels(t.right()));
}

namespace {

std::size_t count_symmetric(const Tree& t) {
  if (!t.is_internal()) return 0;
  const Tree l = t.left();
  const Tree r = t.right();
  return count_symmetric(l) + count_symmetric(r) + (l == r ? 1 : 0);
}

}  // namespace

std::size_t symmetric_branchpoint_count(const Tree& t) {
  if (t.empty()) throw TreeError("symmetric_branchpoint_count of an empty tree");
  return count_symmetric(canonical_form(forget_labels(t)));
}

std::uint64_t cladogram_count_for_shape(const Tree& t) {
  const std::size_t n = t.leaf_count();
  if (n == 0) throw TreeError("cladogram count of an empty tree");
  if (n > 20) throw TreeError("cladogram count overflows 64 bits for n > 20");
  std::uint64_t factorial = 1;
  for (std::uint64_t i = 2; i <= n; ++i) factorial *= i;
  return factorial >> symmetric_branchpoint_count(t);
}

std::uint64_t cladogram_total(std::size_t n) {
  if (n == 0) throw TreeError("cladogram_total(0)");
  std::uint64_t result = 1;
  for (std::uint64_t k = 3; k + 3 <= 2 * n; k += 2) result *= k;
  return result;
}

Tree delete_leaf_labeled(const Tree& t, Label x) {
  if (t.empty()) return t;
  if (t.is_leaf()) return t.label() == x ? Tree() : t;
  return Tree::join(delete_leaf_labeled(t.left(), x), delete_leaf_labeled(t.right(), x));
}

Tree delete_leaf_at(const Tree& t, std::size_t index) {
  if (index >= t.leaf_count()) throw TreeError("leaf index out of range");
  if (t.is_leaf()) return Tree();
  const Tree l = t.left();
  const Tree r = t.right();
  if (index < l.leaf_count()) return Tree::join(delete_leaf_at(l, index), r);
  return Tree::join(l, delete_leaf_at(r, index - l.leaf_count()));
}

Tree delete_random_leaf(const Tree& t, Rng& rng) {
  if (t.empty()) throw TreeError("delete_random_leaf on an empty tree");
  return delete_leaf_at(t, uniform_index(rng, t.leaf_count()));
}

bool is_cladogram(const Tree& t) {
  auto labels = t.labels();
  if (labels.size() != t.leaf_count()) return false;
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != i + 1) return false;
  }
  return true;
}

namespace {

Tree apply_permutation(const Tree& t, std::span<const Label> sigma) {
  if (t.is_leaf()) return Tree::leaf(sigma[*t.label() - 1]);
  return Tree::join(apply_permutation(t.left(), sigma), apply_permutation(t.right(), sigma));
}

Tree relabel_from(const Tree& t, Label& next) {
  if (t.is_leaf()) return Tree::leaf(next++);
  Tree l = relabel_from(t.left(), next);
  Tree r = relabel_from(t.right(), next);
  return Tree::join(l, r);
}

}  // namespace

Tree permute_labels(const Tree& t, std::span<const Label> sigma) {
  if (sigma.size() != t.leaf_count()) throw TreeError("permutation size does not match leaf count");
  if (!is_cladogram(t)) throw TreeError("permute_labels requires a cladogram labeled 1..n");
  std::vector<bool> seen(sigma.size() + 1, false);
  for (Label s : sigma) {
    if (s == 0 || s > sigma.size() || seen[s]) throw TreeError("sigma is not a permutation of 1..n");
    seen[s] = true;
  }
  if (t.empty()) return t;
  return apply_permutation(t, sigma);
}

Tree relabel_preorder(const Tree& t) {
  if (t.empty()) return t;
  Label next = 1;
  return relabel_from(t, next);
}

Tree make_comb(std::size_t n) {
  if (n == 0) return Tree();
  Tree t = Tree::leaf();
  for (std::size_t i = 1; i < n; ++i) t = Tree::join(t, Tree::leaf());
  return t;
}

Tree make_balanced(std::size_t depth) {
  Tree t = Tree::leaf();
  for (std::size_t i = 0; i < depth; ++i) t = Tree::join(t, t);
  return t;
}

}  // namespace alphatree
