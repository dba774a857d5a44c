#pragma once

// Immutable rooted binary trees.
//
// A Tree is a fat (ordered) rooted binary tree whose leaves optionally carry
// positive integer labels. Thin semantics (unordered children) are obtained
// through canonical_form(): two trees are equal as thin trees iff their
// canonical forms are structurally equal. Nodes are shared between trees, so
// copying a Tree is O(1).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alphatree/random.hpp"

namespace alphatree {

using Label = std::uint32_t;

class TreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tree {
 public:
  /// The empty tree (zero leaves).
  Tree() = default;

  static Tree leaf(std::optional<Label> label = std::nullopt);
  /// Root join t1*t2. If either side is empty the other is returned unchanged.
  static Tree join(const Tree& left, const Tree& right);

  bool empty() const { return root_ == nullptr; }
  bool is_leaf() const { return root_ && !root_->left; }
  bool is_internal() const { return root_ && root_->left; }

  std::size_t leaf_count() const { return root_ ? root_->leaves : 0; }
  std::size_t height() const { return root_ ? root_->height : 0; }

  /// Children of an internal node. Throws TreeError otherwise.
  Tree left() const;
  Tree right() const;

  /// Label of a leaf; nullopt for unlabeled leaves. Throws on non-leaves.
  std::optional<Label> label() const;

  /// Leaf labels in preorder (left to right). Unlabeled leaves are skipped.
  std::vector<Label> labels() const;
  bool has_labels() const;

  friend bool operator==(const Tree& a, const Tree& b);

  /// Parenthesized encoding, e.g. "((1,2),3)" or "((*,*),*)" for shapes.
  std::string to_string() const;

 private:
  struct Node {
    std::optional<Label> label;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::size_t leaves = 1;
    std::size_t height = 0;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Tree(NodePtr root) : root_(std::move(root)) {}

  NodePtr root_;
};

enum class SplitMode { fat, thin };

/// Multiset of first splits (|t1|, |t2|) of every internal node, stored sorted.
/// In thin mode every pair is normalized to (min, max).
class SplitMultiset {
 public:
  using Entry = std::pair<std::size_t, std::size_t>;

  SplitMultiset() = default;
  SplitMultiset(std::vector<Entry> entries, SplitMode mode);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  SplitMode mode() const { return mode_; }

  /// Distinct entries with their multiplicities, in sorted order.
  std::vector<std::pair<Entry, std::size_t>> counted() const;

  friend bool operator==(const SplitMultiset&, const SplitMultiset&) = default;

 private:
  std::vector<Entry> entries_;
  SplitMode mode_ = SplitMode::thin;
};

Tree root_join(const Tree& left, const Tree& right);
std::size_t leaf_count(const Tree& t);

SplitMultiset splits(const Tree& t, SplitMode mode = SplitMode::thin);

/// Total order used for canonicalization: leaf count, then shape (the preorder
/// sequence of subtree leaf counts of the canonical forms), then leaf labels
/// in preorder. Both arguments are expected to be canonical.
std::strong_ordering canonical_compare(const Tree& a, const Tree& b);

/// Reorders children at every internal node so that left <= right under
/// canonical_compare. Idempotent; equal results iff equal as thin trees.
Tree canonical_form(const Tree& t);

bool thin_equal(const Tree& a, const Tree& b);

Tree forget_labels(const Tree& t);

/// Internal vertices whose two child subtrees have the same (thin) shape.
std::size_t symmetric_branchpoint_count(const Tree& t);

/// n!/2^k cladograms share the shape of t. Exact up to n = 20 (uint64 range).
std::uint64_t cladogram_count_for_shape(const Tree& t);

/// (2n-3)!! rooted binary cladograms on n labeled leaves.
std::uint64_t cladogram_total(std::size_t n);

/// D_x: removes every leaf labeled x and suppresses the degree-2 vertex left
/// behind. Remaining labels are not renumbered.
Tree delete_leaf_labeled(const Tree& t, Label x);

/// Removes the leaf at preorder position `index` (0-based).
Tree delete_leaf_at(const Tree& t, std::size_t index);

/// D: removes a uniformly random leaf.
Tree delete_random_leaf(const Tree& t, Rng& rng);

/// Applies sigma to every label: label i becomes sigma[i-1]. sigma must be a
/// permutation of {1..n} with n = leaf count, and t a cladogram on {1..n}.
Tree permute_labels(const Tree& t, std::span<const Label> sigma);

/// True when the leaf labels are exactly {1..n}.
bool is_cladogram(const Tree& t);

/// Renumbers labels 1..n in preorder (unlabeled leaves included).
Tree relabel_preorder(const Tree& t);

/// Comb (caterpillar) shape with n leaves: ((((*,*),*),*)...).
Tree make_comb(std::size_t n);
/// Perfectly balanced shape with 2^depth leaves.
Tree make_balanced(std::size_t depth);

}  // namespace alphatree
