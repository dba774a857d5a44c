#pragma once

// Reference table of every tree shape with 2 to 6 leaves: cladogram counts and
// alpha-model probabilities as rational functions of alpha.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "alphatree/tree.hpp"

namespace alphatree {

struct ReferenceShape {
  std::string code;      // "(k,i)": i-th shape with k+1 leaves
  std::string sequence;  // preorder leaf counts, larger child first
  std::uint64_t cladograms;
  std::function<mpq_class(const mpq_class& alpha)> probability;
};

const std::vector<ReferenceShape>& reference_shapes();

/// Decodes a preorder sequence of subtree leaf counts (one digit per node,
/// children in either order) into a canonical shape.
Tree shape_from_size_sequence(std::string_view sequence);

}  // namespace alphatree
