#include "alphatree/appendix.hpp"

#include <stdexcept>

namespace alphatree {

const std::vector<ReferenceShape>& reference_shapes() {
  using Q = mpq_class;
  static const std::vector<ReferenceShape> shapes{
      {"(1,1)", "211", 1, [](const Q&) { return Q(1); }},
      {"(2,1)", "32111", 3, [](const Q&) { return Q(1); }},
      {"(3,1)", "4321111", 12, [](const Q& a) { return Q(2 / (3 - a)); }},
      {"(3,2)", "4211211", 3, [](const Q& a) { return Q((1 - a) / (3 - a)); }},
      {"(4,1)", "543211111", 60,
       [](const Q& a) { return Q(2 * (2 + a) / ((4 - a) * (3 - a))); }},
      {"(4,2)", "542112111", 15,
       [](const Q& a) { return Q((1 - a) * (2 + a) / ((4 - a) * (3 - a))); }},
      {"(4,3)", "532111211", 30, [](const Q& a) { return Q(2 * (1 - a) / (4 - a)); }},
      {"(5,1)", "65432111111", 360,
       [](const Q& a) { return Q(4 * (1 + a) * (2 + a) / ((5 - a) * (4 - a) * (3 - a))); }},
      {"(5,2)", "65421121111", 90,
       [](const Q& a) {
         return Q(2 * (1 - a) * (1 + a) * (2 + a) / ((5 - a) * (4 - a) * (3 - a)));
       }},
      {"(5,3)", "65321112111", 180,
       [](const Q& a) { return Q(4 * (1 - a) * (1 + a) / ((5 - a) * (4 - a))); }},
      {"(5,4)", "64321111211", 180,
       [](const Q& a) { return Q(2 * (1 - a) * (8 - a) / ((5 - a) * (4 - a) * (3 - a))); }},
      {"(5,5)", "64211211211", 45,
       [](const Q& a) { return Q((1 - a) * (1 - a) * (8 - a) / ((5 - a) * (4 - a) * (3 - a))); }},
      {"(5,6)", "63211132111", 90,
       [](const Q& a) { return Q(2 * (2 - a) * (1 - a) / ((5 - a) * (4 - a))); }},
  };
  return shapes;
}

namespace {

Tree decode(std::string_view sequence, std::size_t& pos) {
  if (pos >= sequence.size()) throw std::invalid_argument("size sequence ends early");
  const char c = sequence[pos++];
  if (c < '1' || c > '9') throw std::invalid_argument("size sequence digits must be 1-9");
  const std::size_t size = static_cast<std::size_t>(c - '0');
  if (size == 1) return Tree::leaf();
  Tree first = decode(sequence, pos);
  if (first.leaf_count() >= size) throw std::invalid_argument("child larger than its parent");
  const std::size_t expected = size - first.leaf_count();
  Tree second = decode(sequence, pos);
  if (second.leaf_count() != expected) throw std::invalid_argument("child sizes do not add up");
  return Tree::join(first, second);
}

}  // namespace

Tree shape_from_size_sequence(std::string_view sequence) {
  std::size_t pos = 0;
  Tree t = decode(sequence, pos);
  if (pos != sequence.size()) throw std::invalid_argument("trailing digits in size sequence");
  return canonical_form(t);
}

}  // namespace alphatree
