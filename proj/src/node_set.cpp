#include "mse_adjust/node_set.hpp"

#include <algorithm>

namespace mse_adjust {

std::vector<NodeSet> subsets_lexicographic(NodeSet universe) {
  if (universe.size() >= 32) {
    throw std::invalid_argument("subsets_lexicographic: universe too large");
  }
  const std::vector<NodeId> m = universe.members();
  const std::uint64_t count = std::uint64_t{1} << m.size();
  std::vector<NodeSet> out;
  out.reserve(count);
  for (std::uint64_t code = 0; code < count; ++code) {
    NodeSet s;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if ((code >> i) & 1U) s.insert(m[i]);
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), LexLess{});
  return out;
}

}  // namespace mse_adjust
