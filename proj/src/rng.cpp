#include "scmd/rng.hpp"

#include <algorithm>

namespace scmd {

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  // Floyd's algorithm; O(k) draws.
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = n - k; j < n; ++j) {
    int t = static_cast<int>(uniform_index(static_cast<std::uint64_t>(j) + 1));
    if (std::find(out.begin(), out.end(), t) != out.end()) {
      out.push_back(j);
    } else {
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace scmd
