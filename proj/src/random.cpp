#include "wgs/random.hpp"

#include <numeric>
#include <vector>

namespace wgs {

std::vector<std::size_t> RandomStream::sample_without_replacement(std::size_t pool,
                                                                  std::size_t n) {
  if (n > pool)
    throw std::invalid_argument("sample_without_replacement: n exceeds pool size");
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace wgs
