#include "rgm/permutation.hpp"

#include <algorithm>
#include <numeric>

#include "rgm/errors.hpp"

namespace rgm {

Permutation::Permutation(std::vector<Index> map) : map_(std::move(map)) {
  if (!is_permutation(map_)) {
    throw ParameterError("Permutation: map is not a bijection on [0, n)");
  }
}

Permutation Permutation::identity(Index n) {
  std::vector<Index> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), Index{0});
  return Permutation(std::move(m));
}

Permutation Permutation::uniform(Index n, Rng& rng) {
  std::vector<Index> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), Index{0});
  // Fisher-Yates with an explicit uniform draw so the result does not depend
  // on the standard library's shuffle implementation.
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(m[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(pick(rng))]);
  }
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<Index> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) {
    inv[static_cast<std::size_t>(map_[i])] = static_cast<Index>(i);
  }
  Permutation p;
  p.map_ = std::move(inv);
  return p;
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw ParameterError("Permutation::compose: size mismatch");
  std::vector<Index> out(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) {
    out[i] = map_[static_cast<std::size_t>(other.map_[i])];
  }
  Permutation p;
  p.map_ = std::move(out);
  return p;
}

void Permutation::swap_images(Index i, Index j) {
  std::swap(map_[static_cast<std::size_t>(i)], map_[static_cast<std::size_t>(j)]);
}

bool is_permutation(std::span<const Index> map) {
  const auto n = static_cast<Index>(map.size());
  std::vector<char> seen(map.size(), 0);
  for (Index v : map) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

}  // namespace rgm
