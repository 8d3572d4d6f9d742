#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rgm/rng.hpp"

namespace rgm {

using Index = Eigen::Index;

/// Bijection on {0, ..., n-1}; `map[i]` is the image of i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<Index> map);

  static Permutation identity(Index n);
  static Permutation uniform(Index n, Rng& rng);

  Index size() const noexcept { return static_cast<Index>(map_.size()); }
  Index operator()(Index i) const { return map_[static_cast<std::size_t>(i)]; }
  std::span<const Index> map() const noexcept { return map_; }

  Permutation inverse() const;
  /// (this ∘ other)(i) = this(other(i)).
  Permutation compose(const Permutation& other) const;
  /// Swap the images of i and j.
  void swap_images(Index i, Index j);
  void set(Index i, Index image) { map_[static_cast<std::size_t>(i)] = image; }

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<Index> map_;
};

/// True when `map` hits every value in [0, n) exactly once.
bool is_permutation(std::span<const Index> map);

}  // namespace rgm
