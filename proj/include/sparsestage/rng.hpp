#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sparsestage {

using Seed = std::uint64_t;

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Derive an independent stream key from a parent seed and a path of indices,
/// e.g. derive_seed(master, {rep, purpose}).
constexpr Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> path) noexcept {
  Seed key = detail::mix64(parent + detail::kGolden);
  for (std::uint64_t v : path) key = detail::mix64(key ^ detail::mix64(v + detail::kGolden));
  return key;
}

/// Counter-based generator: the i-th output is a pure function of (key, i).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(Seed key) noexcept : key_(detail::mix64(key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    return detail::mix64(key_ + (++counter_) * detail::kGolden);
  }

  /// Child stream; does not advance this generator.
  constexpr CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(derive_seed(key_, {index}));
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sparsestage
