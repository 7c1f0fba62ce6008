#pragma once

#include <cstdint>

namespace bipen {

/// Counter-based generator: draw i of stream (seed, stream) is a pure function
/// mix(key(seed, stream), i). Substreams are independent keys, so instances
/// generated in parallel never share state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  CounterRng substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  CounterRng(std::uint64_t key, bool) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bipen
