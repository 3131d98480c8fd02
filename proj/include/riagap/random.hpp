#pragma once

#include <cstdint>
#include <limits>

namespace riagap {

/// Stream tags separate the independent uses of one (seed, unit) pair.
enum class StreamTag : std::uint64_t {
  potentials = 1,
  assignment = 2,
  spec_generator = 3,
  replicate = 4,
  folds = 5,
};

std::uint64_t mix64(std::uint64_t x);

/// Counter-based generator: output k is a bijective mix of (key, k), so a
/// unit's draws depend only on (seed, tag, unit index) and never on the order
/// in which units are visited.
class UnitStream {
 public:
  using result_type = std::uint64_t;

  UnitStream(std::uint64_t seed, StreamTag tag, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace riagap
