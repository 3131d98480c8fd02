#include "riagap/random.hpp"

#include <cmath>
#include <numbers>

namespace riagap {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

UnitStream::UnitStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
    : key_(mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(tag)) ^ index)) {}

UnitStream::result_type UnitStream::operator()() {
  return mix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_);
}

double UnitStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double UnitStream::normal() {
  // Box-Muller, one variate per call so the stream stays stateless.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace riagap
