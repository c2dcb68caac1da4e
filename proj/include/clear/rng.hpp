#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace clear {

/// Seeded random stream used by every stochastic operator.
///
/// Bounded draws are computed here rather than through the std distributions
/// so a seed produces the same sequence under any standard library. The
/// engine state round-trips through `state()` / `restore()` for checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  /// Uniform real in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

  std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// 64-bit FNV-1a; stable across processes and platforms.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// SplitMix64 finalizer, used to decorrelate hashed seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace clear
