#pragma once

#include <cstdint>
#include <random>

namespace splash {

/// Identifies an independent random stream. Identical (seed, stream) pairs
/// reproduce identical draws on every platform.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSpec substream(std::uint64_t k) const noexcept;
};

/// mt19937_64 (output fully specified by the C++ standard) seeded through a
/// splitmix64 mix of (seed, stream). Uniforms take the top 53 bits; normals
/// use the Marsaglia polar method. std:: distributions are avoided on purpose
/// since their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(RngSpec spec);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace splash
