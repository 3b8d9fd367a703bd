#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace htc {

/// Deterministic random source.  mt19937_64 has a portable bit stream, but
/// the standard distributions do not, so uniform/normal/shuffle are spelled
/// out here to make every draw reproducible across platforms and compilers.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n); n must be positive.
  int below(int n) {
    int k = static_cast<int>(uniform() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

  /// Fisher-Yates shuffle with explicit draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace htc
