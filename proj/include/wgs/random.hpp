#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace wgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * Seeded random stream with a documented split rule.
 *
 * All randomness in the library flows through explicitly passed RandomStream
 * objects; there is no hidden global state.  Uniforms are derived from the
 * top 53 bits of mt19937_64 output and normals via Box-Muller, so a given
 * seed reproduces the same byte-exact sequence on every platform.
 *
 * Split rule: child k of a stream with root seed s is seeded with
 *   splitmix64(s ^ splitmix64(0x9e3779b97f4a7c15 + k)).
 * Splitting depends only on the root seed and k, never on how much of the
 * parent stream has been consumed, so workers can be re-ordered freely.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (pairs generated, one cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Matrix of iid standard normals (row-major fill order, fixed for determinism).
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
    return out;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
    return out;
  }

  /// Derived child stream; see the class comment for the split rule.
  RandomStream split(std::uint64_t k) const {
    return RandomStream(splitmix64(seed_ ^ splitmix64(0x9e3779b97f4a7c15ULL + k)));
  }

  /// n distinct indices drawn uniformly from [0, pool) (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t n);

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wgs
