#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opinion {

// Every failure surfaced by the library carries a short machine-readable code
// ("io", "schema", "encoding", "invalid_argument", "missing_artifact",
// "version", "corrupt", "training") next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Class order is fixed everywhere: positive, neutral, negative.
enum class Polarity : int { positive = 0, neutral = 1, negative = 2 };

inline constexpr int kNumPolarities = 3;
inline constexpr std::array<Polarity, 3> kPolarities = {
    Polarity::positive, Polarity::neutral, Polarity::negative};

std::string_view to_string(Polarity p);
std::optional<Polarity> parse_polarity(std::string_view s);

// 64-bit FNV-1a. Used for provenance hashes and seed derivation.
uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(uint64_t v);

// Derives an independent seed for a named component from a master seed:
// splitmix64(master ^ fnv1a64(label)).
uint64_t derive_seed(uint64_t master, std::string_view label);

// Seeded generator with portable distributions. The standard library's
// distribution objects are implementation-defined, so they are avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);
  // Uniform integer in [lo, hi].
  int64_t between(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace opinion
