#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace pacb {

// SplitMix64 finalizer. Statistically strong enough to decorrelate the
// counter-indexed draws below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream: every draw is a pure function of the absorbed key
// words and the number of values drawn so far. Streams with different keys
// are independent no matter how many values each one produces, so parallel
// consumers cannot perturb each other's sequences.
class RngStream {
 public:
  explicit RngStream(std::initializer_list<std::uint64_t> key_words) {
    std::uint64_t k = 0x243F6A8885A308D3ULL;
    for (std::uint64_t w : key_words) k = mix64(k ^ mix64(w));
    key_ = k;
  }

  std::uint64_t next_u64() {
    return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second value of each pair is cached
  // so consecutive draws stay a deterministic function of the counter.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Named sub-stream identifiers hung off one root seed. All randomness in the
// library flows through make_stream; there is no global RNG.
enum class StreamPhase : std::uint64_t {
  init = 1,        // weight initialization
  prior = 2,       // phase-1 training noise, keyed (epoch, step)
  posterior = 3,   // phase-2 training noise, keyed (epoch, step)
  shuffle = 4,     // minibatch order, keyed (phase, epoch)
  eval = 5,        // per-net evaluation noise, keyed (net index)
  dataset = 6,     // synthetic data generation
  coverage = 7,    // validity-simulator trials, keyed (trial index)
  mc_moment = 8,   // Monte Carlo moment / MI estimation
};

inline RngStream make_stream(std::uint64_t seed, StreamPhase phase,
                             std::uint64_t a = 0, std::uint64_t b = 0) {
  return RngStream{seed, static_cast<std::uint64_t>(phase), a, b};
}

}  // namespace pacb
