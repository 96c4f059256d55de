#ifndef PLMIX_RNG_HPP
#define PLMIX_RNG_HPP

#include <cstdint>
#include <random>

namespace plmix {

using Rng = std::mt19937_64;

/// Independent stream `stream` of a run seeded with `seed`. Streams with
/// distinct (seed, stream) pairs are statistically independent for our use.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return Rng(seq);
}

/// Gamma(shape, rate) draw.
inline double draw_gamma(double shape, double rate, Rng& rng) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

inline double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace plmix

#endif  // PLMIX_RNG_HPP
