#pragma once

#include <cstdint>
#include <string_view>

namespace ehcr {

/// Identifies one independent random stream. Streams are keyed by the master
/// seed plus this triple, so any grid point or replication can be generated
/// in isolation and in any order.
struct StreamId {
  std::uint64_t experiment = 0;
  std::uint64_t replication = 0;
  std::uint64_t grid_point = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// SplitMix64 output function (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// FNV-1a of a name; used to turn experiment names into stream ids.
constexpr std::uint64_t name_hash(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t stream_key(std::uint64_t seed, StreamId id) noexcept {
  std::uint64_t k = mix64(seed + kGoldenGamma);
  k = mix64(k ^ (id.experiment + kGoldenGamma));
  k = mix64(k ^ (id.replication + 2 * kGoldenGamma));
  k = mix64(k ^ (id.grid_point + 3 * kGoldenGamma));
  return k;
}

/// Stateless counter-based generator: the value at counter `i` is a pure
/// function of (key, i). Random access makes it natural to index draws by
/// slot, which is what lets two policies share common random numbers.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  constexpr CounterRng(std::uint64_t seed, StreamId id) noexcept : key_(stream_key(seed, id)) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits_at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGoldenGamma);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform_at(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits_at(counter) >> 11) * 0x1.0p-53;
  }

  /// Derives an independent child generator.
  constexpr CounterRng split(std::uint64_t child) const noexcept {
    return CounterRng(mix64(key_ ^ mix64(child + kGoldenGamma)));
  }

 private:
  std::uint64_t key_;
};

/// Sequential view over a CounterRng. This is the only stateful random object
/// in the library; each worker owns its own.
class RandomStream {
 public:
  explicit constexpr RandomStream(CounterRng gen) noexcept : gen_(gen) {}
  constexpr RandomStream(std::uint64_t seed, StreamId id) noexcept : gen_(seed, id) {}

  constexpr std::uint64_t next_bits() noexcept { return gen_.bits_at(counter_++); }
  constexpr double uniform() noexcept { return gen_.uniform_at(counter_++); }
  constexpr std::uint64_t position() const noexcept { return counter_; }
  constexpr const CounterRng& generator() const noexcept { return gen_; }

 private:
  CounterRng gen_;
  std::uint64_t counter_ = 0;
};

/// True with probability `prob`. `prob == 0` never fires and `prob == 1`
/// always fires, since uniforms lie in [0, 1).
constexpr bool bernoulli(double prob, RandomStream& rng) noexcept { return rng.uniform() < prob; }

}  // namespace ehcr
