#pragma once

#include <cstdint>
#include <vector>

namespace qsat {

// xoshiro256++ with splitmix64 seeding. Implemented here instead of
// <random> so that identical seeds produce identical streams on every
// platform and standard library; dataset bytes and training traces depend
// on it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  // Uniform integer in [lo, hi], inclusive. Unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Number of Bernoulli(p) trials up to and including the first success.
  // Support {1, 2, ...}, mean 1/p.
  int geometric_trials(double p);

  // Standard normal via Box-Muller; one spare value is cached.
  double normal();

  // Fisher-Yates shuffle with this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Full stream state, for checkpointing: the four xoshiro words plus the
  // cached Box-Muller spare.
  struct State {
    std::uint64_t s[4];
    double spare;
    bool has_spare;
  };
  State state() const { return {{s_[0], s_[1], s_[2], s_[3]}, spare_, has_spare_}; }
  void set_state(const State& st) {
    for (int i = 0; i < 4; ++i) s_[i] = st.s[i];
    spare_ = st.spare;
    has_spare_ = st.has_spare;
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Deterministic substream derivation: fold `stream` into `seed` with the
// splitmix64 finalizer. Used to give every dataset instance and every
// batched formula its own independent noise stream.
std::uint64_t fold_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qsat
