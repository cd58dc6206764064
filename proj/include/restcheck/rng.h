#ifndef RESTCHECK_RNG_H_
#define RESTCHECK_RNG_H_

#include <cstdint>
#include <random>

namespace restcheck {

// Seeded random stream. All sampling helpers are implemented on top of the
// raw 64-bit engine output (not std::*_distribution) so a given seed yields
// the same sequence on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64();
  // Uniform on [lo, hi]; requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Uniform index on [0, n); requires n > 0.
  std::size_t index(std::size_t n);
  double uniform01();
  bool bernoulli(double p);

  // Independent child stream, a pure function of (seed, stream). Used to give
  // every client its own generator before a run starts.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

// 64-bit finalizer used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace restcheck

#endif  // RESTCHECK_RNG_H_
