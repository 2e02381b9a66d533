#ifndef SASTRO_RNG_HPP_
#define SASTRO_RNG_HPP_

#include <cstdint>
#include <limits>

namespace sastro {

// Counter-based random stream. The output is a pure function of (key, counter),
// so a stream can be re-created from its key and children derived by tag are
// independent of the order in which they are consumed.
//
// Typical keying for one estimate:
//   KeyedStream(seed).child(rep).child(iteration).child(point).child(round).child(stratum)
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  explicit KeyedStream(std::uint64_t seed = 0);

  // Independent substream identified by `tag`. Does not advance this stream.
  KeyedStream child(std::uint64_t tag) const;

  std::uint64_t next_u64();

  // Uniform on (0, 1]; zero is never produced.
  double uniform();

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  // UniformRandomBitGenerator, so std:: distributions work in tests.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

 private:
  KeyedStream(std::uint64_t key, std::uint64_t counter)
      : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace sastro

#endif  // SASTRO_RNG_HPP_
