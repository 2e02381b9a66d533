#include "sastro/rng.hpp"

namespace sastro {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kChildSalt = 0xd1b54a32d192ed03ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

KeyedStream::KeyedStream(std::uint64_t seed) : key_(mix64(seed)), counter_(0) {}

KeyedStream KeyedStream::child(std::uint64_t tag) const {
  return KeyedStream(mix64(key_ ^ mix64(tag * kChildSalt + 1)), 0);
}

std::uint64_t KeyedStream::next_u64() {
  // Two rounds so that neighbouring counters under one key decorrelate.
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c + kGolden * (key_ | 1)));
}

double KeyedStream::uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace sastro
