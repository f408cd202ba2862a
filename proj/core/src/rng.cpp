#include "levytree/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace levytree {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(
    const std::array<std::uint32_t, 4>& c,
    const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * c[2];
  const auto hi0 = std::uint32_t(p0 >> 32);
  const auto lo0 = std::uint32_t(p0);
  const auto hi1 = std::uint32_t(p1 >> 32);
  const auto lo1 = std::uint32_t(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  counter = round_once(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    counter = round_once(counter, key);
  }
  return counter;
}

std::uint32_t hash_stage_tag(std::string_view tag) noexcept {
  std::uint32_t h = 0x811C9DC5u;
  for (const char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x01000193u;
  }
  return h;
}

Rng::Rng(std::uint64_t master_seed, std::string_view stage_tag,
         std::uint32_t replica) noexcept
    : key_{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32)},
      stream_{hash_stage_tag(stage_tag), replica} {}

void Rng::refill() {
  const std::array<std::uint32_t, 4> counter = {
      std::uint32_t(block_), std::uint32_t(block_ >> 32), stream_[1],
      stream_[0]};
  buf_ = philox4x32(counter, key_);
  ++block_;
  pos_ = 0;
}

std::uint64_t Rng::next_u64() {
  if (pos_ > 2) refill();
  const std::uint64_t lo = buf_[pos_];
  const std::uint64_t hi = buf_[pos_ + 1];
  pos_ += 2;
  return lo | (hi << 32);
}

double Rng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() { return 1.0 - uniform(); }

double Rng::exponential(double rate) {
  if (rate < 0.0) throw std::invalid_argument("exponential: negative rate");
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform_pos()) / rate;
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= rem) return (x - rem) % n;
  }
}

}  // namespace levytree
