#pragma once
// Counter-based random streams (Philox4x32-10).
//
// Every stream is addressed by (master_seed, stage tag, replica index): the
// master seed forms the Philox key and the stage/replica pair occupies the
// two high counter words. Streams therefore never overlap, and inserting a
// new stage into an experiment cannot perturb the draws of existing stages.

#include <array>
#include <cstdint>
#include <string_view>

namespace levytree {

/// One Philox4x32-10 block. Exposed so tests can pin the published
/// known-answer vectors.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// 32-bit FNV-1a hash of a stage tag.
std::uint32_t hash_stage_tag(std::string_view tag) noexcept;

class Rng {
 public:
  Rng(std::uint64_t master_seed, std::string_view stage_tag,
      std::uint32_t replica) noexcept;

  std::uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos();
  /// Exponential with the given rate; rate 0 yields +infinity.
  double exponential(double rate);
  /// Unbiased uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;  // {stage hash, replica}
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace levytree
