#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every value is a pure function of (master_seed, stream_id, counter), so a
// walker's draws do not depend on which thread runs it or in what order.

#include <array>
#include <cstdint>
#include <limits>

namespace cqlab {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0)
      : seed_(master_seed), stream_(stream_id), counter_(counter) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t position() const { return counter_; }

  // Random access: the 64-bit word at a given counter value.
  std::uint64_t at(std::uint64_t counter) const;

  std::uint64_t operator()() { return at(counter_++); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal by Box-Muller; consumes two words per call.
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

// Stream ids are partitioned by purpose so different draws never collide.
enum class StreamPurpose : std::uint64_t {
  walk = 0,
  component_choice = 1,
  potential_noise = 2,
  test_data = 3,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 56) | (index & ((std::uint64_t{1} << 56) - 1));
}

}  // namespace cqlab
