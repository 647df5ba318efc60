#pragma once

#include <array>
#include <cstdint>

namespace gausstrace {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

[[nodiscard]] PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Seed plus substream id. Identical (seed, stream_id) pairs reproduce
/// identical draws on every platform that shares the libm used for
/// Box-Muller.
struct SamplerState {
  std::uint64_t seed = 0;
  std::uint32_t stream_id = 0;

  /// Deterministically derived child stream; distinct `index` values give
  /// distinct streams with overwhelming probability.
  [[nodiscard]] SamplerState substream(std::uint32_t index) const noexcept;

  friend bool operator==(const SamplerState&, const SamplerState&) = default;
};

/// Random-access generator: the draws for sample `sample_index` of a stream
/// depend only on (seed, stream_id, sample_index), never on how samples are
/// split between workers.
class CounterRng {
 public:
  CounterRng(const SamplerState& state, std::uint64_t sample_index) noexcept;

  [[nodiscard]] std::uint32_t next_u32() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  [[nodiscard]] double uniform() noexcept;
  /// Standard normal via Box-Muller; pairs are cached.
  [[nodiscard]] double normal() noexcept;

 private:
  void refill() noexcept;

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gausstrace
