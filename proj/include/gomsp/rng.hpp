#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gomsp {

/// Deterministic, counter-keyed random substreams. Every draw site asks for a
/// generator keyed by (master seed, stream name, index, slot), so the values
/// seen at one site never depend on how many variates another site consumed.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master_seed = 0) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::mt19937_64 generator(std::string_view stream, std::uint64_t index,
                            std::uint64_t slot = 0) const;

  /// Seed value behind generator(); exposed for tests.
  std::uint64_t derive_seed(std::string_view stream, std::uint64_t index, std::uint64_t slot) const;

 private:
  std::uint64_t master_seed_;
};

namespace streams {
inline constexpr std::string_view kCoefficientNoise = "coefficient-noise";
inline constexpr std::string_view kObservationNoise = "observation-noise";
inline constexpr std::string_view kConstraintDraw = "constraint-draw";
inline constexpr std::string_view kDemand = "demand";
inline constexpr std::string_view kThresholds = "thresholds";
inline constexpr std::string_view kEstimation = "estimation";
inline constexpr std::string_view kTarget = "target";
}  // namespace streams

}  // namespace gomsp
