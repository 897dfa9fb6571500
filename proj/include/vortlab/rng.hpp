/*
   Copyright 2026 The vortlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace vortlab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (key, counter), so a particle's noise depends only on
// (seed, particle index, step index) and never on thread count or order.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

// Purpose tags keep independent uses of the same (particle, step) apart.
enum class StreamPurpose : std::uint32_t { kInitialSample = 1, kBrownian = 2 };

class ParticleStreams {
 public:
  explicit ParticleStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Two uniforms in (0, 1] with 53-bit resolution.
  std::array<double, 2> uniforms(std::uint64_t particle, std::uint32_t step,
                                 StreamPurpose purpose) const {
    const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(particle),
                                     static_cast<std::uint32_t>(particle >> 32), step,
                                     static_cast<std::uint32_t>(purpose)};
    const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_),
                                 static_cast<std::uint32_t>(seed_ >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
    const std::uint64_t b = (std::uint64_t{r[2]} << 32) | r[3];
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return {static_cast<double>((a >> 11) + 1) * kScale, static_cast<double>((b >> 11) + 1) * kScale};
  }

  // Two independent standard normals (Box-Muller).
  std::array<double, 2> normals(std::uint64_t particle, std::uint32_t step,
                                StreamPurpose purpose = StreamPurpose::kBrownian) const {
    const auto u = uniforms(particle, step, purpose);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  std::uint64_t seed_;
};

}  // namespace vortlab
