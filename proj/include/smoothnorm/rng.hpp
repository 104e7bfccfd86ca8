#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace smoothnorm::rng {

/// splitmix64 finalizer; bijective on 64-bit words.
[[nodiscard]] std::uint64_t mix(std::uint64_t z);

/// Fold a value or a textual tag into a seed; order matters.
[[nodiscard]] std::uint64_t combine(std::uint64_t seed, std::uint64_t value);
[[nodiscard]] std::uint64_t combine(std::uint64_t seed, std::string_view tag);

/// Uniform draw strictly inside (0,1); 53 usable bits, never hits 0 or 1.
[[nodiscard]] double uniform_open01(std::mt19937_64& gen);

/// Standard normal by the inverse-CDF transform of one uniform.
[[nodiscard]] double standard_normal(std::mt19937_64& gen);

/// Chi-square with 2 degrees of freedom: -2 ln U, exact for this case.
[[nodiscard]] double chi_square_2(std::mt19937_64& gen);

}  // namespace smoothnorm::rng
