#include "smoothnorm/rng.hpp"

#include <cmath>

#include "smoothnorm/special_functions.hpp"

namespace smoothnorm::rng {

std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
    return mix(seed ^ (mix(value) + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2)));
}

std::uint64_t combine(std::uint64_t seed, std::string_view tag) {
    // FNV-1a over the tag bytes, then folded in.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return combine(seed, h);
}

double uniform_open01(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& gen) {
    return std_normal_quantile(uniform_open01(gen));
}

double chi_square_2(std::mt19937_64& gen) {
    return -2.0 * std::log(uniform_open01(gen));
}

}  // namespace smoothnorm::rng
