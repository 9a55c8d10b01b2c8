#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ldntag {

/// Seeded FNV-1a over bytes; seed 0 gives the standard 64-bit variant.
/// The seed is XORed into the offset basis before hashing.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);
std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes);

// Deterministic draws from the raw mt19937_64 stream. The std distribution
// classes and std::shuffle are implementation-defined, which would break
// byte-identical retraining across standard libraries.
double uniform_unit(std::mt19937_64& rng);  // [0, 1)
double uniform_range(std::mt19937_64& rng, double lo, double hi);
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);
void shuffle_indices(std::span<std::size_t> values, std::mt19937_64& rng);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace ldntag
