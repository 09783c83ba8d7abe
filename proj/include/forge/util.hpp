#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace forge::util {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Uppercases and strips everything that is not a letter or digit, so that
// "MV-101", "MV 101" and "mv101" all compare equal as column names.
std::string normalize_tag(const std::string& s);

// Dataset label strings come with casing and whitespace quirks ("A ttack").
std::string normalize_label(const std::string& s);

// Fixed-point decimal formatting, locale independent.
std::string format_fixed(double value, int decimals);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// 64-bit linear congruential generator (Knuth's MMIX constants:
// a = 6364136223846793005, c = 1442695040888963407). Used instead of
// std::mt19937 so traces can be reproduced bit-for-bit from any language.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }

    // Uniform in [0, 1), 24 bits of resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 40) /
               static_cast<double>(1ULL << 24);
    }

private:
    std::uint64_t state_;
};

} // namespace forge::util
