#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tissuesim {

// FNV-1a over a label string, used for substream domain separation.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Counter-based random stream. Output i depends only on (key, i), so any
// value can be regenerated out of order and substreams derived from distinct
// (label, index) pairs are independent of the order in which they are drawn.
// No libc or libstdc++ distribution machinery is used, keeping the integer
// sequence identical across platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::string_view label = {},
                          std::uint64_t index = 0)
        : key_(derive_key(seed, label, index)) {}

    RandomStream substream(std::string_view label, std::uint64_t index = 0) const {
        return RandomStream(key_, label, index);
    }

    std::uint64_t key() const { return key_; }

    // Value at an explicit counter position; does not advance the stream.
    std::uint64_t at(std::uint64_t counter) const {
        return splitmix64(key_ ^ (counter * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
    }

    std::uint64_t next_u64() { return at(counter_++); }

    // Uniform in [0, 1) with 53 random bits.
    double unit_double() { return to_unit(next_u64()); }
    double unit_double_at(std::uint64_t counter) const { return to_unit(at(counter)); }

    // Unbiased uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller, consuming counters 2k and 2k+1 so the
    // k-th deviate can be generated independently of all others.
    double normal_at(std::uint64_t k) const {
        double u1 = to_unit(at(2 * k));
        const double u2 = to_unit(at(2 * k + 1));
        if (u1 <= 0.0) u1 = 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal() {
        const std::uint64_t k = counter_;
        counter_ += 2;
        return normal_at_raw(k);
    }

private:
    static double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1p-53; }

    double normal_at_raw(std::uint64_t base_counter) const {
        double u1 = to_unit(at(base_counter));
        const double u2 = to_unit(at(base_counter + 1));
        if (u1 <= 0.0) u1 = 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::string_view label,
                                    std::uint64_t index) {
        std::uint64_t k = splitmix64(seed);
        if (!label.empty()) k = splitmix64(k ^ fnv1a64(label));
        k = splitmix64(k ^ index);
        return k;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace tissuesim
