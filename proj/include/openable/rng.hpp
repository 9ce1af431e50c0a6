#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace openable {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard, and the uniform draws below avoid std::*_distribution (whose
// output is implementation-defined), so sequences are reproducible across
// platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer in [0, n). n must be >= 1.
    int uniform_int(int n) {
        const int v = static_cast<int>(uniform() * static_cast<double>(n));
        return v < n ? v : n - 1;
    }

    std::uint64_t next_u64() { return engine_(); }

    // splitmix64 finalizer; used to derive independent streams.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        return mix(a ^ mix(b));
    }

    // FNV-1a, for deriving streams from string ids.
    static std::uint64_t hash_string(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace openable
