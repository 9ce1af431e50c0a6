#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "openable/error.hpp"

namespace openable {

// Binary mask stored column-major: data[x * height + y].
struct Bitmask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    static Bitmask zeros(int height, int width) {
        Bitmask b;
        b.height = height;
        b.width = width;
        b.data.assign(static_cast<size_t>(height) * static_cast<size_t>(width),
                      0);
        return b;
    }

    std::uint8_t at(int y, int x) const {
        return data[static_cast<size_t>(x) * static_cast<size_t>(height) +
                    static_cast<size_t>(y)];
    }

    void set(int y, int x, std::uint8_t v) {
        data[static_cast<size_t>(x) * static_cast<size_t>(height) +
             static_cast<size_t>(y)] = v;
    }
};

// Run-length encoded mask, column-major, runs alternating background /
// foreground starting with background.
struct MaskRLE {
    int height = 0;
    int width = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t pixel_count() const {
        return static_cast<std::uint64_t>(height) *
               static_cast<std::uint64_t>(width);
    }

    // Foreground pixel count: every odd-indexed run.
    std::uint64_t area() const {
        std::uint64_t a = 0;
        for (size_t i = 1; i < counts.size(); i += 2) a += counts[i];
        return a;
    }

    void validate() const {
        require(height >= 0 && width >= 0, "mask: negative size");
        const std::uint64_t total =
            std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        require(total == pixel_count(),
                "mask: run counts do not sum to height*width");
    }
};

inline MaskRLE rle_encode(const Bitmask& mask) {
    MaskRLE r;
    r.height = mask.height;
    r.width = mask.width;
    std::uint64_t run = 0;
    std::uint8_t cur = 0;
    for (std::uint8_t v : mask.data) {
        const std::uint8_t bit = v ? 1 : 0;
        if (bit != cur) {
            r.counts.push_back(run);
            run = 0;
            cur = bit;
        }
        ++run;
    }
    if (run > 0 || r.counts.empty()) r.counts.push_back(run);
    return r;
}

inline Bitmask rle_decode(const MaskRLE& rle) {
    rle.validate();
    Bitmask mask = Bitmask::zeros(rle.height, rle.width);
    size_t pos = 0;
    std::uint8_t v = 0;
    for (std::uint64_t c : rle.counts) {
        for (std::uint64_t i = 0; i < c; ++i) mask.data[pos++] = v;
        v = v ? 0 : 1;
    }
    return mask;
}

}  // namespace openable
