#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nvoram/tree.hpp"

namespace nvoram {

// mt19937_64 with an implementation-independent bounded draw (Lemire's
// multiply-shift with rejection) so identical seeds give identical streams
// everywhere, unlike std::uniform_int_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, bound); bound must be nonzero.
    std::uint64_t bounded(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            std::uint64_t threshold = -bound % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

// Stream of uniform random leaf indexes for a given tree, batched internally
// for throughput. Same (geometry, seed) always yields the same stream.
class LeafStream {
public:
    LeafStream(const TreeGeometry& g, std::uint64_t seed)
        : leaves_(g.leaf_count()), rng_(seed) {
        buf_.reserve(kBatch);
    }

    std::uint64_t next() {
        if (pos_ == buf_.size()) refill();
        return buf_[pos_++];
    }

private:
    static constexpr std::size_t kBatch = 1u << 16;

    void refill() {
        buf_.resize(kBatch);
        for (auto& v : buf_) v = rng_.bounded(leaves_);
        pos_ = 0;
    }

    std::uint64_t leaves_;
    Rng rng_;
    std::vector<std::uint64_t> buf_;
    std::size_t pos_ = 0;
};

// First `count` leaves of LeafStream(g, seed); convenience for tests.
inline std::vector<std::uint64_t> leaf_sequence(const TreeGeometry& g, std::size_t count,
                                                std::uint64_t seed) {
    LeafStream s(g, seed);
    std::vector<std::uint64_t> out(count);
    for (auto& v : out) v = s.next();
    return out;
}

}  // namespace nvoram
