#pragma once

#include <cstdint>
#include <vector>

#include "nvoram/leveler.hpp"

namespace nvoram {

// Static pseudorandom bijection on [0, domain), built from a 4-round Feistel
// network over the enclosing power-of-two domain with cycle-walking. Same
// seed, same permutation, forever; no per-element state.
class Feistel {
public:
    Feistel(std::uint64_t domain, std::uint64_t seed);
    std::uint64_t apply(std::uint64_t x) const;
    std::uint64_t domain() const { return domain_; }

private:
    std::uint64_t round_trip(std::uint64_t v) const;

    std::uint64_t domain_;
    int half_bits_;
    std::uint64_t half_mask_;
    std::uint64_t keys_[4];
};

struct StartGapConfig {
    std::uint32_t regions = 256;
    std::uint64_t psi = 100;       // one gap movement per psi writes to a region
    std::uint64_t seed = 1;        // address randomizer seed
    bool randomize = true;         // false: identity intermediate mapping (tests)
};

// Start-Gap wear leveling: logical nodes are scattered by a static randomizer
// into fixed regions, each with one spare physical slot. A per-region gap
// register walks through the slots, shifting one logical slot per psi writes;
// a full gap cycle advances the region's start register, rotating the whole
// mapping by one.
class StartGapLeveler final : public WearLeveler {
public:
    StartGapLeveler(std::uint64_t logical_nodes, const StartGapConfig& cfg);

    std::uint64_t translate(std::uint64_t logical) const override;
    std::uint64_t map_write(std::uint64_t logical, WearMap& wear) override;
    std::uint64_t physical_nodes() const override { return physical_nodes_; }
    bool preserves_tree_indexing() const override { return false; }
    std::uint64_t movement_writes() const override { return movement_writes_; }
    std::uint64_t movement_reads() const override { return movement_reads_; }

    std::uint32_t region_count() const { return static_cast<std::uint32_t>(regions_.size()); }
    std::uint64_t region_slots() const { return region_slots_; }
    std::uint64_t region_of(std::uint64_t logical) const;
    std::uint64_t start(std::uint64_t region) const { return regions_[region].start; }
    std::uint64_t gap(std::uint64_t region) const { return regions_[region].gap; }
    std::uint64_t region_writes(std::uint64_t region) const { return regions_[region].writes; }

private:
    struct Region {
        std::uint64_t base = 0;   // first physical node of the region
        std::uint64_t size = 0;   // logical slots (physical footprint is size + 1)
        std::uint64_t start = 0;
        std::uint64_t gap = 0;    // empty physical slot index in [0, size]
        std::uint64_t writes = 0;
    };

    std::uint64_t slot_for(const Region& r, std::uint64_t x) const {
        std::uint64_t y = (x + r.start) % r.size;
        return y < r.gap ? y : y + 1;
    }

    void move_gap(Region& r, WearMap& wear);

    std::uint64_t logical_nodes_;
    std::uint64_t region_slots_;  // logical slots per region (last may be short)
    std::uint64_t psi_;
    bool randomize_;
    Feistel feistel_;
    std::vector<Region> regions_;
    std::uint64_t physical_nodes_;
    std::uint64_t movement_writes_ = 0;
    std::uint64_t movement_reads_ = 0;
};

}  // namespace nvoram
