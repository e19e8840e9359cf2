#include "nvoram/startgap.hpp"

#include <bit>
#include <stdexcept>

#include "nvoram/store.hpp"
#include "nvoram/wear.hpp"

namespace nvoram {

namespace {

// splitmix64 finalizer; cheap, well mixed, stateless.
std::uint64_t mix(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

}  // namespace

Feistel::Feistel(std::uint64_t domain, std::uint64_t seed) : domain_(domain) {
    if (domain == 0) throw std::domain_error("Feistel domain must be nonzero");
    int bits = domain > 1 ? std::bit_width(domain - 1) : 1;
    half_bits_ = (bits + 1) / 2;
    half_mask_ = (std::uint64_t{1} << half_bits_) - 1;
    std::uint64_t k = seed;
    for (auto& key : keys_) {
        k = mix(k);
        key = k;
    }
}

std::uint64_t Feistel::round_trip(std::uint64_t v) const {
    std::uint64_t left = v >> half_bits_;
    std::uint64_t right = v & half_mask_;
    for (std::uint64_t key : keys_) {
        std::uint64_t next = left ^ (mix(right ^ key) & half_mask_);
        left = right;
        right = next;
    }
    return (left << half_bits_) | right;
}

std::uint64_t Feistel::apply(std::uint64_t x) const {
    if (x >= domain_) throw std::domain_error("Feistel input outside domain");
    if (domain_ == 1) return 0;
    // Cycle-walk: the network permutes [0, 2^(2*half_bits)); re-encrypt until
    // the value lands back inside [0, domain). Terminates because the walk
    // follows a finite cycle of a permutation that maps the domain into itself.
    std::uint64_t v = round_trip(x);
    while (v >= domain_) v = round_trip(v);
    return v;
}

StartGapLeveler::StartGapLeveler(std::uint64_t logical_nodes, const StartGapConfig& cfg)
    : logical_nodes_(logical_nodes),
      psi_(cfg.psi),
      randomize_(cfg.randomize),
      feistel_(logical_nodes == 0 ? 1 : logical_nodes, cfg.seed) {
    if (logical_nodes == 0) throw std::domain_error("start-gap needs at least one node");
    if (cfg.regions == 0) throw std::domain_error("start-gap region count must be nonzero");
    if (cfg.psi == 0) throw std::domain_error("start-gap write interval must be nonzero");

    region_slots_ = (logical_nodes + cfg.regions - 1) / cfg.regions;
    std::uint64_t count = (logical_nodes + region_slots_ - 1) / region_slots_;
    regions_.resize(count);
    std::uint64_t base = 0;
    std::uint64_t remaining = logical_nodes;
    for (auto& r : regions_) {
        r.base = base;
        r.size = remaining < region_slots_ ? remaining : region_slots_;
        r.gap = r.size;  // spare slot starts at the top
        base += r.size + 1;
        remaining -= r.size;
    }
    physical_nodes_ = base;
}

std::uint64_t StartGapLeveler::region_of(std::uint64_t logical) const {
    if (logical >= logical_nodes_) throw std::domain_error("start-gap logical node out of range");
    std::uint64_t inter = randomize_ ? feistel_.apply(logical) : logical;
    return inter / region_slots_;
}

std::uint64_t StartGapLeveler::translate(std::uint64_t logical) const {
    if (logical >= logical_nodes_) throw std::domain_error("start-gap logical node out of range");
    std::uint64_t inter = randomize_ ? feistel_.apply(logical) : logical;
    const Region& r = regions_[inter / region_slots_];
    return r.base + slot_for(r, inter % region_slots_);
}

std::uint64_t StartGapLeveler::map_write(std::uint64_t logical, WearMap& wear) {
    if (logical >= logical_nodes_) throw std::domain_error("start-gap logical node out of range");
    std::uint64_t inter = randomize_ ? feistel_.apply(logical) : logical;
    Region& r = regions_[inter / region_slots_];
    ++r.writes;
    if (r.writes % psi_ == 0) move_gap(r, wear);
    return r.base + slot_for(r, inter % region_slots_);
}

void StartGapLeveler::move_gap(Region& r, WearMap& wear) {
    std::uint64_t src;
    std::uint64_t dst;
    if (r.gap == 0) {
        // Gap has walked the whole region; wrap it to the top and advance the
        // rotation. Slot size holds the data that belongs at slot 0 now.
        src = r.size;
        dst = 0;
        r.gap = r.size;
        r.start = (r.start + 1) % r.size;
    } else {
        src = r.gap - 1;
        dst = r.gap;
        --r.gap;
    }
    if (store_ != nullptr) store_->copy_bucket(r.base + src, r.base + dst);
    wear.record_write(r.base + dst);
    ++movement_writes_;
    ++movement_reads_;
}

}  // namespace nvoram
