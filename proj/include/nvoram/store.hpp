#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "nvoram/tree.hpp"

namespace nvoram {

constexpr std::uint64_t kDummyBlock = std::numeric_limits<std::uint64_t>::max();

// Flat physical bucket array: per slot a block id (kDummyBlock when empty)
// plus an inline fixed-size payload. Indexed by physical node id; wear
// levelers move bucket contents around with swap_buckets / copy_bucket.
// Payload storage can be disabled for wear-only simulations, where block
// identities still matter but data bytes never do.
class BucketStore {
public:
    BucketStore(std::uint64_t buckets, int slots, std::size_t block_bytes,
                bool store_payloads = true)
        : slots_(slots),
          block_bytes_(block_bytes),
          ids_(buckets * static_cast<std::uint64_t>(slots), kDummyBlock),
          payloads_(store_payloads
                        ? buckets * static_cast<std::uint64_t>(slots) * block_bytes
                        : 0,
                    0) {}

    int slots() const { return slots_; }
    std::size_t block_bytes() const { return block_bytes_; }
    bool has_payloads() const { return !payloads_.empty(); }
    std::uint64_t buckets() const { return ids_.size() / static_cast<std::uint64_t>(slots_); }

    std::uint64_t& slot_id(std::uint64_t bucket, int slot) {
        return ids_[bucket * static_cast<std::uint64_t>(slots_) + static_cast<std::uint64_t>(slot)];
    }
    std::uint64_t slot_id(std::uint64_t bucket, int slot) const {
        return ids_[bucket * static_cast<std::uint64_t>(slots_) + static_cast<std::uint64_t>(slot)];
    }

    std::uint8_t* slot_payload(std::uint64_t bucket, int slot) {
        return payloads_.data() +
               (bucket * static_cast<std::uint64_t>(slots_) + static_cast<std::uint64_t>(slot)) *
                   block_bytes_;
    }
    const std::uint8_t* slot_payload(std::uint64_t bucket, int slot) const {
        return payloads_.data() +
               (bucket * static_cast<std::uint64_t>(slots_) + static_cast<std::uint64_t>(slot)) *
                   block_bytes_;
    }

    void swap_buckets(std::uint64_t a, std::uint64_t b) {
        if (a == b) return;
        for (int s = 0; s < slots_; ++s) std::swap(slot_id(a, s), slot_id(b, s));
        if (payloads_.empty()) return;
        std::size_t n = static_cast<std::size_t>(slots_) * block_bytes_;
        std::uint8_t* pa = slot_payload(a, 0);
        std::uint8_t* pb = slot_payload(b, 0);
        for (std::size_t i = 0; i < n; ++i) std::swap(pa[i], pb[i]);
    }

    void copy_bucket(std::uint64_t from, std::uint64_t to) {
        if (from == to) return;
        for (int s = 0; s < slots_; ++s) slot_id(to, s) = slot_id(from, s);
        if (payloads_.empty()) return;
        std::memcpy(slot_payload(to, 0), slot_payload(from, 0),
                    static_cast<std::size_t>(slots_) * block_bytes_);
    }

private:
    int slots_;
    std::size_t block_bytes_;
    std::vector<std::uint64_t> ids_;
    std::vector<std::uint8_t> payloads_;
};

}  // namespace nvoram
