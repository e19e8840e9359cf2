#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nvoram/leveler.hpp"
#include "nvoram/tree.hpp"

namespace nvoram {

// Tree-aware group wear leveler ("eoram"). Every tree level is statically
// paired with a partner level: each node of an anchor level (a hot, frequently
// written node, its group's MFAN) gets an equal share of a colder partner
// level further down the tree. Within each group the MFAN role rotates one
// slot left at every scheduled movement, so the group's nodes converge to the
// group-average write rate. The whole construction is closed-form: group
// membership and current positions are derived from 19 bits of metadata per
// level plus per-group swap counts, never from per-node state.

// Per-level metadata row. Anchor (MFAN) levels carry the partner level they
// map to and the contiguous range [level_from, level_to] of anchor levels
// sharing that partner; partner rows mirror the same range with
// partner_level set to the level itself. A level whose partner_level equals
// the level itself and which is_mfan marks singleton groups (no partners).
struct LevelInfo {
    bool is_mfan = false;
    std::uint8_t partner_level = 0;
    std::uint8_t level_from = 0;
    std::uint8_t level_to = 0;

    bool operator==(const LevelInfo&) const = default;
};

// One wear-leveling group: the anchor node (level, index) plus its partners,
// a contiguous run of `size - 1` nodes starting at `offset` on the partner
// level. Singleton groups have size 1 and no partner run.
struct GroupRef {
    int level = 0;
    std::uint64_t index = 0;
    std::uint64_t size = 1;
    std::uint64_t offset = 0;

    NodeId home() const { return level_first(level) + index; }
    bool singleton() const { return size == 1; }
    bool operator==(const GroupRef&) const = default;
};

// Resolution of an arbitrary node to its group and role.
struct GroupQuery {
    GroupRef group;
    bool is_mfan = false;
    std::uint64_t partner_y = 0;  // initial array slot, valid when !is_mfan
};

class PartitionTable {
public:
    // Builds the static partition for a tree of `levels` in [1, 64].
    // Recursive construction: a subtree of L' levels pairs its top
    // floor(L'/2) levels with its leaf level, then recurses on the middle
    // band; a final single level becomes singleton groups. Partner levels
    // are split into one contiguous chunk per anchor level and each chunk
    // into one contiguous part per anchor node, sizes as equal as possible.
    static PartitionTable build(int levels);

    int levels() const { return static_cast<int>(rows_.size()); }
    int mfan_level_k() const { return mfan_level_k_; }
    const LevelInfo& row(int level) const { return rows_[static_cast<std::size_t>(level)]; }
    const std::vector<LevelInfo>& rows() const { return rows_; }

    // Group anchored at node (level, index); level must be an anchor level.
    GroupRef group(int level, std::uint64_t index) const;
    // Group and role of any node of the tree.
    GroupQuery group_of(NodeId node) const;

    std::uint64_t group_count() const { return (std::uint64_t{1} << (mfan_level_k_ + 1)) - 1; }
    std::vector<GroupRef> all_groups() const;

    bool operator==(const PartitionTable&) const = default;

private:
    std::vector<LevelInfo> rows_;
    int mfan_level_k_ = 0;
};

template <typename F>
void for_each_group(const PartitionTable& table, F&& f) {
    for (int l = 0; l <= table.mfan_level_k(); ++l)
        for (std::uint64_t j = 0; j < (std::uint64_t{1} << l); ++j) f(table.group(l, j));
}

// First partner node id of a non-singleton group; throws std::domain_error
// for singletons, which have no partner run.
std::uint64_t group_offset(const GroupRef& g);

// Array slot holding the MFAN role after `swaps` movements, in a group of
// `group_size` slots. Slot group_size - 1 is the anchor's own node; the MFAN
// walks one slot left per movement and wraps.
std::uint64_t mfan_position(std::uint64_t swaps, std::uint64_t group_size);

// Array slot holding partner y (y in [0, group_size - 1)) after `swaps`
// movements: each wrap of the MFAN shifts the partner one slot right.
std::uint64_t partner_position(std::uint64_t y, std::uint64_t swaps, std::uint64_t group_size);

// Physical node behind an array slot of a group.
NodeId array_index_to_node(std::uint64_t array_index, const GroupRef& g);

// Serialized table payload: 19 bits per level, LSB-first within each byte
// (1 bit is_mfan, then 6 bits each partner_level, level_from, level_to),
// zero-padded to a whole byte count.
std::vector<std::uint8_t> serialize_table(const PartitionTable& table);
// Inverse; throws ConfigError on wrong length, field out of range, or
// nonzero padding.
PartitionTable deserialize_table(const std::vector<std::uint8_t>& payload, int levels);
// Container with header: magic "EORM", version byte, level count byte,
// then the payload.
void save_table(const PartitionTable& table, std::ostream& os);
PartitionTable load_table(std::istream& is);

enum class SchedulerMode { kNaive, kBalanced };

struct GroupId {
    int level = 0;
    std::uint64_t index = 0;
    bool operator==(const GroupId&) const = default;
};

// When groups move. Accesses are counted by a global ctr (1-based); every
// freq_x accesses form a window c = ctr / freq_x.
//  - naive: at ctr = c * freq_x, all groups of anchor levels 0..k move,
//    where k = min(K, largest i with 2^i dividing c). Bursty but simple.
//  - balanced: window c moves one group per anchor level r, the group with
//    index c mod 2^r, at offset (r+1) * D into the window, D = freq_x/(K+1).
//    At most one movement per access, same totals per whole 2^K windows.
class MovementSchedule {
public:
    MovementSchedule(int mfan_level_k, std::uint64_t freq_x, SchedulerMode mode);

    int mfan_level_k() const { return k_; }
    std::uint64_t freq_x() const { return x_; }
    SchedulerMode mode() const { return mode_; }
    std::uint64_t spread_interval() const { return d_; }

    template <typename F>
    void for_each_due(std::uint64_t ctr, F&& f) const {
        if (mode_ == SchedulerMode::kNaive) {
            if (ctr == 0 || ctr % x_ != 0) return;
            std::uint64_t c = ctr / x_;
            int k = std::min<int>(k_, std::countr_zero(c));
            for (int r = 0; r <= k; ++r)
                for (std::uint64_t j = 0; j < (std::uint64_t{1} << r); ++j) f(r, j);
            return;
        }
        std::uint64_t m = ctr % x_;
        if (m == 0) {
            // A window's last slot lands exactly on the next window boundary
            // when (K+1) * D == freq_x; fire it for the window just ended.
            if (ctr != 0 && (static_cast<std::uint64_t>(k_) + 1) * d_ == x_)
                f(k_, (ctr / x_ - 1) & ((std::uint64_t{1} << k_) - 1));
            return;
        }
        if (m % d_ != 0) return;
        std::uint64_t r = m / d_ - 1;
        if (r > static_cast<std::uint64_t>(k_)) return;
        f(static_cast<int>(r), (ctr / x_) & ((std::uint64_t{1} << r) - 1));
    }

    std::vector<GroupId> due(std::uint64_t ctr) const;

    // Closed-form count of movements group (level, index) has completed by
    // the end of access `ctr`. Matches the executed schedule exactly.
    std::uint64_t swaps_so_far(int level, std::uint64_t index, std::uint64_t ctr) const;

private:
    int k_;
    std::uint64_t x_;
    std::uint64_t d_;
    SchedulerMode mode_;
};

// Fully closed-form logical -> physical mapping at access counter `ctr`.
// A bijection on [0, 2^levels - 1) for any fixed ctr.
NodeId translate(NodeId node, std::uint64_t ctr, const PartitionTable& table,
                 const MovementSchedule& sched);

// Runtime leveler: executes scheduled movements (charging 2 node writes and
// 2 reads each to the wear map, and swapping buckets when a store is
// attached), keeps an O(1) anchor-position cache, and resolves partner
// positions arithmetically. Identical mapping to translate() at every ctr.
class EoramLeveler final : public WearLeveler {
public:
    EoramLeveler(const TreeGeometry& g, std::uint64_t freq_x, SchedulerMode mode);

    void begin_access(WearMap& wear) override;
    std::uint64_t translate(std::uint64_t logical) const override;
    std::uint64_t physical_nodes() const override { return node_count_; }
    bool preserves_tree_indexing() const override { return true; }
    std::uint64_t movement_writes() const override { return movement_writes_; }
    std::uint64_t movement_reads() const override { return movement_reads_; }

    std::uint64_t ctr() const { return ctr_; }
    const PartitionTable& table() const { return table_; }
    const MovementSchedule& schedule() const { return sched_; }
    std::uint64_t movement_events() const { return movement_events_; }
    std::uint64_t executed_swaps(int level, std::uint64_t index) const {
        return exec_swaps_[level_first(level) + index];
    }

    // One movement of the given group: swap the MFAN's current and next
    // physical nodes. Singletons are counted but move nothing.
    void perform_movement(int level, std::uint64_t index, WearMap& wear);

private:
    PartitionTable table_;
    MovementSchedule sched_;
    std::uint64_t node_count_;
    std::uint64_t ctr_ = 0;
    std::vector<std::uint64_t> exec_swaps_;  // indexed by group home node id
    std::vector<std::uint32_t> mfan_phys_;   // anchor-level logical -> physical
    std::uint64_t movement_writes_ = 0;
    std::uint64_t movement_reads_ = 0;
    std::uint64_t movement_events_ = 0;
};

}  // namespace nvoram
