#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nvoram/tree.hpp"

namespace nvoram {

// Per-cell write counters over a physical node space, with endurance-failure
// tracking. A node is worn out once its counter reaches wmax; the device as a
// whole fails when strictly more than failed_threshold of all tracked nodes
// are worn out. Counters keep counting past both thresholds.
class WearMap {
public:
    // tree_levels > 0 marks the space as tree-indexed (node id i is tree node
    // i), which enables per-level histogram output; pass 0 when the physical
    // space does not follow tree numbering (e.g. region-based levelers).
    WearMap(std::uint64_t node_count, std::uint64_t wmax, double failed_threshold = 0.01,
            int tree_levels = 0);

    // Adds one write; returns true exactly once, at the write that pushes the
    // device over the failure threshold.
    bool record_write(std::uint64_t node) {
        std::uint64_t c = ++counters_[node];
        if (c == wmax_) {
            ++failed_nodes_;
            if (!failed_ && failed_nodes_ > threshold_count_) {
                failed_ = true;
                return true;
            }
        }
        return false;
    }

    std::uint64_t writes(std::uint64_t node) const { return counters_[node]; }
    std::uint64_t node_count() const { return counters_.size(); }
    std::uint64_t wmax() const { return wmax_; }
    std::uint64_t failed_nodes() const { return failed_nodes_; }
    bool failed() const { return failed_; }
    int tree_levels() const { return tree_levels_; }

    std::uint64_t total_writes() const;
    std::uint64_t max_writes() const;
    double mean_writes() const;
    // Coefficient of variation (stddev / mean) of the per-node counters;
    // 0 when the map is empty or unwritten.
    double cv() const;

    // CSV "node_id,level,writes"; level is -1 when not tree-indexed.
    void write_node_csv(std::ostream& os) const;
    // CSV "level,nodes,mean,max,min"; only valid for tree-indexed maps.
    void write_level_csv(std::ostream& os) const;

private:
    std::vector<std::uint64_t> counters_;
    std::uint64_t wmax_;
    std::uint64_t threshold_count_;  // failure once failed_nodes_ exceeds this
    std::uint64_t failed_nodes_ = 0;
    bool failed_ = false;
    int tree_levels_;
};

// Lifetime achieved after `accesses` ORAM accesses, as a fraction of the
// uniform-wear ideal: accesses * levels / (node_count * wmax), exact.
Rational lifetime_fraction(const TreeGeometry& g, std::uint64_t accesses, std::uint64_t wmax);

}  // namespace nvoram
