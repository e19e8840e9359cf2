#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include <boost/rational.hpp>

namespace nvoram {

using NodeId = std::uint64_t;
using Rational = boost::rational<long long>;

// Complete binary tree of 2^levels - 1 bucket nodes in BFS order: the root is
// node 0 and level l occupies ids [2^l - 1, 2^(l+1) - 2]. Leaves are indexed
// 0 .. 2^(levels-1) - 1 left to right.
struct TreeGeometry {
    int levels = 24;
    int bucket_slots = 4;
    std::size_t block_bytes = 64;

    // Throws std::domain_error when out of supported range.
    void validate() const;

    std::uint64_t node_count() const { return (std::uint64_t{1} << levels) - 1; }
    std::uint64_t leaf_count() const { return std::uint64_t{1} << (levels - 1); }
};

inline int level_of(NodeId node) { return std::bit_width(node + 1) - 1; }
inline std::uint64_t index_in_level(NodeId node) { return node + 1 - (std::uint64_t{1} << level_of(node)); }
inline NodeId level_first(int level) { return (NodeId{1} << level) - 1; }
inline NodeId parent(NodeId node) { return (node - 1) / 2; }

// Node on the root-to-leaf path of `leaf` at depth `level`.
inline NodeId path_node(const TreeGeometry& g, std::uint64_t leaf, int level) {
    return level_first(level) + (leaf >> (g.levels - 1 - level));
}

// Root-first list of the `levels` nodes on the path to `leaf`.
// Throws std::domain_error when leaf is out of range.
std::vector<NodeId> path_nodes(const TreeGeometry& g, std::uint64_t leaf);

// Mean node writes accrued at one node of `level` after `accesses` uniform
// ORAM accesses with no wear leveling: accesses / 2^level, exact.
Rational expected_writes_per_node(const TreeGeometry& g, int level, std::uint64_t accesses);

// Per-node writes if the accesses * levels bucket writes were spread evenly
// over all nodes: accesses * levels / (2^levels - 1), exact.
Rational ideal_writes_per_node(const TreeGeometry& g, std::uint64_t accesses);

}  // namespace nvoram
