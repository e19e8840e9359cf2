#include "nvoram/tree.hpp"

#include <stdexcept>
#include <string>

namespace nvoram {

void TreeGeometry::validate() const {
    if (levels < 1 || levels > 32)
        throw std::domain_error("tree levels must be in [1, 32], got " + std::to_string(levels));
    if (bucket_slots < 1)
        throw std::domain_error("bucket_slots must be positive");
    if (block_bytes < 1)
        throw std::domain_error("block_bytes must be positive");
}

std::vector<NodeId> path_nodes(const TreeGeometry& g, std::uint64_t leaf) {
    if (leaf >= g.leaf_count())
        throw std::domain_error("leaf " + std::to_string(leaf) + " out of range for " +
                                std::to_string(g.levels) + "-level tree");
    std::vector<NodeId> path(static_cast<std::size_t>(g.levels));
    for (int l = 0; l < g.levels; ++l) path[static_cast<std::size_t>(l)] = path_node(g, leaf, l);
    return path;
}

Rational expected_writes_per_node(const TreeGeometry& g, int level, std::uint64_t accesses) {
    if (level < 0 || level >= g.levels) throw std::domain_error("level out of range");
    return Rational(static_cast<long long>(accesses), static_cast<long long>(std::uint64_t{1} << level));
}

Rational ideal_writes_per_node(const TreeGeometry& g, std::uint64_t accesses) {
    return Rational(static_cast<long long>(accesses) * g.levels,
                    static_cast<long long>(g.node_count()));
}

}  // namespace nvoram
