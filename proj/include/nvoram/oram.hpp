#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "nvoram/store.hpp"
#include "nvoram/tree.hpp"

namespace nvoram {

class WearLeveler;
class WearMap;

constexpr std::uint64_t kUnallocatedLeaf = std::numeric_limits<std::uint64_t>::max();

struct OramOptions {
    std::size_t stash_capacity = 200;
    std::uint64_t max_blocks = 0;   // 0: one block per leaf
    bool store_payloads = true;
};

// What one access touched; returned so tests can check path discipline and
// stash behavior directly.
struct AccessRecord {
    char op = 'R';
    std::uint64_t block = 0;
    std::uint64_t leaf = 0;        // leaf whose path was read and rewritten
    std::uint64_t new_leaf = 0;    // fresh position assigned to the block
    std::vector<NodeId> path;      // logical bucket ids, root first
    std::size_t stash_after = 0;   // stash occupancy after write-back
};

// Functional Path ORAM over a pluggable wear leveler. Every access reads one
// root-to-leaf path into the stash, serves the op, remaps the block to a
// fresh leaf, and rewrites the whole path greedily from the deepest bucket
// up. Each rewritten bucket costs one physical node write.
class OramEngine {
public:
    OramEngine(const TreeGeometry& geometry, WearLeveler& leveler, WearMap& wear,
               const OramOptions& options = {});

    void set_leaf_source(std::function<std::uint64_t()> source);

    AccessRecord read(std::uint64_t block, std::vector<std::uint8_t>* data_out = nullptr);
    AccessRecord write(std::uint64_t block, const std::uint8_t* data = nullptr);

    // Drops a block straight into the leaf bucket of the given leaf and points
    // the position map at it. Setup hook for worked-example tests; charges no
    // wear and consumes no leaf randomness.
    void seed_block(std::uint64_t block, std::uint64_t leaf, const std::uint8_t* data = nullptr);

    const TreeGeometry& geometry() const { return geometry_; }
    std::uint64_t max_blocks() const { return max_blocks_; }
    std::uint64_t accesses() const { return accesses_; }

    std::uint64_t position(std::uint64_t block) const;
    std::size_t stash_size() const { return stash_.size(); }
    std::size_t stash_peak() const { return stash_peak_; }
    bool stash_contains(std::uint64_t block) const { return stash_.count(block) != 0; }

    // Blocks currently held anywhere (stash + tree); conservation checks.
    std::uint64_t stored_blocks() const;

    BucketStore& store() { return store_; }
    const BucketStore& store() const { return store_; }

private:
    AccessRecord access(char op, std::uint64_t block, const std::uint8_t* data_in,
                        std::vector<std::uint8_t>* data_out);
    void read_path_into_stash(std::uint64_t leaf);
    void write_back_path(std::uint64_t leaf);

    TreeGeometry geometry_;
    WearLeveler& leveler_;
    WearMap& wear_;
    std::uint64_t max_blocks_;
    std::size_t stash_capacity_;
    std::function<std::uint64_t()> next_leaf_;

    std::vector<std::uint64_t> positions_;
    std::map<std::uint64_t, std::vector<std::uint8_t>> stash_;
    std::size_t stash_peak_ = 0;
    BucketStore store_;
    std::uint64_t accesses_ = 0;
};

}  // namespace nvoram
