#include "nvoram/oram.hpp"

#include <cstring>
#include <memory>
#include <stdexcept>

#include "nvoram/errors.hpp"
#include "nvoram/leveler.hpp"
#include "nvoram/rng.hpp"
#include "nvoram/wear.hpp"

namespace nvoram {

OramEngine::OramEngine(const TreeGeometry& geometry, WearLeveler& leveler, WearMap& wear,
                       const OramOptions& options)
    : geometry_(geometry),
      leveler_(leveler),
      wear_(wear),
      max_blocks_(options.max_blocks != 0 ? options.max_blocks : geometry.leaf_count()),
      stash_capacity_(options.stash_capacity),
      positions_(max_blocks_, kUnallocatedLeaf),
      store_(leveler.physical_nodes(), geometry.bucket_slots, geometry.block_bytes,
             options.store_payloads) {
    geometry_.validate();
    if (stash_capacity_ == 0) throw std::domain_error("stash capacity must be nonzero");
    leveler_.attach_store(&store_);
    auto stream = std::make_shared<LeafStream>(geometry_, 1);
    next_leaf_ = [stream]() { return stream->next(); };
}

void OramEngine::set_leaf_source(std::function<std::uint64_t()> source) {
    next_leaf_ = std::move(source);
}

AccessRecord OramEngine::read(std::uint64_t block, std::vector<std::uint8_t>* data_out) {
    return access('R', block, nullptr, data_out);
}

AccessRecord OramEngine::write(std::uint64_t block, const std::uint8_t* data) {
    return access('W', block, data, nullptr);
}

std::uint64_t OramEngine::position(std::uint64_t block) const {
    if (block >= max_blocks_) throw std::domain_error("block id out of range");
    return positions_[block];
}

AccessRecord OramEngine::access(char op, std::uint64_t block, const std::uint8_t* data_in,
                                std::vector<std::uint8_t>* data_out) {
    if (block >= max_blocks_) throw std::domain_error("block id out of range");
    ++accesses_;
    leveler_.begin_access(wear_);

    std::uint64_t leaf = positions_[block];
    if (leaf == kUnallocatedLeaf) {
        if (op == 'R') throw UnallocatedReadError(block);
        // First write to a block: give it a position, then run the normal
        // read-remap-rewrite round on that path.
        leaf = next_leaf_();
        positions_[block] = leaf;
    }

    read_path_into_stash(leaf);

    auto it = stash_.find(block);
    if (op == 'R') {
        if (it == stash_.end())
            throw SimulationError("allocated block missing from its path; store corrupted");
        if (data_out != nullptr) *data_out = it->second;
    } else {
        std::vector<std::uint8_t> payload(store_.has_payloads() ? geometry_.block_bytes : 0, 0);
        if (data_in != nullptr && !payload.empty())
            std::memcpy(payload.data(), data_in, geometry_.block_bytes);
        if (it == stash_.end()) {
            stash_.emplace(block, std::move(payload));
        } else if (data_in != nullptr) {
            it->second = std::move(payload);
        }
    }

    std::uint64_t new_leaf = next_leaf_();
    positions_[block] = new_leaf;

    write_back_path(leaf);

    if (stash_.size() > stash_capacity_)
        throw StashOverflowError(accesses_, stash_.size(), stash_capacity_);
    if (stash_.size() > stash_peak_) stash_peak_ = stash_.size();

    AccessRecord rec;
    rec.op = op;
    rec.block = block;
    rec.leaf = leaf;
    rec.new_leaf = new_leaf;
    rec.path = path_nodes(geometry_, leaf);
    rec.stash_after = stash_.size();
    return rec;
}

void OramEngine::read_path_into_stash(std::uint64_t leaf) {
    for (int l = 0; l < geometry_.levels; ++l) {
        std::uint64_t phys = leveler_.translate(path_node(geometry_, leaf, l));
        for (int s = 0; s < geometry_.bucket_slots; ++s) {
            std::uint64_t id = store_.slot_id(phys, s);
            if (id == kDummyBlock) continue;
            std::vector<std::uint8_t> payload;
            if (store_.has_payloads()) {
                const std::uint8_t* p = store_.slot_payload(phys, s);
                payload.assign(p, p + geometry_.block_bytes);
            }
            stash_.emplace(id, std::move(payload));
            store_.slot_id(phys, s) = kDummyBlock;
        }
    }
}

void OramEngine::write_back_path(std::uint64_t leaf) {
    for (int l = geometry_.levels - 1; l >= 0; --l) {
        NodeId bucket = path_node(geometry_, leaf, l);
        std::uint64_t phys = leveler_.map_write(bucket, wear_);
        int filled = 0;
        // Deepest bucket is filled first, so a block lands as close to its
        // leaf as its position allows; ties go to the lower block id because
        // the stash iterates in id order.
        for (auto it = stash_.begin(); it != stash_.end() && filled < geometry_.bucket_slots;) {
            if (path_node(geometry_, positions_[it->first], l) != bucket) {
                ++it;
                continue;
            }
            store_.slot_id(phys, filled) = it->first;
            if (store_.has_payloads())
                std::memcpy(store_.slot_payload(phys, filled), it->second.data(),
                            geometry_.block_bytes);
            ++filled;
            it = stash_.erase(it);
        }
        for (int s = filled; s < geometry_.bucket_slots; ++s)
            store_.slot_id(phys, s) = kDummyBlock;
        wear_.record_write(phys);
    }
}

void OramEngine::seed_block(std::uint64_t block, std::uint64_t leaf, const std::uint8_t* data) {
    if (block >= max_blocks_) throw std::domain_error("block id out of range");
    if (leaf >= geometry_.leaf_count()) throw std::domain_error("leaf id out of range");
    std::uint64_t phys = leveler_.translate(path_node(geometry_, leaf, geometry_.levels - 1));
    for (int s = 0; s < geometry_.bucket_slots; ++s) {
        if (store_.slot_id(phys, s) != kDummyBlock) continue;
        store_.slot_id(phys, s) = block;
        if (store_.has_payloads()) {
            std::uint8_t* p = store_.slot_payload(phys, s);
            std::memset(p, 0, geometry_.block_bytes);
            if (data != nullptr) std::memcpy(p, data, geometry_.block_bytes);
        }
        positions_[block] = leaf;
        return;
    }
    throw std::logic_error("seed_block: leaf bucket full");
}

std::uint64_t OramEngine::stored_blocks() const {
    std::uint64_t count = stash_.size();
    for (std::uint64_t b = 0; b < store_.buckets(); ++b)
        for (int s = 0; s < geometry_.bucket_slots; ++s)
            if (store_.slot_id(b, s) != kDummyBlock) ++count;
    return count;
}

}  // namespace nvoram
