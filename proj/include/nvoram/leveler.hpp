#pragma once

#include <cstdint>

#include "nvoram/store.hpp"
#include "nvoram/wear.hpp"

namespace nvoram {

// Address-translation layer between logical bucket ids (tree numbering) and
// physical NVM nodes. The simulation calls begin_access once per ORAM access
// (movement engines hook in here), translate for reads, and map_write for
// every bucket write (per-write engines hook in there). Any extra writes a
// leveler performs for its own movement are charged to the WearMap it is
// handed.
class WearLeveler {
public:
    virtual ~WearLeveler() = default;

    // Called once per ORAM access before the path is touched.
    virtual void begin_access(WearMap& /*wear*/) {}

    // Current logical -> physical mapping; no side effects.
    virtual std::uint64_t translate(std::uint64_t logical) const = 0;

    // Mapping for one bucket write; may advance leveler state and charge
    // movement wear. The caller records the write at the returned node.
    virtual std::uint64_t map_write(std::uint64_t logical, WearMap& wear) {
        (void)wear;
        return translate(logical);
    }

    // Physical node space size (>= logical size when spares exist).
    virtual std::uint64_t physical_nodes() const = 0;

    // True when physical ids keep tree numbering, so per-level wear
    // histograms stay meaningful.
    virtual bool preserves_tree_indexing() const = 0;

    // Attach a backing store so movements relocate real bucket contents.
    virtual void attach_store(BucketStore* store) { store_ = store; }

    // Extra node writes performed by the leveler itself so far.
    virtual std::uint64_t movement_writes() const { return 0; }
    // Extra node reads performed by the leveler itself so far.
    virtual std::uint64_t movement_reads() const { return 0; }

protected:
    BucketStore* store_ = nullptr;
};

// No wear leveling: physical == logical.
class IdentityLeveler final : public WearLeveler {
public:
    explicit IdentityLeveler(std::uint64_t nodes) : nodes_(nodes) {}

    std::uint64_t translate(std::uint64_t logical) const override { return logical; }
    std::uint64_t physical_nodes() const override { return nodes_; }
    bool preserves_tree_indexing() const override { return true; }

private:
    std::uint64_t nodes_;
};

}  // namespace nvoram
