#include "nvoram/eoram.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nvoram/errors.hpp"

namespace nvoram {

namespace {

// Start of the c-th of `parts` as-equal-as-possible contiguous pieces of a
// range of `total` elements: the first `total % parts` pieces get one extra.
std::uint64_t piece_base(std::uint64_t total, std::uint64_t parts, std::uint64_t c) {
    std::uint64_t q = total / parts;
    std::uint64_t r = total % parts;
    return c * q + std::min(c, r);
}

std::uint64_t piece_size(std::uint64_t total, std::uint64_t parts, std::uint64_t c) {
    return total / parts + (c < total % parts ? 1 : 0);
}

// Which piece holds element `idx`.
std::uint64_t piece_of(std::uint64_t total, std::uint64_t parts, std::uint64_t idx) {
    std::uint64_t q = total / parts;
    std::uint64_t r = total % parts;
    std::uint64_t wide = r * (q + 1);
    return idx < wide ? idx / (q + 1) : r + (idx - wide) / q;
}

}  // namespace

PartitionTable PartitionTable::build(int levels) {
    if (levels < 1 || levels > 64)
        throw std::domain_error("partition levels must be in [1, 64], got " +
                                std::to_string(levels));
    PartitionTable t;
    t.rows_.resize(static_cast<std::size_t>(levels));
    int d = 0;
    int rem = levels;
    while (rem >= 2) {
        int thresh = rem / 2;
        int p = d + rem - 1;
        LevelInfo anchor{true, static_cast<std::uint8_t>(p), static_cast<std::uint8_t>(d),
                         static_cast<std::uint8_t>(d + thresh - 1)};
        for (int l = d; l < d + thresh; ++l) t.rows_[static_cast<std::size_t>(l)] = anchor;
        t.rows_[static_cast<std::size_t>(p)] = {false, static_cast<std::uint8_t>(p),
                                                static_cast<std::uint8_t>(d),
                                                static_cast<std::uint8_t>(d + thresh - 1)};
        t.mfan_level_k_ = d + thresh - 1;
        d += thresh;
        rem -= thresh + 1;
    }
    if (rem == 1) {
        t.rows_[static_cast<std::size_t>(d)] = {true, static_cast<std::uint8_t>(d),
                                                static_cast<std::uint8_t>(d),
                                                static_cast<std::uint8_t>(d)};
        t.mfan_level_k_ = d;
    }
    return t;
}

GroupRef PartitionTable::group(int level, std::uint64_t index) const {
    if (level < 0 || level >= levels() || !row(level).is_mfan)
        throw std::domain_error("not an anchor level: " + std::to_string(level));
    if (index >= (std::uint64_t{1} << level)) throw std::domain_error("group index out of range");
    const LevelInfo& r = row(level);
    if (r.partner_level == level) return GroupRef{level, index, 1, 0};

    std::uint64_t partner_nodes = std::uint64_t{1} << r.partner_level;
    std::uint64_t chunks = static_cast<std::uint64_t>(r.level_to - r.level_from) + 1;
    std::uint64_t chunk = static_cast<std::uint64_t>(level - r.level_from);
    std::uint64_t chunk_size = piece_size(partner_nodes, chunks, chunk);
    std::uint64_t parts = std::uint64_t{1} << level;
    std::uint64_t part_size = piece_size(chunk_size, parts, index);
    std::uint64_t offset = level_first(r.partner_level) + piece_base(partner_nodes, chunks, chunk) +
                           piece_base(chunk_size, parts, index);
    return GroupRef{level, index, part_size + 1, offset};
}

GroupQuery PartitionTable::group_of(NodeId node) const {
    int l = level_of(node);
    if (l >= levels()) throw std::domain_error("node out of range");
    const LevelInfo& r = row(l);
    std::uint64_t idx = index_in_level(node);
    if (r.is_mfan) return GroupQuery{group(l, idx), true, 0};

    std::uint64_t partner_nodes = std::uint64_t{1} << l;
    std::uint64_t chunks = static_cast<std::uint64_t>(r.level_to - r.level_from) + 1;
    std::uint64_t chunk = piece_of(partner_nodes, chunks, idx);
    std::uint64_t in_chunk = idx - piece_base(partner_nodes, chunks, chunk);
    int anchor_level = r.level_from + static_cast<int>(chunk);
    std::uint64_t chunk_size = piece_size(partner_nodes, chunks, chunk);
    std::uint64_t parts = std::uint64_t{1} << anchor_level;
    std::uint64_t part = piece_of(chunk_size, parts, in_chunk);
    std::uint64_t y = in_chunk - piece_base(chunk_size, parts, part);
    std::uint64_t part_size = piece_size(chunk_size, parts, part);
    std::uint64_t offset = node - y;
    return GroupQuery{GroupRef{anchor_level, part, part_size + 1, offset}, false, y};
}

std::vector<GroupRef> PartitionTable::all_groups() const {
    std::vector<GroupRef> out;
    out.reserve(group_count());
    for_each_group(*this, [&](const GroupRef& g) { out.push_back(g); });
    return out;
}

std::uint64_t group_offset(const GroupRef& g) {
    if (g.singleton()) throw std::domain_error("singleton group has no partner offset");
    return g.offset;
}

std::uint64_t mfan_position(std::uint64_t swaps, std::uint64_t group_size) {
    if (group_size == 0) throw std::domain_error("empty group");
    return (group_size - 1) - swaps % group_size;
}

std::uint64_t partner_position(std::uint64_t y, std::uint64_t swaps, std::uint64_t group_size) {
    if (group_size < 2 || y >= group_size - 1)
        throw std::domain_error("partner slot out of range");
    return (y + (swaps + y) / (group_size - 1)) % group_size;
}

NodeId array_index_to_node(std::uint64_t array_index, const GroupRef& g) {
    if (array_index >= g.size) throw std::domain_error("array index out of range");
    if (array_index == g.size - 1) return g.home();
    return g.offset + array_index;
}

std::vector<std::uint8_t> serialize_table(const PartitionTable& table) {
    const int bits_per_level = 19;
    std::size_t total_bits = static_cast<std::size_t>(table.levels()) * bits_per_level;
    std::vector<std::uint8_t> out((total_bits + 7) / 8, 0);
    std::size_t bit = 0;
    auto put = [&](std::uint64_t value, int width) {
        for (int i = 0; i < width; ++i, ++bit)
            if ((value >> i) & 1) out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    };
    for (const LevelInfo& r : table.rows()) {
        put(r.is_mfan ? 1 : 0, 1);
        put(r.partner_level, 6);
        put(r.level_from, 6);
        put(r.level_to, 6);
    }
    return out;
}

PartitionTable deserialize_table(const std::vector<std::uint8_t>& payload, int levels) {
    if (levels < 1 || levels > 64) throw ConfigError("table level count out of range");
    std::size_t total_bits = static_cast<std::size_t>(levels) * 19;
    if (payload.size() != (total_bits + 7) / 8)
        throw ConfigError("table payload is " + std::to_string(payload.size()) +
                          " bytes, expected " + std::to_string((total_bits + 7) / 8));
    std::size_t bit = 0;
    auto get = [&](int width) {
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i, ++bit)
            if (payload[bit / 8] & (1u << (bit % 8))) v |= std::uint64_t{1} << i;
        return v;
    };
    PartitionTable t;
    std::vector<LevelInfo> rows(static_cast<std::size_t>(levels));
    for (auto& r : rows) {
        r.is_mfan = get(1) != 0;
        r.partner_level = static_cast<std::uint8_t>(get(6));
        r.level_from = static_cast<std::uint8_t>(get(6));
        r.level_to = static_cast<std::uint8_t>(get(6));
    }
    for (; bit < payload.size() * 8; ++bit)
        if (payload[bit / 8] & (1u << (bit % 8))) throw ConfigError("nonzero table padding");

    // Structural checks: field bounds, contiguous anchor prefix, rows of a
    // family agreeing with each other.
    int k = -1;
    for (int l = 0; l < levels; ++l) {
        const LevelInfo& r = rows[static_cast<std::size_t>(l)];
        if (r.partner_level >= levels || r.level_from >= levels || r.level_to >= levels ||
            r.level_from > r.level_to)
            throw ConfigError("table row " + std::to_string(l) + " has out-of-range fields");
        if (r.is_mfan) {
            if (l != k + 1) throw ConfigError("anchor levels are not a contiguous prefix");
            k = l;
            bool singleton = r.partner_level == l;
            if (!singleton && (l < r.level_from || l > r.level_to || r.partner_level <= r.level_to))
                throw ConfigError("table row " + std::to_string(l) + " is inconsistent");
            if (singleton && (r.level_from != l || r.level_to != l))
                throw ConfigError("singleton row " + std::to_string(l) + " is inconsistent");
        } else {
            if (r.partner_level != l)
                throw ConfigError("partner row " + std::to_string(l) + " must reference itself");
            const LevelInfo& a = rows[r.level_from];
            if (!a.is_mfan || a.partner_level != l || a.level_from != r.level_from ||
                a.level_to != r.level_to)
                throw ConfigError("partner row " + std::to_string(l) +
                                  " disagrees with its anchor rows");
        }
    }
    t = PartitionTable::build(levels);
    if (t.rows() != rows) {
        // Accept only tables equivalent to the canonical construction; the
        // format carries no degrees of freedom beyond it.
        throw ConfigError("table rows do not match the canonical partition");
    }
    return t;
}

namespace {
constexpr char kMagic[4] = {'E', 'O', 'R', 'M'};
constexpr std::uint8_t kVersion = 1;
}  // namespace

void save_table(const PartitionTable& table, std::ostream& os) {
    os.write(kMagic, 4);
    char meta[2] = {static_cast<char>(kVersion), static_cast<char>(table.levels())};
    os.write(meta, 2);
    auto payload = serialize_table(table);
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
}

PartitionTable load_table(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
        throw ConfigError("bad table magic");
    char meta[2];
    if (!is.read(meta, 2)) throw ConfigError("truncated table header");
    if (static_cast<std::uint8_t>(meta[0]) != kVersion) throw ConfigError("unsupported table version");
    int levels = static_cast<std::uint8_t>(meta[1]);
    if (levels < 1 || levels > 64) throw ConfigError("table level count out of range");
    std::size_t bytes = (static_cast<std::size_t>(levels) * 19 + 7) / 8;
    std::vector<std::uint8_t> payload(bytes);
    if (!is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(bytes)))
        throw ConfigError("truncated table payload");
    return deserialize_table(payload, levels);
}

MovementSchedule::MovementSchedule(int mfan_level_k, std::uint64_t freq_x, SchedulerMode mode)
    : k_(mfan_level_k), x_(freq_x), mode_(mode) {
    if (k_ < 0 || k_ > 62) throw std::domain_error("anchor level bound out of range");
    if (x_ < static_cast<std::uint64_t>(k_) + 1)
        throw std::domain_error("movement frequency " + std::to_string(x_) +
                                " must be at least K+1 = " + std::to_string(k_ + 1));
    d_ = std::max<std::uint64_t>(1, x_ / (static_cast<std::uint64_t>(k_) + 1));
}

std::vector<GroupId> MovementSchedule::due(std::uint64_t ctr) const {
    std::vector<GroupId> out;
    for_each_due(ctr, [&](int level, std::uint64_t index) { out.push_back({level, index}); });
    return out;
}

std::uint64_t MovementSchedule::swaps_so_far(int level, std::uint64_t index,
                                             std::uint64_t ctr) const {
    std::uint64_t c = ctr / x_;
    if (mode_ == SchedulerMode::kNaive) return c >> level;
    // Balanced: one movement per window for the group whose index matches the
    // window modulo 2^level, executed (level+1)*D accesses into the window.
    std::uint64_t done = index < c ? ((c - 1 - index) >> level) + 1 : 0;
    std::uint64_t mask = (std::uint64_t{1} << level) - 1;
    if ((c & mask) == index && ctr % x_ >= (static_cast<std::uint64_t>(level) + 1) * d_) ++done;
    return done;
}

NodeId translate(NodeId node, std::uint64_t ctr, const PartitionTable& table,
                 const MovementSchedule& sched) {
    GroupQuery q = table.group_of(node);
    if (q.group.singleton()) return node;
    std::uint64_t s = sched.swaps_so_far(q.group.level, q.group.index, ctr);
    std::uint64_t pos = q.is_mfan ? mfan_position(s, q.group.size)
                                  : partner_position(q.partner_y, s, q.group.size);
    return array_index_to_node(pos, q.group);
}

EoramLeveler::EoramLeveler(const TreeGeometry& g, std::uint64_t freq_x, SchedulerMode mode)
    : table_(PartitionTable::build(g.levels)),
      sched_(table_.mfan_level_k(), freq_x, mode),
      node_count_(g.node_count()) {
    std::uint64_t anchors = (std::uint64_t{1} << (table_.mfan_level_k() + 1)) - 1;
    exec_swaps_.assign(anchors, 0);
    mfan_phys_.resize(anchors);
    for (std::uint64_t n = 0; n < anchors; ++n) mfan_phys_[n] = static_cast<std::uint32_t>(n);
}

void EoramLeveler::begin_access(WearMap& wear) {
    ++ctr_;
    sched_.for_each_due(ctr_, [&](int level, std::uint64_t index) {
        perform_movement(level, index, wear);
    });
}

void EoramLeveler::perform_movement(int level, std::uint64_t index, WearMap& wear) {
    ++movement_events_;
    NodeId home = level_first(level) + index;
    std::uint64_t s = exec_swaps_[home]++;
    GroupRef g = table_.group(level, index);
    if (g.singleton()) return;
    NodeId from = array_index_to_node(mfan_position(s, g.size), g);
    NodeId to = array_index_to_node(mfan_position(s + 1, g.size), g);
    wear.record_write(from);
    wear.record_write(to);
    movement_writes_ += 2;
    movement_reads_ += 2;
    if (store_) store_->swap_buckets(from, to);
    mfan_phys_[home] = static_cast<std::uint32_t>(to);
}

std::uint64_t EoramLeveler::translate(std::uint64_t logical) const {
    int l = level_of(logical);
    const LevelInfo& r = table_.row(l);
    if (r.is_mfan) {
        if (r.partner_level == l) return logical;  // singleton level
        return mfan_phys_[logical];
    }
    GroupQuery q = table_.group_of(logical);
    std::uint64_t s = exec_swaps_[q.group.home()];
    std::uint64_t pos = partner_position(q.partner_y, s, q.group.size);
    return array_index_to_node(pos, q.group);
}

}  // namespace nvoram
