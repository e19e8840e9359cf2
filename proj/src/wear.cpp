#include "nvoram/wear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace nvoram {

WearMap::WearMap(std::uint64_t node_count, std::uint64_t wmax, double failed_threshold,
                 int tree_levels)
    : counters_(node_count, 0), wmax_(wmax), tree_levels_(tree_levels) {
    if (node_count == 0) throw std::domain_error("WearMap needs at least one node");
    if (wmax == 0) throw std::domain_error("wmax must be positive");
    if (failed_threshold < 0.0 || failed_threshold >= 1.0)
        throw std::domain_error("failed_threshold must be in [0, 1)");
    // Strict ">" rule: with threshold 0.01 and 100 nodes, the first worn-out
    // node is exactly 1% and does not fail the device; the second does.
    threshold_count_ = static_cast<std::uint64_t>(failed_threshold * static_cast<double>(node_count));
}

std::uint64_t WearMap::total_writes() const {
    return std::accumulate(counters_.begin(), counters_.end(), std::uint64_t{0});
}

std::uint64_t WearMap::max_writes() const {
    return counters_.empty() ? 0 : *std::max_element(counters_.begin(), counters_.end());
}

double WearMap::mean_writes() const {
    return static_cast<double>(total_writes()) / static_cast<double>(counters_.size());
}

double WearMap::cv() const {
    double mean = mean_writes();
    if (mean == 0.0) return 0.0;
    double acc = 0.0;
    for (auto c : counters_) {
        double d = static_cast<double>(c) - mean;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(counters_.size())) / mean;
}

void WearMap::write_node_csv(std::ostream& os) const {
    os << "node_id,level,writes\n";
    for (std::uint64_t n = 0; n < counters_.size(); ++n) {
        int level = tree_levels_ > 0 ? level_of(n) : -1;
        os << n << ',' << level << ',' << counters_[n] << '\n';
    }
}

void WearMap::write_level_csv(std::ostream& os) const {
    if (tree_levels_ <= 0) throw std::logic_error("per-level histogram needs a tree-indexed map");
    os << "level,nodes,mean,max,min\n";
    std::uint64_t n = 0;
    for (int l = 0; l < tree_levels_; ++l) {
        std::uint64_t width = std::uint64_t{1} << l;
        std::uint64_t sum = 0, mx = 0, mn = UINT64_MAX;
        for (std::uint64_t i = 0; i < width; ++i, ++n) {
            sum += counters_[n];
            mx = std::max(mx, counters_[n]);
            mn = std::min(mn, counters_[n]);
        }
        os << l << ',' << width << ',' << (static_cast<double>(sum) / static_cast<double>(width))
           << ',' << mx << ',' << mn << '\n';
    }
}

Rational lifetime_fraction(const TreeGeometry& g, std::uint64_t accesses, std::uint64_t wmax) {
    return Rational(static_cast<long long>(accesses) * g.levels,
                    static_cast<long long>(g.node_count()) * static_cast<long long>(wmax));
}

}  // namespace nvoram
