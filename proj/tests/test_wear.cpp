#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "nvoram/eoram.hpp"
#include "nvoram/leveler.hpp"
#include "nvoram/rng.hpp"
#include "nvoram/sim.hpp"
#include "nvoram/startgap.hpp"
#include "nvoram/tree.hpp"
#include "nvoram/wear.hpp"

using namespace nvoram;

TEST_CASE("device failure needs strictly more than the threshold share") {
    // 100 nodes at 1% threshold: one worn node is exactly 1% and fine,
    // the second crosses.
    WearMap wear(100, 1, 0.01);
    CHECK_FALSE(wear.record_write(0));
    CHECK(wear.failed_nodes() == 1);
    CHECK_FALSE(wear.failed());
    CHECK(wear.record_write(1));
    CHECK(wear.failed());
    CHECK(wear.failed_nodes() == 2);

    // The trigger fires exactly once; later crossings keep counting quietly.
    CHECK_FALSE(wear.record_write(2));
    CHECK(wear.failed_nodes() == 3);
    CHECK(wear.failed());
    CHECK_FALSE(wear.record_write(2));  // second write to a worn node
    CHECK(wear.writes(2) == 2);
    CHECK(wear.failed_nodes() == 3);
}

TEST_CASE("zero threshold fails on the first worn node") {
    WearMap wear(10, 3, 0.0);
    CHECK_FALSE(wear.record_write(5));
    CHECK_FALSE(wear.record_write(5));
    CHECK(wear.record_write(5));
    CHECK(wear.failed());
}

TEST_CASE("constructor rejects degenerate parameters") {
    CHECK_THROWS_AS(WearMap(0, 10), std::domain_error);
    CHECK_THROWS_AS(WearMap(10, 0), std::domain_error);
    CHECK_THROWS_AS(WearMap(10, 10, 1.0), std::domain_error);
    CHECK_THROWS_AS(WearMap(10, 10, -0.1), std::domain_error);
}

TEST_CASE("summary statistics on a tiny frozen histogram") {
    WearMap wear(4, 100);
    for (int i = 0; i < 3; ++i) wear.record_write(0);
    wear.record_write(1);
    CHECK(wear.total_writes() == 4);
    CHECK(wear.max_writes() == 3);
    CHECK(wear.mean_writes() == doctest::Approx(1.0));
    // Counters 3,1,0,0: population variance 1.5.
    CHECK(wear.cv() == doctest::Approx(std::sqrt(1.5)));

    WearMap empty(4, 100);
    CHECK(empty.total_writes() == 0);
    CHECK(empty.max_writes() == 0);
    CHECK(empty.cv() == 0.0);
}

TEST_CASE("lifetime fraction is an exact ratio") {
    TreeGeometry g(4);  // 15 nodes
    CHECK(lifetime_fraction(g, 1000, 100) == Rational(8, 3));
    CHECK(lifetime_fraction(g, 0, 100) == Rational(0));
    // Perfectly even wear: every node at wmax after N*wmax/L = 375 accesses.
    CHECK(lifetime_fraction(g, 375, 100) == Rational(1));
}

TEST_CASE("node CSV lists every node with its level") {
    WearMap wear(7, 100, 0.01, 3);
    wear.record_write(0);
    wear.record_write(0);
    wear.record_write(4);
    std::ostringstream os;
    wear.write_node_csv(os);
    CHECK(os.str() ==
          "node_id,level,writes\n"
          "0,0,2\n"
          "1,1,0\n"
          "2,1,0\n"
          "3,2,0\n"
          "4,2,1\n"
          "5,2,0\n"
          "6,2,0\n");
}

TEST_CASE("level CSV aggregates per level and needs tree indexing") {
    WearMap wear(7, 100, 0.01, 3);
    for (int i = 0; i < 4; ++i) wear.record_write(0);
    wear.record_write(1);
    wear.record_write(1);
    wear.record_write(2);
    wear.record_write(3);
    std::ostringstream os;
    wear.write_level_csv(os);
    CHECK(os.str() ==
          "level,nodes,mean,max,min\n"
          "0,1,4,4,4\n"
          "1,2,1.5,2,1\n"
          "2,4,0.25,1,0\n");

    WearMap flat(7, 100);
    std::ostringstream sink;
    CHECK_THROWS_AS(flat.write_level_csv(sink), std::logic_error);
}

TEST_CASE("every leveler satisfies the write accounting identity") {
    const int levels = 9;
    TreeGeometry g(levels);
    const std::uint64_t accesses = 40'000;

    auto run = [&](WearLeveler& lev) {
        WearMap wear(lev.physical_nodes(), UINT64_MAX);
        LeafStream leaves(g, 7);
        for (std::uint64_t i = 0; i < accesses; ++i)
            charge_path_writes(g, lev, wear, leaves.next());
        CHECK(wear.total_writes() ==
              accesses * static_cast<std::uint64_t>(levels) + lev.movement_writes());
        return wear.total_writes();
    };

    IdentityLeveler none(g.node_count());
    run(none);
    CHECK(none.movement_writes() == 0);

    StartGapConfig sg;
    sg.regions = 8;
    sg.psi = 10;
    StartGapLeveler gap(g.node_count(), sg);
    run(gap);
    CHECK(gap.movement_writes() == gap.movement_reads());
    CHECK(gap.movement_writes() > 0);

    EoramLeveler eo(g, 32, SchedulerMode::kBalanced);
    run(eo);
    CHECK(eo.movement_writes() > 0);
}

TEST_CASE("movement wear is two writes per executed non-singleton swap") {
    TreeGeometry g(8);
    EoramLeveler lev(g, 16, SchedulerMode::kNaive);
    WearMap wear(lev.physical_nodes(), UINT64_MAX);
    LeafStream leaves(g, 11);
    for (std::uint64_t i = 0; i < 30'000; ++i) charge_path_writes(g, lev, wear, leaves.next());

    std::uint64_t all_swaps = 0;
    std::uint64_t moving_swaps = 0;
    for_each_group(lev.table(), [&](const GroupRef& grp) {
        std::uint64_t s = lev.executed_swaps(grp.level, grp.index);
        all_swaps += s;
        if (!grp.singleton()) moving_swaps += s;
    });
    CHECK(all_swaps == lev.movement_events());
    CHECK(all_swaps > moving_swaps);  // this tree has singleton groups
    CHECK(lev.movement_writes() == 2 * moving_swaps);
    CHECK(lev.movement_reads() == 2 * moving_swaps);
}

TEST_CASE("group rotation flattens tree wear by an order of magnitude") {
    const int levels = 10;
    TreeGeometry g(levels);
    const std::uint64_t accesses = 200'000;

    IdentityLeveler none(g.node_count());
    WearMap flat_wear(g.node_count(), UINT64_MAX, 0.01, levels);
    LeafStream a(g, 3);
    for (std::uint64_t i = 0; i < accesses; ++i) charge_path_writes(g, none, flat_wear, a.next());

    EoramLeveler eo(g, 16, SchedulerMode::kBalanced);
    WearMap eo_wear(eo.physical_nodes(), UINT64_MAX, 0.01, levels);
    LeafStream b(g, 3);
    for (std::uint64_t i = 0; i < accesses; ++i) charge_path_writes(g, eo, eo_wear, b.next());

    CHECK(flat_wear.cv() > 10.0 * eo_wear.cv());
    CHECK(eo_wear.max_writes() < flat_wear.max_writes() / 10);
}

TEST_CASE("lifetime fraction at failure barely moves with cell endurance") {
    const int levels = 10;
    TreeGeometry g(levels);

    auto lifetime_at_failure = [&](std::uint64_t wmax) {
        EoramLeveler lev(g, 16, SchedulerMode::kBalanced);
        WearMap wear(lev.physical_nodes(), wmax);
        LeafStream leaves(g, 5);
        std::uint64_t accesses = 0;
        while (!wear.failed()) {
            charge_path_writes(g, lev, wear, leaves.next());
            ++accesses;
        }
        return boost::rational_cast<double>(lifetime_fraction(g, accesses, wmax));
    };

    double small = lifetime_at_failure(1'000);
    double large = lifetime_at_failure(10'000);
    CHECK(small == doctest::Approx(large).epsilon(0.05));
    CHECK(large > 0.5);
}
