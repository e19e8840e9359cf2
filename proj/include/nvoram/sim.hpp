#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "nvoram/eoram.hpp"
#include "nvoram/tree.hpp"
#include "nvoram/wear.hpp"

namespace nvoram {

class WearLeveler;

enum class WearMode { kNone, kStartGap, kEoram };
enum class WorkloadType { kUniform, kZipf, kTrace };
enum class EngineMode { kAuto, kFull, kFast };

const char* to_string(WearMode mode);
const char* to_string(WorkloadType type);
const char* to_string(EngineMode mode);
const char* to_string(SchedulerMode mode);

struct WorkloadConfig {
    WorkloadType type = WorkloadType::kUniform;
    double theta = 0.99;      // zipf skew
    std::string trace_path;   // trace workloads
};

// One simulation: geometry, wear leveler choice, workload, stop conditions.
// Parsed strictly from JSON; unknown keys anywhere are rejected so typos in
// experiment sweeps fail loudly instead of silently using defaults.
struct SimConfig {
    std::string name;
    int levels = 24;
    int bucket_slots = 4;
    std::size_t block_bytes = 64;
    std::uint64_t wmax = 10'000;
    double fail_threshold = 0.01;
    WearMode wear = WearMode::kNone;
    std::uint64_t freq_x = 10'000;
    SchedulerMode scheduler = SchedulerMode::kBalanced;
    std::uint32_t regions = 256;
    std::uint64_t psi = 100;
    WorkloadConfig workload;
    std::uint64_t access_cap = 10'000'000'000ULL;
    EngineMode engine = EngineMode::kAuto;
    std::uint64_t seed = 1;
    std::size_t stash_capacity = 200;
    std::uint64_t max_blocks = 0;   // 0: one block per leaf
    std::string out_dir;

    static SimConfig from_json(const nlohmann::json& j);
    static SimConfig from_file(const std::string& path);

    TreeGeometry geometry() const;
    void validate() const;   // throws ConfigError
    bool wants_fast_path() const;
    std::string display_name() const;
    nlohmann::ordered_json echo() const;
};

struct TraceOp {
    char op = 'R';   // 'R' or 'W'
    std::uint64_t address = 0;
};

// Streams "<R|W> 0x<hex>" lines in constant memory; blank lines and lines
// starting with '#' are skipped. Malformed lines raise TraceParseError with
// the 1-based line number.
class TraceReader {
public:
    explicit TraceReader(const std::string& path);
    bool next(TraceOp& out);
    std::uint64_t line_number() const { return line_no_; }

private:
    std::string path_;
    std::ifstream in_;
    std::uint64_t line_no_ = 0;
};

struct SimReport {
    std::string name;
    WearMode wear_mode = WearMode::kNone;
    int levels = 0;
    std::uint64_t wmax = 0;
    std::uint64_t seed = 0;
    std::uint64_t accesses = 0;
    bool failed = false;
    std::uint64_t accesses_at_failure = 0;   // 0 when the run did not fail
    bool cap_reached = false;
    std::uint64_t logical_writes = 0;        // accesses × levels
    std::uint64_t movement_writes = 0;
    std::uint64_t movement_reads = 0;
    std::uint64_t total_writes = 0;
    double overhead = 0.0;                   // movement_writes / logical_writes
    double lifetime_fraction = 0.0;
    std::string lifetime_exact;              // same value as an exact ratio
    std::uint64_t physical_nodes = 0;
    std::uint64_t failed_nodes = 0;
    std::uint64_t max_node_writes = 0;
    double mean_node_writes = 0.0;
    double cv_node_writes = 0.0;
    std::size_t stash_peak = 0;
    std::size_t stash_final = 0;
    nlohmann::ordered_json config_echo;

    nlohmann::ordered_json to_json() const;
};

// Charges the node writes of one access along the given leaf's path: leveler
// movement first, then one physical write per path bucket. This is the whole
// per-access wear effect of the full engine, so the fast path and equivalence
// tests share it.
void charge_path_writes(const TreeGeometry& geometry, WearLeveler& leveler, WearMap& wear,
                        std::uint64_t leaf);

std::unique_ptr<WearLeveler> make_leveler(const SimConfig& config);

// Runs one simulation to device failure or the access cap. When wear_out is
// given, the final per-node counters are moved there.
SimReport run_simulation(const SimConfig& config,
                         std::unique_ptr<WearMap>* wear_out = nullptr);

// Uniform-workload, no-leveler wear accumulation for write-distribution dumps.
WearMap run_distribution(int levels, std::uint64_t accesses, std::uint64_t seed);

struct CompareConfig {
    std::uint64_t base_seed = 1;
    std::vector<SimConfig> configs;

    static CompareConfig from_json(const nlohmann::json& j);
    static CompareConfig from_file(const std::string& path);
    void validate() const;
};

// Runs every member config (member seeds are base_seed + index) and reports
// accesses before failure normalized to the first config. Member runs may
// execute in parallel; NVORAM_THREADS caps the worker count.
std::vector<SimReport> run_compare(const CompareConfig& config);
nlohmann::ordered_json compare_to_json(const std::vector<SimReport>& reports);

}  // namespace nvoram
