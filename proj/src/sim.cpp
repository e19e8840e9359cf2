#include "nvoram/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <initializer_list>
#include <iostream>
#include <limits>
#include <thread>
#include <utility>

#include "nvoram/errors.hpp"
#include "nvoram/leveler.hpp"
#include "nvoram/oram.hpp"
#include "nvoram/rng.hpp"
#include "nvoram/startgap.hpp"

namespace nvoram {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::uint64_t kProgressEvery = 10'000'000;

void require_object(const json& j, const char* ctx) {
    if (!j.is_object()) throw ConfigError(std::string(ctx) + " must be a JSON object");
}

void reject_unknown_keys(const json& j, const char* ctx,
                         std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown key \"" + it.key() + "\" in " + ctx);
    }
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number_integer() && !it->is_number_unsigned())
        throw ConfigError(std::string("\"") + key + "\" must be an integer");
    if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)
        throw ConfigError(std::string("\"") + key + "\" must be nonnegative");
    return it->get<std::uint64_t>();
}

double get_double(const json& j, const char* key, double def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
    return it->get<double>();
}

std::string get_string(const json& j, const char* key, const std::string& def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_string()) throw ConfigError(std::string("\"") + key + "\" must be a string");
    return it->get<std::string>();
}

void progress_note(const SimConfig& cfg, std::uint64_t issued) {
    std::cerr << "progress: " << cfg.display_name() << " " << issued << " accesses\n";
}

std::uint64_t resolved_max_blocks(const SimConfig& cfg) {
    return cfg.max_blocks != 0 ? cfg.max_blocks : cfg.geometry().leaf_count();
}

std::vector<double> zipf_cdf(std::uint64_t n, double theta) {
    std::vector<double> cdf(n);
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        sum += std::pow(static_cast<double>(k), -theta);
        cdf[k - 1] = sum;
    }
    return cdf;
}

unsigned compare_threads(std::size_t jobs) {
    unsigned limit = std::thread::hardware_concurrency();
    if (limit == 0) limit = 1;
    if (const char* env = std::getenv("NVORAM_THREADS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw ConfigError("NVORAM_THREADS must be a positive integer");
        limit = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(limit, jobs));
}

}  // namespace

const char* to_string(WearMode mode) {
    switch (mode) {
        case WearMode::kNone: return "none";
        case WearMode::kStartGap: return "startgap";
        case WearMode::kEoram: return "eoram";
    }
    return "?";
}

const char* to_string(WorkloadType type) {
    switch (type) {
        case WorkloadType::kUniform: return "uniform";
        case WorkloadType::kZipf: return "zipf";
        case WorkloadType::kTrace: return "trace";
    }
    return "?";
}

const char* to_string(EngineMode mode) {
    switch (mode) {
        case EngineMode::kAuto: return "auto";
        case EngineMode::kFull: return "full";
        case EngineMode::kFast: return "fast";
    }
    return "?";
}

const char* to_string(SchedulerMode mode) {
    return mode == SchedulerMode::kNaive ? "naive" : "balanced";
}

SimConfig SimConfig::from_json(const json& j) {
    require_object(j, "config");
    reject_unknown_keys(j, "config",
                        {"name", "levels", "bucket_slots", "block_bytes", "wmax",
                         "fail_threshold", "wear_leveler", "freq_x", "scheduler", "startgap",
                         "workload", "access_cap", "engine", "seed", "stash_capacity",
                         "max_blocks", "out_dir"});

    SimConfig c;
    c.name = get_string(j, "name", "");
    c.levels = static_cast<int>(get_u64(j, "levels", 24));
    c.bucket_slots = static_cast<int>(get_u64(j, "bucket_slots", 4));
    c.block_bytes = static_cast<std::size_t>(get_u64(j, "block_bytes", 64));
    c.wmax = get_u64(j, "wmax", 10'000);
    c.fail_threshold = get_double(j, "fail_threshold", 0.01);

    std::string wear = get_string(j, "wear_leveler", "none");
    if (wear == "none")
        c.wear = WearMode::kNone;
    else if (wear == "startgap")
        c.wear = WearMode::kStartGap;
    else if (wear == "eoram")
        c.wear = WearMode::kEoram;
    else
        throw ConfigError("\"wear_leveler\" must be none, startgap, or eoram");

    c.freq_x = get_u64(j, "freq_x", 10'000);
    std::string sched = get_string(j, "scheduler", "balanced");
    if (sched == "naive")
        c.scheduler = SchedulerMode::kNaive;
    else if (sched == "balanced")
        c.scheduler = SchedulerMode::kBalanced;
    else
        throw ConfigError("\"scheduler\" must be naive or balanced");

    if (auto it = j.find("startgap"); it != j.end()) {
        require_object(*it, "startgap");
        reject_unknown_keys(*it, "startgap", {"regions", "psi"});
        c.regions = static_cast<std::uint32_t>(get_u64(*it, "regions", 256));
        c.psi = get_u64(*it, "psi", 100);
    }

    if (auto it = j.find("workload"); it != j.end()) {
        require_object(*it, "workload");
        std::string type = get_string(*it, "type", "uniform");
        if (type == "uniform") {
            reject_unknown_keys(*it, "workload", {"type"});
            c.workload.type = WorkloadType::kUniform;
        } else if (type == "zipf") {
            reject_unknown_keys(*it, "workload", {"type", "theta"});
            c.workload.type = WorkloadType::kZipf;
            c.workload.theta = get_double(*it, "theta", 0.99);
        } else if (type == "trace") {
            reject_unknown_keys(*it, "workload", {"type", "path"});
            c.workload.type = WorkloadType::kTrace;
            c.workload.trace_path = get_string(*it, "path", "");
        } else {
            throw ConfigError("\"workload.type\" must be uniform, zipf, or trace");
        }
    }

    c.access_cap = get_u64(j, "access_cap", 10'000'000'000ULL);
    std::string engine = get_string(j, "engine", "auto");
    if (engine == "auto")
        c.engine = EngineMode::kAuto;
    else if (engine == "full")
        c.engine = EngineMode::kFull;
    else if (engine == "fast")
        c.engine = EngineMode::kFast;
    else
        throw ConfigError("\"engine\" must be auto, full, or fast");

    c.seed = get_u64(j, "seed", 1);
    c.stash_capacity = static_cast<std::size_t>(get_u64(j, "stash_capacity", 200));
    c.max_blocks = get_u64(j, "max_blocks", 0);
    c.out_dir = get_string(j, "out_dir", "");

    c.validate();
    return c;
}

SimConfig SimConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);  // allow // and /* */ comments
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

TreeGeometry SimConfig::geometry() const {
    TreeGeometry g;
    g.levels = levels;
    g.bucket_slots = bucket_slots;
    g.block_bytes = block_bytes;
    return g;
}

void SimConfig::validate() const {
    try {
        geometry().validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (wmax == 0) throw ConfigError("\"wmax\" must be positive");
    if (!(fail_threshold >= 0.0 && fail_threshold < 1.0))
        throw ConfigError("\"fail_threshold\" must be in [0, 1)");
    if (access_cap == 0) throw ConfigError("\"access_cap\" must be positive");
    if (stash_capacity == 0) throw ConfigError("\"stash_capacity\" must be positive");
    if (regions == 0) throw ConfigError("\"startgap.regions\" must be positive");
    if (psi == 0) throw ConfigError("\"startgap.psi\" must be positive");
    if (wear == WearMode::kEoram) {
        int k = PartitionTable::build(levels).mfan_level_k();
        if (freq_x < static_cast<std::uint64_t>(k) + 1)
            throw ConfigError("\"freq_x\" must be at least K+1 = " + std::to_string(k + 1));
    }
    if (workload.type == WorkloadType::kZipf && !(workload.theta > 0.0))
        throw ConfigError("\"workload.theta\" must be positive");
    if (workload.type == WorkloadType::kTrace && workload.trace_path.empty())
        throw ConfigError("\"workload.path\" is required for trace workloads");
    if (engine == EngineMode::kFast && workload.type != WorkloadType::kUniform)
        throw ConfigError("fast engine requires a uniform workload");
}

bool SimConfig::wants_fast_path() const {
    if (engine == EngineMode::kFull) return false;
    return workload.type == WorkloadType::kUniform;
}

std::string SimConfig::display_name() const {
    return name.empty() ? to_string(wear) : name;
}

ordered_json SimConfig::echo() const {
    ordered_json e;
    e["name"] = display_name();
    e["levels"] = levels;
    e["bucket_slots"] = bucket_slots;
    e["block_bytes"] = block_bytes;
    e["wmax"] = wmax;
    e["fail_threshold"] = fail_threshold;
    e["wear_leveler"] = to_string(wear);
    e["freq_x"] = freq_x;
    e["scheduler"] = to_string(scheduler);
    e["startgap"] = ordered_json{{"regions", regions}, {"psi", psi}};
    ordered_json w;
    w["type"] = to_string(workload.type);
    if (workload.type == WorkloadType::kZipf) w["theta"] = workload.theta;
    if (workload.type == WorkloadType::kTrace) w["path"] = workload.trace_path;
    e["workload"] = w;
    e["access_cap"] = access_cap;
    e["engine"] = to_string(engine);
    e["seed"] = seed;
    e["stash_capacity"] = stash_capacity;
    e["max_blocks"] = resolved_max_blocks(*this);
    e["out_dir"] = out_dir;
    return e;
}

TraceReader::TraceReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw ConfigError("cannot open trace file: " + path);
}

bool TraceReader::next(TraceOp& out) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char ch : line)
            if (!std::isspace(static_cast<unsigned char>(ch))) {
                blank = false;
                break;
            }
        if (blank || line[0] == '#') continue;
        if (line.size() < 5 || (line[0] != 'R' && line[0] != 'W') || line[1] != ' ' ||
            line[2] != '0' || line[3] != 'x')
            throw TraceParseError("expected \"<R|W> 0x<hex>\"", line_no_);
        std::uint64_t value = 0;
        for (std::size_t i = 4; i < line.size(); ++i) {
            char ch = line[i];
            int digit;
            if (ch >= '0' && ch <= '9')
                digit = ch - '0';
            else if (ch >= 'a' && ch <= 'f')
                digit = ch - 'a' + 10;
            else if (ch >= 'A' && ch <= 'F')
                digit = ch - 'A' + 10;
            else
                throw TraceParseError("expected \"<R|W> 0x<hex>\"", line_no_);
            if (value > (std::numeric_limits<std::uint64_t>::max() >> 4))
                throw TraceParseError("address does not fit in 64 bits", line_no_);
            value = (value << 4) | static_cast<std::uint64_t>(digit);
        }
        out.op = line[0];
        out.address = value;
        return true;
    }
    if (in_.bad()) throw SimulationError("I/O error while reading trace: " + path_);
    return false;
}

void charge_path_writes(const TreeGeometry& geometry, WearLeveler& leveler, WearMap& wear,
                        std::uint64_t leaf) {
    leveler.begin_access(wear);
    for (int l = 0; l < geometry.levels; ++l)
        wear.record_write(leveler.map_write(path_node(geometry, leaf, l), wear));
}

std::unique_ptr<WearLeveler> make_leveler(const SimConfig& config) {
    TreeGeometry g = config.geometry();
    switch (config.wear) {
        case WearMode::kNone:
            return std::make_unique<IdentityLeveler>(g.node_count());
        case WearMode::kStartGap: {
            StartGapConfig sg;
            sg.regions = config.regions;
            sg.psi = config.psi;
            sg.seed = config.seed;
            return std::make_unique<StartGapLeveler>(g.node_count(), sg);
        }
        case WearMode::kEoram:
            return std::make_unique<EoramLeveler>(g, config.freq_x, config.scheduler);
    }
    throw ConfigError("unreachable wear mode");
}

SimReport run_simulation(const SimConfig& config, std::unique_ptr<WearMap>* wear_out) {
    config.validate();
    TreeGeometry g = config.geometry();
    std::unique_ptr<WearLeveler> leveler = make_leveler(config);
    auto wear = std::make_unique<WearMap>(leveler->physical_nodes(), config.wmax,
                                          config.fail_threshold,
                                          leveler->preserves_tree_indexing() ? g.levels : 0);

    std::uint64_t issued = 0;
    std::uint64_t fail_at = 0;
    bool failed = false;
    std::size_t stash_peak = 0;
    std::size_t stash_final = 0;

    if (config.wants_fast_path()) {
        LeafStream leaves(g, config.seed);
        while (issued < config.access_cap) {
            std::uint64_t leaf = leaves.next();
            ++issued;
            charge_path_writes(g, *leveler, *wear, leaf);
            if (wear->failed()) {
                failed = true;
                fail_at = issued;
                break;
            }
            if (issued % kProgressEvery == 0) progress_note(config, issued);
        }
    } else {
        OramOptions opt;
        opt.stash_capacity = config.stash_capacity;
        opt.max_blocks = config.max_blocks;
        opt.store_payloads = false;
        OramEngine engine(g, *leveler, *wear, opt);
        auto stream = std::make_shared<LeafStream>(g, config.seed);
        engine.set_leaf_source([stream]() { return stream->next(); });

        std::uint64_t max_blocks = engine.max_blocks();
        Rng workload_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<double> cdf;
        if (config.workload.type == WorkloadType::kZipf)
            cdf = zipf_cdf(max_blocks, config.workload.theta);
        std::unique_ptr<TraceReader> trace;
        if (config.workload.type == WorkloadType::kTrace)
            trace = std::make_unique<TraceReader>(config.workload.trace_path);

        auto next_op = [&](char& op, std::uint64_t& block) {
            switch (config.workload.type) {
                case WorkloadType::kUniform:
                    op = 'W';
                    block = workload_rng.bounded(max_blocks);
                    return true;
                case WorkloadType::kZipf: {
                    op = 'W';
                    double u = workload_rng.unit() * cdf.back();
                    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
                    block = static_cast<std::uint64_t>(it - cdf.begin());
                    if (block >= max_blocks) block = max_blocks - 1;
                    return true;
                }
                case WorkloadType::kTrace: {
                    TraceOp t;
                    if (!trace->next(t)) return false;
                    op = t.op;
                    block = (t.address / config.block_bytes) % max_blocks;
                    return true;
                }
            }
            return false;
        };

        char op = 'W';
        std::uint64_t block = 0;
        while (issued < config.access_cap && next_op(op, block)) {
            ++issued;
            if (op == 'R')
                engine.read(block);
            else
                engine.write(block);
            if (wear->failed()) {
                failed = true;
                fail_at = issued;
                break;
            }
            if (issued % kProgressEvery == 0) progress_note(config, issued);
        }
        stash_peak = engine.stash_peak();
        stash_final = engine.stash_size();
    }

    SimReport r;
    r.name = config.display_name();
    r.wear_mode = config.wear;
    r.levels = g.levels;
    r.wmax = config.wmax;
    r.seed = config.seed;
    r.accesses = issued;
    r.failed = failed;
    r.accesses_at_failure = fail_at;
    r.cap_reached = !failed && issued >= config.access_cap;
    r.logical_writes = issued * static_cast<std::uint64_t>(g.levels);
    r.movement_writes = leveler->movement_writes();
    r.movement_reads = leveler->movement_reads();
    r.total_writes = wear->total_writes();
    r.overhead = r.logical_writes != 0
                     ? static_cast<double>(r.movement_writes) / static_cast<double>(r.logical_writes)
                     : 0.0;
    Rational life = lifetime_fraction(g, failed ? fail_at : issued, config.wmax);
    r.lifetime_fraction = boost::rational_cast<double>(life);
    r.lifetime_exact =
        std::to_string(life.numerator()) + "/" + std::to_string(life.denominator());
    r.physical_nodes = leveler->physical_nodes();
    r.failed_nodes = wear->failed_nodes();
    r.max_node_writes = wear->max_writes();
    r.mean_node_writes = wear->mean_writes();
    r.cv_node_writes = wear->cv();
    r.stash_peak = stash_peak;
    r.stash_final = stash_final;
    r.config_echo = config.echo();

    if (wear_out != nullptr) *wear_out = std::move(wear);
    return r;
}

WearMap run_distribution(int levels, std::uint64_t accesses, std::uint64_t seed) {
    TreeGeometry g;
    g.levels = levels;
    g.validate();
    WearMap wear(g.node_count(), std::numeric_limits<std::uint64_t>::max(), 0.01, levels);
    IdentityLeveler leveler(g.node_count());
    LeafStream leaves(g, seed);
    for (std::uint64_t i = 0; i < accesses; ++i)
        charge_path_writes(g, leveler, wear, leaves.next());
    return wear;
}

ordered_json SimReport::to_json() const {
    ordered_json j;
    j["name"] = name;
    j["wear_leveler"] = to_string(wear_mode);
    j["levels"] = levels;
    j["wmax"] = wmax;
    j["seed"] = seed;
    j["accesses"] = accesses;
    j["failed"] = failed;
    j["accesses_at_failure"] = accesses_at_failure;
    j["cap_reached"] = cap_reached;
    j["lifetime_fraction"] = lifetime_fraction;
    j["lifetime_exact"] = lifetime_exact;
    j["overhead"] = overhead;
    j["writes"] = ordered_json{{"logical", logical_writes},
                               {"movement", movement_writes},
                               {"movement_reads", movement_reads},
                               {"total", total_writes}};
    j["wear"] = ordered_json{{"physical_nodes", physical_nodes},
                             {"failed_nodes", failed_nodes},
                             {"max", max_node_writes},
                             {"mean", mean_node_writes},
                             {"cv", cv_node_writes}};
    j["stash"] = ordered_json{{"peak", stash_peak}, {"final", stash_final}};
    j["config"] = config_echo;
    return j;
}

CompareConfig CompareConfig::from_json(const json& j) {
    require_object(j, "compare config");
    reject_unknown_keys(j, "compare config", {"seed", "configs"});
    CompareConfig cc;
    cc.base_seed = get_u64(j, "seed", 1);
    auto it = j.find("configs");
    if (it == j.end() || !it->is_array())
        throw ConfigError("compare config needs a \"configs\" array");
    for (const auto& entry : *it) cc.configs.push_back(SimConfig::from_json(entry));
    cc.validate();
    return cc;
}

CompareConfig CompareConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
}

void CompareConfig::validate() const {
    if (configs.size() < 2) throw ConfigError("compare needs at least two configs");
    const SimConfig& base = configs.front();
    for (const SimConfig& c : configs) {
        if (c.levels != base.levels || c.bucket_slots != base.bucket_slots ||
            c.block_bytes != base.block_bytes)
            throw ConfigError("compare configs must share tree geometry");
        if (c.wmax != base.wmax) throw ConfigError("compare configs must share wmax");
        if (c.max_blocks != base.max_blocks)
            throw ConfigError("compare configs must share max_blocks");
        bool same_workload =
            c.workload.type == base.workload.type &&
            (c.workload.type != WorkloadType::kZipf || c.workload.theta == base.workload.theta) &&
            (c.workload.type != WorkloadType::kTrace ||
             c.workload.trace_path == base.workload.trace_path);
        if (!same_workload) throw ConfigError("compare configs must share the workload");
    }
}

std::vector<SimReport> run_compare(const CompareConfig& config) {
    config.validate();
    std::vector<SimConfig> members = config.configs;
    for (std::size_t i = 0; i < members.size(); ++i)
        members[i].seed = config.base_seed + i;

    std::vector<SimReport> reports(members.size());
    std::vector<std::exception_ptr> errors(members.size());
    unsigned workers = compare_threads(members.size());

    std::atomic<std::size_t> cursor{0};
    auto run = [&]() {
        for (std::size_t i = cursor.fetch_add(1); i < members.size(); i = cursor.fetch_add(1)) {
            try {
                reports[i] = run_simulation(members[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return reports;
}

ordered_json compare_to_json(const std::vector<SimReport>& reports) {
    if (reports.empty()) throw ConfigError("compare produced no reports");
    auto effective = [](const SimReport& r) {
        return r.failed ? r.accesses_at_failure : r.accesses;
    };
    double base = static_cast<double>(effective(reports.front()));

    ordered_json out;
    out["baseline"] = reports.front().name;
    ordered_json rows = ordered_json::array();
    for (const SimReport& r : reports) {
        ordered_json row;
        row["name"] = r.name;
        row["wear_leveler"] = to_string(r.wear_mode);
        row["accesses_at_failure"] = r.accesses_at_failure;
        row["failed"] = r.failed;
        row["normalized_to_baseline"] =
            base != 0.0 ? static_cast<double>(effective(r)) / base : 0.0;
        row["lifetime_fraction"] = r.lifetime_fraction;
        row["overhead"] = r.overhead;
        rows.push_back(row);
    }
    out["rows"] = rows;
    ordered_json full = ordered_json::array();
    for (const SimReport& r : reports) full.push_back(r.to_json());
    out["reports"] = full;
    return out;
}

}  // namespace nvoram
