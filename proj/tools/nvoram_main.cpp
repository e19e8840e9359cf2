#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nvoram/eoram.hpp"
#include "nvoram/errors.hpp"
#include "nvoram/sim.hpp"
#include "nvoram/tree.hpp"
#include "nvoram/wear.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace nvoram;

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SimulationError("cannot write " + path.string());
    os << text;
}

void write_wear_csvs(const WearMap& wear, const fs::path& dir) {
    {
        std::ofstream os(dir / "nodes.csv", std::ios::binary);
        if (!os) throw SimulationError("cannot write " + (dir / "nodes.csv").string());
        wear.write_node_csv(os);
    }
    if (wear.tree_levels() > 0) {
        std::ofstream os(dir / "levels.csv", std::ios::binary);
        if (!os) throw SimulationError("cannot write " + (dir / "levels.csv").string());
        wear.write_level_csv(os);
    }
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir) {
    SimConfig cfg = SimConfig::from_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    std::unique_ptr<WearMap> wear;
    SimReport report = run_simulation(cfg, &wear);
    std::string text = report.to_json().dump(2) + "\n";
    std::cout << text;

    if (!cfg.out_dir.empty()) {
        fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        write_text_file(dir / "report.json", text);
        write_wear_csvs(*wear, dir);
    }
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
    CompareConfig cfg = CompareConfig::from_file(config_path);
    std::vector<SimReport> reports = run_compare(cfg);
    std::string text = compare_to_json(reports).dump(2) + "\n";
    std::cout << text;
    if (!out_dir.empty()) {
        fs::path dir(out_dir);
        fs::create_directories(dir);
        write_text_file(dir / "compare.json", text);
    }
    return 0;
}

int cmd_dist(int levels, std::uint64_t accesses, std::uint64_t seed, const std::string& out_dir) {
    WearMap wear = run_distribution(levels, accesses, seed);
    wear.write_node_csv(std::cout);
    if (!out_dir.empty()) {
        fs::path dir(out_dir);
        fs::create_directories(dir);
        write_wear_csvs(wear, dir);
    }
    return 0;
}

int cmd_partition_dump(int levels, bool bits, const std::string& save_path) {
    PartitionTable table = PartitionTable::build(levels);
    if (!save_path.empty()) {
        std::ofstream os(save_path, std::ios::binary);
        if (!os) throw SimulationError("cannot write " + save_path);
        save_table(table, os);
    }
    if (bits) {
        std::vector<std::uint8_t> payload = serialize_table(table);
        std::string hex;
        hex.reserve(payload.size() * 2);
        static const char digits[] = "0123456789abcdef";
        for (std::uint8_t b : payload) {
            hex.push_back(digits[b >> 4]);
            hex.push_back(digits[b & 0xf]);
        }
        std::cout << hex << "\n";
        return 0;
    }

    ordered_json out;
    out["levels"] = levels;
    out["mfan_level"] = table.mfan_level_k();
    out["payload_bytes"] = (19 * levels + 7) / 8;
    ordered_json rows = ordered_json::array();
    for (int l = 0; l < levels; ++l) {
        const LevelInfo& r = table.row(l);
        rows.push_back(ordered_json{{"level", l},
                                    {"is_mfan", r.is_mfan},
                                    {"partner_level", r.partner_level},
                                    {"level_from", r.level_from},
                                    {"level_to", r.level_to}});
    }
    out["rows"] = rows;
    if (table.group_count() <= 1024) {
        ordered_json groups = ordered_json::array();
        for_each_group(table, [&](const GroupRef& g) {
            ordered_json e;
            e["level"] = g.level;
            e["index"] = g.index;
            e["home"] = g.home();
            e["size"] = g.size;
            ordered_json partners = ordered_json::array();
            for (std::uint64_t y = 0; y + 1 < g.size; ++y) partners.push_back(g.offset + y);
            e["partners"] = partners;
            groups.push_back(e);
        });
        out["groups"] = groups;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

// Walks the MFAN role through an explicit occupant array and checks the
// closed-form positions against it at every step. Large groups spot-check a
// handful of partners per step; small groups check every one.
bool verify_group_size(std::uint64_t size, std::uint64_t swaps, std::string& detail) {
    std::vector<std::uint64_t> occ(size);       // slot -> member
    std::vector<std::uint64_t> slot_of(size);   // member -> slot
    std::iota(occ.begin(), occ.end(), 0);
    std::iota(slot_of.begin(), slot_of.end(), 0);
    const std::uint64_t mfan = size - 1;

    auto check_partner = [&](std::uint64_t y, std::uint64_t s) {
        if (partner_position(y, s, size) == slot_of[y]) return true;
        detail = "partner " + std::to_string(y) + " at swap " + std::to_string(s) +
                 ": expected slot " + std::to_string(slot_of[y]) + ", equation says " +
                 std::to_string(partner_position(y, s, size));
        return false;
    };

    for (std::uint64_t s = 0; s <= swaps; ++s) {
        if (mfan_position(s, size) != slot_of[mfan]) {
            detail = "mfan at swap " + std::to_string(s) + ": expected slot " +
                     std::to_string(slot_of[mfan]) + ", equation says " +
                     std::to_string(mfan_position(s, size));
            return false;
        }
        if (size <= 64) {
            for (std::uint64_t y = 0; y + 1 < size; ++y)
                if (!check_partner(y, s)) return false;
        } else if (size > 1) {
            std::uint64_t probes[] = {0, 1, size / 2, size - 2, s % (size - 1)};
            for (std::uint64_t y : probes)
                if (!check_partner(y, s)) return false;
        }
        if (s == swaps) break;
        std::uint64_t from = slot_of[mfan];
        std::uint64_t to = (from + size - 1) % size;
        std::swap(occ[from], occ[to]);
        slot_of[occ[from]] = from;
        slot_of[occ[to]] = to;
    }
    return true;
}

int cmd_verify_remap(int levels, std::uint64_t swaps) {
    PartitionTable table = PartitionTable::build(levels);
    std::set<std::uint64_t> sizes;
    for (int l = 0; l <= table.mfan_level_k(); ++l) {
        std::uint64_t count = std::uint64_t{1} << l;
        std::uint64_t step = count <= 16 ? 1 : count / 16;
        for (std::uint64_t j = 0; j < count; j += step) sizes.insert(table.group(l, j).size);
        sizes.insert(table.group(l, count - 1).size);
    }
    std::uint64_t checked = 0;
    for (std::uint64_t size : sizes) {
        std::string detail;
        if (!verify_group_size(size, swaps, detail)) {
            std::cerr << "remap mismatch for group size " << size << ": " << detail << "\n";
            return 3;
        }
        ++checked;
    }
    std::cout << "ok: " << checked << " distinct group sizes, " << swaps
              << " swaps each, equations match the swap walk\n";
    return 0;
}

int cmd_overhead(int levels, std::uint64_t freq) {
    int k = PartitionTable::build(levels).mfan_level_k();
    double value = 2.0 * (k + 1) / (static_cast<double>(freq) * levels);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    std::cout << buf << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path ORAM + NVM endurance simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    bool seed_set = false;
    int levels = 24;
    std::uint64_t accesses = 0;
    std::uint64_t swaps = 1000;
    std::uint64_t freq = 10'000;
    bool bits = false;
    bool json_flag = false;
    std::string save_path;

    CLI::App* sim = app.add_subcommand("simulate", "run one simulation from a JSON config");
    sim->add_option("--config", config_path, "JSON config file")->required();
    sim->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    sim->add_option("--out", out_dir, "directory for report.json and wear CSVs");

    CLI::App* cmp = app.add_subcommand("compare", "run several configs and normalize to the first");
    cmp->add_option("--config", config_path, "JSON file with a configs array")->required();
    cmp->add_option("--out", out_dir, "directory for compare.json");

    CLI::App* dist = app.add_subcommand("dist", "write-distribution CSV, uniform accesses, no leveler");
    dist->add_option("--levels", levels, "tree levels")->required()->check(CLI::Range(1, 32));
    dist->add_option("--accesses", accesses, "ORAM accesses to issue")->required();
    dist->add_option("--seed", seed, "leaf RNG seed");
    dist->add_option("--out", out_dir, "directory for nodes.csv and levels.csv");

    CLI::App* pdump = app.add_subcommand("partition-dump", "dump the static group partition");
    pdump->add_option("--levels", levels, "tree levels")->required()->check(CLI::Range(1, 64));
    pdump->add_flag("--json", json_flag, "JSON rows and groups (default)");
    pdump->add_flag("--bits", bits, "serialized 19-bits-per-level payload as hex");
    pdump->add_option("--save", save_path, "also write the binary table container here");

    CLI::App* verify = app.add_subcommand("verify-remap", "check remap equations against a swap walk");
    verify->add_option("--levels", levels, "tree levels")->required()->check(CLI::Range(1, 64));
    verify->add_option("--swaps", swaps, "swaps to walk per group size");

    CLI::App* ovh = app.add_subcommand("overhead", "movement write overhead fraction 2(K+1)/(X*L)");
    ovh->add_option("--levels", levels, "tree levels")->required()->check(CLI::Range(1, 64));
    ovh->add_option("--freq", freq, "accesses per movement checkpoint X")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, seed_set, out_dir);
        if (cmp->parsed()) return cmd_compare(config_path, out_dir);
        if (dist->parsed()) return cmd_dist(levels, accesses, seed, out_dir);
        if (pdump->parsed()) return cmd_partition_dump(levels, bits, save_path);
        if (verify->parsed()) return cmd_verify_remap(levels, swaps);
        if (ovh->parsed()) return cmd_overhead(levels, freq);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
