#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nvoram {

// Bad user input: config files, trace files, serialized tables, CLI values.
// The CLI maps this family to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class TraceParseError : public ConfigError {
public:
    TraceParseError(const std::string& msg, std::size_t line)
        : ConfigError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A simulation that cannot continue (exit code 2).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

class StashOverflowError : public SimulationError {
public:
    StashOverflowError(std::uint64_t access_index, std::size_t occupancy, std::size_t capacity)
        : SimulationError("stash overflow at access " + std::to_string(access_index) +
                          ": occupancy " + std::to_string(occupancy) + " exceeds capacity " +
                          std::to_string(capacity)),
          access_index_(access_index),
          occupancy_(occupancy) {}
    std::uint64_t access_index() const { return access_index_; }
    std::size_t occupancy() const { return occupancy_; }

private:
    std::uint64_t access_index_;
    std::size_t occupancy_;
};

class UnallocatedReadError : public SimulationError {
public:
    explicit UnallocatedReadError(std::uint64_t block)
        : SimulationError("read of unallocated block " + std::to_string(block)) {}
};

}  // namespace nvoram
