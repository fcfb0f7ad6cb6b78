#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace textsimp {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Record of how a command ran: the fully resolved options, the root seed,
// and a content hash of every input file. Feeding the file back through
// --from-manifest re-runs the command and reproduces its outputs
// bit-for-bit (nothing time- or environment-dependent is stored).
struct Manifest {
    std::string command;
    std::string version = kToolkitVersion;
    uint64_t seed = 0;
    std::map<std::string, std::string> options;  // resolved option values
    std::map<std::string, std::string> inputs;   // input path -> content hash
    std::map<std::string, long> stats;           // stage counts and the like

    // Hashes the file at `path` and files it under `inputs`.
    void record_input(const std::string& path);

    void write(const std::string& path) const;
    static Manifest load(const std::string& path);
};

// FNV-1a over the raw bytes of the file, as 16 lowercase hex digits.
std::string hash_file_hex(const std::string& path);

}  // namespace textsimp
