#pragma once

#include <map>
#include <string>
#include <vector>

namespace textsimp {

// Runs the command line and returns the process exit code:
//   0 success, 2 usage error, 3 data/format error, 4 numeric failure.
// All diagnostics go to stderr; results and progress go to stdout.
int run_cli(int argc, const char* const* argv);

// Convenience overload for tests: args excludes the program name.
int run_cli(const std::vector<std::string>& args);

// Typed accessors over a resolved option map. Values are kept as strings
// so that config files, command-line flags, and manifests share one
// representation; these parse on demand and reject trailing garbage.
std::string opt_str(const std::map<std::string, std::string>& opts, const std::string& key);
int opt_int(const std::map<std::string, std::string>& opts, const std::string& key);
uint64_t opt_u64(const std::map<std::string, std::string>& opts, const std::string& key);
double opt_double(const std::map<std::string, std::string>& opts, const std::string& key);
bool opt_bool(const std::map<std::string, std::string>& opts, const std::string& key);

// Flat key = value config format: one pair per line, '#' comments and
// blank lines skipped. Returns pairs in file order.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Splits "a,b,c" into {"a","b","c"}; empty input gives an empty list.
std::vector<std::string> split_list(const std::string& csv);

}  // namespace textsimp
