#include "textsimp/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"

namespace textsimp {

using nlohmann::json;

std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    std::ostringstream hex;
    hex << std::hex << std::setfill('0') << std::setw(16) << fnv1a64(bytes);
    return hex.str();
}

void Manifest::record_input(const std::string& path) { inputs[path] = hash_file_hex(path); }

void Manifest::write(const std::string& path) const {
    json j;
    j["command"] = command;
    j["version"] = version;
    j["seed"] = seed;
    j["options"] = options;
    j["inputs"] = inputs;
    j["stats"] = stats;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing manifest: " + path);
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }
    Manifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.options = j.at("options").get<std::map<std::string, std::string>>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.stats = j.at("stats").get<std::map<std::string, long>>();
    } catch (const json::exception& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }
    return m;
}

}  // namespace textsimp
