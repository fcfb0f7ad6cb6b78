#include "textsimp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "textsimp/errors.hpp"

namespace textsimp {

namespace {

constexpr char kMagic[8] = {'T', 'X', 'S', 'I', 'M', 'C', 'K', 'P'};

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const std::string& path;

    void need(size_t n, const char* what) const {
        if (pos + n > buf.size())
            throw FormatError(path + ": checkpoint truncated while reading " + std::string(what));
    }
    uint16_t u16(const char* what) {
        need(2, what);
        const uint16_t v = static_cast<uint8_t>(buf[pos]) |
                           (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    float f32(const char* what) {
        const uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string bytes(size_t n, const char* what) {
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

std::map<std::string, std::string> parse_header(const std::string& text, const std::string& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ": malformed checkpoint header line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::vector<std::string> split_space(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

void save_checkpoint_data(const CheckpointData& data, const std::string& path) {
    std::string header;
    header += "kind=" + data.kind + "\n";
    for (const auto& [k, v] : data.header) header += k + "=" + v + "\n";
    std::string vocab_line = "vocab=";
    for (size_t i = 0; i < data.vocab_tokens.size(); ++i) {
        if (i > 0) vocab_line += ' ';
        vocab_line += data.vocab_tokens[i];
    }
    header += vocab_line + "\n";

    std::string out;
    out.append(kMagic, 8);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<uint32_t>(header.size()));
    out += header;
    put_u32(out, static_cast<uint32_t>(data.arrays.size()));
    for (const ParamTensor& t : data.arrays) {
        if (t.name.size() > UINT16_MAX) throw UsageError("tensor name too long: " + t.name);
        put_u16(out, static_cast<uint16_t>(t.name.size()));
        out += t.name;
        put_u32(out, static_cast<uint32_t>(t.value.size()));
        for (const double v : t.value.a) put_f32(out, static_cast<float>(v));
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open for writing: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError("write failed: " + path);
}

CheckpointData load_checkpoint_data(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << file.rdbuf();
    const std::string buf = ss.str();

    Reader r{buf, 0, path};
    const std::string magic = r.bytes(8, "magic");
    if (std::memcmp(magic.data(), kMagic, 8) != 0)
        throw FormatError(path + ": not a checkpoint file (bad magic bytes)");
    const uint32_t version = r.u32("version");
    if (version != kCheckpointVersion)
        throw FormatError(path + ": checkpoint format version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kCheckpointVersion));
    const uint32_t header_len = r.u32("header length");
    const std::string header_text = r.bytes(header_len, "header");
    std::map<std::string, std::string> kv = parse_header(header_text, path);

    CheckpointData data;
    const auto kind_it = kv.find("kind");
    if (kind_it == kv.end()) throw FormatError(path + ": checkpoint header has no kind");
    data.kind = kind_it->second;
    kv.erase(kind_it);
    const auto vocab_it = kv.find("vocab");
    if (vocab_it != kv.end()) {
        data.vocab_tokens = split_space(vocab_it->second);
        kv.erase(vocab_it);
    }
    data.header = std::move(kv);

    const uint32_t n_arrays = r.u32("array count");
    for (uint32_t i = 0; i < n_arrays; ++i) {
        const uint16_t name_len = r.u16("tensor name length");
        ParamTensor t;
        t.name = r.bytes(name_len, "tensor name");
        const uint32_t count = r.u32("tensor size");
        t.value = nn::Mat(1, static_cast<int>(count));
        for (uint32_t j = 0; j < count; ++j)
            t.value.a[j] = static_cast<double>(r.f32("tensor data"));
        data.arrays.push_back(std::move(t));
    }
    if (r.pos != buf.size())
        throw FormatError(path + ": " + std::to_string(buf.size() - r.pos) +
                          " trailing bytes after the last tensor");
    return data;
}

void save_model_checkpoint(const ModelParams& params, const std::string& kind,
                           const std::string& path) {
    CheckpointData data;
    data.kind = kind;
    data.header = params.config.to_kv();
    data.vocab_tokens = params.vocab.tokens();
    data.arrays = params.store.tensors();
    // shapes are reconstructed from the config on load; arrays are flat
    for (ParamTensor& t : data.arrays) {
        t.value.rows = 1;
        t.value.cols = static_cast<int>(t.value.size());
    }
    save_checkpoint_data(data, path);
}

ModelParams load_model_checkpoint(const std::string& path, const std::string& expected_kind) {
    const CheckpointData data = load_checkpoint_data(path);
    if (data.kind != expected_kind)
        throw FormatError(path + ": checkpoint kind is '" + data.kind + "', expected '" +
                          expected_kind + "'");

    ModelParams p;
    p.config = ModelConfig::from_kv(data.header);
    p.vocab = Vocab::from_tokens(data.vocab_tokens);
    if (p.vocab.size() != p.config.vocab_size)
        throw FormatError(path + ": header vocab_size " + std::to_string(p.config.vocab_size) +
                          " does not match stored vocabulary of " + std::to_string(p.vocab.size()));

    // rebuild the expected tensor layout, then fill from the stored arrays
    ModelParams fresh = init_model(p.config, p.vocab);
    if (expected_kind == "tagger") {
        fresh.store.add("cls_w", 2, p.config.d_model);
        fresh.store.add("cls_b", 1, 2);
    }
    if (data.arrays.size() != fresh.store.tensors().size())
        throw FormatError(path + ": checkpoint has " + std::to_string(data.arrays.size()) +
                          " tensors, config implies " +
                          std::to_string(fresh.store.tensors().size()));
    for (size_t i = 0; i < data.arrays.size(); ++i) {
        ParamTensor& dst = fresh.store.tensors()[i];
        const ParamTensor& src = data.arrays[i];
        if (src.name != dst.name)
            throw FormatError(path + ": tensor " + std::to_string(i) + " is '" + src.name +
                              "', config implies '" + dst.name + "'");
        if (src.value.size() != dst.value.size())
            throw FormatError(path + ": tensor '" + src.name + "' has " +
                              std::to_string(src.value.size()) + " values, config implies " +
                              std::to_string(dst.value.size()));
        dst.value.a = src.value.a;
    }
    p.store = std::move(fresh.store);
    return p;
}

}  // namespace textsimp
