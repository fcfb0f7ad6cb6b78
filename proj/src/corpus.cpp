#include "textsimp/corpus.hpp"

#include <fstream>
#include <sstream>

#include "textsimp/errors.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    return in;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

std::vector<Sentence> load_corpus(const std::string& path, CorpusFormat format) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<Sentence> out;
    std::optional<int> level;
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const std::string lineno = std::to_string(i + 1);
        if (format == CorpusFormat::LeveledArticles && !line.empty() && line[0] == '#') {
            const std::string prefix = "#level=";
            if (line.rfind(prefix, 0) != 0)
                throw FormatError(path + ":" + lineno + ": expected #level=<0-4> header, got '" + line + "'");
            const std::string value = line.substr(prefix.size());
            if (value.size() != 1 || value[0] < '0' || value[0] > '4')
                throw FormatError(path + ":" + lineno + ": level must be a digit 0-4, got '" + value + "'");
            level = value[0] - '0';
            continue;
        }
        std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (format == CorpusFormat::LeveledArticles && !level.has_value())
            throw FormatError(path + ":" + lineno + ": sentence before first #level= header");
        Sentence s;
        s.tokens = std::move(tokens);
        s.source_id = path + ":" + lineno;
        if (format == CorpusFormat::LeveledArticles) s.level = level;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sentence> filter_level(const std::vector<Sentence>& in, const std::set<int>& allowed) {
    std::vector<Sentence> out;
    for (const Sentence& s : in)
        if (s.level.has_value() && allowed.count(*s.level) > 0) out.push_back(s);
    return out;
}

int count_words(const Sentence& s) {
    int n = 0;
    for (const std::string& t : s.tokens)
        if (letter_bearing(t)) ++n;
    return n;
}

std::vector<Sentence> filter_short(const std::vector<Sentence>& in, int min_words) {
    std::vector<Sentence> out;
    for (const Sentence& s : in)
        if (count_words(s) >= min_words) out.push_back(s);
    return out;
}

std::vector<Sentence> dedup_against(const std::vector<Sentence>& in,
                                    const std::set<std::string>& test_sentences,
                                    long* removed) {
    std::vector<Sentence> out;
    long dropped = 0;
    for (const Sentence& s : in) {
        if (test_sentences.count(normalize_sentence(s.tokens)) > 0) {
            ++dropped;
        } else {
            out.push_back(s);
        }
    }
    if (removed != nullptr) *removed = dropped;
    return out;
}

std::set<std::string> load_normalized_lines(const std::string& path) {
    std::set<std::string> out;
    for (const std::string& line : read_lines(path)) {
        const std::string norm = normalize_sentence(line);
        if (!norm.empty()) out.insert(norm);
    }
    return out;
}

std::vector<LsInstance> load_ls_dataset(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<LsInstance> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string at = path + ":" + std::to_string(i + 1);
        const std::vector<std::string> fields = split_tab(lines[i]);
        if (fields.size() < 4)
            throw FormatError(at + ": expected at least 4 tab-separated fields, got " +
                              std::to_string(fields.size()));
        LsInstance inst;
        std::istringstream tok(fields[0]);
        std::string t;
        while (tok >> t) inst.tokens.push_back(t);
        if (inst.tokens.empty()) throw FormatError(at + ": empty sentence");
        try {
            inst.target_index = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw FormatError(at + ": target index is not an integer: '" + fields[1] + "'");
        }
        if (inst.target_index < 0 || inst.target_index >= static_cast<int>(inst.tokens.size()))
            throw FormatError(at + ": target index " + fields[1] + " out of range for " +
                              std::to_string(inst.tokens.size()) + " tokens");
        const std::string target_lc = lower_ascii(inst.tokens[inst.target_index]);
        if (lower_ascii(fields[2]) != target_lc)
            throw FormatError(at + ": target word '" + fields[2] + "' does not match token '" +
                              inst.tokens[inst.target_index] + "' at index " + fields[1]);
        for (size_t f = 3; f < fields.size(); ++f) {
            const std::string g = lower_ascii(fields[f]);
            if (g.empty() || g == target_lc) continue;  // loader strips the target from gold
            inst.gold.insert(g);
        }
        if (inst.gold.empty()) throw FormatError(at + ": empty gold substitution set");
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<ParallelPair> load_parallel_dataset(const std::string& src_path,
                                                const std::vector<std::string>& ref_paths) {
    if (ref_paths.empty()) throw UsageError("parallel dataset needs at least one reference file");
    const std::vector<std::string> src_lines = read_lines(src_path);
    std::vector<std::vector<std::string>> ref_lines;
    for (const std::string& p : ref_paths) {
        ref_lines.push_back(read_lines(p));
        if (ref_lines.back().size() != src_lines.size())
            throw FormatError("line count mismatch: " + src_path + " has " +
                              std::to_string(src_lines.size()) + " lines, " + p + " has " +
                              std::to_string(ref_lines.back().size()));
    }
    std::vector<ParallelPair> out;
    for (size_t i = 0; i < src_lines.size(); ++i) {
        const std::string at = ":" + std::to_string(i + 1);
        ParallelPair pair;
        pair.source.tokens = tokenize(src_lines[i]);
        pair.source.source_id = src_path + at;
        if (pair.source.tokens.empty())
            throw FormatError(src_path + at + ": empty source sentence");
        for (size_t r = 0; r < ref_paths.size(); ++r) {
            Sentence ref;
            ref.tokens = tokenize(ref_lines[r][i]);
            ref.source_id = ref_paths[r] + at;
            if (ref.tokens.empty())
                throw FormatError(ref_paths[r] + at + ": empty reference sentence");
            pair.references.push_back(std::move(ref));
        }
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace textsimp
