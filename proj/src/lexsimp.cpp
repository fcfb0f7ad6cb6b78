#include "textsimp/lexsimp.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "textsimp/errors.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(const std::string& w, const char* suffix) {
    const std::size_t n = std::char_traits<char>::length(suffix);
    return w.size() >= n && w.compare(w.size() - n, n, suffix) == 0;
}

// Drop one of a doubled final consonant ("runn" -> "run"), keeping the
// conventional l/s/z exceptions ("fall", "pass", "buzz").
void undouble(std::string& w) {
    if (w.size() < 2) return;
    const char c = w.back();
    if (c != w[w.size() - 2]) return;
    if (!std::isalpha(static_cast<unsigned char>(c)) || is_vowel(c)) return;
    if (c == 'l' || c == 's' || c == 'z') return;
    w.pop_back();
}

// "es" is treated as a plural suffix only after a sibilant (box, pass,
// church); otherwise the bare "s" rule applies so "cares" stems to "care".
bool sibilant_before_es(const std::string& w) {
    const char c = w[w.size() - 3];
    if (c == 's' || c == 'x' || c == 'z') return true;
    return c == 'h' && w.size() >= 4 && (w[w.size() - 4] == 'c' || w[w.size() - 4] == 's');
}

void strip_suffix(std::string& w) {
    if (ends_with(w, "ing") && w.size() >= 5) {
        w.resize(w.size() - 3);
        undouble(w);
    } else if (ends_with(w, "est") && w.size() >= 5) {
        w.resize(w.size() - 3);
        undouble(w);
    } else if (ends_with(w, "es") && w.size() >= 4 && sibilant_before_es(w)) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ed") && w.size() >= 4) {
        w.resize(w.size() - 2);
        undouble(w);
    } else if (ends_with(w, "er") && w.size() >= 4) {
        w.resize(w.size() - 2);
        undouble(w);
    } else if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() >= 3) {
        w.resize(w.size() - 1);
    }
}

// The token window the model actually sees: at most max_seq_len - 2
// source tokens, centered on the target when truncation is needed.
std::pair<int, int> window_of(int n_tokens, int target, int max_seq_len) {
    const int window = max_seq_len - 2;
    if (n_tokens <= window) return {0, n_tokens};
    int start = target - window / 2;
    start = std::max(0, std::min(start, n_tokens - window));
    return {start, window};
}

// Model distribution at `position` (0-based within the token list) with
// the given ids substituted in.
std::vector<double> distribution_at(const ModelParams& params, const std::vector<int>& ids,
                                    int start, int len, int position) {
    MaskedInstance inst;
    inst.input_ids.reserve(len + 2);
    inst.input_ids.push_back(Vocab::kCls);
    inst.input_ids.insert(inst.input_ids.end(), ids.begin() + start, ids.begin() + start + len);
    inst.input_ids.push_back(Vocab::kSep);
    inst.mask_positions.push_back(position - start + 1);
    inst.targets.push_back(ids[position]);
    inst.n = len + 2;
    return forward_mlm(params, inst)[0];
}

// Competition-ranked normalization: best raw value scores 1, worst 0,
// ties share the rank of their first member.
std::vector<double> rank_norm(const std::vector<double>& raw) {
    const std::size_t k = raw.size();
    std::vector<double> norm(k, 1.0);
    if (k <= 1) return norm;
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
    std::size_t rank = 0;
    for (std::size_t p = 0; p < k; ++p) {
        if (p > 0 && raw[order[p]] != raw[order[p - 1]]) rank = p;
        norm[order[p]] = 1.0 - static_cast<double>(rank) / static_cast<double>(k - 1);
    }
    return norm;
}

void check_instance(const LsInstance& instance) {
    if (instance.tokens.empty() || instance.target_index < 0 ||
        instance.target_index >= static_cast<int>(instance.tokens.size()))
        throw UsageError("instance target index out of range");
}

}  // namespace

void RankWeights::validate() const {
    if (w_lm < 0 || w_freq < 0 || w_ctx < 0) throw UsageError("ranking weights must be >= 0");
    if (w_lm == 0 && w_freq == 0 && w_ctx == 0)
        throw UsageError("at least one ranking weight must be positive");
}

double FreqTable::get(const std::string& word) const {
    const auto it = counts.find(lower_ascii(word));
    return it == counts.end() ? 0.0 : it->second;
}

FreqTable load_freq_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    FreqTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected word \\t count");
        double count = 0.0;
        try {
            std::size_t used = 0;
            count = std::stod(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": bad count");
        }
        table.counts[lower_ascii(line.substr(0, tab))] += count;
    }
    return table;
}

FreqTable count_frequencies(const std::vector<Sentence>& corpus) {
    FreqTable table;
    for (const Sentence& s : corpus)
        for (const std::string& tok : s.tokens) table.counts[lower_ascii(tok)] += 1.0;
    return table;
}

std::string stem(const std::string& word) {
    std::string w = lower_ascii(word);
    strip_suffix(w);
    if (w.size() >= 3 && w.back() == 'e') w.pop_back();
    return w;
}

CandidateList generate_candidates(const ModelParams& params, const LsInstance& instance,
                                  int k) {
    if (k < 1) throw UsageError("candidate count must be >= 1");
    check_instance(instance);
    const Vocab& vocab = params.vocab;

    std::vector<int> ids = vocab.encode(instance.tokens);
    const auto [start, len] =
        window_of(static_cast<int>(ids.size()), instance.target_index, params.config.max_seq_len);
    const int saved = ids[instance.target_index];
    ids[instance.target_index] = Vocab::kMask;
    std::vector<double> dist = distribution_at(params, ids, start, len, instance.target_index);
    ids[instance.target_index] = saved;

    const std::string target_stem = stem(instance.tokens[instance.target_index]);
    CandidateList all;
    for (int id = Vocab::kNumSpecials; id < vocab.size(); ++id) {
        const std::string& w = vocab.token(id);
        if (!letter_bearing(w)) continue;
        if (stem(w) == target_stem) continue;
        all.push_back({w, dist[id]});
    }
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.word < b.word;
    });
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

CandidateList rank_substitutions(const CandidateList& cands, const LsInstance& instance,
                                 const ModelParams& params, const FreqTable& freq,
                                 const RankWeights& weights) {
    weights.validate();
    check_instance(instance);
    if (cands.empty()) return {};

    const std::size_t k = cands.size();
    std::vector<double> raw_lm(k), raw_freq(k), raw_ctx(k);
    std::vector<int> ids = params.vocab.encode(instance.tokens);
    const auto [start, len] =
        window_of(static_cast<int>(ids.size()), instance.target_index, params.config.max_seq_len);
    for (std::size_t i = 0; i < k; ++i) {
        raw_lm[i] = cands[i].score;
        raw_freq[i] = freq.get(cands[i].word);
        const int cand_id = params.vocab.id(cands[i].word);
        const int saved = ids[instance.target_index];
        ids[instance.target_index] = cand_id;
        raw_ctx[i] =
            distribution_at(params, ids, start, len, instance.target_index)[cand_id];
        ids[instance.target_index] = saved;
    }

    const std::vector<double> n_lm = rank_norm(raw_lm);
    const std::vector<double> n_freq = rank_norm(raw_freq);
    const std::vector<double> n_ctx = rank_norm(raw_ctx);
    CandidateList ranked(k);
    for (std::size_t i = 0; i < k; ++i) {
        ranked[i].word = cands[i].word;
        ranked[i].score =
            weights.w_lm * n_lm[i] + weights.w_freq * n_freq[i] + weights.w_ctx * n_ctx[i];
    }
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.word < b.word;
    });
    return ranked;
}

SimplifyResult simplify_word(const ModelParams& params, const LsInstance& instance, int k,
                             const FreqTable& freq, const RankWeights& weights) {
    SimplifyResult result;
    result.target = instance.tokens[instance.target_index];
    result.ranked =
        rank_substitutions(generate_candidates(params, instance, k), instance, params, freq,
                           weights);
    if (!result.ranked.empty()) result.chosen = result.ranked.front().word;
    return result;
}

void write_ls_outputs(const std::vector<SimplifyResult>& results, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const SimplifyResult& r : results) {
        out << r.target << '\t' << r.chosen << '\t';
        for (std::size_t i = 0; i < r.ranked.size(); ++i) {
            if (i) out << ',';
            out << r.ranked[i].word;
        }
        out << '\n';
    }
}

std::vector<LsOutput> read_ls_outputs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<LsOutput> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = [&] { return path + ":" + std::to_string(line_no); };
        const std::size_t tab1 = line.find('\t');
        if (tab1 == std::string::npos) throw FormatError(where() + ": expected 3 tab-separated fields");
        const std::size_t tab2 = line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) throw FormatError(where() + ": expected 3 tab-separated fields");
        if (line.find('\t', tab2 + 1) != std::string::npos)
            throw FormatError(where() + ": expected 3 tab-separated fields");
        LsOutput row;
        row.target = line.substr(0, tab1);
        row.chosen = line.substr(tab1 + 1, tab2 - tab1 - 1);
        if (row.target.empty()) throw FormatError(where() + ": empty target");
        const std::string cands = line.substr(tab2 + 1);
        std::size_t start = 0;
        while (start < cands.size()) {
            std::size_t comma = cands.find(',', start);
            if (comma == std::string::npos) comma = cands.size();
            if (comma == start) throw FormatError(where() + ": empty candidate entry");
            row.candidates.push_back(cands.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace textsimp
