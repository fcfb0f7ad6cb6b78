#include "textsimp/masking.hpp"

#include <fstream>
#include <sstream>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"

namespace textsimp {

std::vector<MaskedInstance> make_instances(const TaggedSentence& tagged, const Vocab& vocab,
                                           const MaskPolicy& policy, int max_seq_len,
                                           uint64_t sentence_index, MaskStats* stats) {
    if (policy.rate < 0.0 || policy.rate > 1.0)
        throw UsageError("mask rate must lie in [0,1], got " + std::to_string(policy.rate));
    if (max_seq_len < 8) throw UsageError("max_seq_len must be >= 8");
    if (tagged.tokens.size() != tagged.tags.size())
        throw UsageError("tagged sentence with mismatched tokens and tags");

    if (stats != nullptr) ++stats->sentences;

    const int kept = std::min<int>(static_cast<int>(tagged.tokens.size()), max_seq_len - 2);
    if (stats != nullptr && kept < static_cast<int>(tagged.tokens.size())) ++stats->truncated;
    if (kept == 0) return {};

    MaskedInstance inst;
    inst.input_ids.reserve(kept + 2);
    inst.input_ids.push_back(Vocab::kCls);
    for (int i = 0; i < kept; ++i) inst.input_ids.push_back(vocab.id(tagged.tokens[i]));
    inst.input_ids.push_back(Vocab::kSep);
    inst.n = kept + 2;

    Rng rng(derive_seed(policy.seed, "mask", sentence_index));

    // Word-level tokens mean each "whole word" group is one position; the
    // loop is still written group-wise so the whole_word contract holds if
    // multi-piece words ever appear.
    for (int i = 0; i < kept; ++i) {
        const bool eligible =
            policy.mode == MaskMode::Random || tagged.tags[i] == ComplexityTag::Simple;
        if (!eligible) continue;
        if (rng.uniform() >= policy.rate) continue;

        const int pos = i + 1;  // shift past [CLS]
        const int original = inst.input_ids[pos];
        int replacement = Vocab::kMask;
        if (policy.replacement == Replacement::Bert801010) {
            const double r = rng.uniform();
            if (r < 0.8) {
                replacement = Vocab::kMask;
            } else if (r < 0.9 && vocab.size() > Vocab::kNumSpecials) {
                replacement = Vocab::kNumSpecials +
                              static_cast<int>(rng.below(vocab.size() - Vocab::kNumSpecials));
            } else {
                replacement = original;
            }
        }
        inst.input_ids[pos] = replacement;
        inst.mask_positions.push_back(pos);
        inst.targets.push_back(original);
    }

    if (inst.mask_positions.empty()) {
        if (stats != nullptr) ++stats->dropped_zero_mask;
        return {};
    }
    return {std::move(inst)};
}

std::vector<std::vector<MaskedInstance>> make_corpus_instances(
    const std::vector<TaggedSentence>& corpus, const Vocab& vocab, const MaskPolicy& policy,
    int max_seq_len, MaskStats* stats) {
    std::vector<std::vector<MaskedInstance>> out;
    out.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i)
        out.push_back(make_instances(corpus[i], vocab, policy, max_seq_len, i, stats));
    return out;
}

std::vector<MaskedInstance> flatten_instances(
    const std::vector<std::vector<MaskedInstance>>& per_sentence) {
    std::vector<MaskedInstance> out;
    for (const auto& group : per_sentence)
        for (const MaskedInstance& inst : group) out.push_back(inst);
    return out;
}

MaskRateReport mask_rate_report(const std::vector<std::vector<MaskedInstance>>& per_sentence,
                                const std::vector<TaggedSentence>& corpus) {
    if (per_sentence.size() != corpus.size())
        throw UsageError("instance groups are not aligned with the corpus");

    MaskRateReport r;
    long simple_masked = 0, complex_masked = 0;
    for (size_t s = 0; s < corpus.size(); ++s) {
        for (const ComplexityTag tag : corpus[s].tags)
            (tag == ComplexityTag::Simple ? r.simple_tokens : r.complex_tokens) += 1;
        for (const MaskedInstance& inst : per_sentence[s]) {
            for (const int pos : inst.mask_positions) {
                const size_t token_index = static_cast<size_t>(pos) - 1;
                if (token_index >= corpus[s].tags.size())
                    throw UsageError("mask position outside its sentence");
                ++r.total_masks;
                (corpus[s].tags[token_index] == ComplexityTag::Simple ? simple_masked
                                                                      : complex_masked) += 1;
            }
        }
    }
    if (r.simple_tokens > 0)
        r.simple_mask_rate = static_cast<double>(simple_masked) / static_cast<double>(r.simple_tokens);
    if (r.complex_tokens > 0)
        r.complex_mask_rate =
            static_cast<double>(complex_masked) / static_cast<double>(r.complex_tokens);
    return r;
}

namespace {

void append_ids(std::string& out, const std::vector<int>& ids) {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(ids[i]);
    }
}

std::vector<int> parse_ids(const std::string& field, const std::string& context) {
    std::vector<int> out;
    std::istringstream in(field);
    std::string w;
    while (in >> w) {
        try {
            out.push_back(std::stoi(w));
        } catch (const std::exception&) {
            throw FormatError(context + ": not an integer: '" + w + "'");
        }
    }
    return out;
}

}  // namespace

std::string serialize_instance(const MaskedInstance& inst) {
    std::string out;
    append_ids(out, inst.input_ids);
    out += '\t';
    append_ids(out, inst.mask_positions);
    out += '\t';
    append_ids(out, inst.targets);
    return out;
}

MaskedInstance parse_instance(const std::string& line) {
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
        throw FormatError("instance line needs 3 tab-separated fields: '" + line + "'");
    MaskedInstance inst;
    inst.input_ids = parse_ids(line.substr(0, t1), "input ids");
    inst.mask_positions = parse_ids(line.substr(t1 + 1, t2 - t1 - 1), "mask positions");
    inst.targets = parse_ids(line.substr(t2 + 1), "targets");
    inst.n = static_cast<int>(inst.input_ids.size());
    if (inst.mask_positions.size() != inst.targets.size())
        throw FormatError("instance line with " + std::to_string(inst.mask_positions.size()) +
                          " mask positions but " + std::to_string(inst.targets.size()) +
                          " targets");
    for (size_t i = 0; i < inst.mask_positions.size(); ++i) {
        const int p = inst.mask_positions[i];
        if (p < 1 || p > inst.n - 2)
            throw FormatError("mask position " + std::to_string(p) + " outside [1, n-2]");
        if (i > 0 && p <= inst.mask_positions[i - 1])
            throw FormatError("mask positions are not strictly increasing");
    }
    return inst;
}

void write_instances(const std::vector<MaskedInstance>& instances, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const MaskedInstance& inst : instances) out << serialize_instance(inst) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<MaskedInstance> read_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<MaskedInstance> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(parse_instance(line));
    }
    return out;
}

}  // namespace textsimp
