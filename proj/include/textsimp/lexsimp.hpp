#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "textsimp/corpus.hpp"
#include "textsimp/model.hpp"

namespace textsimp {

struct Candidate {
    std::string word;
    double score = 0.0;
};

// Highest score first; ties broken by lexicographic word order.
using CandidateList = std::vector<Candidate>;

struct RankWeights {
    double w_lm = 1.0;    // masked-prediction probability
    double w_freq = 1.0;  // corpus frequency
    double w_ctx = 1.0;   // in-context fit after substitution

    void validate() const;  // each >= 0, not all zero
};

// word -> count (or any Zipf-style score; only the ordering matters).
struct FreqTable {
    std::unordered_map<std::string, double> counts;
    double get(const std::string& word) const;
};

FreqTable load_freq_table(const std::string& path);  // TSV: word \t count
FreqTable count_frequencies(const std::vector<Sentence>& corpus);

// Suffix-stripping stem used to exclude the target's morphological
// variants from candidate lists (strips ing/est/es/ed/er/s, undoubles
// final consonants, drops a trailing silent e).
std::string stem(const std::string& word);

// Masks the target word, reads the model's distribution there, and keeps
// the k most probable vocabulary words after filtering out specials,
// non-letter tokens, and anything sharing the target's stem. Sentences
// longer than the model window are truncated around the target.
CandidateList generate_candidates(const ModelParams& params, const LsInstance& instance, int k);

// Re-scores candidates by w_lm|w_freq|w_ctx over rank-normalized features
// (best rank = 1, worst = 0; ties share a rank). Context fit is the
// model's probability of the candidate at the target position with the
// candidate substituted in.
CandidateList rank_substitutions(const CandidateList& cands, const LsInstance& instance,
                                 const ModelParams& params, const FreqTable& freq,
                                 const RankWeights& weights);

struct SimplifyResult {
    std::string target;
    std::string chosen;  // empty when no candidate survived filtering
    CandidateList ranked;
};

SimplifyResult simplify_word(const ModelParams& params, const LsInstance& instance, int k,
                             const FreqTable& freq, const RankWeights& weights);

// TSV rows: target \t chosen \t cand1,cand2,...
void write_ls_outputs(const std::vector<SimplifyResult>& results, const std::string& path);

// A written row read back for scoring; chosen and candidates may be empty.
struct LsOutput {
    std::string target;
    std::string chosen;
    std::vector<std::string> candidates;
};

std::vector<LsOutput> read_ls_outputs(const std::string& path);

}  // namespace textsimp
