#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "textsimp/corpus.hpp"
#include "textsimp/model.hpp"
#include "textsimp/train.hpp"

namespace textsimp {

enum class ComplexityTag { Simple, Complex };

struct TaggedSentence {
    std::vector<std::string> tokens;
    std::vector<ComplexityTag> tags;

    // Enforces the blanket rule that tokens without an ASCII letter are
    // Complex, whatever the caller said.
    static TaggedSentence make(std::vector<std::string> tokens, std::vector<ComplexityTag> tags);
};

// Human-ratings word list: a word is Simple when its averaged complexity
// score is at or below the threshold.
struct Lexicon {
    std::unordered_map<std::string, double> scores;
    double threshold = 4.0;

    bool is_simple(const std::string& word) const;
};

// TSV rows `word \t score`; duplicate words are averaged.
Lexicon build_lexicon(const std::string& tsv_path, double threshold = 4.0);

TaggedSentence lexicon_identify(const Sentence& sentence, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Trainable tagger: the shared bidirectional encoder plus a two-class
// per-token head. Parameters travel in a ModelParams with the extra
// "cls_w"/"cls_b" tensors and checkpoint kind "tagger".
// ---------------------------------------------------------------------------

ModelParams init_tagger(const ModelConfig& config, const Vocab& vocab);

// Per-token binary cross-entropy over every real token (not [CLS]/[SEP]).
ModelParams train_tagger(ModelParams tagger, const std::vector<TaggedSentence>& data,
                         const TrainConfig& tc, LossTrace* trace = nullptr);

// Probability of Simple for each token of the sentence.
std::vector<double> tagger_probs(const ModelParams& tagger,
                                 const std::vector<std::string>& tokens);

// Simple iff letter-bearing AND p(Simple) >= cutoff; non-letter tokens
// are Complex no matter what the tagger says.
TaggedSentence tagger_identify(const Sentence& sentence, const ModelParams& tagger,
                               double cutoff = 0.5);

struct DisagreementReport {
    long total_words = 0;  // letter-bearing tokens examined
    long agree = 0;
    long hr_simple_nn_complex = 0;  // lexicon says Simple, tagger says Complex
    long nn_simple_hr_complex = 0;  // tagger says Simple, lexicon says Complex
};

DisagreementReport disagreement_report(const std::vector<Sentence>& sentences,
                                       const Lexicon& lexicon, const ModelParams& tagger,
                                       double cutoff = 0.5);

// Fixture format: `token/S token/C ...` per line (tag split at the last
// slash).
std::vector<TaggedSentence> load_tagged_file(const std::string& path);
void write_tagged_file(const std::vector<TaggedSentence>& sentences, const std::string& path);

}  // namespace textsimp
