#pragma once

#include <string>
#include <vector>

#include "textsimp/identify.hpp"
#include "textsimp/masking_types.hpp"
#include "textsimp/vocab.hpp"

namespace textsimp {

// Builds the MLM instance for one tagged sentence: [CLS] ids [SEP] with
// eligible tokens masked independently at policy.rate. Selective mode
// masks Simple-tagged tokens only; Random mode ignores tags. Over-long
// sentences are truncated (counted in stats). Returns no instance when
// nothing was masked. Randomness comes from (policy.seed, sentence_index)
// so any processing order reproduces the same corpus.
std::vector<MaskedInstance> make_instances(const TaggedSentence& tagged, const Vocab& vocab,
                                           const MaskPolicy& policy, int max_seq_len,
                                           uint64_t sentence_index, MaskStats* stats = nullptr);

// One inner list per sentence (empty when the sentence yielded nothing),
// preserving alignment with the tagged corpus for rate reporting.
std::vector<std::vector<MaskedInstance>> make_corpus_instances(
    const std::vector<TaggedSentence>& corpus, const Vocab& vocab, const MaskPolicy& policy,
    int max_seq_len, MaskStats* stats = nullptr);

std::vector<MaskedInstance> flatten_instances(const std::vector<std::vector<MaskedInstance>>& per_sentence);

struct MaskRateReport {
    double simple_mask_rate = 0.0;   // masked Simple positions / Simple tokens
    double complex_mask_rate = 0.0;  // masked Complex positions / Complex tokens
    long total_masks = 0;
    long simple_tokens = 0;
    long complex_tokens = 0;
};

// Instances must be the aligned output of make_corpus_instances on this
// corpus. Token totals count the whole corpus, so heavily truncated
// corpora understate the rates; keep sentences inside max_seq_len when
// the exact rate matters.
MaskRateReport mask_rate_report(const std::vector<std::vector<MaskedInstance>>& per_sentence,
                                const std::vector<TaggedSentence>& corpus);

// Line format: `input_ids \t mask_positions \t targets`, ids space-joined.
std::string serialize_instance(const MaskedInstance& inst);
MaskedInstance parse_instance(const std::string& line);

void write_instances(const std::vector<MaskedInstance>& instances, const std::string& path);
std::vector<MaskedInstance> read_instances(const std::string& path);

}  // namespace textsimp
