#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace textsimp {

struct Sentence {
    std::vector<std::string> tokens;
    std::string source_id;
    std::optional<int> level;  // Newsela-style difficulty, 0 (hardest) .. 4 (simplest)
};

struct LsInstance {
    std::vector<std::string> tokens;
    int target_index = 0;
    std::set<std::string> gold;  // lowercase substitutions, target removed
};

struct ParallelPair {
    Sentence source;
    std::vector<Sentence> references;
};

// Per-stage sentence counts for a prepare run. Counts are non-increasing
// along the pipeline.
struct CorpusManifest {
    std::vector<std::string> sources;
    long loaded = 0;
    long after_level_filter = 0;
    long after_short_filter = 0;
    long after_dedup = 0;
    long dedup_removed = 0;
};

enum class CorpusFormat { PlainLines, LeveledArticles };

// plain-lines: one sentence per line, empty lines skipped.
// leveled-articles: blocks introduced by "#level=<0-4>" headers.
std::vector<Sentence> load_corpus(const std::string& path, CorpusFormat format);

// Keeps sentences whose level is in `allowed`; drops unleveled sentences.
std::vector<Sentence> filter_level(const std::vector<Sentence>& in, const std::set<int>& allowed);

// Keeps sentences with at least min_words letter-bearing tokens
// (min_words = 6 realizes "discard sentences with <= 5 words").
std::vector<Sentence> filter_short(const std::vector<Sentence>& in, int min_words = 6);

int count_words(const Sentence& s);

// Removes sentences whose normalized form appears in test_sentences.
// removed, when given, receives the removal count.
std::vector<Sentence> dedup_against(const std::vector<Sentence>& in,
                                    const std::set<std::string>& test_sentences,
                                    long* removed = nullptr);

// Normalized forms of every line of a test-set file, for dedup_against.
std::set<std::string> load_normalized_lines(const std::string& path);

// TSV: tokens \t target_index \t target_word \t gold1 [\t gold2 ...]
std::vector<LsInstance> load_ls_dataset(const std::string& path);

std::vector<ParallelPair> load_parallel_dataset(const std::string& src_path,
                                                const std::vector<std::string>& ref_paths);

}  // namespace textsimp
