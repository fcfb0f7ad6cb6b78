#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

namespace textsimp {

struct SgScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct PipelineScore {
    double precision = 0.0;
    double accuracy = 0.0;
};

struct SariBreakdown {
    // Corpus-averaged components per n-gram order (index 0 holds n=1).
    std::array<double, 4> add_f1{};
    std::array<double, 4> keep_f1{};
    std::array<double, 4> del_precision{};
    double total = 0.0;  // 100 * mean over n of (add + keep + del) / 3
};

// Micro-averaged substitution-generation P/R/F1:
//   P = sum |cands_i ∩ gold_i| / sum |cands_i|
//   R = sum |cands_i ∩ gold_i| / sum |gold_i|
// Candidates and gold are lowercase words.
SgScore sg_prf(const std::vector<std::vector<std::string>>& candidates,
               const std::vector<std::set<std::string>>& gold);

// Full-pipeline precision/accuracy. chosen[i] empty means the system made
// no substitution for instance i.
//   precision = #(changed and chosen in gold) / #changed
//   accuracy  = #(chosen in gold and chosen != target) / #instances
PipelineScore pipeline_pa(const std::vector<std::string>& chosen,
                          const std::vector<std::set<std::string>>& gold,
                          const std::vector<std::string>& targets);

// SARI over lowercased token n-grams, n = 1..4, with components averaged
// over the corpus. Conventions (pinned so golden tests are exact):
//  - add: set semantics. A = output n-grams absent from the source,
//    G = n-grams of any reference absent from the source; add-P = |A∩G|/|A|,
//    add-R = |A∩G|/|G|, F1 harmonic; zero denominators score 0.
//  - keep: fractional counts. kept(g) = min(src(g), out(g)); refkeep(g) =
//    mean over references of min(src(g), ref_j(g)); keep-P =
//    sum min(kept, refkeep) / sum kept, keep-R = same numerator / sum
//    refkeep; zero denominators score 0.
//  - delete: del(g) = max(src(g) - out(g), 0); refdel(g) = mean over
//    references of max(src(g) - ref_j(g), 0); del-P =
//    sum min(del, refdel) / sum del. When the system deletes nothing the
//    score is 1 if the references also delete nothing, else 0.
SariBreakdown sari(const std::vector<std::vector<std::string>>& sources,
                   const std::vector<std::vector<std::string>>& outputs,
                   const std::vector<std::vector<std::vector<std::string>>>& references);

// Counts maximal vowel groups (aeiouy), subtracting a terminal silent 'e'
// after a consonant unless the word ends in consonant+"le"; minimum 1.
int count_syllables(const std::string& word);

// Corpus-level Flesch-Kincaid grade:
//   0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
// where words are letter-bearing tokens.
double fkgl(const std::vector<std::vector<std::string>>& outputs);

}  // namespace textsimp
