#pragma once

#include <cstdint>
#include <vector>

namespace textsimp {

enum class MaskMode { Selective, Random };

// PureMask always writes [MASK]; Bert801010 keeps the original BERT
// 80% [MASK] / 10% random token / 10% unchanged split.
enum class Replacement { PureMask, Bert801010 };

struct MaskPolicy {
    MaskMode mode = MaskMode::Selective;
    double rate = 0.15;
    Replacement replacement = Replacement::PureMask;
    bool whole_word = false;
    uint64_t seed = 0;
};

// One MLM training instance: [CLS] ids... [SEP], with the chosen
// positions rewritten per the replacement scheme and their original ids
// recorded as targets. n is the valid sequence length; anything beyond
// it is padding and must not influence the model.
struct MaskedInstance {
    std::vector<int> input_ids;
    std::vector<int> mask_positions;  // strictly increasing, in [1, n-2]
    std::vector<int> targets;
    int n = 0;
};

struct MaskStats {
    long sentences = 0;
    long truncated = 0;
    long dropped_zero_mask = 0;
};

}  // namespace textsimp
