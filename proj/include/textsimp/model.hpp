#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "textsimp/masking_types.hpp"
#include "textsimp/nn.hpp"
#include "textsimp/vocab.hpp"

namespace textsimp {

struct ModelConfig {
    int num_layers = 2;
    int num_heads = 2;
    int d_model = 32;
    int d_ff = 64;
    int max_seq_len = 64;
    int vocab_size = 0;
    uint64_t seed = 0;

    void validate() const;  // throws UsageError on violated constraints

    std::map<std::string, std::string> to_kv() const;
    static ModelConfig from_kv(const std::map<std::string, std::string>& kv);
    bool operator==(const ModelConfig&) const = default;
};

// Named parameter tensors in a fixed creation order (the checkpoint array
// order). Master values are kept f32-snapped: every stored double is
// exactly representable as a 32-bit float, so checkpoints round-trip
// bit-identically while the math still runs in double.
struct ParamTensor {
    std::string name;
    nn::Mat value;
};

class ParamStore {
public:
    nn::Mat& add(const std::string& name, int rows, int cols);
    nn::Mat& at(const std::string& name);
    const nn::Mat& at(const std::string& name) const;
    int index_of(const std::string& name) const;  // -1 when absent

    const std::vector<ParamTensor>& tensors() const { return tensors_; }
    std::vector<ParamTensor>& tensors() { return tensors_; }
    long total_params() const;

    void snap_f32();  // rounds every value through float

private:
    std::vector<ParamTensor> tensors_;
    std::map<std::string, int> index_;
};

struct ModelParams {
    ModelConfig config;
    Vocab vocab;
    ParamStore store;
};

// Per-tape leaf nodes for parameter tensors, memoized by name so each
// tensor appears once per tape and its gradient accumulates across every
// use in the batch.
class ParamNodes {
public:
    ParamNodes(nn::Tape& tape, ParamStore& store) : tape_(tape), store_(store) {}

    nn::Node* get(const std::string& name);

    // (store tensor index, node) for every tensor this tape touched
    const std::map<int, nn::Node*>& used() const { return used_; }

    ParamStore& store() { return store_; }

private:
    nn::Tape& tape_;
    ParamStore& store_;
    std::map<int, nn::Node*> used_;
};

// Fresh parameters: N(0, 0.02) weights, zero biases, unit layer-norm
// gains, deterministic in config.seed, f32-snapped.
ModelParams init_model(const ModelConfig& config, const Vocab& vocab);

// Bidirectional post-layer-norm transformer encoder. Returns the final
// hidden states, one row per input id. Attention keys at positions
// >= valid_len (padding) are excluded for every query.
nn::Node* encoder_forward(nn::Tape& tape, ParamNodes& pn, const ModelConfig& cfg,
                          const std::vector<int>& input_ids, int valid_len);

// Summed negative log-likelihood of the masked targets over a micro-batch,
// plus the number of masked positions it covers. Each instance gets its
// own forward pass on the shared tape.
std::pair<nn::Node*, long> mlm_batch_loss(nn::Tape& tape, ParamNodes& pn,
                                          const ModelParams& params,
                                          const std::vector<const MaskedInstance*>& batch);

// Probability distribution over the vocabulary at each masked position.
std::vector<std::vector<double>> forward_mlm(const ModelParams& params,
                                             const MaskedInstance& instance);

// Mean negative log-likelihood per masked position across the batch.
double mlm_loss(const ModelParams& params, const std::vector<MaskedInstance>& batch);

}  // namespace textsimp
