#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textsimp/corpus.hpp"
#include "textsimp/model.hpp"
#include "textsimp/train.hpp"

namespace textsimp {

// Encoder-decoder sentence rewriter. The encoder is copied bit-for-bit
// from a pretrained masked-LM checkpoint (its MLM head rides along,
// unused); the decoder is a freshly initialized causal transformer with
// cross-attention at every layer and its own output projection. [CLS]
// doubles as begin-of-sequence and [SEP] as end-of-sequence.

struct DecoderConfig {
    // Zero means "same as the encoder". d_model, when given, must match
    // the encoder exactly — cross-attention shares the width.
    int num_layers = 0;
    int num_heads = 0;
    int d_model = 0;
    int d_ff = 0;
    int max_output_len = 0;  // decoder position capacity
    uint64_t seed = 0;
};

struct Seq2SeqParams {
    ModelConfig encoder_config;
    ModelConfig decoder_config;  // max_seq_len holds the output capacity
    Vocab vocab;
    ParamStore store;  // encoder tensors first, then dec_-prefixed ones
};

struct DecodeConfig {
    int beam_size = 4;
    int max_output_len = 0;  // generated-token cap; 0 = decoder capacity
    double length_alpha = 1.0;  // hypothesis score = logprob / len^alpha

    void validate() const;
};

Seq2SeqParams init_seq2seq(const ModelParams& encoder, const DecoderConfig& dc);
Seq2SeqParams init_seq2seq_from_checkpoint(const std::string& encoder_checkpoint_path,
                                           const DecoderConfig& dc);

// Teacher-forced token cross-entropy of reference 0 given the source,
// summed over the batch, plus the predicted-token count. Sequences beyond
// the encoder/decoder windows are truncated.
std::pair<nn::Node*, long> seq2seq_batch_loss(nn::Tape& tape, ParamNodes& pn,
                                              const Seq2SeqParams& params,
                                              const std::vector<const ParallelPair*>& batch);

// Fine-tunes every parameter, encoder included.
Seq2SeqParams finetune(Seq2SeqParams params, const std::vector<ParallelPair>& pairs,
                       const TrainConfig& tc, LossTrace* trace = nullptr);

double seq2seq_loss(const Seq2SeqParams& params, const std::vector<ParallelPair>& pairs);

// Encoder states for a source sentence, reusable across decode steps.
nn::Mat encode_sentence(const Seq2SeqParams& params, const Sentence& source);

// Distribution over the next token given the already generated prefix
// (token ids, without the implicit leading [CLS]).
std::vector<double> next_token_distribution(const Seq2SeqParams& params,
                                            const nn::Mat& encoder_states,
                                            const std::vector<int>& prefix_ids);

struct DecodeResult {
    Sentence sentence;
    double score = 0.0;  // length-normalized log-probability
    bool finished = false;
};

// Length-normalized beam search; beam_size 1 is greedy decoding. [PAD],
// [CLS], and [MASK] are never emitted; when no hypothesis finishes within
// the cap, the best unfinished one is returned.
DecodeResult decode_scored(const Seq2SeqParams& params, const Sentence& source,
                           const DecodeConfig& dc);
Sentence decode(const Seq2SeqParams& params, const Sentence& source, const DecodeConfig& dc);

void save_seq2seq_checkpoint(const Seq2SeqParams& params, const std::string& path);
Seq2SeqParams load_seq2seq_checkpoint(const std::string& path);

}  // namespace textsimp
