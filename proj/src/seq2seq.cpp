#include "textsimp/seq2seq.hpp"

#include <algorithm>
#include <cmath>

#include "textsimp/checkpoint.hpp"
#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"

namespace textsimp {

namespace {

std::string dec_lname(int layer, const char* suffix) {
    return "dec_l" + std::to_string(layer) + "_" + suffix;
}

void fill_normal(nn::Mat& m, Rng& rng, double stddev) {
    for (double& v : m.a) v = stddev * rng.normal();
}

void fill_const(nn::Mat& m, double value) {
    for (double& v : m.a) v = value;
}

void add_attention_params(ParamStore& s, const std::string& prefix, int d_model, Rng& rng) {
    const double stddev = 0.02;
    fill_normal(s.add(prefix + "q_w", d_model, d_model), rng, stddev);
    s.add(prefix + "q_b", 1, d_model);
    fill_normal(s.add(prefix + "k_w", d_model, d_model), rng, stddev);
    s.add(prefix + "k_b", 1, d_model);
    fill_normal(s.add(prefix + "v_w", d_model, d_model), rng, stddev);
    s.add(prefix + "v_b", 1, d_model);
    fill_normal(s.add(prefix + "out_w", d_model, d_model), rng, stddev);
    s.add(prefix + "out_b", 1, d_model);
}

void add_decoder_params(ParamStore& s, const ModelConfig& dec, uint64_t seed) {
    Rng rng(derive_seed(seed, "decoder"));
    const double stddev = 0.02;
    fill_normal(s.add("dec_tok_emb", dec.vocab_size, dec.d_model), rng, stddev);
    fill_normal(s.add("dec_pos_emb", dec.max_seq_len, dec.d_model), rng, stddev);
    fill_const(s.add("dec_emb_ln_gamma", 1, dec.d_model), 1.0);
    s.add("dec_emb_ln_beta", 1, dec.d_model);
    for (int l = 0; l < dec.num_layers; ++l) {
        add_attention_params(s, dec_lname(l, "self_"), dec.d_model, rng);
        fill_const(s.add(dec_lname(l, "ln1_gamma"), 1, dec.d_model), 1.0);
        s.add(dec_lname(l, "ln1_beta"), 1, dec.d_model);
        add_attention_params(s, dec_lname(l, "cross_"), dec.d_model, rng);
        fill_const(s.add(dec_lname(l, "ln2_gamma"), 1, dec.d_model), 1.0);
        s.add(dec_lname(l, "ln2_beta"), 1, dec.d_model);
        fill_normal(s.add(dec_lname(l, "ff1_w"), dec.d_model, dec.d_ff), rng, stddev);
        s.add(dec_lname(l, "ff1_b"), 1, dec.d_ff);
        fill_normal(s.add(dec_lname(l, "ff2_w"), dec.d_ff, dec.d_model), rng, stddev);
        s.add(dec_lname(l, "ff2_b"), 1, dec.d_model);
        fill_const(s.add(dec_lname(l, "ln3_gamma"), 1, dec.d_model), 1.0);
        s.add(dec_lname(l, "ln3_beta"), 1, dec.d_model);
    }
    fill_normal(s.add("dec_out_proj", dec.vocab_size, dec.d_model), rng, stddev);
}

// Multi-head attention over parameter tensors named prefix+{q,k,v,out}_{w,b}.
// Queries come from x_q, keys/values from x_kv.
nn::Node* attention(nn::Tape& tape, ParamNodes& pn, const std::string& prefix, nn::Node* x_q,
                    nn::Node* x_kv, int num_heads, const nn::Mat* mask) {
    const int d_model = x_q->val.cols;
    const int d_head = d_model / num_heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_head));

    nn::Node* q = tape.add_rowvec(tape.matmul(x_q, pn.get(prefix + "q_w")), pn.get(prefix + "q_b"));
    nn::Node* k =
        tape.add_rowvec(tape.matmul(x_kv, pn.get(prefix + "k_w")), pn.get(prefix + "k_b"));
    nn::Node* v =
        tape.add_rowvec(tape.matmul(x_kv, pn.get(prefix + "v_w")), pn.get(prefix + "v_b"));

    std::vector<nn::Node*> heads;
    heads.reserve(num_heads);
    for (int hd = 0; hd < num_heads; ++hd) {
        nn::Node* qh = tape.slice_cols(q, hd * d_head, d_head);
        nn::Node* kh = tape.slice_cols(k, hd * d_head, d_head);
        nn::Node* vh = tape.slice_cols(v, hd * d_head, d_head);
        nn::Node* scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt_dh);
        nn::Node* probs = tape.softmax_rows(scores, mask);
        heads.push_back(tape.matmul(probs, vh));
    }
    nn::Node* ctx = num_heads == 1 ? heads[0] : tape.concat_cols(heads);
    return tape.add_rowvec(tape.matmul(ctx, pn.get(prefix + "out_w")),
                           pn.get(prefix + "out_b"));
}

// Causal decoder over the target prefix, cross-attending to the encoder
// states at every layer. Post-layer-norm like the encoder.
nn::Node* decoder_forward(nn::Tape& tape, ParamNodes& pn, const ModelConfig& dec,
                          const std::vector<int>& input_ids, nn::Node* enc_out) {
    const int len = static_cast<int>(input_ids.size());
    if (len == 0) throw UsageError("decoder_forward: empty input");
    if (len > dec.max_seq_len)
        throw UsageError("decoder input length " + std::to_string(len) +
                         " exceeds output capacity " + std::to_string(dec.max_seq_len));
    for (const int id : input_ids)
        if (id < 0 || id >= dec.vocab_size)
            throw UsageError("token id " + std::to_string(id) + " outside vocabulary of size " +
                             std::to_string(dec.vocab_size));

    std::vector<int> positions(len);
    for (int i = 0; i < len; ++i) positions[i] = i;
    nn::Node* h = tape.add(tape.lookup(pn.get("dec_tok_emb"), input_ids),
                           tape.lookup(pn.get("dec_pos_emb"), positions));
    h = tape.layernorm(h, pn.get("dec_emb_ln_gamma"), pn.get("dec_emb_ln_beta"));

    nn::Mat causal(len, len);
    for (int r = 0; r < len; ++r)
        for (int c = r + 1; c < len; ++c) causal.at(r, c) = -1e30;

    for (int l = 0; l < dec.num_layers; ++l) {
        nn::Node* self = attention(tape, pn, dec_lname(l, "self_"), h, h, dec.num_heads, &causal);
        h = tape.layernorm(tape.add(h, self), pn.get(dec_lname(l, "ln1_gamma")),
                           pn.get(dec_lname(l, "ln1_beta")));
        nn::Node* cross =
            attention(tape, pn, dec_lname(l, "cross_"), h, enc_out, dec.num_heads, nullptr);
        h = tape.layernorm(tape.add(h, cross), pn.get(dec_lname(l, "ln2_gamma")),
                           pn.get(dec_lname(l, "ln2_beta")));
        nn::Node* ff = tape.gelu(tape.add_rowvec(tape.matmul(h, pn.get(dec_lname(l, "ff1_w"))),
                                                 pn.get(dec_lname(l, "ff1_b"))));
        ff = tape.add_rowvec(tape.matmul(ff, pn.get(dec_lname(l, "ff2_w"))),
                             pn.get(dec_lname(l, "ff2_b")));
        h = tape.layernorm(tape.add(h, ff), pn.get(dec_lname(l, "ln3_gamma")),
                           pn.get(dec_lname(l, "ln3_beta")));
    }
    return h;
}

std::vector<int> source_ids(const Seq2SeqParams& params, const Sentence& source) {
    std::vector<int> ids = params.vocab.encode(source.tokens);
    const int window = params.encoder_config.max_seq_len - 2;
    if (static_cast<int>(ids.size()) > window) ids.resize(window);
    std::vector<int> out;
    out.reserve(ids.size() + 2);
    out.push_back(Vocab::kCls);
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(Vocab::kSep);
    return out;
}

// Teacher-forcing view of the reference: decoder input [CLS] t1..tm and
// prediction targets t1..tm [SEP].
std::pair<std::vector<int>, std::vector<int>> target_ids(const Seq2SeqParams& params,
                                                         const Sentence& reference) {
    std::vector<int> ids = params.vocab.encode(reference.tokens);
    const int cap = params.decoder_config.max_seq_len - 1;
    if (static_cast<int>(ids.size()) > cap) ids.resize(cap);
    std::vector<int> input;
    input.reserve(ids.size() + 1);
    input.push_back(Vocab::kCls);
    input.insert(input.end(), ids.begin(), ids.end());
    std::vector<int> targets = ids;
    targets.push_back(Vocab::kSep);
    return {std::move(input), std::move(targets)};
}

struct Hypothesis {
    std::vector<int> ids;  // [CLS] t1 .. tg
    double logp = 0.0;
};

double normalized_score(double logp, int length, double alpha) {
    return logp / std::pow(static_cast<double>(length), alpha);
}

}  // namespace

void DecodeConfig::validate() const {
    if (beam_size < 1) throw UsageError("beam_size must be >= 1");
    if (max_output_len < 0) throw UsageError("max_output_len must be >= 0");
    if (length_alpha < 0.0) throw UsageError("length_alpha must be >= 0");
}

Seq2SeqParams init_seq2seq(const ModelParams& encoder, const DecoderConfig& dc) {
    Seq2SeqParams p;
    p.encoder_config = encoder.config;
    p.vocab = encoder.vocab;

    ModelConfig dec;
    dec.num_layers = dc.num_layers > 0 ? dc.num_layers : encoder.config.num_layers;
    dec.num_heads = dc.num_heads > 0 ? dc.num_heads : encoder.config.num_heads;
    dec.d_model = dc.d_model > 0 ? dc.d_model : encoder.config.d_model;
    dec.d_ff = dc.d_ff > 0 ? dc.d_ff : encoder.config.d_ff;
    dec.max_seq_len = dc.max_output_len > 0 ? dc.max_output_len : encoder.config.max_seq_len;
    dec.vocab_size = encoder.config.vocab_size;
    dec.seed = dc.seed;
    if (dec.d_model != encoder.config.d_model)
        throw UsageError("decoder d_model " + std::to_string(dec.d_model) +
                         " does not match encoder d_model " +
                         std::to_string(encoder.config.d_model));
    dec.validate();
    p.decoder_config = dec;

    for (const ParamTensor& t : encoder.store.tensors())
        p.store.add(t.name, t.value.rows, t.value.cols).a = t.value.a;
    add_decoder_params(p.store, dec, dc.seed);
    p.store.snap_f32();
    return p;
}

Seq2SeqParams init_seq2seq_from_checkpoint(const std::string& encoder_checkpoint_path,
                                           const DecoderConfig& dc) {
    return init_seq2seq(load_model_checkpoint(encoder_checkpoint_path, "mlm"), dc);
}

std::pair<nn::Node*, long> seq2seq_batch_loss(nn::Tape& tape, ParamNodes& pn,
                                              const Seq2SeqParams& params,
                                              const std::vector<const ParallelPair*>& batch) {
    nn::Node* total = nullptr;
    long predicted = 0;
    for (const ParallelPair* pair : batch) {
        if (pair->references.empty()) throw UsageError("parallel pair has no reference");
        const std::vector<int> enc_ids = source_ids(params, pair->source);
        const auto [dec_input, targets] = target_ids(params, pair->references.front());
        nn::Node* enc_out = encoder_forward(tape, pn, params.encoder_config, enc_ids,
                                            static_cast<int>(enc_ids.size()));
        nn::Node* h = decoder_forward(tape, pn, params.decoder_config, dec_input, enc_out);
        nn::Node* logits = tape.matmul_nt(h, pn.get("dec_out_proj"));
        nn::Node* nll = tape.cross_entropy_sum(logits, targets);
        total = total == nullptr ? nll : tape.add(total, nll);
        predicted += static_cast<long>(targets.size());
    }
    if (total == nullptr) throw UsageError("empty sequence batch");
    return {total, predicted};
}

Seq2SeqParams finetune(Seq2SeqParams params, const std::vector<ParallelPair>& pairs,
                       const TrainConfig& tc, LossTrace* trace) {
    if (pairs.empty()) throw UsageError("no training pairs");
    const auto fn = [&](nn::Tape& tape, ParamNodes& pn, const std::vector<int>& items,
                        int) -> std::pair<nn::Node*, long> {
        std::vector<const ParallelPair*> batch;
        batch.reserve(items.size());
        for (const int i : items) batch.push_back(&pairs[i]);
        return seq2seq_batch_loss(tape, pn, params, batch);
    };
    train_loop(params.store, static_cast<int>(pairs.size()), tc, fn, trace);
    return params;
}

double seq2seq_loss(const Seq2SeqParams& params, const std::vector<ParallelPair>& pairs) {
    if (pairs.empty()) throw UsageError("no pairs");
    nn::Tape tape;
    ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
    std::vector<const ParallelPair*> ptrs;
    ptrs.reserve(pairs.size());
    for (const ParallelPair& p : pairs) ptrs.push_back(&p);
    const auto [loss, predicted] = seq2seq_batch_loss(tape, pn, params, ptrs);
    return loss->val.at(0, 0) / static_cast<double>(predicted);
}

nn::Mat encode_sentence(const Seq2SeqParams& params, const Sentence& source) {
    const std::vector<int> enc_ids = source_ids(params, source);
    nn::Tape tape;
    ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
    return encoder_forward(tape, pn, params.encoder_config, enc_ids,
                           static_cast<int>(enc_ids.size()))
        ->val;
}

std::vector<double> next_token_distribution(const Seq2SeqParams& params,
                                            const nn::Mat& encoder_states,
                                            const std::vector<int>& prefix_ids) {
    std::vector<int> dec_input;
    dec_input.reserve(prefix_ids.size() + 1);
    dec_input.push_back(Vocab::kCls);
    dec_input.insert(dec_input.end(), prefix_ids.begin(), prefix_ids.end());

    nn::Tape tape;
    ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
    nn::Node* enc_out = tape.leaf(encoder_states);
    nn::Node* h = decoder_forward(tape, pn, params.decoder_config, dec_input, enc_out);
    nn::Node* logits = tape.matmul_nt(h, pn.get("dec_out_proj"));
    const int v = logits->val.cols;
    const int last = logits->val.rows - 1;
    std::vector<double> row(logits->val.a.begin() + static_cast<long>(last) * v,
                            logits->val.a.begin() + static_cast<long>(last + 1) * v);
    nn::softmax_row_inplace(row.data(), v);
    return row;
}

DecodeResult decode_scored(const Seq2SeqParams& params, const Sentence& source,
                           const DecodeConfig& dc) {
    dc.validate();
    const nn::Mat enc_values = encode_sentence(params, source);

    const int capacity = params.decoder_config.max_seq_len - 1;
    const int max_out =
        dc.max_output_len > 0 ? std::min(dc.max_output_len, capacity) : capacity;

    std::vector<Hypothesis> active = {{{Vocab::kCls}, 0.0}};
    bool have_finished = false;
    Hypothesis best_finished;
    double best_finished_score = 0.0;

    for (int step = 0; step < max_out && !active.empty(); ++step) {
        // (cumulative logp, parent, token), enumerated deterministically
        std::vector<std::tuple<double, int, int>> extensions;
        for (int a = 0; a < static_cast<int>(active.size()); ++a) {
            const Hypothesis& hyp = active[a];
            nn::Tape tape;
            ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
            nn::Node* enc_out = tape.leaf(enc_values);
            nn::Node* h = decoder_forward(tape, pn, params.decoder_config, hyp.ids, enc_out);
            nn::Node* logits = tape.matmul_nt(h, pn.get("dec_out_proj"));
            const int v = logits->val.cols;
            const int last = logits->val.rows - 1;
            const double* row = &logits->val.a[static_cast<size_t>(last) * v];
            const double lse = nn::log_sum_exp(row, v);
            for (int id = 0; id < v; ++id) {
                if (id == Vocab::kPad || id == Vocab::kCls || id == Vocab::kMask) continue;
                extensions.emplace_back(hyp.logp + (row[id] - lse), a, id);
            }
        }
        std::stable_sort(extensions.begin(), extensions.end(),
                         [](const auto& x, const auto& y) {
                             return std::get<0>(x) > std::get<0>(y);
                         });

        // the top beam_size extensions fill the next beam; an end-of-
        // sequence extension retires its hypothesis to the finished pool
        // and still consumes its slot, so beam size 1 is exactly greedy
        std::vector<Hypothesis> next;
        int slots = 0;
        for (const auto& [logp, parent, id] : extensions) {
            if (slots >= dc.beam_size) break;
            ++slots;
            if (id == Vocab::kSep) {
                // EOS counts toward the normalized length
                const int length = static_cast<int>(active[parent].ids.size());
                const double score = normalized_score(logp, length, dc.length_alpha);
                if (!have_finished || score > best_finished_score) {
                    best_finished = active[parent];
                    best_finished.logp = logp;
                    best_finished_score = score;
                    have_finished = true;
                }
                continue;
            }
            Hypothesis h = active[parent];
            h.ids.push_back(id);
            h.logp = logp;
            next.push_back(std::move(h));
        }
        active = std::move(next);
    }

    const auto to_result = [&](const Hypothesis& hyp, double score, bool finished) {
        DecodeResult r;
        r.score = score;
        r.finished = finished;
        r.sentence.source_id = source.source_id;
        for (size_t i = 1; i < hyp.ids.size(); ++i)
            r.sentence.tokens.push_back(params.vocab.token(hyp.ids[i]));
        return r;
    };

    double best_active_score = 0.0;
    const Hypothesis* best_active = nullptr;
    for (const Hypothesis& hyp : active) {
        const double score = normalized_score(hyp.logp, static_cast<int>(hyp.ids.size()) - 1,
                                              dc.length_alpha);
        if (best_active == nullptr || score > best_active_score) {
            best_active = &hyp;
            best_active_score = score;
        }
    }

    if (have_finished && (best_active == nullptr || best_finished_score >= best_active_score))
        return to_result(best_finished, best_finished_score, true);
    if (best_active != nullptr) return to_result(*best_active, best_active_score, false);
    return to_result(best_finished, best_finished_score, true);
}

Sentence decode(const Seq2SeqParams& params, const Sentence& source, const DecodeConfig& dc) {
    return decode_scored(params, source, dc).sentence;
}

void save_seq2seq_checkpoint(const Seq2SeqParams& params, const std::string& path) {
    CheckpointData data;
    data.kind = "seq2seq";
    for (const auto& [k, v] : params.encoder_config.to_kv()) data.header["enc_" + k] = v;
    for (const auto& [k, v] : params.decoder_config.to_kv()) data.header["dec_" + k] = v;
    data.vocab_tokens = params.vocab.tokens();
    data.arrays = params.store.tensors();
    for (ParamTensor& t : data.arrays) {
        t.value.rows = 1;
        t.value.cols = static_cast<int>(t.value.size());
    }
    save_checkpoint_data(data, path);
}

Seq2SeqParams load_seq2seq_checkpoint(const std::string& path) {
    const CheckpointData data = load_checkpoint_data(path);
    if (data.kind != "seq2seq")
        throw FormatError(path + ": checkpoint kind is '" + data.kind + "', expected 'seq2seq'");

    std::map<std::string, std::string> enc_kv, dec_kv;
    for (const auto& [k, v] : data.header) {
        if (k.rfind("enc_", 0) == 0) enc_kv[k.substr(4)] = v;
        if (k.rfind("dec_", 0) == 0) dec_kv[k.substr(4)] = v;
    }
    const ModelConfig enc_cfg = ModelConfig::from_kv(enc_kv);
    const ModelConfig dec_cfg = ModelConfig::from_kv(dec_kv);
    const Vocab vocab = Vocab::from_tokens(data.vocab_tokens);
    if (vocab.size() != enc_cfg.vocab_size)
        throw FormatError(path + ": header vocab_size " + std::to_string(enc_cfg.vocab_size) +
                          " does not match stored vocabulary of " + std::to_string(vocab.size()));

    // rebuild the layout, then fill from the stored arrays
    DecoderConfig dc;
    dc.num_layers = dec_cfg.num_layers;
    dc.num_heads = dec_cfg.num_heads;
    dc.d_model = dec_cfg.d_model;
    dc.d_ff = dec_cfg.d_ff;
    dc.max_output_len = dec_cfg.max_seq_len;
    dc.seed = dec_cfg.seed;
    ModelParams enc_fresh = init_model(enc_cfg, vocab);
    Seq2SeqParams p = init_seq2seq(enc_fresh, dc);
    if (data.arrays.size() != p.store.tensors().size())
        throw FormatError(path + ": checkpoint has " + std::to_string(data.arrays.size()) +
                          " tensors, config implies " + std::to_string(p.store.tensors().size()));
    for (size_t i = 0; i < data.arrays.size(); ++i) {
        ParamTensor& dst = p.store.tensors()[i];
        const ParamTensor& src = data.arrays[i];
        if (src.name != dst.name)
            throw FormatError(path + ": tensor " + std::to_string(i) + " is '" + src.name +
                              "', config implies '" + dst.name + "'");
        if (src.value.size() != dst.value.size())
            throw FormatError(path + ": tensor '" + src.name + "' has " +
                              std::to_string(src.value.size()) + " values, config implies " +
                              std::to_string(dst.value.size()));
        dst.value.a = src.value.a;
    }
    return p;
}

}  // namespace textsimp
