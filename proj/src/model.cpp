#include "textsimp/model.hpp"

#include <cmath>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"

namespace textsimp {

void ModelConfig::validate() const {
    if (num_layers < 1) throw UsageError("num_layers must be >= 1");
    if (num_heads < 1) throw UsageError("num_heads must be >= 1");
    if (d_model < 1 || d_ff < 1) throw UsageError("d_model and d_ff must be >= 1");
    if (d_model % num_heads != 0)
        throw UsageError("d_model " + std::to_string(d_model) + " is not divisible by num_heads " +
                         std::to_string(num_heads));
    if (max_seq_len < 8) throw UsageError("max_seq_len must be >= 8");
    if (vocab_size < Vocab::kNumSpecials)
        throw UsageError("vocab_size must cover the special symbols");
}

std::map<std::string, std::string> ModelConfig::to_kv() const {
    return {
        {"num_layers", std::to_string(num_layers)},
        {"num_heads", std::to_string(num_heads)},
        {"d_model", std::to_string(d_model)},
        {"d_ff", std::to_string(d_ff)},
        {"max_seq_len", std::to_string(max_seq_len)},
        {"vocab_size", std::to_string(vocab_size)},
        {"seed", std::to_string(seed)},
    };
}

ModelConfig ModelConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ModelConfig c;
    const auto want = [&kv](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("checkpoint header is missing key: " + key);
        return it->second;
    };
    try {
        c.num_layers = std::stoi(want("num_layers"));
        c.num_heads = std::stoi(want("num_heads"));
        c.d_model = std::stoi(want("d_model"));
        c.d_ff = std::stoi(want("d_ff"));
        c.max_seq_len = std::stoi(want("max_seq_len"));
        c.vocab_size = std::stoi(want("vocab_size"));
        c.seed = std::stoull(want("seed"));
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad numeric value in checkpoint header: ") + e.what());
    }
    return c;
}

nn::Mat& ParamStore::add(const std::string& name, int rows, int cols) {
    if (index_.count(name) > 0) throw UsageError("duplicate parameter tensor: " + name);
    index_[name] = static_cast<int>(tensors_.size());
    tensors_.push_back({name, nn::Mat(rows, cols)});
    return tensors_.back().value;
}

nn::Mat& ParamStore::at(const std::string& name) {
    const int i = index_of(name);
    if (i < 0) throw UsageError("unknown parameter tensor: " + name);
    return tensors_[i].value;
}

const nn::Mat& ParamStore::at(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("unknown parameter tensor: " + name);
    return tensors_[it->second].value;
}

int ParamStore::index_of(const std::string& name) const {
    const auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

long ParamStore::total_params() const {
    long n = 0;
    for (const ParamTensor& t : tensors_) n += static_cast<long>(t.value.size());
    return n;
}

void ParamStore::snap_f32() {
    for (ParamTensor& t : tensors_)
        for (double& v : t.value.a) v = static_cast<double>(static_cast<float>(v));
}

nn::Node* ParamNodes::get(const std::string& name) {
    const int i = store_.index_of(name);
    if (i < 0) throw UsageError("unknown parameter tensor: " + name);
    const auto it = used_.find(i);
    if (it != used_.end()) return it->second;
    nn::Node* node = tape_.leaf(store_.tensors()[i].value);
    used_[i] = node;
    return node;
}

namespace {

void fill_normal(nn::Mat& m, Rng& rng, double stddev) {
    for (double& v : m.a) v = stddev * rng.normal();
}

void fill_const(nn::Mat& m, double value) {
    for (double& v : m.a) v = value;
}

std::string lname(int layer, const char* suffix) {
    return "l" + std::to_string(layer) + "_" + suffix;
}

}  // namespace

ModelParams init_model(const ModelConfig& config, const Vocab& vocab) {
    ModelConfig cfg = config;
    cfg.vocab_size = vocab.size();
    cfg.validate();

    ModelParams p;
    p.config = cfg;
    p.vocab = vocab;
    ParamStore& s = p.store;

    Rng rng(derive_seed(cfg.seed, "init"));
    const double stddev = 0.02;

    fill_normal(s.add("tok_emb", cfg.vocab_size, cfg.d_model), rng, stddev);
    fill_normal(s.add("pos_emb", cfg.max_seq_len, cfg.d_model), rng, stddev);
    fill_const(s.add("emb_ln_gamma", 1, cfg.d_model), 1.0);
    s.add("emb_ln_beta", 1, cfg.d_model);

    for (int l = 0; l < cfg.num_layers; ++l) {
        fill_normal(s.add(lname(l, "q_w"), cfg.d_model, cfg.d_model), rng, stddev);
        s.add(lname(l, "q_b"), 1, cfg.d_model);
        fill_normal(s.add(lname(l, "k_w"), cfg.d_model, cfg.d_model), rng, stddev);
        s.add(lname(l, "k_b"), 1, cfg.d_model);
        fill_normal(s.add(lname(l, "v_w"), cfg.d_model, cfg.d_model), rng, stddev);
        s.add(lname(l, "v_b"), 1, cfg.d_model);
        fill_normal(s.add(lname(l, "attn_out_w"), cfg.d_model, cfg.d_model), rng, stddev);
        s.add(lname(l, "attn_out_b"), 1, cfg.d_model);
        fill_const(s.add(lname(l, "ln1_gamma"), 1, cfg.d_model), 1.0);
        s.add(lname(l, "ln1_beta"), 1, cfg.d_model);
        fill_normal(s.add(lname(l, "ff1_w"), cfg.d_model, cfg.d_ff), rng, stddev);
        s.add(lname(l, "ff1_b"), 1, cfg.d_ff);
        fill_normal(s.add(lname(l, "ff2_w"), cfg.d_ff, cfg.d_model), rng, stddev);
        s.add(lname(l, "ff2_b"), 1, cfg.d_model);
        fill_const(s.add(lname(l, "ln2_gamma"), 1, cfg.d_model), 1.0);
        s.add(lname(l, "ln2_beta"), 1, cfg.d_model);
    }

    // rows are the per-token output vectors; logits = h . out_proj^T
    fill_normal(s.add("out_proj", cfg.vocab_size, cfg.d_model), rng, stddev);

    s.snap_f32();
    return p;
}

nn::Node* encoder_forward(nn::Tape& tape, ParamNodes& pn, const ModelConfig& cfg,
                          const std::vector<int>& input_ids, int valid_len) {
    const int len = static_cast<int>(input_ids.size());
    if (len == 0) throw UsageError("encoder_forward: empty input");
    if (len > cfg.max_seq_len)
        throw UsageError("sequence length " + std::to_string(len) + " exceeds max_seq_len " +
                         std::to_string(cfg.max_seq_len));
    if (valid_len < 1 || valid_len > len) throw UsageError("encoder_forward: bad valid_len");
    for (const int id : input_ids)
        if (id < 0 || id >= cfg.vocab_size)
            throw UsageError("token id " + std::to_string(id) + " outside vocabulary of size " +
                             std::to_string(cfg.vocab_size));

    std::vector<int> positions(len);
    for (int i = 0; i < len; ++i) positions[i] = i;

    nn::Node* h = tape.add(tape.lookup(pn.get("tok_emb"), input_ids),
                           tape.lookup(pn.get("pos_emb"), positions));
    h = tape.layernorm(h, pn.get("emb_ln_gamma"), pn.get("emb_ln_beta"));

    // padding keys are unreachable for every query
    nn::Mat key_mask(len, len);
    for (int r = 0; r < len; ++r)
        for (int c = valid_len; c < len; ++c) key_mask.at(r, c) = -1e30;
    const bool any_pad = valid_len < len;

    const int d_head = cfg.d_model / cfg.num_heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_head));

    for (int l = 0; l < cfg.num_layers; ++l) {
        nn::Node* q = tape.add_rowvec(tape.matmul(h, pn.get(lname(l, "q_w"))), pn.get(lname(l, "q_b")));
        nn::Node* k = tape.add_rowvec(tape.matmul(h, pn.get(lname(l, "k_w"))), pn.get(lname(l, "k_b")));
        nn::Node* v = tape.add_rowvec(tape.matmul(h, pn.get(lname(l, "v_w"))), pn.get(lname(l, "v_b")));

        std::vector<nn::Node*> heads;
        heads.reserve(cfg.num_heads);
        for (int hd = 0; hd < cfg.num_heads; ++hd) {
            nn::Node* qh = tape.slice_cols(q, hd * d_head, d_head);
            nn::Node* kh = tape.slice_cols(k, hd * d_head, d_head);
            nn::Node* vh = tape.slice_cols(v, hd * d_head, d_head);
            nn::Node* scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt_dh);
            nn::Node* probs = tape.softmax_rows(scores, any_pad ? &key_mask : nullptr);
            heads.push_back(tape.matmul(probs, vh));
        }
        nn::Node* ctx = cfg.num_heads == 1 ? heads[0] : tape.concat_cols(heads);
        nn::Node* attn_out = tape.add_rowvec(tape.matmul(ctx, pn.get(lname(l, "attn_out_w"))),
                                             pn.get(lname(l, "attn_out_b")));
        h = tape.layernorm(tape.add(h, attn_out), pn.get(lname(l, "ln1_gamma")),
                           pn.get(lname(l, "ln1_beta")));

        nn::Node* ff = tape.gelu(
            tape.add_rowvec(tape.matmul(h, pn.get(lname(l, "ff1_w"))), pn.get(lname(l, "ff1_b"))));
        ff = tape.add_rowvec(tape.matmul(ff, pn.get(lname(l, "ff2_w"))), pn.get(lname(l, "ff2_b")));
        h = tape.layernorm(tape.add(h, ff), pn.get(lname(l, "ln2_gamma")),
                           pn.get(lname(l, "ln2_beta")));
    }
    return h;
}

std::pair<nn::Node*, long> mlm_batch_loss(nn::Tape& tape, ParamNodes& pn,
                                          const ModelParams& params,
                                          const std::vector<const MaskedInstance*>& batch) {
    nn::Node* total = nullptr;
    long positions = 0;
    for (const MaskedInstance* inst : batch) {
        if (inst->mask_positions.empty()) continue;
        nn::Node* h = encoder_forward(tape, pn, params.config, inst->input_ids, inst->n);
        nn::Node* rows = tape.select_rows(h, inst->mask_positions);
        nn::Node* logits = tape.matmul_nt(rows, pn.get("out_proj"));
        nn::Node* nll = tape.cross_entropy_sum(logits, inst->targets);
        total = total == nullptr ? nll : tape.add(total, nll);
        positions += static_cast<long>(inst->targets.size());
    }
    if (total == nullptr) throw UsageError("batch has no masked positions");
    return {total, positions};
}

std::vector<std::vector<double>> forward_mlm(const ModelParams& params,
                                             const MaskedInstance& instance) {
    if (instance.mask_positions.empty()) throw UsageError("instance has no masked positions");
    nn::Tape tape;
    // const_cast is safe: leaf() copies values and inference never writes back
    ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
    nn::Node* h = encoder_forward(tape, pn, params.config, instance.input_ids, instance.n);
    nn::Node* rows = tape.select_rows(h, instance.mask_positions);
    nn::Node* logits = tape.matmul_nt(rows, pn.get("out_proj"));

    std::vector<std::vector<double>> dists;
    dists.reserve(instance.mask_positions.size());
    const int v = logits->val.cols;
    for (int r = 0; r < logits->val.rows; ++r) {
        std::vector<double> row(logits->val.a.begin() + static_cast<long>(r) * v,
                                logits->val.a.begin() + static_cast<long>(r + 1) * v);
        nn::softmax_row_inplace(row.data(), v);
        dists.push_back(std::move(row));
    }
    return dists;
}

double mlm_loss(const ModelParams& params, const std::vector<MaskedInstance>& batch) {
    if (batch.empty()) throw UsageError("mlm_loss: empty batch");
    nn::Tape tape;
    ParamNodes pn(tape, const_cast<ParamStore&>(params.store));
    std::vector<const MaskedInstance*> ptrs;
    ptrs.reserve(batch.size());
    for (const MaskedInstance& m : batch) ptrs.push_back(&m);
    const auto [loss, positions] = mlm_batch_loss(tape, pn, params, ptrs);
    return loss->val.at(0, 0) / static_cast<double>(positions);
}

}  // namespace textsimp
