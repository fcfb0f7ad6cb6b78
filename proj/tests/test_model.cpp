#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "textsimp/errors.hpp"
#include "textsimp/model.hpp"
#include "textsimp/vocab.hpp"

using namespace textsimp;

namespace {

Vocab tiny_vocab() {
    return Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a", "b"});
}

ModelConfig tiny_config(uint64_t seed = 123) {
    ModelConfig c;
    c.num_layers = 1;
    c.num_heads = 2;
    c.d_model = 4;
    c.d_ff = 6;
    c.max_seq_len = 8;
    c.seed = seed;
    return c;
}

MaskedInstance tiny_instance() {
    MaskedInstance inst;
    inst.input_ids = {Vocab::kCls, 5, Vocab::kMask, 5, Vocab::kSep};
    inst.mask_positions = {2};
    inst.targets = {6};
    inst.n = 5;
    return inst;
}

bool stores_equal(const ParamStore& a, const ParamStore& b) {
    if (a.tensors().size() != b.tensors().size()) return false;
    for (size_t i = 0; i < a.tensors().size(); ++i) {
        if (a.tensors()[i].name != b.tensors()[i].name) return false;
        if (a.tensors()[i].value.a != b.tensors()[i].value.a) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Reference forward pass: the same architecture recomputed with plain
// loops over plain vectors, reading the tensors straight from the store.
// ---------------------------------------------------------------------------

using Vec = std::vector<double>;
using Grid = std::vector<Vec>;

Grid grid_of(const nn::Mat& m) {
    Grid g(m.rows, Vec(m.cols));
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) g[r][c] = m.at(r, c);
    return g;
}

Grid ref_linear(const Grid& x, const Grid& w, const Vec& b) {
    Grid out(x.size(), Vec(w[0].size(), 0.0));
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t c = 0; c < w[0].size(); ++c) {
            double s = b.empty() ? 0.0 : b[c];
            for (size_t k = 0; k < w.size(); ++k) s += x[i][k] * w[k][c];
            out[i][c] = s;
        }
    return out;
}

Grid ref_layernorm(const Grid& x, const Vec& gamma, const Vec& beta) {
    const double eps = 1e-12;
    Grid out = x;
    for (Vec& row : out) {
        double mean = 0;
        for (const double v : row) mean += v;
        mean /= static_cast<double>(row.size());
        double var = 0;
        for (const double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(row.size());
        const double inv = 1.0 / std::sqrt(var + eps);
        for (size_t c = 0; c < row.size(); ++c)
            row[c] = (row[c] - mean) * inv * gamma[c] + beta[c];
    }
    return out;
}

Vec ref_softmax(Vec v) {
    double mx = v[0];
    for (const double x : v) mx = std::max(mx, x);
    double sum = 0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

Vec ref_forward_distribution(const ModelParams& p, const std::vector<int>& ids, int mask_pos) {
    const ModelConfig& c = p.config;
    const Grid tok = grid_of(p.store.at("tok_emb"));
    const Grid pos = grid_of(p.store.at("pos_emb"));
    const int len = static_cast<int>(ids.size());

    Grid x(len, Vec(c.d_model));
    for (int i = 0; i < len; ++i)
        for (int d = 0; d < c.d_model; ++d) x[i][d] = tok[ids[i]][d] + pos[i][d];
    x = ref_layernorm(x, grid_of(p.store.at("emb_ln_gamma"))[0],
                      grid_of(p.store.at("emb_ln_beta"))[0]);

    const int dh = c.d_model / c.num_heads;
    for (int l = 0; l < c.num_layers; ++l) {
        const std::string pre = "l" + std::to_string(l) + "_";
        const Grid q = ref_linear(x, grid_of(p.store.at(pre + "q_w")),
                                  grid_of(p.store.at(pre + "q_b"))[0]);
        const Grid k = ref_linear(x, grid_of(p.store.at(pre + "k_w")),
                                  grid_of(p.store.at(pre + "k_b"))[0]);
        const Grid v = ref_linear(x, grid_of(p.store.at(pre + "v_w")),
                                  grid_of(p.store.at(pre + "v_b"))[0]);

        Grid ctx(len, Vec(c.d_model, 0.0));
        for (int h = 0; h < c.num_heads; ++h) {
            const int off = h * dh;
            for (int i = 0; i < len; ++i) {
                Vec scores(len);
                for (int j = 0; j < len; ++j) {
                    double s = 0;
                    for (int d = 0; d < dh; ++d) s += q[i][off + d] * k[j][off + d];
                    scores[j] = s / std::sqrt(static_cast<double>(dh));
                }
                const Vec probs = ref_softmax(scores);
                for (int j = 0; j < len; ++j)
                    for (int d = 0; d < dh; ++d) ctx[i][off + d] += probs[j] * v[j][off + d];
            }
        }
        const Grid attn_out = ref_linear(ctx, grid_of(p.store.at(pre + "attn_out_w")),
                                         grid_of(p.store.at(pre + "attn_out_b"))[0]);
        Grid h1(len, Vec(c.d_model));
        for (int i = 0; i < len; ++i)
            for (int d = 0; d < c.d_model; ++d) h1[i][d] = x[i][d] + attn_out[i][d];
        h1 = ref_layernorm(h1, grid_of(p.store.at(pre + "ln1_gamma"))[0],
                           grid_of(p.store.at(pre + "ln1_beta"))[0]);

        Grid ff = ref_linear(h1, grid_of(p.store.at(pre + "ff1_w")),
                             grid_of(p.store.at(pre + "ff1_b"))[0]);
        for (Vec& row : ff)
            for (double& val : row)
                val = 0.5 * val * (1.0 + std::erf(val / std::sqrt(2.0)));
        ff = ref_linear(ff, grid_of(p.store.at(pre + "ff2_w")),
                        grid_of(p.store.at(pre + "ff2_b"))[0]);
        Grid h2(len, Vec(c.d_model));
        for (int i = 0; i < len; ++i)
            for (int d = 0; d < c.d_model; ++d) h2[i][d] = h1[i][d] + ff[i][d];
        x = ref_layernorm(h2, grid_of(p.store.at(pre + "ln2_gamma"))[0],
                          grid_of(p.store.at(pre + "ln2_beta"))[0]);
    }

    const Grid out_proj = grid_of(p.store.at("out_proj"));
    Vec logits(c.vocab_size);
    for (int t = 0; t < c.vocab_size; ++t) {
        double s = 0;
        for (int d = 0; d < c.d_model; ++d) s += x[mask_pos][d] * out_proj[t][d];
        logits[t] = s;
    }
    return ref_softmax(logits);
}

}  // namespace

TEST_CASE("init_model is deterministic in the seed") {
    const Vocab v = tiny_vocab();
    const ModelParams a = init_model(tiny_config(9), v);
    const ModelParams b = init_model(tiny_config(9), v);
    const ModelParams c = init_model(tiny_config(10), v);
    CHECK(stores_equal(a.store, b.store));
    CHECK_FALSE(stores_equal(a.store, c.store));
}

TEST_CASE("init_model parameters are f32-snapped") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    for (const ParamTensor& t : p.store.tensors())
        for (const double x : t.value.a)
            CHECK(x == static_cast<double>(static_cast<float>(x)));
}

TEST_CASE("config validation") {
    const Vocab v = tiny_vocab();
    ModelConfig c = tiny_config();
    c.d_model = 64;
    c.num_heads = 4;
    CHECK_NOTHROW(init_model(c, v));
    c.num_heads = 5;
    CHECK_THROWS_AS(init_model(c, v), UsageError);
    c = tiny_config();
    c.max_seq_len = 7;
    CHECK_THROWS_AS(init_model(c, v), UsageError);
}

TEST_CASE("forward_mlm distributions sum to one") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    MaskedInstance inst = tiny_instance();
    inst.mask_positions = {1, 2};
    inst.targets = {5, 6};
    const auto dists = forward_mlm(p, inst);
    REQUIRE(dists.size() == 2);
    for (const auto& d : dists) {
        REQUIRE(static_cast<int>(d.size()) == p.config.vocab_size);
        double sum = 0;
        for (const double x : d) {
            sum += x;
            CHECK(x >= 0.0);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("zero output projection gives the uniform distribution") {
    ModelParams p = init_model(tiny_config(), tiny_vocab());
    for (double& v : p.store.at("out_proj").a) v = 0.0;
    const auto dists = forward_mlm(p, tiny_instance());
    for (const double x : dists[0])
        CHECK(x == doctest::Approx(1.0 / p.config.vocab_size).epsilon(1e-12));
}

TEST_CASE("forward_mlm matches an independent step-by-step recomputation") {
    for (const uint64_t seed : {123u, 124u, 125u}) {
        const ModelParams p = init_model(tiny_config(seed), tiny_vocab());
        const MaskedInstance inst = tiny_instance();
        const auto got = forward_mlm(p, inst)[0];
        const Vec want = ref_forward_distribution(p, inst.input_ids, inst.mask_positions[0]);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
}

TEST_CASE("two-layer multi-head model also matches the reference") {
    ModelConfig c = tiny_config(77);
    c.num_layers = 2;
    c.num_heads = 2;
    c.d_model = 6;
    c.d_ff = 10;
    const ModelParams p = init_model(c, tiny_vocab());
    const MaskedInstance inst = tiny_instance();
    const auto got = forward_mlm(p, inst)[0];
    const Vec want = ref_forward_distribution(p, inst.input_ids, inst.mask_positions[0]);
    for (size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("uniform model loss is ln vocab") {
    ModelParams p = init_model(tiny_config(), tiny_vocab());
    for (double& v : p.store.at("out_proj").a) v = 0.0;
    const double loss = mlm_loss(p, {tiny_instance()});
    CHECK(loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("batch loss is the position-weighted mean of instance losses") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    MaskedInstance one = tiny_instance();  // 1 masked position
    MaskedInstance two = tiny_instance();
    two.input_ids = {Vocab::kCls, Vocab::kMask, 6, Vocab::kMask, Vocab::kSep};
    two.mask_positions = {1, 3};
    two.targets = {5, 5};
    const double l1 = mlm_loss(p, {one});
    const double l2 = mlm_loss(p, {two});
    const double combined = mlm_loss(p, {one, two});
    CHECK(combined == doctest::Approx((1 * l1 + 2 * l2) / 3.0).epsilon(1e-12));
}

TEST_CASE("padding content beyond n cannot influence the distributions") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    MaskedInstance padded = tiny_instance();
    padded.input_ids.push_back(Vocab::kPad);
    padded.input_ids.push_back(Vocab::kPad);
    MaskedInstance junk = padded;
    junk.input_ids[5] = 6;  // rewrite the padding with real tokens
    junk.input_ids[6] = 5;
    const auto a = forward_mlm(p, padded);
    const auto b = forward_mlm(p, junk);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) CHECK(a[i][j] == b[i][j]);  // exact
}

TEST_CASE("attention is bidirectional: context on both sides matters") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    MaskedInstance inst = tiny_instance();  // mask at 2, context at 1 and 3
    for (const int changed_pos : {1, 3}) {
        MaskedInstance other = inst;
        other.input_ids[changed_pos] = 6;  // 'a' -> 'b'
        const auto base = forward_mlm(p, inst)[0];
        const auto moved = forward_mlm(p, other)[0];
        double max_diff = 0;
        for (size_t i = 0; i < base.size(); ++i)
            max_diff = std::max(max_diff, std::abs(base[i] - moved[i]));
        CHECK(max_diff > 1e-9);
    }
}

TEST_CASE("forward_mlm input validation") {
    const ModelParams p = init_model(tiny_config(), tiny_vocab());
    MaskedInstance bad_id = tiny_instance();
    bad_id.input_ids[1] = 99;
    CHECK_THROWS_AS(forward_mlm(p, bad_id), UsageError);

    MaskedInstance too_long = tiny_instance();
    too_long.input_ids.assign(9, 5);  // max_seq_len is 8
    too_long.n = 9;
    CHECK_THROWS_AS(forward_mlm(p, too_long), UsageError);

    CHECK_THROWS_AS(mlm_loss(p, {}), UsageError);
}
