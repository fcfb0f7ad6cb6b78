#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "textsimp/errors.hpp"
#include "textsimp/metrics.hpp"
#include "textsimp/rng.hpp"

using namespace textsimp;

// ---------------------------------------------------------------------------
// Independent oracles, written against the documented conventions with
// different data structures (string-keyed maps) so a shared bug is unlikely.
// ---------------------------------------------------------------------------
namespace oracle {

std::string lc(const std::string& s) {
    std::string o = s;
    for (char& c : o) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return o;
}

using Grams = std::map<std::string, double>;

Grams grams(const std::vector<std::string>& toks, int n) {
    Grams g;
    for (int i = 0; i + n <= static_cast<int>(toks.size()); ++i) {
        std::string key;
        for (int j = 0; j < n; ++j) {
            if (j > 0) key += '\x01';
            key += lc(toks[i + j]);
        }
        g[key] += 1.0;
    }
    return g;
}

double get(const Grams& g, const std::string& k) {
    auto it = g.find(k);
    return it == g.end() ? 0.0 : it->second;
}

struct Comp {
    double add = 0.0, keep = 0.0, del = 0.0;
};

Comp sari_one(const std::vector<std::string>& src, const std::vector<std::string>& out,
              const std::vector<std::vector<std::string>>& refs, int n) {
    const Grams gs = grams(src, n);
    const Grams go = grams(out, n);
    std::vector<Grams> gr;
    for (const auto& r : refs) gr.push_back(grams(r, n));

    // union of every key seen anywhere
    std::set<std::string> keys;
    for (const auto& [k, v] : gs) keys.insert(k);
    for (const auto& [k, v] : go) keys.insert(k);
    for (const auto& g : gr)
        for (const auto& [k, v] : g) keys.insert(k);

    double add_hit = 0, add_out = 0, add_ref = 0;
    double keep_hit = 0, keep_out = 0, keep_ref = 0;
    double del_hit = 0, del_out = 0, del_ref = 0;
    for (const std::string& k : keys) {
        const double s = get(gs, k), o = get(go, k);
        bool in_any_ref = false;
        double rkeep = 0, rdel = 0;
        for (const auto& g : gr) {
            const double r = get(g, k);
            if (r > 0) in_any_ref = true;
            rkeep += std::min(s, r);
            rdel += std::max(s - r, 0.0);
        }
        rkeep /= static_cast<double>(refs.size());
        rdel /= static_cast<double>(refs.size());
        if (s == 0 && o > 0) {  // added (set semantics)
            add_out += 1;
            if (in_any_ref) add_hit += 1;
        }
        if (s == 0 && in_any_ref) add_ref += 1;
        const double kept = std::min(s, o);
        keep_out += kept;
        keep_ref += rkeep;
        keep_hit += std::min(kept, rkeep);
        const double deleted = std::max(s - o, 0.0);
        del_out += deleted;
        del_ref += rdel;
        del_hit += std::min(deleted, rdel);
    }
    Comp c;
    const double ap = add_out > 0 ? add_hit / add_out : 0.0;
    const double ar = add_ref > 0 ? add_hit / add_ref : 0.0;
    c.add = (ap + ar) > 0 ? 2 * ap * ar / (ap + ar) : 0.0;
    const double kp = keep_out > 0 ? keep_hit / keep_out : 0.0;
    const double kr = keep_ref > 0 ? keep_hit / keep_ref : 0.0;
    c.keep = (kp + kr) > 0 ? 2 * kp * kr / (kp + kr) : 0.0;
    c.del = del_out > 0 ? del_hit / del_out : (del_ref == 0.0 ? 1.0 : 0.0);
    return c;
}

SariBreakdown sari(const std::vector<std::vector<std::string>>& srcs,
                   const std::vector<std::vector<std::string>>& outs,
                   const std::vector<std::vector<std::vector<std::string>>>& refs) {
    SariBreakdown b;
    double total = 0;
    for (int n = 1; n <= 4; ++n) {
        double a = 0, k = 0, d = 0;
        for (size_t i = 0; i < srcs.size(); ++i) {
            const Comp c = sari_one(srcs[i], outs[i], refs[i], n);
            a += c.add;
            k += c.keep;
            d += c.del;
        }
        b.add_f1[n - 1] = a / srcs.size();
        b.keep_f1[n - 1] = k / srcs.size();
        b.del_precision[n - 1] = d / srcs.size();
        total += (b.add_f1[n - 1] + b.keep_f1[n - 1] + b.del_precision[n - 1]) / 3.0;
    }
    b.total = 100.0 * total / 4.0;
    return b;
}

SgScore sg(const std::vector<std::vector<std::string>>& cands,
           const std::vector<std::set<std::string>>& gold) {
    double hit = 0, nc = 0, ng = 0;
    for (size_t i = 0; i < cands.size(); ++i) {
        for (const auto& c : cands[i])
            if (gold[i].find(c) != gold[i].end()) hit += 1;
        nc += cands[i].size();
        ng += gold[i].size();
    }
    SgScore s;
    s.precision = nc > 0 ? hit / nc : 0;
    s.recall = ng > 0 ? hit / ng : 0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0;
    return s;
}

}  // namespace oracle

// ---------------------------------------------------------------------------
// substitution-generation P/R/F1
// ---------------------------------------------------------------------------

TEST_CASE("sg_prf hand cases") {
    SUBCASE("partial overlap") {
        const auto s = sg_prf({{"b", "c", "x"}}, {{"a", "b", "c", "d"}});
        CHECK(s.precision == doctest::Approx(2.0 / 3.0));
        CHECK(s.recall == doctest::Approx(0.5));
        CHECK(s.f1 == doctest::Approx(2 * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + 0.5)));
    }
    SUBCASE("perfect") {
        const auto s = sg_prf({{"a", "b"}, {"c"}}, {{"a", "b"}, {"c"}});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
        CHECK(s.f1 == 1.0);
    }
    SUBCASE("disjoint means all zeros including f1") {
        const auto s = sg_prf({{"x", "y"}}, {{"a", "b"}});
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SUBCASE("micro averaging pools counts across instances") {
        // instance 1: 1 hit of 1 cand; instance 2: 0 hits of 3 cands
        const auto s = sg_prf({{"a"}, {"x", "y", "z"}}, {{"a"}, {"b"}});
        CHECK(s.precision == doctest::Approx(0.25));  // 1/4, not mean(1, 0)
        CHECK(s.recall == doctest::Approx(0.5));
    }
    SUBCASE("misaligned inputs are a usage error") {
        CHECK_THROWS_AS(sg_prf({{"a"}}, {}), UsageError);
    }
}

TEST_CASE("sg_prf matches the brute-force oracle on 200 random cases") {
    Rng rng(derive_seed(7, "sg-cases"));
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    for (int iter = 0; iter < 200; ++iter) {
        const int inst = 1 + static_cast<int>(rng.below(5));
        std::vector<std::vector<std::string>> cands(inst);
        std::vector<std::set<std::string>> gold(inst);
        for (int i = 0; i < inst; ++i) {
            std::vector<std::string> pool = vocab;
            rng.shuffle(pool);
            const int nc = static_cast<int>(rng.below(4));  // unique candidates
            for (int j = 0; j < nc; ++j) cands[i].push_back(pool[j]);
            const int ng = 1 + static_cast<int>(rng.below(4));
            for (int j = 0; j < ng; ++j) gold[i].insert(vocab[rng.below(vocab.size())]);
        }
        const SgScore got = sg_prf(cands, gold);
        const SgScore want = oracle::sg(cands, gold);
        CHECK(got.precision == want.precision);
        CHECK(got.recall == want.recall);
        CHECK(got.f1 == want.f1);
    }
}

// ---------------------------------------------------------------------------
// full-pipeline precision/accuracy
// ---------------------------------------------------------------------------

TEST_CASE("pipeline_pa hand cases") {
    SUBCASE("always changes, always right") {
        const auto s = pipeline_pa({"x", "y"}, {{"x"}, {"y"}}, {"a", "b"});
        CHECK(s.precision == 1.0);
        CHECK(s.accuracy == 1.0);
    }
    SUBCASE("changes 2 of 4, both correct") {
        const auto s =
            pipeline_pa({"x", "", "y", ""}, {{"x"}, {"q"}, {"y"}, {"q"}}, {"a", "b", "c", "d"});
        CHECK(s.precision == 1.0);
        CHECK(s.accuracy == 0.5);
    }
    SUBCASE("no-candidate counts as unchanged, hurting accuracy only") {
        const auto s = pipeline_pa({"good", "", "bad"}, {{"good"}, {"x"}, {"other"}},
                                   {"t1", "t2", "t3"});
        CHECK(s.precision == 0.5);  // 1 right of 2 changed
        CHECK(s.accuracy == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("choosing the target itself never counts as accurate") {
        const auto s = pipeline_pa({"same"}, {{"same"}}, {"same"});
        CHECK(s.precision == 1.0);
        CHECK(s.accuracy == 0.0);
    }
    SUBCASE("comparison is case-insensitive") {
        const auto s = pipeline_pa({"Good"}, {{"good"}}, {"target"});
        CHECK(s.precision == 1.0);
        CHECK(s.accuracy == 1.0);
    }
}

// ---------------------------------------------------------------------------
// SARI
// ---------------------------------------------------------------------------

TEST_CASE("sari of output == source == single reference is 200/3") {
    const std::vector<std::string> s = {"the", "cat", "sat", "on", "the", "mat"};
    const auto b = sari({s}, {s}, {{s}});
    for (int n = 0; n < 4; ++n) {
        CHECK(b.add_f1[n] == 0.0);
        CHECK(b.keep_f1[n] == 1.0);
        CHECK(b.del_precision[n] == 1.0);
    }
    CHECK(b.total == doctest::Approx(200.0 / 3.0));
}

TEST_CASE("sari matches brute-force on the a-b-c-d deletion example") {
    const std::vector<std::string> src = {"a", "b", "c", "d"};
    const std::vector<std::string> out = {"a", "b", "d"};
    const auto got = sari({src}, {out}, {{{out}}});
    const auto want = oracle::sari({src}, {out}, {{{out}}});
    for (int n = 0; n < 4; ++n) {
        CHECK(got.add_f1[n] == doctest::Approx(want.add_f1[n]).epsilon(1e-12));
        CHECK(got.keep_f1[n] == doctest::Approx(want.keep_f1[n]).epsilon(1e-12));
        CHECK(got.del_precision[n] == doctest::Approx(want.del_precision[n]).epsilon(1e-12));
    }
    // deletion matched the reference exactly
    CHECK(got.del_precision[0] == 1.0);
}

TEST_CASE("sari matches the brute-force oracle on 200 random cases") {
    Rng rng(derive_seed(7, "sari-cases"));
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    auto sent = [&](int min_len, int max_len) {
        const int len = min_len + static_cast<int>(rng.below(max_len - min_len + 1));
        std::vector<std::string> s;
        for (int i = 0; i < len; ++i) s.push_back(vocab[rng.below(vocab.size())]);
        return s;
    };
    for (int iter = 0; iter < 200; ++iter) {
        const int inst = 1 + static_cast<int>(rng.below(4));
        std::vector<std::vector<std::string>> srcs, outs;
        std::vector<std::vector<std::vector<std::string>>> refs;
        for (int i = 0; i < inst; ++i) {
            srcs.push_back(sent(1, 6));
            outs.push_back(sent(0, 6));  // empty outputs are legal
            const int nr = 1 + static_cast<int>(rng.below(3));
            std::vector<std::vector<std::string>> r;
            for (int j = 0; j < nr; ++j) r.push_back(sent(1, 6));
            refs.push_back(r);
        }
        const auto got = sari(srcs, outs, refs);
        const auto want = oracle::sari(srcs, outs, refs);
        for (int n = 0; n < 4; ++n) {
            CHECK(std::abs(got.add_f1[n] - want.add_f1[n]) < 1e-9);
            CHECK(std::abs(got.keep_f1[n] - want.keep_f1[n]) < 1e-9);
            CHECK(std::abs(got.del_precision[n] - want.del_precision[n]) < 1e-9);
        }
        CHECK(std::abs(got.total - want.total) < 1e-9);
        CHECK(got.total >= 0.0);
        CHECK(got.total <= 100.0);
    }
}

TEST_CASE("sari is invariant under instance permutation") {
    const std::vector<std::vector<std::string>> srcs = {
        {"a", "b", "c"}, {"d", "e"}, {"a", "a", "b"}};
    const std::vector<std::vector<std::string>> outs = {{"a", "c"}, {"d", "f"}, {"a", "b"}};
    const std::vector<std::vector<std::vector<std::string>>> refs = {
        {{"a", "c"}}, {{"d", "e"}, {"f"}}, {{"a", "b", "b"}}};
    const auto fwd = sari(srcs, outs, refs);
    const auto rev = sari({srcs[2], srcs[0], srcs[1]}, {outs[2], outs[0], outs[1]},
                          {refs[2], refs[0], refs[1]});
    CHECK(fwd.total == doctest::Approx(rev.total).epsilon(1e-12));
}

TEST_CASE("sari tolerates empty outputs and rejects bad shapes") {
    CHECK_NOTHROW(sari({{"a", "b"}}, {{}}, {{{"a"}}}));
    CHECK_THROWS_AS(sari({}, {}, {}), UsageError);
    CHECK_THROWS_AS(sari({{"a"}}, {{"a"}}, {{}}), UsageError);  // no references
    CHECK_THROWS_AS(sari({{"a"}}, {}, {{{"a"}}}), UsageError);
}

// ---------------------------------------------------------------------------
// syllables and FKGL
// ---------------------------------------------------------------------------

TEST_CASE("syllable counter fixtures") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("simple") == 2);   // consonant+le keeps its syllable
    CHECK(count_syllables("table") == 2);
    CHECK(count_syllables("apple") == 2);
    CHECK(count_syllables("whale") == 1);    // vowel before the le: silent e
    CHECK(count_syllables("ale") == 1);
    CHECK(count_syllables("make") == 1);
    CHECK(count_syllables("queue") == 1);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("banana") == 3);
    CHECK(count_syllables("rhythm") == 1);   // y as vowel
    CHECK(count_syllables("strength") == 1);
    CHECK(count_syllables("here") == 1);
    CHECK(count_syllables("example") == 3);
    CHECK(count_syllables("vocabulary") == 5);
    CHECK(count_syllables("understanding") == 4);
    CHECK(count_syllables("complicated") == 4);
    CHECK(count_syllables("UPPER") == 2);    // case-insensitive
    CHECK(count_syllables("x1y") == 1);      // digits dropped before counting
}

TEST_CASE("fkgl hand-computed fixtures") {
    auto toks = [](std::initializer_list<const char*> ws) {
        std::vector<std::string> v;
        for (const char* w : ws) v.emplace_back(w);
        return v;
    };
    // 6 one-syllable words and a non-word token
    CHECK(fkgl({toks({"the", "cat", "sat", "on", "the", "mat", "."})}) ==
          doctest::Approx(-1.45).epsilon(1e-9));
    // two sentences of 3 one-syllable words each
    CHECK(fkgl({toks({"the", "cat", "sat", "."}), toks({"a", "dog", "ran", "."})}) ==
          doctest::Approx(0.39 * 3 + 11.8 - 15.59).epsilon(1e-9));
    // 2 words, 5 syllables
    CHECK(fkgl({toks({"simple", "example"})}) ==
          doctest::Approx(0.39 * 2 + 11.8 * 2.5 - 15.59).epsilon(1e-9));
    // single one-syllable word
    CHECK(fkgl({toks({"queue"})}) == doctest::Approx(0.39 + 11.8 - 15.59).epsilon(1e-9));
    // 4 words, 14 syllables
    CHECK(fkgl({toks({"understanding", "complicated", "vocabulary", "here"})}) ==
          doctest::Approx(0.39 * 4 + 11.8 * 3.5 - 15.59).epsilon(1e-9));
}

TEST_CASE("fkgl is a ratio: doubling the corpus changes nothing") {
    const std::vector<std::vector<std::string>> corpus = {
        {"the", "simple", "cat"}, {"a", "complicated", "example", "here"}};
    std::vector<std::vector<std::string>> doubled = corpus;
    doubled.insert(doubled.end(), corpus.begin(), corpus.end());
    CHECK(fkgl(corpus) == doctest::Approx(fkgl(doubled)).epsilon(1e-12));
}

TEST_CASE("fkgl shifts by 23.6 when one-syllable words become three-syllable") {
    const std::vector<std::vector<std::string>> ones = {{"cat", "dog", "sun"}};
    const std::vector<std::vector<std::string>> threes = {{"banana", "banana", "banana"}};
    CHECK(fkgl(threes) - fkgl(ones) == doctest::Approx(11.8 * 2.0).epsilon(1e-9));
}

TEST_CASE("fkgl degenerate inputs are usage errors") {
    CHECK_THROWS_AS(fkgl({}), UsageError);
    CHECK_THROWS_AS(fkgl({{".", "!", "42"}}), UsageError);  // no letter-bearing words
}
