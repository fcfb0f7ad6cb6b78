#include "textsimp/metrics.hpp"

#include <algorithm>
#include <map>

#include "textsimp/errors.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

SgScore sg_prf(const std::vector<std::vector<std::string>>& candidates,
               const std::vector<std::set<std::string>>& gold) {
    if (candidates.size() != gold.size())
        throw UsageError("sg_prf: " + std::to_string(candidates.size()) + " candidate lists vs " +
                         std::to_string(gold.size()) + " gold sets");
    long hits = 0, n_cands = 0, n_gold = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        n_cands += static_cast<long>(candidates[i].size());
        n_gold += static_cast<long>(gold[i].size());
        for (const std::string& c : candidates[i])
            if (gold[i].count(c) > 0) ++hits;
    }
    SgScore s;
    s.precision = n_cands > 0 ? static_cast<double>(hits) / static_cast<double>(n_cands) : 0.0;
    s.recall = n_gold > 0 ? static_cast<double>(hits) / static_cast<double>(n_gold) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

PipelineScore pipeline_pa(const std::vector<std::string>& chosen,
                          const std::vector<std::set<std::string>>& gold,
                          const std::vector<std::string>& targets) {
    if (chosen.size() != gold.size() || chosen.size() != targets.size())
        throw UsageError("pipeline_pa: misaligned inputs");
    long changed = 0, changed_correct = 0, accurate = 0;
    for (size_t i = 0; i < chosen.size(); ++i) {
        const std::string c = lower_ascii(chosen[i]);
        if (c.empty()) continue;  // no candidate: counts as unchanged
        ++changed;
        const bool in_gold = gold[i].count(c) > 0;
        if (in_gold) ++changed_correct;
        if (in_gold && c != lower_ascii(targets[i])) ++accurate;
    }
    PipelineScore s;
    s.precision = changed > 0 ? static_cast<double>(changed_correct) / static_cast<double>(changed) : 0.0;
    s.accuracy = chosen.empty() ? 0.0 : static_cast<double>(accurate) / static_cast<double>(chosen.size());
    return s;
}

namespace {

using NgramCount = std::map<std::vector<std::string>, double>;

NgramCount ngram_counts(const std::vector<std::string>& tokens, int n) {
    NgramCount c;
    if (static_cast<int>(tokens.size()) < n) return c;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string> g;
        g.reserve(n);
        for (int j = 0; j < n; ++j) g.push_back(lower_ascii(tokens[i + j]));
        c[g] += 1.0;
    }
    return c;
}

double count_of(const NgramCount& c, const std::vector<std::string>& g) {
    const auto it = c.find(g);
    return it == c.end() ? 0.0 : it->second;
}

struct InstanceComponents {
    double add_f1 = 0.0;
    double keep_f1 = 0.0;
    double del_p = 0.0;
};

double harmonic(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

InstanceComponents sari_instance(const std::vector<std::string>& src,
                                 const std::vector<std::string>& out,
                                 const std::vector<std::vector<std::string>>& refs, int n) {
    const NgramCount cs = ngram_counts(src, n);
    const NgramCount co = ngram_counts(out, n);
    std::vector<NgramCount> crs;
    crs.reserve(refs.size());
    for (const auto& r : refs) crs.push_back(ngram_counts(r, n));
    const double m = static_cast<double>(refs.size());

    InstanceComponents comp;

    // add (set semantics)
    double n_added = 0.0, n_addable = 0.0, n_add_good = 0.0;
    for (const auto& [g, c] : co)
        if (count_of(cs, g) == 0.0) {
            ++n_added;
            bool in_ref = false;
            for (const NgramCount& cr : crs)
                if (count_of(cr, g) > 0.0) {
                    in_ref = true;
                    break;
                }
            if (in_ref) ++n_add_good;
        }
    std::set<std::vector<std::string>> ref_new;
    for (const NgramCount& cr : crs)
        for (const auto& [g, c] : cr)
            if (count_of(cs, g) == 0.0) ref_new.insert(g);
    n_addable = static_cast<double>(ref_new.size());
    const double add_p = n_added > 0.0 ? n_add_good / n_added : 0.0;
    const double add_r = n_addable > 0.0 ? n_add_good / n_addable : 0.0;
    comp.add_f1 = harmonic(add_p, add_r);

    // keep and delete (fractional counts over source n-grams)
    double kept_sum = 0.0, refkeep_sum = 0.0, keep_good = 0.0;
    double del_sum = 0.0, refdel_sum = 0.0, del_good = 0.0;
    for (const auto& [g, sc] : cs) {
        const double oc = count_of(co, g);
        const double kept = std::min(sc, oc);
        const double del = std::max(sc - oc, 0.0);
        double refkeep = 0.0, refdel = 0.0;
        for (const NgramCount& cr : crs) {
            const double rc = count_of(cr, g);
            refkeep += std::min(sc, rc);
            refdel += std::max(sc - rc, 0.0);
        }
        refkeep /= m;
        refdel /= m;
        kept_sum += kept;
        refkeep_sum += refkeep;
        keep_good += std::min(kept, refkeep);
        del_sum += del;
        refdel_sum += refdel;
        del_good += std::min(del, refdel);
    }
    const double keep_p = kept_sum > 0.0 ? keep_good / kept_sum : 0.0;
    const double keep_r = refkeep_sum > 0.0 ? keep_good / refkeep_sum : 0.0;
    comp.keep_f1 = harmonic(keep_p, keep_r);
    if (del_sum > 0.0) {
        comp.del_p = del_good / del_sum;
    } else {
        comp.del_p = refdel_sum == 0.0 ? 1.0 : 0.0;
    }
    return comp;
}

}  // namespace

SariBreakdown sari(const std::vector<std::vector<std::string>>& sources,
                   const std::vector<std::vector<std::string>>& outputs,
                   const std::vector<std::vector<std::vector<std::string>>>& references) {
    if (sources.size() != outputs.size() || sources.size() != references.size())
        throw UsageError("sari: misaligned corpus sizes");
    if (sources.empty()) throw UsageError("sari: empty corpus");
    for (const auto& refs : references)
        if (refs.empty()) throw UsageError("sari: instance with no references");

    SariBreakdown b;
    double total = 0.0;
    for (int n = 1; n <= 4; ++n) {
        double add = 0.0, keep = 0.0, del = 0.0;
        for (size_t i = 0; i < sources.size(); ++i) {
            const InstanceComponents c = sari_instance(sources[i], outputs[i], references[i], n);
            add += c.add_f1;
            keep += c.keep_f1;
            del += c.del_p;
        }
        const double count = static_cast<double>(sources.size());
        b.add_f1[n - 1] = add / count;
        b.keep_f1[n - 1] = keep / count;
        b.del_precision[n - 1] = del / count;
        total += (b.add_f1[n - 1] + b.keep_f1[n - 1] + b.del_precision[n - 1]) / 3.0;
    }
    b.total = 100.0 * total / 4.0;
    return b;
}

int count_syllables(const std::string& word) {
    std::string s;
    for (char c : lower_ascii(word)) {
        if (c >= 'a' && c <= 'z') s += c;
    }
    if (s.empty()) return 1;
    const auto vowel = [](char c) {
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    int groups = 0;
    bool in_group = false;
    for (char c : s) {
        if (vowel(c)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    const size_t n = s.size();
    if (n >= 2 && s[n - 1] == 'e' && !vowel(s[n - 2])) {
        // terminal silent 'e', except syllabic consonant+"le" (simple, table)
        const bool syllabic_le = s[n - 2] == 'l' && n >= 3 && !vowel(s[n - 3]);
        if (!syllabic_le && groups > 1) --groups;
    }
    return std::max(groups, 1);
}

double fkgl(const std::vector<std::vector<std::string>>& outputs) {
    if (outputs.empty()) throw UsageError("fkgl: empty corpus");
    long sentences = 0, words = 0, syllables = 0;
    for (const auto& tokens : outputs) {
        ++sentences;
        for (const std::string& t : tokens) {
            if (!letter_bearing(t)) continue;
            ++words;
            syllables += count_syllables(t);
        }
    }
    if (words == 0) throw UsageError("fkgl: corpus has no letter-bearing words");
    const double wps = static_cast<double>(words) / static_cast<double>(sentences);
    const double spw = static_cast<double>(syllables) / static_cast<double>(words);
    return 0.39 * wps + 11.8 * spw - 15.59;
}

}  // namespace textsimp
