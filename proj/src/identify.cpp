#include "textsimp/identify.hpp"

#include <fstream>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

TaggedSentence TaggedSentence::make(std::vector<std::string> tokens,
                                    std::vector<ComplexityTag> tags) {
    if (tokens.size() != tags.size())
        throw UsageError("tagged sentence with " + std::to_string(tokens.size()) + " tokens but " +
                         std::to_string(tags.size()) + " tags");
    for (size_t i = 0; i < tokens.size(); ++i)
        if (!letter_bearing(tokens[i])) tags[i] = ComplexityTag::Complex;
    TaggedSentence t;
    t.tokens = std::move(tokens);
    t.tags = std::move(tags);
    return t;
}

bool Lexicon::is_simple(const std::string& word) const {
    if (!letter_bearing(word)) return false;
    const auto it = scores.find(lower_ascii(word));
    return it != scores.end() && it->second <= threshold;
}

Lexicon build_lexicon(const std::string& tsv_path, double threshold) {
    std::ifstream in(tsv_path);
    if (!in) throw IoError("cannot open file: " + tsv_path);

    std::unordered_map<std::string, std::pair<double, long>> sums;  // word -> (sum, count)
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string at = tsv_path + ":" + std::to_string(lineno);
        const size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError(at + ": expected `word<TAB>score`, got '" + line + "'");
        const std::string word = lower_ascii(line.substr(0, tab));
        if (word.empty()) throw FormatError(at + ": empty word");
        double score = 0.0;
        try {
            size_t used = 0;
            score = std::stod(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw FormatError(at + ": score is not a number: '" + line.substr(tab + 1) + "'");
        }
        auto& [sum, count] = sums[word];
        sum += score;
        ++count;
    }

    Lexicon lex;
    lex.threshold = threshold;
    for (const auto& [word, sc] : sums) lex.scores[word] = sc.first / static_cast<double>(sc.second);
    return lex;
}

TaggedSentence lexicon_identify(const Sentence& sentence, const Lexicon& lexicon) {
    std::vector<ComplexityTag> tags;
    tags.reserve(sentence.tokens.size());
    for (const std::string& t : sentence.tokens)
        tags.push_back(lexicon.is_simple(t) ? ComplexityTag::Simple : ComplexityTag::Complex);
    return TaggedSentence::make(sentence.tokens, std::move(tags));
}

// ---------------------------------------------------------------------------
// tagger
// ---------------------------------------------------------------------------

namespace {
constexpr int kTagComplex = 0;
constexpr int kTagSimple = 1;
}  // namespace

ModelParams init_tagger(const ModelConfig& config, const Vocab& vocab) {
    ModelParams p = init_model(config, vocab);
    Rng rng(derive_seed(p.config.seed, "tagger-head"));
    nn::Mat& w = p.store.add("cls_w", 2, p.config.d_model);
    for (double& v : w.a) v = 0.02 * rng.normal();
    p.store.add("cls_b", 1, 2);
    p.store.snap_f32();
    return p;
}

namespace {

// [CLS] tokens [SEP] encoding shared by training and inference.
std::vector<int> tagger_input(const Vocab& vocab, const std::vector<std::string>& tokens,
                              int max_seq_len, int* kept_out) {
    const int kept = std::min<int>(static_cast<int>(tokens.size()), max_seq_len - 2);
    std::vector<int> ids;
    ids.reserve(kept + 2);
    ids.push_back(Vocab::kCls);
    for (int i = 0; i < kept; ++i) ids.push_back(vocab.id(tokens[i]));
    ids.push_back(Vocab::kSep);
    if (kept_out != nullptr) *kept_out = kept;
    return ids;
}

std::pair<nn::Node*, long> tagger_batch_loss(nn::Tape& tape, ParamNodes& pn,
                                             const ModelParams& params,
                                             const std::vector<const TaggedSentence*>& batch) {
    nn::Node* total = nullptr;
    long targets_n = 0;
    for (const TaggedSentence* sent : batch) {
        if (sent->tokens.empty()) continue;
        int kept = 0;
        const std::vector<int> ids =
            tagger_input(params.vocab, sent->tokens, params.config.max_seq_len, &kept);
        nn::Node* h = encoder_forward(tape, pn, params.config, ids, static_cast<int>(ids.size()));
        std::vector<int> rows(kept);
        std::vector<int> labels(kept);
        for (int i = 0; i < kept; ++i) {
            rows[i] = i + 1;  // skip [CLS]
            labels[i] = sent->tags[i] == ComplexityTag::Simple ? kTagSimple : kTagComplex;
        }
        nn::Node* tok = tape.select_rows(h, rows);
        nn::Node* logits =
            tape.add_rowvec(tape.matmul_nt(tok, pn.get("cls_w")), pn.get("cls_b"));
        nn::Node* nll = tape.cross_entropy_sum(logits, labels);
        total = total == nullptr ? nll : tape.add(total, nll);
        targets_n += kept;
    }
    if (total == nullptr) throw UsageError("tagger batch has no tokens");
    return {total, targets_n};
}

}  // namespace

ModelParams train_tagger(ModelParams tagger, const std::vector<TaggedSentence>& data,
                         const TrainConfig& tc, LossTrace* trace) {
    if (data.empty()) throw UsageError("no tagger training data");
    train_loop(
        tagger.store, static_cast<int>(data.size()), tc,
        [&](nn::Tape& tape, ParamNodes& pn, const std::vector<int>& items, int) {
            std::vector<const TaggedSentence*> batch;
            batch.reserve(items.size());
            for (const int i : items) batch.push_back(&data[i]);
            return tagger_batch_loss(tape, pn, tagger, batch);
        },
        trace);
    return tagger;
}

std::vector<double> tagger_probs(const ModelParams& tagger,
                                 const std::vector<std::string>& tokens) {
    if (tokens.empty()) return {};
    nn::Tape tape;
    ParamNodes pn(tape, const_cast<ParamStore&>(tagger.store));
    int kept = 0;
    const std::vector<int> ids =
        tagger_input(tagger.vocab, tokens, tagger.config.max_seq_len, &kept);
    nn::Node* h = encoder_forward(tape, pn, tagger.config, ids, static_cast<int>(ids.size()));
    std::vector<int> rows(kept);
    for (int i = 0; i < kept; ++i) rows[i] = i + 1;
    nn::Node* tok = tape.select_rows(h, rows);
    nn::Node* logits = tape.add_rowvec(tape.matmul_nt(tok, pn.get("cls_w")), pn.get("cls_b"));

    std::vector<double> probs(tokens.size(), 0.0);  // truncated tail scores 0 = Complex
    for (int i = 0; i < kept; ++i) {
        double row[2] = {logits->val.at(i, kTagComplex), logits->val.at(i, kTagSimple)};
        nn::softmax_row_inplace(row, 2);
        probs[i] = row[kTagSimple];
    }
    return probs;
}

TaggedSentence tagger_identify(const Sentence& sentence, const ModelParams& tagger,
                               double cutoff) {
    const std::vector<double> probs = tagger_probs(tagger, sentence.tokens);
    std::vector<ComplexityTag> tags;
    tags.reserve(sentence.tokens.size());
    for (size_t i = 0; i < sentence.tokens.size(); ++i)
        tags.push_back(letter_bearing(sentence.tokens[i]) && probs[i] >= cutoff
                           ? ComplexityTag::Simple
                           : ComplexityTag::Complex);
    return TaggedSentence::make(sentence.tokens, std::move(tags));
}

DisagreementReport disagreement_report(const std::vector<Sentence>& sentences,
                                       const Lexicon& lexicon, const ModelParams& tagger,
                                       double cutoff) {
    DisagreementReport r;
    for (const Sentence& s : sentences) {
        const TaggedSentence hr = lexicon_identify(s, lexicon);
        const TaggedSentence nn = tagger_identify(s, tagger, cutoff);
        for (size_t i = 0; i < s.tokens.size(); ++i) {
            if (!letter_bearing(s.tokens[i])) continue;
            ++r.total_words;
            const bool hr_simple = hr.tags[i] == ComplexityTag::Simple;
            const bool nn_simple = nn.tags[i] == ComplexityTag::Simple;
            if (hr_simple == nn_simple)
                ++r.agree;
            else if (hr_simple)
                ++r.hr_simple_nn_complex;
            else
                ++r.nn_simple_hr_complex;
        }
    }
    return r;
}

std::vector<TaggedSentence> load_tagged_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<TaggedSentence> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> tokens;
        std::vector<ComplexityTag> tags;
        size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && line[i] == ' ') ++i;
            size_t j = i;
            while (j < line.size() && line[j] != ' ') ++j;
            if (j > i) {
                const std::string item = line.substr(i, j - i);
                const size_t slash = item.rfind('/');
                const std::string at = path + ":" + std::to_string(lineno);
                if (slash == std::string::npos || slash == 0)
                    throw FormatError(at + ": expected token/S or token/C, got '" + item + "'");
                const std::string tag = item.substr(slash + 1);
                if (tag != "S" && tag != "C")
                    throw FormatError(at + ": tag must be S or C, got '" + item + "'");
                tokens.push_back(item.substr(0, slash));
                tags.push_back(tag == "S" ? ComplexityTag::Simple : ComplexityTag::Complex);
            }
            i = j;
        }
        if (!tokens.empty()) out.push_back(TaggedSentence::make(std::move(tokens), std::move(tags)));
    }
    return out;
}

void write_tagged_file(const std::vector<TaggedSentence>& sentences, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const TaggedSentence& s : sentences) {
        for (size_t i = 0; i < s.tokens.size(); ++i) {
            if (i > 0) out << ' ';
            out << s.tokens[i] << '/' << (s.tags[i] == ComplexityTag::Simple ? 'S' : 'C');
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace textsimp
