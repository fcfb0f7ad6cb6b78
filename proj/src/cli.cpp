#include "textsimp/cli.hpp"

#include <algorithm>
#include <climits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "textsimp/checkpoint.hpp"
#include "textsimp/corpus.hpp"
#include "textsimp/errors.hpp"
#include "textsimp/identify.hpp"
#include "textsimp/lexsimp.hpp"
#include "textsimp/manifest.hpp"
#include "textsimp/masking.hpp"
#include "textsimp/metrics.hpp"
#include "textsimp/model.hpp"
#include "textsimp/rng.hpp"
#include "textsimp/seq2seq.hpp"
#include "textsimp/synth.hpp"
#include "textsimp/text.hpp"
#include "textsimp/train.hpp"

namespace textsimp {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Subcommand option tables. Every option value is a string; typed parsing
// happens on access so that flags, config files, and manifests all share
// one representation and one precedence rule (flags > config > defaults).
// ---------------------------------------------------------------------------

struct OptSpec {
    const char* key;
    const char* def;
    const char* help;
};

struct SubSpec {
    const char* name;
    const char* help;
    std::vector<OptSpec> opts;
    std::vector<const char*> required;
};

std::vector<OptSpec> operator+(std::vector<OptSpec> a, const std::vector<OptSpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

const std::vector<SubSpec>& subcommand_specs() {
    static const std::vector<OptSpec> seed_opt = {
        {"seed", "1", "root seed; all randomness derives from it by name"}};
    static const std::vector<OptSpec> model_opts = {
        {"layers", "2", "encoder layers"},
        {"heads", "2", "attention heads"},
        {"d-model", "32", "model width"},
        {"d-ff", "64", "feed-forward width"},
        {"max-seq-len", "64", "sequence capacity including [CLS]/[SEP]"},
        {"min-freq", "1", "vocabulary frequency floor"}};
    static const std::vector<OptSpec> train_opts = {
        {"epochs", "10", "training epochs"},
        {"batch-size", "4", "sentences per micro-batch"},
        {"grad-accum", "4", "micro-batches per optimizer step"},
        {"learning-rate", "5e-5", "Adam learning rate"},
        {"shuffle", "true", "reshuffle items every epoch"},
        {"trace-out", "", "loss trace CSV (empty: skip)"}};

    static const std::vector<SubSpec> specs = {
        {"prepare",
         "clean a pretraining corpus: level filter, short-sentence filter, test-set dedup",
         std::vector<OptSpec>{
             {"corpus", "", "input corpus file"},
             {"corpus-format", "plain", "input layout: plain | leveled"},
             {"levels", "", "comma-separated reading levels to keep (leveled input)"},
             {"min-words", "6", "drop sentences with fewer words"},
             {"test-sets", "", "comma-separated files whose sentences must not leak"},
             {"out", "", "cleaned corpus, one sentence per line"}} +
             seed_opt,
         {"corpus", "out"}},

        {"gen-synth",
         "generate the synthetic slot-filler corpus with its lexicon and slot list",
         std::vector<OptSpec>{
             {"sentences", "1000", "number of sentences to generate"},
             {"easy-fill-prob", "0.5", "probability a slot takes an easy filler"},
             {"out", "", "corpus file, one sentence per line"},
             {"lexicon-out", "", "complexity-ratings TSV (empty: skip)"},
             {"slots-out", "", "slot list for probing (empty: skip)"}} +
             seed_opt,
         {"out"}},

        {"train-tagger",
         "train the token-level simple/complex tagger on a word/T tagged file",
         std::vector<OptSpec>{{"train", "", "tagged training file"},
                              {"out", "", "tagger checkpoint"}} +
             model_opts + train_opts + seed_opt,
         {"train", "out"}},

        {"pretrain",
         "continue masked-LM pretraining with selective or random masking",
         std::vector<OptSpec>{
             {"corpus", "", "pretraining corpus, one sentence per line"},
             {"mode", "selective", "masking mode: selective | random"},
             {"identifier", "lexicon", "word identifier: lexicon | tagger"},
             {"lexicon", "", "complexity-ratings TSV for the lexicon identifier"},
             {"threshold", "4", "lexicon score at or below which a word is simple"},
             {"tagger", "", "tagger checkpoint for the tagger identifier"},
             {"cutoff", "0.5", "tagger probability cutoff"},
             {"mask-rate", "0.15", "fraction of eligible tokens to mask"},
             {"out", "", "model checkpoint"}} +
             model_opts + train_opts + seed_opt,
         {"corpus", "out"}},

        {"ablate",
         "run the four-variant masking/corpus matrix on generated data and report",
         std::vector<OptSpec>{
             {"sentences", "600", "training sentences per generated corpus"},
             {"eval-sentences", "400", "sentences in the held-out probe corpus"},
             {"easy-fill-prob-ordinary", "0.5", "easy-filler rate of the ordinary corpus"},
             {"easy-fill-prob-simple", "0.9", "easy-filler rate of the simple corpus"},
             {"mask-rate", "0.15", "fraction of eligible tokens to mask"},
             {"layers", "1", "encoder layers"},
             {"heads", "2", "attention heads"},
             {"d-model", "16", "model width"},
             {"d-ff", "32", "feed-forward width"},
             {"max-seq-len", "16", "sequence capacity including [CLS]/[SEP]"},
             {"min-freq", "1", "vocabulary frequency floor"},
             {"epochs", "12", "training epochs"},
             {"batch-size", "8", "sentences per micro-batch"},
             {"grad-accum", "1", "micro-batches per optimizer step"},
             {"learning-rate", "2e-3", "Adam learning rate"},
             {"shuffle", "true", "reshuffle items every epoch"},
             {"ckpt-dir", "", "directory for per-variant checkpoints (empty: skip)"},
             {"out", "", "report file"}} +
             seed_opt,
         {"out"}},

        {"eval-sg",
         "score substitution generation: candidates from a masked-LM vs gold lists",
         std::vector<OptSpec>{
             {"checkpoint", "", "masked-LM checkpoint"},
             {"dataset", "", "TSV: sentence, target index, target word, gold words"},
             {"k", "10", "candidates per instance"},
             {"out", "", "per-instance outputs TSV"},
             {"scores-out", "", "aggregate scores JSON (default: <out>.scores.json)"}} +
             seed_opt,
         {"checkpoint", "dataset", "out"}},

        {"eval-pipeline",
         "score the full substitute-one-word pipeline: generation plus ranking",
         std::vector<OptSpec>{
             {"checkpoint", "", "masked-LM checkpoint"},
             {"dataset", "", "TSV: sentence, target index, target word, gold words"},
             {"k", "10", "candidates per instance"},
             {"frequencies", "", "word-frequency TSV (empty: no frequency signal)"},
             {"w-lm", "1", "weight of the masked-prediction probability"},
             {"w-freq", "1", "weight of the corpus frequency"},
             {"w-ctx", "1", "weight of the in-context fit"},
             {"out", "", "per-instance outputs TSV"},
             {"scores-out", "", "aggregate scores JSON (default: <out>.scores.json)"}} +
             seed_opt,
         {"checkpoint", "dataset", "out"}},

        {"eval-ss",
         "fine-tune the encoder-decoder on parallel pairs, decode, and score",
         std::vector<OptSpec>{
             {"checkpoint", "", "masked-LM checkpoint for the encoder"},
             {"train-src", "", "training source sentences, one per line"},
             {"train-ref", "", "training reference sentences, aligned"},
             {"eval-src", "", "evaluation source sentences"},
             {"eval-refs", "", "comma-separated aligned reference files"},
             {"dec-layers", "0", "decoder layers (0: same as encoder)"},
             {"dec-heads", "0", "decoder heads (0: same as encoder)"},
             {"dec-d-model", "0", "decoder width (0: same as encoder; must match)"},
             {"dec-d-ff", "0", "decoder feed-forward width (0: same as encoder)"},
             {"dec-capacity", "0", "decoder position capacity (0: same as encoder)"},
             {"epochs", "10", "fine-tuning epochs"},
             {"batch-size", "4", "pairs per micro-batch"},
             {"grad-accum", "1", "micro-batches per optimizer step"},
             {"learning-rate", "1e-4", "Adam learning rate"},
             {"shuffle", "true", "reshuffle pairs every epoch"},
             {"trace-out", "", "loss trace CSV (empty: skip)"},
             {"beam", "4", "beam size (1 = greedy)"},
             {"alpha", "1", "length-normalization exponent"},
             {"decode-max", "0", "generated-token cap (0: decoder capacity)"},
             {"model-out", "", "fine-tuned model checkpoint (empty: skip)"},
             {"out", "", "decoded sentences, aligned with eval-src"},
             {"scores-out", "", "aggregate scores JSON (default: <out>.scores.json)"}} +
             seed_opt,
         {"checkpoint", "train-src", "train-ref", "eval-src", "eval-refs", "out"}},

        {"score",
         "score existing outputs: task ls (TSV outputs) or task ss (sentence files)",
         std::vector<OptSpec>{
             {"task", "", "what to score: ls | ss"},
             {"dataset", "", "ls: gold TSV the outputs answer"},
             {"ls-outputs", "", "ls: per-instance outputs TSV"},
             {"src", "", "ss: source sentences, one per line"},
             {"outputs", "", "ss: system output sentences, aligned"},
             {"refs", "", "ss: comma-separated aligned reference files"},
             {"out", "", "scores JSON"}} +
             seed_opt,
         {"task", "out"}},
    };
    return specs;
}

const SubSpec* find_spec(const std::string& name) {
    for (const SubSpec& s : subcommand_specs())
        if (name == s.name) return &s;
    return nullptr;
}

std::map<std::string, std::string> defaults_of(const SubSpec& spec) {
    std::map<std::string, std::string> out;
    for (const OptSpec& o : spec.opts) out[o.key] = o.def;
    return out;
}

void check_required(const SubSpec& spec, const std::map<std::string, std::string>& opts) {
    for (const char* key : spec.required)
        if (opts.at(key).empty())
            throw UsageError(std::string(spec.name) + ": missing required option --" + key);
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

Manifest start_manifest(const std::string& command, const std::map<std::string, std::string>& opts) {
    Manifest m;
    m.command = command;
    m.seed = opt_u64(opts, "seed");
    m.options = opts;
    return m;
}

void finish(Manifest& m, const std::string& primary_out) {
    const std::string path = primary_out + ".manifest.json";
    m.write(path);
    std::cout << "manifest " << path << '\n';
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const std::string& line : lines) out << line << '\n';
    if (!out) throw IoError("failed writing " + path);
    std::cout << "wrote " << path << '\n';
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path);
    std::cout << "wrote " << path << '\n';
}

// Every line of the file, tokenized; empty lines stay as empty token lists
// so alignment with a source file survives empty system outputs.
std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(tokenize(line));
    return lines;
}

ModelConfig model_config_from(const std::map<std::string, std::string>& opts) {
    ModelConfig cfg;
    cfg.num_layers = opt_int(opts, "layers");
    cfg.num_heads = opt_int(opts, "heads");
    cfg.d_model = opt_int(opts, "d-model");
    cfg.d_ff = opt_int(opts, "d-ff");
    cfg.max_seq_len = opt_int(opts, "max-seq-len");
    cfg.seed = opt_u64(opts, "seed");
    return cfg;
}

TrainConfig train_config_from(const std::map<std::string, std::string>& opts) {
    TrainConfig tc;
    tc.epochs = opt_int(opts, "epochs");
    tc.batch_size = opt_int(opts, "batch-size");
    tc.grad_accum = opt_int(opts, "grad-accum");
    tc.learning_rate = opt_double(opts, "learning-rate");
    tc.shuffle = opt_bool(opts, "shuffle");
    tc.seed = opt_u64(opts, "seed");
    return tc;
}

void maybe_write_trace(const LossTrace& trace, const std::map<std::string, std::string>& opts) {
    const std::string path = opt_str(opts, "trace-out");
    if (path.empty()) return;
    trace.write_csv(path);
    std::cout << "wrote " << path << '\n';
}

std::string scores_path(const std::map<std::string, std::string>& opts) {
    const std::string given = opt_str(opts, "scores-out");
    return given.empty() ? opt_str(opts, "out") + ".scores.json" : given;
}

std::vector<Sentence> plain_sentences(const std::vector<TaggedSentence>& tagged) {
    std::vector<Sentence> out;
    out.reserve(tagged.size());
    for (const TaggedSentence& t : tagged) out.push_back({t.tokens, "", std::nullopt});
    return out;
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

void cmd_prepare(const std::map<std::string, std::string>& opts) {
    const std::string corpus_path = opt_str(opts, "corpus");
    const std::string format_name = opt_str(opts, "corpus-format");
    CorpusFormat format;
    if (format_name == "plain")
        format = CorpusFormat::PlainLines;
    else if (format_name == "leveled")
        format = CorpusFormat::LeveledArticles;
    else
        throw UsageError("unknown corpus-format '" + format_name + "' (expected plain or leveled)");
    const int min_words = opt_int(opts, "min-words");
    if (min_words < 0) throw UsageError("min-words must be non-negative");

    Manifest m = start_manifest("prepare", opts);
    m.record_input(corpus_path);

    std::vector<Sentence> corpus = load_corpus(corpus_path, format);
    if (corpus.empty()) throw UsageError("no sentences in " + corpus_path);
    m.stats["loaded"] = static_cast<long>(corpus.size());

    const std::string levels_csv = opt_str(opts, "levels");
    if (!levels_csv.empty()) {
        std::set<int> allowed;
        for (const std::string& item : split_list(levels_csv)) {
            try {
                std::size_t idx = 0;
                const int level = std::stoi(item, &idx);
                if (idx != item.size()) throw std::invalid_argument(item);
                allowed.insert(level);
            } catch (const std::exception&) {
                throw UsageError("levels expects integers, got '" + item + "'");
            }
        }
        corpus = filter_level(corpus, allowed);
    }
    m.stats["after_level_filter"] = static_cast<long>(corpus.size());

    corpus = filter_short(corpus, min_words);
    m.stats["after_short_filter"] = static_cast<long>(corpus.size());

    std::set<std::string> held_out;
    for (const std::string& path : split_list(opt_str(opts, "test-sets"))) {
        m.record_input(path);
        const std::set<std::string> lines = load_normalized_lines(path);
        held_out.insert(lines.begin(), lines.end());
    }
    long removed = 0;
    corpus = dedup_against(corpus, held_out, &removed);
    m.stats["after_dedup"] = static_cast<long>(corpus.size());
    m.stats["dedup_removed"] = removed;

    std::vector<std::string> lines;
    lines.reserve(corpus.size());
    for (const Sentence& s : corpus) lines.push_back(join_tokens(s.tokens));
    const std::string out = opt_str(opts, "out");
    write_lines(out, lines);
    std::cout << "prepare: " << m.stats["loaded"] << " loaded, " << corpus.size() << " kept, "
              << removed << " removed as test-set duplicates\n";
    finish(m, out);
}

// ---------------------------------------------------------------------------
// gen-synth
// ---------------------------------------------------------------------------

void cmd_gen_synth(const std::map<std::string, std::string>& opts) {
    const int sentences = opt_int(opts, "sentences");
    if (sentences < 1) throw UsageError("sentences must be at least 1");
    SynthSpec spec = default_synth_spec();
    spec.sentences = static_cast<std::size_t>(sentences);
    spec.easy_fill_prob = opt_double(opts, "easy-fill-prob");
    spec.seed = opt_u64(opts, "seed");

    Manifest m = start_manifest("gen-synth", opts);
    const SynthCorpus corpus = generate_synth(spec);
    m.stats["sentences"] = static_cast<long>(corpus.sentences.size());
    m.stats["slots"] = static_cast<long>(corpus.slots.size());

    std::vector<std::string> lines;
    lines.reserve(corpus.sentences.size());
    for (const Sentence& s : corpus.sentences) lines.push_back(join_tokens(s.tokens));
    const std::string out = opt_str(opts, "out");
    write_lines(out, lines);

    const std::string lexicon_out = opt_str(opts, "lexicon-out");
    if (!lexicon_out.empty()) {
        write_synth_lexicon(spec, lexicon_out);
        std::cout << "wrote " << lexicon_out << '\n';
    }
    const std::string slots_out = opt_str(opts, "slots-out");
    if (!slots_out.empty()) {
        write_eval_slots(corpus, slots_out);
        std::cout << "wrote " << slots_out << '\n';
    }
    finish(m, out);
}

// ---------------------------------------------------------------------------
// train-tagger
// ---------------------------------------------------------------------------

void cmd_train_tagger(const std::map<std::string, std::string>& opts) {
    const std::string train_path = opt_str(opts, "train");
    Manifest m = start_manifest("train-tagger", opts);
    m.record_input(train_path);

    const std::vector<TaggedSentence> data = load_tagged_file(train_path);
    if (data.empty()) throw UsageError("no training sentences in " + train_path);
    const Vocab vocab = Vocab::build(plain_sentences(data), opt_int(opts, "min-freq"));

    ModelParams tagger = init_tagger(model_config_from(opts), vocab);
    LossTrace trace;
    tagger = train_tagger(std::move(tagger), data, train_config_from(opts), &trace);

    const std::string out = opt_str(opts, "out");
    save_model_checkpoint(tagger, "tagger", out);
    std::cout << "wrote " << out << '\n';
    maybe_write_trace(trace, opts);
    m.stats["sentences"] = static_cast<long>(data.size());
    m.stats["vocab"] = vocab.size();
    m.stats["steps"] = static_cast<long>(trace.steps.size());
    finish(m, out);
}

// ---------------------------------------------------------------------------
// pretrain
// ---------------------------------------------------------------------------

std::vector<TaggedSentence> identify_corpus(const std::vector<Sentence>& corpus,
                                            const std::map<std::string, std::string>& opts,
                                            bool selective, Manifest& m) {
    const std::string identifier = opt_str(opts, "identifier");
    std::vector<TaggedSentence> tagged;
    tagged.reserve(corpus.size());
    if (identifier == "lexicon") {
        const std::string lexicon_path = opt_str(opts, "lexicon");
        if (lexicon_path.empty()) {
            if (selective) throw UsageError("selective masking needs --lexicon (identifier: lexicon)");
            // Random masking ignores tags; treat every token as simple.
            for (const Sentence& s : corpus)
                tagged.push_back(TaggedSentence::make(
                    s.tokens, std::vector<ComplexityTag>(s.tokens.size(), ComplexityTag::Simple)));
            return tagged;
        }
        m.record_input(lexicon_path);
        const Lexicon lexicon = build_lexicon(lexicon_path, opt_double(opts, "threshold"));
        for (const Sentence& s : corpus) tagged.push_back(lexicon_identify(s, lexicon));
        return tagged;
    }
    if (identifier == "tagger") {
        const std::string tagger_path = opt_str(opts, "tagger");
        if (tagger_path.empty()) {
            if (selective) throw UsageError("selective masking needs --tagger (identifier: tagger)");
            for (const Sentence& s : corpus)
                tagged.push_back(TaggedSentence::make(
                    s.tokens, std::vector<ComplexityTag>(s.tokens.size(), ComplexityTag::Simple)));
            return tagged;
        }
        m.record_input(tagger_path);
        const ModelParams tagger = load_model_checkpoint(tagger_path, "tagger");
        const double cutoff = opt_double(opts, "cutoff");
        for (const Sentence& s : corpus) tagged.push_back(tagger_identify(s, tagger, cutoff));
        return tagged;
    }
    throw UsageError("unknown identifier '" + identifier + "' (expected lexicon or tagger)");
}

MaskMode mask_mode_from(const std::map<std::string, std::string>& opts) {
    const std::string mode = opt_str(opts, "mode");
    if (mode == "selective") return MaskMode::Selective;
    if (mode == "random") return MaskMode::Random;
    throw UsageError("unknown mode '" + mode + "' (expected selective or random)");
}

void cmd_pretrain(const std::map<std::string, std::string>& opts) {
    const MaskMode mode = mask_mode_from(opts);
    const std::string corpus_path = opt_str(opts, "corpus");
    Manifest m = start_manifest("pretrain", opts);
    m.record_input(corpus_path);

    const std::vector<Sentence> corpus = load_corpus(corpus_path, CorpusFormat::PlainLines);
    if (corpus.empty()) throw UsageError("no sentences in " + corpus_path);
    const std::vector<TaggedSentence> tagged =
        identify_corpus(corpus, opts, mode == MaskMode::Selective, m);
    const Vocab vocab = Vocab::build(corpus, opt_int(opts, "min-freq"));

    MaskPolicy policy;
    policy.mode = mode;
    policy.rate = opt_double(opts, "mask-rate");
    policy.seed = opt_u64(opts, "seed");
    const ModelConfig cfg = model_config_from(opts);
    const auto per_sentence = make_corpus_instances(tagged, vocab, policy, cfg.max_seq_len);
    const MaskRateReport rates = mask_rate_report(per_sentence, tagged);
    const std::vector<MaskedInstance> instances = flatten_instances(per_sentence);
    if (instances.empty()) throw UsageError("masking produced no training instances");

    LossTrace trace;
    const ModelParams params =
        train_mlm(init_model(cfg, vocab), instances, train_config_from(opts), &trace);

    const std::string out = opt_str(opts, "out");
    save_model_checkpoint(params, "mlm", out);
    std::cout << "wrote " << out << '\n';
    maybe_write_trace(trace, opts);

    char line[160];
    std::snprintf(line, sizeof line,
                  "pretrain: %zu sentences, %zu instances, mask rate simple %.4f complex %.4f",
                  corpus.size(), instances.size(), rates.simple_mask_rate,
                  rates.complex_mask_rate);
    std::cout << line << '\n';
    m.stats["sentences"] = static_cast<long>(corpus.size());
    m.stats["instances"] = static_cast<long>(instances.size());
    m.stats["total_masks"] = rates.total_masks;
    m.stats["simple_tokens"] = rates.simple_tokens;
    m.stats["complex_tokens"] = rates.complex_tokens;
    m.stats["vocab"] = vocab.size();
    m.stats["steps"] = static_cast<long>(trace.steps.size());
    finish(m, out);
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

// Rethrows module failures with the ablation variant attached, preserving
// the error class so exit codes stay truthful.
template <typename Fn>
auto run_variant(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const UsageError& e) {
        throw UsageError("variant " + name + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError("variant " + name + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError("variant " + name + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("variant " + name + ": " + e.what());
    }
}

void cmd_ablate(const std::map<std::string, std::string>& opts) {
    const int train_sentences = opt_int(opts, "sentences");
    const int eval_sentences = opt_int(opts, "eval-sentences");
    if (train_sentences < 1 || eval_sentences < 1)
        throw UsageError("sentences and eval-sentences must be at least 1");
    const uint64_t seed = opt_u64(opts, "seed");
    Manifest m = start_manifest("ablate", opts);

    SynthSpec base = default_synth_spec();
    base.sentences = static_cast<std::size_t>(train_sentences);

    SynthSpec ordinary_spec = base;
    ordinary_spec.easy_fill_prob = opt_double(opts, "easy-fill-prob-ordinary");
    ordinary_spec.seed = derive_seed(seed, "corpus-ordinary");
    SynthSpec simple_spec = base;
    simple_spec.easy_fill_prob = opt_double(opts, "easy-fill-prob-simple");
    simple_spec.seed = derive_seed(seed, "corpus-simple");
    SynthSpec eval_spec = base;
    eval_spec.sentences = static_cast<std::size_t>(eval_sentences);
    eval_spec.easy_fill_prob = ordinary_spec.easy_fill_prob;
    eval_spec.seed = derive_seed(seed, "corpus-eval");

    const SynthCorpus ordinary = generate_synth(ordinary_spec);
    const SynthCorpus simple = generate_synth(simple_spec);
    const SynthCorpus probe = generate_synth(eval_spec);
    std::vector<std::pair<Sentence, int>> slots;
    slots.reserve(probe.slots.size());
    for (const SlotRef& ref : probe.slots)
        slots.emplace_back(probe.sentences[ref.sentence], ref.position);
    const std::vector<std::string> easy = easy_fillers(base);
    const Lexicon lexicon = synth_lexicon(base);

    // One vocabulary across all variants, so the probe compares
    // distributions over an identical support.
    std::vector<Sentence> all = ordinary.sentences;
    all.insert(all.end(), simple.sentences.begin(), simple.sentences.end());
    const Vocab vocab = Vocab::build(all, opt_int(opts, "min-freq"));

    auto tag_all = [&](const std::vector<Sentence>& sentences) {
        std::vector<TaggedSentence> tagged;
        tagged.reserve(sentences.size());
        for (const Sentence& s : sentences) tagged.push_back(lexicon_identify(s, lexicon));
        return tagged;
    };
    const std::vector<TaggedSentence> tagged_ordinary = tag_all(ordinary.sentences);
    const std::vector<TaggedSentence> tagged_simple = tag_all(simple.sentences);

    ModelConfig cfg = model_config_from(opts);
    TrainConfig tc = train_config_from(opts);
    const double mask_rate = opt_double(opts, "mask-rate");

    struct Variant {
        const char* name;
        MaskMode mode;
        const char* masking_label;
        const char* corpus_label;
        const std::vector<TaggedSentence>* corpus;
    };
    const std::vector<Variant> variants = {
        {"baseline", MaskMode::Random, "random", "ordinary", &tagged_ordinary},
        {"corpus-only", MaskMode::Random, "random", "simple", &tagged_simple},
        {"mechanism-only", MaskMode::Selective, "selective", "ordinary", &tagged_ordinary},
        {"both", MaskMode::Selective, "selective", "simple", &tagged_simple},
    };

    const std::string ckpt_dir = opt_str(opts, "ckpt-dir");
    if (!ckpt_dir.empty()) std::filesystem::create_directories(ckpt_dir);

    std::vector<double> masses;
    for (const Variant& v : variants) {
        const double mass = run_variant(v.name, [&] {
            MaskPolicy policy;
            policy.mode = v.mode;
            policy.rate = mask_rate;
            policy.seed = seed;
            const auto instances =
                flatten_instances(make_corpus_instances(*v.corpus, vocab, policy, cfg.max_seq_len));
            if (instances.empty())
                throw UsageError("masking produced no training instances");
            const ModelParams params = train_mlm(init_model(cfg, vocab), instances, tc);
            if (!ckpt_dir.empty())
                save_model_checkpoint(params, "mlm",
                                      (std::filesystem::path(ckpt_dir) / (std::string(v.name) + ".ckpt")).string());
            return mean_easy_mass(params, slots, easy);
        });
        masses.push_back(mass);
        std::cout << "ablate: " << v.name << " done\n";
    }

    std::vector<std::string> report;
    {
        char line[160];
        std::snprintf(line, sizeof line, "%-15s %-10s %-9s %12s %10s", "variant", "masking",
                      "corpus", "simple-mass", "delta");
        report.emplace_back(line);
        for (std::size_t i = 0; i < variants.size(); ++i) {
            std::snprintf(line, sizeof line, "%-15s %-10s %-9s %12.6f %+10.6f", variants[i].name,
                          variants[i].masking_label, variants[i].corpus_label, masses[i],
                          masses[i] - masses[0]);
            report.emplace_back(line);
        }
        std::snprintf(line, sizeof line, "probe slots: %zu", slots.size());
        report.emplace_back(line);
    }
    if (!(masses[3] >= masses[1] && masses[3] >= masses[2]))
        report.emplace_back(
            "note: expected ordering (both >= each single change) not observed at this scale");

    for (const std::string& line : report) std::cout << line << '\n';
    const std::string out = opt_str(opts, "out");
    write_lines(out, report);
    m.stats["train_sentences"] = train_sentences;
    m.stats["probe_slots"] = static_cast<long>(slots.size());
    finish(m, out);
}

// ---------------------------------------------------------------------------
// eval-sg / eval-pipeline
// ---------------------------------------------------------------------------

void cmd_eval_sg(const std::map<std::string, std::string>& opts) {
    const std::string ckpt_path = opt_str(opts, "checkpoint");
    const std::string dataset_path = opt_str(opts, "dataset");
    Manifest m = start_manifest("eval-sg", opts);
    m.record_input(ckpt_path);
    m.record_input(dataset_path);

    const ModelParams params = load_model_checkpoint(ckpt_path, "mlm");
    const std::vector<LsInstance> dataset = load_ls_dataset(dataset_path);
    if (dataset.empty()) throw UsageError("no instances in " + dataset_path);
    const int k = opt_int(opts, "k");

    std::vector<SimplifyResult> rows;
    std::vector<std::vector<std::string>> candidates;
    std::vector<std::set<std::string>> gold;
    for (const LsInstance& instance : dataset) {
        const CandidateList cands = generate_candidates(params, instance, k);
        rows.push_back({instance.tokens[instance.target_index], "", cands});
        std::vector<std::string> words;
        for (const Candidate& c : cands) words.push_back(lower_ascii(c.word));
        candidates.push_back(std::move(words));
        gold.push_back(instance.gold);
    }
    const std::string out = opt_str(opts, "out");
    write_ls_outputs(rows, out);
    std::cout << "wrote " << out << '\n';

    const SgScore score = sg_prf(candidates, gold);
    write_json_file(scores_path(opts), json{{"precision", score.precision},
                                            {"recall", score.recall},
                                            {"f1", score.f1}});
    m.stats["instances"] = static_cast<long>(dataset.size());
    finish(m, out);
}

void cmd_eval_pipeline(const std::map<std::string, std::string>& opts) {
    const std::string ckpt_path = opt_str(opts, "checkpoint");
    const std::string dataset_path = opt_str(opts, "dataset");
    Manifest m = start_manifest("eval-pipeline", opts);
    m.record_input(ckpt_path);
    m.record_input(dataset_path);

    const ModelParams params = load_model_checkpoint(ckpt_path, "mlm");
    const std::vector<LsInstance> dataset = load_ls_dataset(dataset_path);
    if (dataset.empty()) throw UsageError("no instances in " + dataset_path);
    const int k = opt_int(opts, "k");

    FreqTable freq;
    const std::string freq_path = opt_str(opts, "frequencies");
    if (!freq_path.empty()) {
        m.record_input(freq_path);
        freq = load_freq_table(freq_path);
    }
    RankWeights weights;
    weights.w_lm = opt_double(opts, "w-lm");
    weights.w_freq = opt_double(opts, "w-freq");
    weights.w_ctx = opt_double(opts, "w-ctx");
    weights.validate();

    std::vector<SimplifyResult> results;
    std::vector<std::string> chosen;
    std::vector<std::set<std::string>> gold;
    std::vector<std::string> targets;
    for (const LsInstance& instance : dataset) {
        results.push_back(simplify_word(params, instance, k, freq, weights));
        chosen.push_back(lower_ascii(results.back().chosen));
        gold.push_back(instance.gold);
        targets.push_back(lower_ascii(instance.tokens[instance.target_index]));
    }
    const std::string out = opt_str(opts, "out");
    write_ls_outputs(results, out);
    std::cout << "wrote " << out << '\n';

    const PipelineScore score = pipeline_pa(chosen, gold, targets);
    write_json_file(scores_path(opts),
                    json{{"precision", score.precision}, {"accuracy", score.accuracy}});
    m.stats["instances"] = static_cast<long>(dataset.size());
    finish(m, out);
}

// ---------------------------------------------------------------------------
// eval-ss
// ---------------------------------------------------------------------------

json sari_json(const SariBreakdown& s) {
    return json{{"total", s.total},
                {"add_f1", s.add_f1},
                {"keep_f1", s.keep_f1},
                {"del_precision", s.del_precision}};
}

void cmd_eval_ss(const std::map<std::string, std::string>& opts) {
    const std::string ckpt_path = opt_str(opts, "checkpoint");
    const std::string train_src = opt_str(opts, "train-src");
    const std::string train_ref = opt_str(opts, "train-ref");
    const std::string eval_src = opt_str(opts, "eval-src");
    const std::vector<std::string> ref_paths = split_list(opt_str(opts, "eval-refs"));
    if (ref_paths.empty()) throw UsageError("eval-refs needs at least one reference file");

    Manifest m = start_manifest("eval-ss", opts);
    m.record_input(ckpt_path);
    m.record_input(train_src);
    m.record_input(train_ref);
    m.record_input(eval_src);
    for (const std::string& p : ref_paths) m.record_input(p);

    DecoderConfig dc;
    dc.num_layers = opt_int(opts, "dec-layers");
    dc.num_heads = opt_int(opts, "dec-heads");
    dc.d_model = opt_int(opts, "dec-d-model");
    dc.d_ff = opt_int(opts, "dec-d-ff");
    dc.max_output_len = opt_int(opts, "dec-capacity");
    dc.seed = opt_u64(opts, "seed");
    Seq2SeqParams model = init_seq2seq_from_checkpoint(ckpt_path, dc);

    const std::vector<ParallelPair> train_pairs = load_parallel_dataset(train_src, {train_ref});
    LossTrace trace;
    model = finetune(std::move(model), train_pairs, train_config_from(opts), &trace);
    maybe_write_trace(trace, opts);

    const std::vector<ParallelPair> eval_pairs = load_parallel_dataset(eval_src, ref_paths);
    if (eval_pairs.empty()) throw UsageError("no evaluation sentences in " + eval_src);

    DecodeConfig dcfg;
    dcfg.beam_size = opt_int(opts, "beam");
    dcfg.max_output_len = opt_int(opts, "decode-max");
    dcfg.length_alpha = opt_double(opts, "alpha");
    dcfg.validate();

    std::vector<std::vector<std::string>> sources, outputs;
    std::vector<std::vector<std::vector<std::string>>> references;
    std::vector<std::string> lines;
    for (const ParallelPair& pair : eval_pairs) {
        const Sentence decoded = decode(model, pair.source, dcfg);
        sources.push_back(pair.source.tokens);
        outputs.push_back(decoded.tokens);
        std::vector<std::vector<std::string>> refs;
        for (const Sentence& r : pair.references) refs.push_back(r.tokens);
        references.push_back(std::move(refs));
        lines.push_back(join_tokens(decoded.tokens));
    }
    const std::string out = opt_str(opts, "out");
    write_lines(out, lines);

    const std::string model_out = opt_str(opts, "model-out");
    if (!model_out.empty()) {
        save_seq2seq_checkpoint(model, model_out);
        std::cout << "wrote " << model_out << '\n';
    }

    write_json_file(scores_path(opts),
                    json{{"sari", sari_json(sari(sources, outputs, references))},
                         {"fkgl", fkgl(outputs)}});
    m.stats["train_pairs"] = static_cast<long>(train_pairs.size());
    m.stats["eval_sentences"] = static_cast<long>(eval_pairs.size());
    finish(m, out);
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

void cmd_score(const std::map<std::string, std::string>& opts) {
    const std::string task = opt_str(opts, "task");
    Manifest m = start_manifest("score", opts);
    const std::string out = opt_str(opts, "out");

    if (task == "ls") {
        const std::string dataset_path = opt_str(opts, "dataset");
        const std::string outputs_path = opt_str(opts, "ls-outputs");
        if (dataset_path.empty() || outputs_path.empty())
            throw UsageError("score --task ls needs --dataset and --ls-outputs");
        m.record_input(dataset_path);
        m.record_input(outputs_path);
        const std::vector<LsInstance> dataset = load_ls_dataset(dataset_path);
        const std::vector<LsOutput> rows = read_ls_outputs(outputs_path);
        if (rows.size() != dataset.size())
            throw FormatError(outputs_path + " has " + std::to_string(rows.size()) +
                              " rows but the dataset has " + std::to_string(dataset.size()));
        std::vector<std::vector<std::string>> candidates;
        std::vector<std::string> chosen, targets;
        std::vector<std::set<std::string>> gold;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string expected = dataset[i].tokens[dataset[i].target_index];
            if (lower_ascii(rows[i].target) != lower_ascii(expected))
                throw FormatError(outputs_path + " row " + std::to_string(i + 1) + ": target '" +
                                  rows[i].target + "' does not match the dataset's '" + expected +
                                  "'");
            std::vector<std::string> words;
            for (const std::string& w : rows[i].candidates) words.push_back(lower_ascii(w));
            candidates.push_back(std::move(words));
            chosen.push_back(lower_ascii(rows[i].chosen));
            targets.push_back(lower_ascii(expected));
            gold.push_back(dataset[i].gold);
        }
        const SgScore sg = sg_prf(candidates, gold);
        const PipelineScore pipe = pipeline_pa(chosen, gold, targets);
        write_json_file(out, json{{"sg",
                                   {{"precision", sg.precision},
                                    {"recall", sg.recall},
                                    {"f1", sg.f1}}},
                                  {"pipeline",
                                   {{"precision", pipe.precision},
                                    {"accuracy", pipe.accuracy}}}});
        m.stats["instances"] = static_cast<long>(rows.size());
        finish(m, out);
        return;
    }
    if (task == "ss") {
        const std::string src_path = opt_str(opts, "src");
        const std::string outputs_path = opt_str(opts, "outputs");
        const std::vector<std::string> ref_paths = split_list(opt_str(opts, "refs"));
        if (src_path.empty() || outputs_path.empty() || ref_paths.empty())
            throw UsageError("score --task ss needs --src, --outputs, and --refs");
        m.record_input(src_path);
        m.record_input(outputs_path);
        for (const std::string& p : ref_paths) m.record_input(p);
        const std::vector<ParallelPair> pairs = load_parallel_dataset(src_path, ref_paths);
        const std::vector<std::vector<std::string>> outputs = read_token_lines(outputs_path);
        if (outputs.size() != pairs.size())
            throw FormatError(outputs_path + " has " + std::to_string(outputs.size()) +
                              " lines but " + src_path + " has " + std::to_string(pairs.size()));
        std::vector<std::vector<std::string>> sources;
        std::vector<std::vector<std::vector<std::string>>> references;
        for (const ParallelPair& pair : pairs) {
            sources.push_back(pair.source.tokens);
            std::vector<std::vector<std::string>> refs;
            for (const Sentence& r : pair.references) refs.push_back(r.tokens);
            references.push_back(std::move(refs));
        }
        write_json_file(out, json{{"sari", sari_json(sari(sources, outputs, references))},
                                  {"fkgl", fkgl(outputs)}});
        m.stats["sentences"] = static_cast<long>(pairs.size());
        finish(m, out);
        return;
    }
    throw UsageError("unknown task '" + task + "' (expected ls or ss)");
}

// ---------------------------------------------------------------------------
// Dispatch and parsing
// ---------------------------------------------------------------------------

void dispatch(const std::string& name, const std::map<std::string, std::string>& opts) {
    if (name == "prepare") return cmd_prepare(opts);
    if (name == "gen-synth") return cmd_gen_synth(opts);
    if (name == "train-tagger") return cmd_train_tagger(opts);
    if (name == "pretrain") return cmd_pretrain(opts);
    if (name == "ablate") return cmd_ablate(opts);
    if (name == "eval-sg") return cmd_eval_sg(opts);
    if (name == "eval-pipeline") return cmd_eval_pipeline(opts);
    if (name == "eval-ss") return cmd_eval_ss(opts);
    if (name == "score") return cmd_score(opts);
    throw UsageError("unknown command '" + name + "'");
}

int run(int argc, const char* const* argv) {
    CLI::App app{"text simplification toolkit: selective-masking pretraining with"
                 " lexical and sentence simplification harnesses"};
    app.name("textsimp");
    app.set_version_flag("--version", kToolkitVersion);
    app.require_subcommand(0, 1);
    std::string from_manifest;
    app.add_option("--from-manifest", from_manifest,
                   "re-run a command exactly as recorded in its manifest");

    struct SubState {
        CLI::App* sub = nullptr;
        std::string config;
        std::map<std::string, std::string> values;
    };
    std::map<std::string, SubState> states;
    for (const SubSpec& spec : subcommand_specs()) {
        SubState& st = states[spec.name];
        st.sub = app.add_subcommand(spec.name, spec.help);
        st.sub->add_option("--config", st.config,
                           "flat `key = value` config file; flags take precedence");
        for (const OptSpec& o : spec.opts) {
            std::string help = o.help;
            if (o.def[0] != '\0') help += " [" + std::string(o.def) + "]";
            st.sub->add_option("--" + std::string(o.key), st.values[o.key], help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (!from_manifest.empty()) {
        if (!app.get_subcommands().empty())
            throw UsageError("--from-manifest replaces the subcommand; give one or the other");
        const Manifest manifest = Manifest::load(from_manifest);
        if (manifest.version != kToolkitVersion)
            throw FormatError("manifest " + from_manifest + " was written by version " +
                              manifest.version + "; this binary is " + kToolkitVersion);
        const SubSpec* spec = find_spec(manifest.command);
        if (!spec)
            throw FormatError("manifest " + from_manifest + " names unknown command '" +
                              manifest.command + "'");
        std::map<std::string, std::string> resolved = defaults_of(*spec);
        for (const auto& [key, value] : manifest.options) {
            if (!resolved.count(key))
                throw FormatError("manifest " + from_manifest + " has unknown option '" + key +
                                  "' for " + manifest.command);
            resolved[key] = value;
        }
        check_required(*spec, resolved);
        dispatch(manifest.command, resolved);
        return 0;
    }

    const std::vector<CLI::App*> parsed = app.get_subcommands();
    if (parsed.empty()) throw UsageError("no subcommand given (see --help)");
    const SubSpec& spec = *find_spec(parsed.front()->get_name());
    SubState& st = states.at(spec.name);

    std::map<std::string, std::string> resolved = defaults_of(spec);
    if (!st.config.empty()) {
        for (const auto& [key, value] : parse_config_file(st.config)) {
            if (!resolved.count(key))
                throw UsageError("unknown config key '" + key + "' for " + spec.name);
            resolved[key] = value;
        }
    }
    for (const OptSpec& o : spec.opts)
        if (st.sub->count("--" + std::string(o.key)) > 0) resolved[o.key] = st.values[o.key];
    check_required(spec, resolved);
    dispatch(spec.name, resolved);
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

std::string opt_str(const std::map<std::string, std::string>& opts, const std::string& key) {
    const auto it = opts.find(key);
    if (it == opts.end()) throw UsageError("unknown option '" + key + "'");
    return it->second;
}

int opt_int(const std::map<std::string, std::string>& opts, const std::string& key) {
    const std::string value = opt_str(opts, key);
    try {
        std::size_t idx = 0;
        const long parsed = std::stol(value, &idx);
        if (idx != value.size() || parsed < INT_MIN || parsed > INT_MAX)
            throw std::invalid_argument(value);
        return static_cast<int>(parsed);
    } catch (const std::exception&) {
        throw UsageError("option '" + key + "' expects an integer, got '" + value + "'");
    }
}

uint64_t opt_u64(const std::map<std::string, std::string>& opts, const std::string& key) {
    const std::string value = opt_str(opts, key);
    try {
        if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
        std::size_t idx = 0;
        const uint64_t parsed = std::stoull(value, &idx);
        if (idx != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw UsageError("option '" + key + "' expects a non-negative integer, got '" + value +
                         "'");
    }
}

double opt_double(const std::map<std::string, std::string>& opts, const std::string& key) {
    const std::string value = opt_str(opts, key);
    try {
        std::size_t idx = 0;
        const double parsed = std::stod(value, &idx);
        if (idx != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw UsageError("option '" + key + "' expects a number, got '" + value + "'");
    }
}

bool opt_bool(const std::map<std::string, std::string>& opts, const std::string& key) {
    const std::string value = lower_ascii(opt_str(opts, key));
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw UsageError("option '" + key + "' expects true or false, got '" + value + "'");
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty())
            throw FormatError(path + ":" + std::to_string(line_no) + ": empty key");
        pairs.emplace_back(key, trim(stripped.substr(eq + 1)));
    }
    return pairs;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        const std::string item = trim(csv.substr(start, comma - start));
        if (!item.empty()) items.push_back(item);
        start = comma + 1;
    }
    return items;
}

int run_cli(int argc, const char* const* argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("textsimp");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace textsimp
