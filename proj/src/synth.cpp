#include "textsimp/synth.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

namespace {

bool is_slot(const std::string& token) {
    return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

std::string slot_name(const std::string& token) { return token.substr(1, token.size() - 2); }

void validate_spec(const SynthSpec& spec) {
    if (spec.easy_fill_prob < 0.0 || spec.easy_fill_prob > 1.0)
        throw UsageError("easy_fill_prob must be in [0, 1]");
    if (spec.frames.empty()) throw UsageError("synth spec has no frames");
    std::set<std::string> known;
    for (const SlotClass& c : spec.classes) {
        if (c.easy.empty() || c.hard.empty())
            throw UsageError("slot class '" + c.name + "' has an empty filler set");
        known.insert(c.name);
    }
    for (const auto& frame : spec.frames)
        for (const std::string& tok : frame)
            if (is_slot(tok) && !known.count(slot_name(tok)))
                throw UsageError("frame references unknown slot class '" + slot_name(tok) + "'");
}

}  // namespace

SynthSpec default_synth_spec() {
    SynthSpec spec;
    spec.classes = {
        {"size",
         {"big", "small", "huge", "tiny"},
         {"colossal", "minuscule", "immense", "diminutive"}},
        {"mood",
         {"happy", "sad", "angry", "calm"},
         {"euphoric", "despondent", "irate", "placid"}},
        {"pace",
         {"fast", "slow", "quick", "steady"},
         {"rapid", "sluggish", "brisk", "languid"}},
        {"look",
         {"pretty", "ugly", "clean", "dark"},
         {"exquisite", "hideous", "pristine", "dusky"}},
    };
    spec.frames = {
        {"the", "<size>", "house", "on", "the", "hill", "looks", "<look>", "."},
        {"a", "<mood>", "man", "walked", "down", "the", "long", "road", "."},
        {"the", "woman", "seemed", "<mood>", "and", "<pace>", "all", "day", "."},
        {"that", "<size>", "garden", "near", "the", "gate", "is", "<look>", "."},
        {"his", "<size>", "boat", "moved", "at", "a", "<pace>", "speed", "."},
        {"her", "<look>", "dress", "was", "<size>", "and", "very", "<look>", "."},
        {"the", "<pace>", "train", "passed", "the", "<size>", "station", "today", "."},
        {"my", "<mood>", "friend", "told", "a", "<look>", "story", "last", "night", "."},
    };
    return spec;
}

SynthCorpus generate_synth(const SynthSpec& spec) {
    validate_spec(spec);
    std::map<std::string, const SlotClass*> by_name;
    for (const SlotClass& c : spec.classes) by_name[c.name] = &c;

    Rng rng(derive_seed(spec.seed, "synth"));
    SynthCorpus corpus;
    corpus.sentences.reserve(spec.sentences);
    for (std::size_t i = 0; i < spec.sentences; ++i) {
        const auto& frame = spec.frames[rng.below(spec.frames.size())];
        Sentence s;
        s.source_id = "synth";
        s.tokens.reserve(frame.size());
        for (const std::string& tok : frame) {
            if (!is_slot(tok)) {
                s.tokens.push_back(tok);
                continue;
            }
            const SlotClass& c = *by_name.at(slot_name(tok));
            const bool easy = rng.uniform() < spec.easy_fill_prob;
            const auto& fillers = easy ? c.easy : c.hard;
            corpus.slots.push_back({i, static_cast<int>(s.tokens.size())});
            s.tokens.push_back(fillers[rng.below(fillers.size())]);
        }
        corpus.sentences.push_back(std::move(s));
    }
    return corpus;
}

Lexicon synth_lexicon(const SynthSpec& spec) {
    Lexicon lex;
    for (const auto& frame : spec.frames)
        for (const std::string& tok : frame)
            if (!is_slot(tok) && letter_bearing(tok)) lex.scores[lower_ascii(tok)] = 1.0;
    for (const SlotClass& c : spec.classes) {
        for (const std::string& w : c.easy) lex.scores[lower_ascii(w)] = 2.0;
        for (const std::string& w : c.hard) lex.scores[lower_ascii(w)] = 5.0;
    }
    return lex;
}

void write_synth_lexicon(const SynthSpec& spec, const std::string& path) {
    const Lexicon lex = synth_lexicon(spec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [word, score] : lex.scores) out << word << '\t' << score << '\n';
}

std::vector<std::string> easy_fillers(const SynthSpec& spec) {
    std::set<std::string> words;
    for (const SlotClass& c : spec.classes)
        for (const std::string& w : c.easy) words.insert(lower_ascii(w));
    return {words.begin(), words.end()};
}

void write_eval_slots(const SynthCorpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const SlotRef& slot : corpus.slots)
        out << join_tokens(corpus.sentences[slot.sentence].tokens) << '\t' << slot.position
            << '\n';
}

std::vector<std::pair<Sentence, int>> load_eval_slots(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::vector<std::pair<Sentence, int>> slots;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected 2 tab fields");
        Sentence s;
        s.source_id = path;
        std::istringstream words(line.substr(0, tab));
        std::string w;
        while (words >> w) s.tokens.push_back(w);
        int position = 0;
        try {
            std::size_t used = 0;
            position = std::stoi(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": bad slot position");
        }
        if (s.tokens.empty() || position < 0 || position >= static_cast<int>(s.tokens.size()))
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": slot position out of range");
        slots.emplace_back(std::move(s), position);
    }
    return slots;
}

double mean_easy_mass(const ModelParams& params,
                      const std::vector<std::pair<Sentence, int>>& slots,
                      const std::vector<std::string>& easy_words) {
    if (slots.empty()) throw UsageError("no probe slots given");
    std::set<int> easy_ids;
    for (const std::string& w : easy_words) {
        const int id = params.vocab.id(w);
        if (id != Vocab::kUnk) easy_ids.insert(id);
    }
    double total = 0.0;
    for (const auto& [sentence, position] : slots) {
        std::vector<int> ids = params.vocab.encode(sentence.tokens);
        const int n = static_cast<int>(ids.size()) + 2;
        if (n > params.config.max_seq_len)
            throw UsageError("probe sentence longer than max_seq_len");
        MaskedInstance inst;
        inst.input_ids.push_back(Vocab::kCls);
        inst.input_ids.insert(inst.input_ids.end(), ids.begin(), ids.end());
        inst.input_ids.push_back(Vocab::kSep);
        inst.targets.push_back(inst.input_ids[position + 1]);
        inst.input_ids[position + 1] = Vocab::kMask;
        inst.mask_positions.push_back(position + 1);
        inst.n = n;
        const std::vector<std::vector<double>> dists = forward_mlm(params, inst);
        double mass = 0.0;
        for (const int id : easy_ids) mass += dists[0][id];
        total += mass;
    }
    return total / static_cast<double>(slots.size());
}

}  // namespace textsimp
