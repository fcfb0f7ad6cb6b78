#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "textsimp/corpus.hpp"
#include "textsimp/identify.hpp"
#include "textsimp/model.hpp"

namespace textsimp {

// Synthetic slot-filler text: fixed sentence frames whose open slots are
// filled from interchangeable word classes. Each class carries two
// disjoint filler sets — one rated easy, one rated hard — so the corpus
// has a known partition of content words for masking and probing
// experiments.

struct SlotClass {
    std::string name;
    std::vector<std::string> easy;
    std::vector<std::string> hard;
};

struct SynthSpec {
    std::vector<SlotClass> classes;
    // Sentence frames; a token of the form "<name>" is a slot drawing
    // from the class with that name.
    std::vector<std::vector<std::string>> frames;
    // Probability that a slot is filled from the easy set.
    double easy_fill_prob = 0.5;
    std::size_t sentences = 1000;
    uint64_t seed = 1;
};

// Token position of one filled slot within a generated corpus.
struct SlotRef {
    std::size_t sentence;
    int position;
};

struct SynthCorpus {
    std::vector<Sentence> sentences;
    std::vector<SlotRef> slots;  // every filled slot, in generation order
};

// The bundled frame and filler bank: four word classes, eight frames,
// all frame glue words drawn from a fixed function-word list.
SynthSpec default_synth_spec();

SynthCorpus generate_synth(const SynthSpec& spec);

// Word-score table covering every word the generator can emit: glue words 1.0,
// easy fillers 2.0, hard fillers 5.0 (threshold 4.0 splits them).
Lexicon synth_lexicon(const SynthSpec& spec);
void write_synth_lexicon(const SynthSpec& spec, const std::string& path);

// All easy fillers across classes, deduplicated, sorted.
std::vector<std::string> easy_fillers(const SynthSpec& spec);

// Slot probes as (sentence, slot position) pairs, written one per line as
// "tok tok ...\tposition".
void write_eval_slots(const SynthCorpus& corpus, const std::string& path);
std::vector<std::pair<Sentence, int>> load_eval_slots(const std::string& path);

// Masks each probe slot in turn and averages, over probes, the model's
// probability mass on `easy_words` at the masked position.
double mean_easy_mass(const ModelParams& params,
                      const std::vector<std::pair<Sentence, int>>& slots,
                      const std::vector<std::string>& easy_words);

}  // namespace textsimp
