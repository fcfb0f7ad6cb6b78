#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "textsimp/corpus.hpp"

namespace textsimp {

// Word-level vocabulary over lowercased corpus tokens. Ids 0..4 are the
// special symbols, in this fixed order.
class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;
    static constexpr int kMask = 4;
    static constexpr int kNumSpecials = 5;

    // Frequency-sorted vocabulary (ties broken alphabetically) of all
    // lowercased tokens appearing at least min_freq times.
    static Vocab build(const std::vector<Sentence>& corpus, int min_freq = 1);

    // Rebuilds from a saved token list; the list must start with the five
    // specials in canonical order.
    static Vocab from_tokens(const std::vector<std::string>& tokens);

    int size() const { return static_cast<int>(id_to_token_.size()); }

    // Exact match first (so special symbols resolve), then lowercased,
    // then [UNK].
    int id(const std::string& token) const;

    const std::string& token(int id) const { return id_to_token_.at(id); }

    bool has(const std::string& token) const;

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    std::vector<int> encode(const std::vector<std::string>& words) const;

private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> token_to_id_;

    void push(const std::string& token);
};

}  // namespace textsimp
