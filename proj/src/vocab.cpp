#include "textsimp/vocab.hpp"

#include <algorithm>
#include <map>

#include "textsimp/errors.hpp"
#include "textsimp/text.hpp"

namespace textsimp {

namespace {
const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> s = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
    return s;
}
}  // namespace

void Vocab::push(const std::string& token) {
    token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
    id_to_token_.push_back(token);
}

Vocab Vocab::build(const std::vector<Sentence>& corpus, int min_freq) {
    std::map<std::string, long> freq;
    for (const Sentence& s : corpus)
        for (const std::string& t : s.tokens) ++freq[lower_ascii(t)];

    std::vector<std::pair<std::string, long>> entries(freq.begin(), freq.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    for (const std::string& s : special_tokens()) v.push(s);
    for (const auto& [token, count] : entries)
        if (count >= min_freq) v.push(token);
    return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
    const auto& specials = special_tokens();
    if (tokens.size() < specials.size())
        throw FormatError("vocabulary list shorter than the special-symbol block");
    for (size_t i = 0; i < specials.size(); ++i)
        if (tokens[i] != specials[i])
            throw FormatError("vocabulary list does not start with the canonical specials: got '" +
                              tokens[i] + "' at position " + std::to_string(i));
    Vocab v;
    for (const std::string& t : tokens) {
        if (v.token_to_id_.count(t) > 0) throw FormatError("duplicate vocabulary token: " + t);
        v.push(t);
    }
    return v;
}

int Vocab::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    it = token_to_id_.find(lower_ascii(token));
    if (it != token_to_id_.end()) return it->second;
    return kUnk;
}

bool Vocab::has(const std::string& token) const {
    return token_to_id_.count(token) > 0 || token_to_id_.count(lower_ascii(token)) > 0;
}

std::vector<int> Vocab::encode(const std::vector<std::string>& words) const {
    std::vector<int> ids;
    ids.reserve(words.size());
    for (const std::string& w : words) ids.push_back(id(w));
    return ids;
}

}  // namespace textsimp
