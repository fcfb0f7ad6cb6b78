#pragma once

#include <string>
#include <vector>

namespace textsimp {

// Word-level tokenization: whitespace split, then leading/trailing
// punctuation detached into separate tokens. Interior punctuation
// (don't, co-op) stays attached. Bytes >= 0x80 count as word characters
// so UTF-8 words survive intact.
std::vector<std::string> tokenize(const std::string& line);

// True if the token contains at least one ASCII letter. Pure numbers and
// punctuation are not words for filtering and are always tagged complex.
bool letter_bearing(const std::string& token);

std::string lower_ascii(const std::string& s);

// Canonical sentence form for dedup: tokens joined by single spaces,
// lowercased.
std::string normalize_sentence(const std::vector<std::string>& tokens);
std::string normalize_sentence(const std::string& line);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace textsimp
