#include "textsimp/text.hpp"

#include <cctype>

namespace textsimp {

namespace {

bool word_char(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

bool space_char(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return u < 0x80 && std::isspace(u) != 0;
}

void split_chunk(const std::string& chunk, std::vector<std::string>& out) {
    size_t begin = 0;
    size_t end = chunk.size();
    size_t lead = begin;
    while (lead < end && !word_char(chunk[lead])) ++lead;
    if (lead == end) {
        // pure punctuation chunk: one token per character
        for (size_t i = begin; i < end; ++i) out.push_back(chunk.substr(i, 1));
        return;
    }
    size_t trail = end;
    while (trail > lead && !word_char(chunk[trail - 1])) --trail;
    for (size_t i = begin; i < lead; ++i) out.push_back(chunk.substr(i, 1));
    out.push_back(chunk.substr(lead, trail - lead));
    for (size_t i = trail; i < end; ++i) out.push_back(chunk.substr(i, 1));
}

}  // namespace

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && space_char(line[i])) ++i;
        size_t j = i;
        while (j < line.size() && !space_char(line[j])) ++j;
        if (j > i) split_chunk(line.substr(i, j - i), tokens);
        i = j;
    }
    return tokens;
}

bool letter_bearing(const std::string& token) {
    for (char c : token) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::isalpha(u) != 0) return true;
    }
    return false;
}

std::string lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string normalize_sentence(const std::vector<std::string>& tokens) {
    return lower_ascii(join_tokens(tokens));
}

std::string normalize_sentence(const std::string& line) {
    return normalize_sentence(tokenize(line));
}

}  // namespace textsimp
