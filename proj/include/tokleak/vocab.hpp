#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "tokleak/core.hpp"

namespace tokleak {

inline constexpr std::string_view kPunctuation = ".,!?:;'\"";

inline bool is_punct_token(std::string_view tok) {
    return tok.size() == 1 && kPunctuation.find(tok[0]) != std::string_view::npos;
}

// Set of token surface forms. Word tokens carry their leading space as part
// of the token; every supported punctuation character is its own token.
class Vocabulary {
public:
    Vocabulary() = default;

    explicit Vocabulary(std::string name) : name_(std::move(name)) { add_punctuation(); }

    void add(std::string token) {
        if (token.empty()) throw Error("empty token in vocabulary");
        max_token_bytes_ = std::max(max_token_bytes_, token.size());
        tokens_.insert(std::move(token));
    }

    void add_word(const std::string& word) {
        add(word);
        add(" " + word);
    }

    bool contains(std::string_view token) const {
        return tokens_.count(std::string(token)) > 0;
    }

    std::size_t size() const { return tokens_.size(); }
    std::size_t max_token_bytes() const { return max_token_bytes_; }
    const std::string& name() const { return name_; }
    const std::unordered_set<std::string>& tokens() const { return tokens_; }

    // Word list + punctuation + the apostrophe suffixes GPT-style tokenizers
    // emit ("I|'m").
    static Vocabulary from_words(const std::vector<std::string>& words,
                                 std::string name = "wordlist") {
        Vocabulary v(std::move(name));
        for (const auto& w : words) v.add_word(w);
        for (const char* suffix : {"'m", "'s", "'t", "'re", "'ve", "'ll", "'d"}) {
            v.add(suffix);
        }
        return v;
    }

private:
    void add_punctuation() {
        for (char c : kPunctuation) add(std::string(1, c));
    }

    std::unordered_set<std::string> tokens_;
    std::string name_;
    std::size_t max_token_bytes_ = 0;
};

// Vocabulary file: UTF-8, one token per line, literal leading space written
// as U+2581 (the SentencePiece convention).
inline Vocabulary load_vocabulary(std::istream& in, std::string name = "file") {
    static const std::string kUnderscore = "\xE2\x96\x81";  // U+2581
    Vocabulary v(std::move(name));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string token;
        std::size_t pos = 0;
        while (line.compare(pos, kUnderscore.size(), kUnderscore) == 0) {
            token += ' ';
            pos += kUnderscore.size();
        }
        token += line.substr(pos);
        v.add(std::move(token));
    }
    return v;
}

inline Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vocabulary file: " + path);
    return load_vocabulary(in, path);
}

inline void save_vocabulary(const Vocabulary& v, std::ostream& out) {
    std::vector<std::string> sorted(v.tokens().begin(), v.tokens().end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& tok : sorted) {
        std::string line;
        std::size_t pos = 0;
        while (pos < tok.size() && tok[pos] == ' ') {
            line += "\xE2\x96\x81";
            ++pos;
        }
        line += tok.substr(pos);
        out << line << "\n";
    }
}

}  // namespace tokleak
