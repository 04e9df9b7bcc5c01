#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/vocab.hpp"

namespace tokleak {

struct TokenSequence {
    std::vector<std::string> tokens;
    std::vector<int> lengths;  // Unicode scalar values, t_i = |r_i|

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

inline std::string detokenize(const TokenSequence& seq) {
    std::string out;
    for (const auto& t : seq.tokens) out += t;
    return out;
}

inline std::vector<int> lengths_of(const TokenSequence& seq) { return seq.lengths; }

// Greedy longest-match segmentation against the vocabulary. Word-initial
// spaces are part of the word tokens, punctuation stands alone, and any
// stretch with no vocabulary match falls back to single code points, so the
// function is total.
inline TokenSequence tokenize(std::string_view text, const Vocabulary& vocab) {
    TokenSequence seq;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t best = 0;
        std::size_t limit = std::min(vocab.max_token_bytes(), text.size() - pos);
        for (std::size_t len = limit; len >= 1; --len) {
            if (vocab.contains(text.substr(pos, len))) {
                best = len;
                break;
            }
        }
        if (best == 0) best = utf8_advance(text, pos);
        seq.tokens.emplace_back(text.substr(pos, best));
        seq.lengths.push_back(static_cast<int>(utf8_length(seq.tokens.back())));
        pos += best;
    }
    return seq;
}

// Wire-layer view: vendors count UTF-8 bytes, not code points. Identical on
// the ASCII corpora used throughout.
inline std::vector<int> token_byte_lengths(const TokenSequence& seq) {
    std::vector<int> bytes;
    bytes.reserve(seq.tokens.size());
    for (const auto& t : seq.tokens) bytes.push_back(static_cast<int>(t.size()));
    return bytes;
}

}  // namespace tokleak
