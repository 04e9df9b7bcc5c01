#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/tokenizer.hpp"

namespace tokleak {

enum class BoundaryKind { Punctuation, ListItem, ForcedMerge };

struct SegmentedSequence {
    std::vector<std::vector<int>> segments;
    std::vector<BoundaryKind> boundary_kinds;  // one per boundary, segments-1 entries

    std::vector<int> flatten() const {
        std::vector<int> all;
        for (const auto& s : segments) all.insert(all.end(), s.begin(), s.end());
        return all;
    }
};

inline constexpr std::size_t kMinSegmentTokens = 10;

// Sentence-boundary heuristic over token lengths: split after every
// length-1 token (almost certainly punctuation), merge sub-10-token
// segments into their successor until stable, and move a trailing (3,1,1)
// pattern (":\n\n1.") to the start of the next segment so enumerated list
// items begin with their enumeration token. A short tail with no successor
// merges backward.
inline SegmentedSequence segment(const std::vector<int>& lengths) {
    SegmentedSequence out;
    const std::size_t n = lengths.size();
    if (n == 0) return out;
    for (int len : lengths) {
        if (len < 1) throw Error("segment: token lengths must be >= 1");
    }

    std::map<std::size_t, BoundaryKind> cuts;  // cut position -> kind
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (lengths[i] == 1) cuts.emplace(i + 1, BoundaryKind::Punctuation);
    }

    // List-item relocation: the two 1s must be the final elements before a
    // boundary, i.e. the pattern sits at (i-2, i-1, i) with a cut after i.
    for (std::size_t i = 2; i + 1 < n; ++i) {
        if (lengths[i - 2] == 3 && lengths[i - 1] == 1 && lengths[i] == 1) {
            cuts.erase(i);
            cuts.erase(i + 1);
            if (i >= 3) cuts[i - 2] = BoundaryKind::ListItem;
            ++i;  // patterns do not overlap
        }
    }

    std::vector<std::size_t> pos;
    std::vector<BoundaryKind> kinds;
    pos.push_back(0);
    for (const auto& [cut, kind] : cuts) {
        pos.push_back(cut);
        kinds.push_back(kind);
    }
    pos.push_back(n);

    auto seg_size = [&](std::size_t s) { return pos[s + 1] - pos[s]; };
    auto merge_with_next = [&](std::size_t s) {
        pos.erase(pos.begin() + s + 1);
        kinds.erase(kinds.begin() + s);
    };

    // Merge to fixpoint, forward direction first.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s + 2 < pos.size(); ++s) {
            if (seg_size(s) < kMinSegmentTokens && s + 2 < pos.size()) {
                merge_with_next(s);
                changed = true;
                break;
            }
        }
    }
    // A short final segment has no successor; fold it backward instead.
    if (pos.size() > 2 && seg_size(pos.size() - 2) < kMinSegmentTokens) {
        merge_with_next(pos.size() - 3);
    }

    for (std::size_t s = 0; s + 1 < pos.size(); ++s) {
        out.segments.emplace_back(lengths.begin() + pos[s], lengths.begin() + pos[s + 1]);
    }
    out.boundary_kinds = std::move(kinds);
    return out;
}

// Segments file: one segment per line, lengths space-separated.
inline void save_segments(const SegmentedSequence& segs, std::ostream& out) {
    for (const auto& s : segs.segments) {
        for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
        out << "\n";
    }
}

inline std::vector<std::vector<int>> load_segment_lines(std::istream& in) {
    std::vector<std::vector<int>> segments;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<int> seg;
        std::size_t pos = 0;
        while (pos < line.size()) {
            std::size_t next = line.find(' ', pos);
            if (next == std::string::npos) next = line.size();
            if (next > pos) seg.push_back(std::stoi(line.substr(pos, next - pos)));
            pos = next + 1;
        }
        if (!seg.empty()) segments.push_back(std::move(seg));
    }
    return segments;
}

// Segment plain text by tokenizing it and mapping the length-segmentation
// back to character offsets. Concatenation of the pieces is the input.
inline std::vector<std::string> segment_text(const std::string& text, const Vocabulary& vocab) {
    if (text.empty()) return {};
    TokenSequence seq = tokenize(text, vocab);
    SegmentedSequence segs = segment(seq.lengths);
    std::vector<std::string> pieces;
    std::size_t tok = 0;
    for (const auto& s : segs.segments) {
        std::string piece;
        for (std::size_t i = 0; i < s.size(); ++i) piece += seq.tokens[tok++];
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

}  // namespace tokleak
