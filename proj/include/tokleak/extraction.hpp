#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/trace.hpp"

namespace tokleak {

struct MessageSizeSequence {
    std::vector<std::int64_t> sizes;  // |m_0| ... |m_n|
    std::size_t start_packet_index = 0;
};

enum class Provenance { Exact, BufferedSuspect };

struct TokenLengthSequence {
    std::vector<int> lengths;  // t_i >= 1
    Provenance provenance = Provenance::Exact;
    int hidden_prefix_count = 0;
};

struct IdentifyOptions {
    std::size_t min_run = 3;        // shortest increasing run accepted as a response
    int max_fragment_payload = 0;   // 0 = stream is not fragmented
    int fragment_header = 0;
    std::size_t control_lookahead = 2;
};

namespace detail {

// Collapse saw-tooth fragments back into message sizes: a run of
// maximum-size packets plus the following smaller packet is one message.
inline std::vector<std::int64_t> reassemble_fragments(const std::vector<std::int64_t>& payloads,
                                                      int max_payload, int header) {
    std::vector<std::int64_t> messages;
    std::int64_t pending = 0;
    bool in_fragment = false;
    for (auto p : payloads) {
        if (p == max_payload) {
            pending += p - header;
            in_fragment = true;
        } else {
            messages.push_back(pending + p - header);
            pending = 0;
            in_fragment = false;
        }
    }
    if (in_fragment) messages.push_back(pending);  // stream cut mid-message
    return messages;
}

}  // namespace detail

// Locate the response inside one direction of one stream: reassemble
// fragments, find the longest strictly-increasing run of message sizes,
// drop control packets that break continuity, and backtrack to the run's
// first message.
inline MessageSizeSequence identify_messages(const std::vector<std::int64_t>& payloads,
                                             const IdentifyOptions& opts = {}) {
    std::vector<std::int64_t> messages = payloads;
    if (opts.max_fragment_payload > 0) {
        messages = detail::reassemble_fragments(payloads, opts.max_fragment_payload,
                                                opts.fragment_header);
    }

    MessageSizeSequence best;
    for (std::size_t start = 0; start < messages.size(); ++start) {
        std::vector<std::int64_t> run = {messages[start]};
        std::int64_t last = messages[start];
        for (std::size_t i = start + 1; i < messages.size(); ++i) {
            if (messages[i] > last) {
                run.push_back(messages[i]);
                last = messages[i];
                continue;
            }
            // A size that breaks the increase is a control packet if
            // skipping it restores the trend within the lookahead window.
            bool resumes = false;
            for (std::size_t j = i + 1; j <= i + opts.control_lookahead && j < messages.size(); ++j) {
                if (messages[j] > last) {
                    resumes = true;
                    break;
                }
                if (messages[j] > messages[i]) break;  // re-admitting would fit better
            }
            if (!resumes) break;
        }
        if (run.size() > best.sizes.size()) {
            best.sizes = std::move(run);
            best.start_packet_index = start;
        }
    }
    if (best.sizes.size() < opts.min_run) {
        throw NoResponseFound("identify_messages: no increasing run of length >= " +
                              std::to_string(opts.min_run));
    }
    return best;
}

inline MessageSizeSequence identify_messages(const std::vector<PacketRecord>& packets,
                                             const IdentifyOptions& opts = {}) {
    return identify_messages(payload_sizes(packets), opts);
}

struct ExtractOptions {
    std::optional<int> metadata_overhead_h;  // known h recovers the first token
    int preamble_extra_bytes = 0;
    int buffered_delta_threshold = 15;  // deltas above this look like merged tokens
};

// Eq. 1: t_i = |m_i| - |m_{i-1}|. The first token is only recoverable when
// the metadata size is known; otherwise it is reported as a hidden prefix.
inline TokenLengthSequence extract_cumulative(const MessageSizeSequence& msgs,
                                              const ExtractOptions& opts = {}) {
    TokenLengthSequence out;
    if (msgs.sizes.empty()) {
        out.hidden_prefix_count = 1;
        return out;
    }
    for (std::size_t i = 1; i < msgs.sizes.size(); ++i) {
        if (msgs.sizes[i] <= msgs.sizes[i - 1]) {
            throw InvalidSequence("extract_cumulative: sizes not strictly increasing at index " +
                                  std::to_string(i));
        }
        out.lengths.push_back(static_cast<int>(msgs.sizes[i] - msgs.sizes[i - 1]));
    }
    if (opts.metadata_overhead_h) {
        std::int64_t first =
            msgs.sizes[0] - *opts.metadata_overhead_h - opts.preamble_extra_bytes;
        if (first < 1) {
            throw InvalidSequence("extract_cumulative: first message smaller than metadata");
        }
        out.lengths.insert(out.lengths.begin(), static_cast<int>(first));
    } else {
        out.hidden_prefix_count = 1;
    }
    for (int len : out.lengths) {
        if (len > opts.buffered_delta_threshold) {
            out.provenance = Provenance::BufferedSuspect;
            break;
        }
    }
    return out;
}

inline TokenLengthSequence extract_pertoken(const std::vector<std::int64_t>& packets, int h) {
    TokenLengthSequence out;
    for (auto p : packets) {
        if (p <= h) {
            throw OverheadTooLarge("extract_pertoken: packet of " + std::to_string(p) +
                                   " bytes <= overhead " + std::to_string(h));
        }
        out.lengths.push_back(static_cast<int>(p - h));
    }
    return out;
}

// Lengths file: `#hidden_prefix=N` header comment, one integer per line.
inline void save_lengths(const TokenLengthSequence& seq, std::ostream& out) {
    out << "#hidden_prefix=" << seq.hidden_prefix_count << "\n";
    if (seq.provenance == Provenance::BufferedSuspect) out << "#provenance=buffered_suspect\n";
    for (int len : seq.lengths) out << len << "\n";
}

inline TokenLengthSequence load_lengths(std::istream& in) {
    TokenLengthSequence seq;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#hidden_prefix=", 0) == 0) {
                seq.hidden_prefix_count = std::stoi(line.substr(15));
            } else if (line == "#provenance=buffered_suspect") {
                seq.provenance = Provenance::BufferedSuspect;
            }
            continue;
        }
        seq.lengths.push_back(std::stoi(line));
    }
    return seq;
}

// Smallest packet is assumed to carry a single-character token.
inline int estimate_overhead(const std::vector<std::int64_t>& packets) {
    if (packets.empty()) throw Error("estimate_overhead: no packets");
    return static_cast<int>(*std::min_element(packets.begin(), packets.end()) - 1);
}

}  // namespace tokleak
