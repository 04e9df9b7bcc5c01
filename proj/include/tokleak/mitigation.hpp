#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/extraction.hpp"
#include "tokleak/ngram.hpp"
#include "tokleak/policy.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/simulator.hpp"

namespace tokleak {

struct Mitigation {
    enum class Kind { Pad, Group, Batch };
    Kind kind = Kind::Batch;
    PaddingModel pad;  // Pad
    int group_n = 2;   // Group

    static Mitigation Pad_(PaddingModel p) { return {Kind::Pad, p, 2}; }
    static Mitigation Group_(int n) { return {Kind::Group, {}, n}; }
    static Mitigation Batch_() { return {Kind::Batch, {}, 2}; }
};

inline TransmissionPolicy apply_mitigation(TransmissionPolicy policy, const Mitigation& m) {
    switch (m.kind) {
        case Mitigation::Kind::Pad:
            policy.padding = m.pad;
            break;
        case Mitigation::Kind::Group:
            if (m.group_n < 2) throw Error("apply_mitigation: group size must be >= 2");
            policy.group_size = m.group_n;
            policy.pairing = false;
            policy.buffering.reset();
            break;
        case Mitigation::Kind::Batch:
            policy.batch = true;
            policy.buffering.reset();
            break;
    }
    validate(policy);
    return policy;
}

struct LeakageReport {
    double exact_recovery_rate = 0.0;   // fraction of token lengths recovered exactly
    double residual_entropy_bits = 0.0; // mean log2(candidate count) per segment
    bool entropy_is_lower_bound = false;
    // Header-adjusted content ratio minus one. Negative for mitigations
    // that reorganize rather than inflate (grouping, batching).
    double bandwidth_overhead = 0.0;
};

namespace detail {

// log-space candidate counting, immune to the enumeration explosion guard.
// Slots with no dictionary match contribute zero bits and set the
// lower-bound flag.
inline std::pair<double, bool> log2_candidates(const std::vector<int>& T,
                                               const std::vector<std::string>& dictionary,
                                               bool mid_sentence) {
    std::map<std::size_t, std::uint64_t> word_lengths;
    std::uint64_t punct_count = 0;
    for (const auto& entry : dictionary) {
        if (is_punct_token(entry)) {
            ++punct_count;
        } else {
            ++word_lengths[utf8_length(entry)];
        }
    }
    double bits = 0.0;
    bool partial = false;
    for (std::size_t i = 0; i < T.size(); ++i) {
        const bool spaced = mid_sentence || i > 0;
        const int word_len = T[i] - (spaced ? 1 : 0);
        std::uint64_t slot = 0;
        if (word_len >= 1) {
            auto it = word_lengths.find(static_cast<std::size_t>(word_len));
            if (it != word_lengths.end()) slot += it->second;
        }
        if (T[i] == 1) slot += punct_count;
        if (slot == 0) {
            partial = true;
        } else {
            bits += std::log2(static_cast<double>(slot));
        }
    }
    return {bits, partial};
}

inline std::vector<int> recover_lengths(const Trace& trace, const TransmissionPolicy& policy,
                                        const std::string& stream_id) {
    auto packets = filter_stream(trace, stream_id, Direction::ServerToClient);
    auto payloads = payload_sizes(packets);
    if (payloads.empty()) return {};
    try {
        if (policy.mode == TransmissionMode::PerToken) {
            return extract_pertoken(payloads, policy.metadata_overhead_h).lengths;
        }
        IdentifyOptions iopts;
        iopts.min_run = 1;
        iopts.max_fragment_payload = policy.max_fragment_payload;
        iopts.fragment_header = policy.fragment_header;
        MessageSizeSequence msgs = identify_messages(payloads, iopts);
        ExtractOptions eopts;
        eopts.metadata_overhead_h = policy.metadata_overhead_h;
        eopts.preamble_extra_bytes = policy.preamble_extra_bytes;
        return extract_cumulative(msgs, eopts).lengths;
    } catch (const InvalidSequence&) {
    } catch (const OverheadTooLarge&) {
    } catch (const NoResponseFound&) {
    }
    return {};
}

// Greedy alignment of recovered lengths against the true per-token byte
// lengths; a token counts as recovered when its length appears as its own
// value at the right position.
inline std::size_t count_exact_recoveries(const std::vector<int>& recovered,
                                          const std::vector<int>& truth) {
    std::size_t matches = 0;
    if (recovered.size() == truth.size()) {
        // One observation per token; compare positionwise.
        for (std::size_t i = 0; i < truth.size(); ++i) matches += recovered[i] == truth[i];
        return matches;
    }
    std::size_t tp = 0;
    for (int len : recovered) {
        if (tp >= truth.size()) break;
        if (len == truth[tp]) {
            ++matches;
            ++tp;
        } else {
            std::int64_t covered = 0;
            while (tp < truth.size() && covered < len) covered += truth[tp++];
        }
    }
    return matches;
}

inline std::int64_t content_bytes(const GroundTruth& truth, const TransmissionPolicy& policy) {
    std::int64_t total = 0;
    for (auto m : truth.message_sizes) total += m - policy.metadata_overhead_h;
    return total;
}

}  // namespace detail

// Simulate each response under the mitigated policy, run the attacker-side
// extraction, and quantify what still leaks plus what the defense costs.
inline LeakageReport measure_leakage(const std::vector<std::string>& corpus,
                                     const TransmissionPolicy& base,
                                     const std::optional<Mitigation>& mitigation,
                                     const Vocabulary& vocab,
                                     const std::vector<std::string>& dictionary) {
    if (corpus.empty()) throw Error("measure_leakage: empty corpus");
    TransmissionPolicy mitigated = mitigation ? apply_mitigation(base, *mitigation) : base;

    std::size_t total_tokens = 0;
    std::size_t recovered_tokens = 0;
    double entropy_sum = 0.0;
    std::size_t entropy_segments = 0;
    bool entropy_partial = false;
    std::int64_t base_bytes = 0;
    std::int64_t mitigated_bytes = 0;

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        TransmissionPolicy base_i = base;
        TransmissionPolicy mit_i = mitigated;
        base_i.rng_seed = base.rng_seed + i;
        mit_i.rng_seed = mitigated.rng_seed + i;

        auto [base_trace, base_truth] = simulate_response(corpus[i], vocab, base_i);
        auto [mit_trace, mit_truth] = simulate_response(corpus[i], vocab, mit_i);
        base_bytes += detail::content_bytes(base_truth, base_i);
        mitigated_bytes += detail::content_bytes(mit_truth, mit_i);

        std::vector<int> recovered = detail::recover_lengths(mit_trace, mit_i, "r0");
        total_tokens += mit_truth.token_byte_lengths.size();
        recovered_tokens +=
            detail::count_exact_recoveries(recovered, mit_truth.token_byte_lengths);

        if (!recovered.empty()) {
            bool ok = true;
            for (int len : recovered) ok = ok && len >= 1;
            if (ok) {
                SegmentedSequence segs = segment(recovered);
                for (std::size_t s = 0; s < segs.segments.size(); ++s) {
                    auto [bits, partial] =
                        detail::log2_candidates(segs.segments[s], dictionary, s > 0);
                    entropy_sum += bits;
                    entropy_partial = entropy_partial || partial;
                    ++entropy_segments;
                }
            }
        }
    }

    LeakageReport report;
    report.exact_recovery_rate =
        total_tokens == 0 ? 0.0
                          : static_cast<double>(recovered_tokens) / static_cast<double>(total_tokens);
    report.residual_entropy_bits =
        entropy_segments == 0 ? 0.0 : entropy_sum / static_cast<double>(entropy_segments);
    report.entropy_is_lower_bound = entropy_partial;
    report.bandwidth_overhead =
        base_bytes == 0 ? 0.0
                        : static_cast<double>(mitigated_bytes) / static_cast<double>(base_bytes) - 1.0;
    return report;
}

}  // namespace tokleak
