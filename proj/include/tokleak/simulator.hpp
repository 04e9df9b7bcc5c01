#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/policy.hpp"
#include "tokleak/tokenizer.hpp"
#include "tokleak/trace.hpp"

namespace tokleak {

// Saw-tooth fragmentation of an oversized message. Above the threshold
// (max_payload - header) the message spills into floor(m/threshold) packets
// of the maximum payload size plus one remainder packet of
// (m mod threshold) + header bytes. A zero remainder still emits the
// header-only trailing fragment; defragment() accepts both variants.
inline std::vector<std::int64_t> fragment_message(std::int64_t message_size,
                                                  int max_payload, int header) {
    if (max_payload <= header) throw Error("fragment_message: max_payload <= header");
    const std::int64_t threshold = max_payload - header;
    if (message_size < threshold) return {message_size + header};
    std::vector<std::int64_t> packets(static_cast<std::size_t>(message_size / threshold),
                                      max_payload);
    packets.push_back(message_size % threshold + header);
    return packets;
}

// Inverse of fragment_message: per-packet headers are overhead, everything
// else is message content.
inline std::int64_t defragment(const std::vector<std::int64_t>& fragments, int header) {
    std::int64_t m = 0;
    for (auto p : fragments) m += p - header;
    return m;
}

// Test oracle: the exact transmission schedule behind a simulated trace.
struct GroundTruth {
    std::string response_text;
    std::vector<int> token_lengths;        // code points, per token
    std::vector<int> token_byte_lengths;   // wire bytes, per token
    std::vector<std::int64_t> message_sizes;  // after padding, before fragmentation
    std::vector<std::vector<std::size_t>> grouped_indices;  // token indices per message
};

struct SimOptions {
    std::string stream_id = "r0";
    std::int64_t start_timestamp_us = 0;
    std::int64_t timestamp_step_us = 1000;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> group_tokens(std::size_t n,
                                                          const TransmissionPolicy& policy,
                                                          Rng& rng) {
    std::vector<std::vector<std::size_t>> groups;
    if (n == 0) return groups;
    if (policy.batch) {
        groups.emplace_back(n);
        std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
        return groups;
    }
    const int g = effective_group_size(policy);
    if (g >= 2) {
        for (std::size_t i = 0; i < n; i += g) {
            std::vector<std::size_t> group;
            for (std::size_t j = i; j < std::min(n, i + g); ++j) group.push_back(j);
            groups.push_back(std::move(group));
        }
    } else if (policy.buffering) {
        groups.push_back({0});
        for (std::size_t i = 1; i < n; ++i) {
            // Boundary between token i-1 and i; the first boundary is the
            // frequently-grouped one.
            double p = (i == 1) ? policy.buffering->first_pair_group_prob
                                : policy.buffering->inner_group_prob;
            if (next_bernoulli(rng, p)) {
                groups.back().push_back(i);
            } else {
                groups.push_back({i});
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
    }
    // The preamble rides with the first message and swallows the leading
    // tokens, making their individual lengths unrecoverable.
    while (static_cast<int>(groups.front().size()) < policy.preamble_tokens_hidden &&
           groups.size() > 1) {
        groups.front().insert(groups.front().end(), groups[1].begin(), groups[1].end());
        groups.erase(groups.begin() + 1);
    }
    return groups;
}

inline std::int64_t pad_size(std::int64_t size, const PaddingModel& padding, Rng& rng) {
    switch (padding.kind) {
        case PaddingModel::Kind::None:
            return size;
        case PaddingModel::Kind::RandomUniform: {
            auto span = static_cast<std::uint64_t>(padding.max_bytes - padding.min_bytes + 1);
            return size + padding.min_bytes + static_cast<std::int64_t>(next_below(rng, span));
        }
        case PaddingModel::Kind::BucketRound: {
            std::int64_t b = padding.bucket_bytes;
            return (size + b - 1) / b * b;
        }
    }
    return size;
}

}  // namespace detail

// Deterministic: identical (text, vocab, policy, options) gives an identical
// trace, byte for byte.
inline std::pair<Trace, GroundTruth> simulate_response(const std::string& text,
                                                       const Vocabulary& vocab,
                                                       const TransmissionPolicy& policy,
                                                       const SimOptions& opts = {}) {
    if (text.empty()) throw Error("simulate_response: empty text");
    validate(policy);

    TokenSequence seq = tokenize(text, vocab);
    GroundTruth truth;
    truth.response_text = text;
    truth.token_lengths = seq.lengths;
    truth.token_byte_lengths = token_byte_lengths(seq);

    Rng rng(policy.rng_seed);
    truth.grouped_indices = detail::group_tokens(seq.size(), policy, rng);

    // Message sizes per group.
    std::vector<std::int64_t> prefix(seq.size() + 1, 0);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        prefix[i + 1] = prefix[i] + truth.token_byte_lengths[i];
    }
    for (std::size_t gi = 0; gi < truth.grouped_indices.size(); ++gi) {
        const auto& group = truth.grouped_indices[gi];
        std::int64_t size = 0;
        if (policy.mode == TransmissionMode::Cumulative) {
            size = policy.preamble_extra_bytes + policy.metadata_overhead_h +
                   prefix[group.back() + 1];
        } else {
            size = policy.metadata_overhead_h + (prefix[group.back() + 1] - prefix[group.front()]);
            if (gi == 0) size += policy.preamble_extra_bytes;
        }
        truth.message_sizes.push_back(detail::pad_size(size, policy.padding, rng));
    }

    // Messages to packets.
    std::vector<std::int64_t> payloads;
    for (auto m : truth.message_sizes) {
        if (policy.max_fragment_payload > 0) {
            auto frags = fragment_message(m, policy.max_fragment_payload, policy.fragment_header);
            payloads.insert(payloads.end(), frags.begin(), frags.end());
        } else {
            payloads.push_back(m);
        }
    }
    if (!policy.control_noise.packet_sizes.empty() && policy.control_noise.insert_prob > 0) {
        std::vector<std::int64_t> noisy;
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            noisy.push_back(payloads[i]);
            if (i + 1 < payloads.size() &&
                next_bernoulli(rng, policy.control_noise.insert_prob)) {
                auto pick = next_below(rng, policy.control_noise.packet_sizes.size());
                noisy.push_back(policy.control_noise.packet_sizes[pick]);
            }
        }
        payloads = std::move(noisy);
    }

    Trace trace;
    trace.meta["vendor"] = "simulated";
    trace.meta["mode"] = policy.mode == TransmissionMode::Cumulative ? "cumulative" : "pertoken";
    std::int64_t ts = opts.start_timestamp_us;
    for (auto p : payloads) {
        trace.packets.push_back({ts, Direction::ServerToClient, p, opts.stream_id});
        ts += opts.timestamp_step_us;
    }
    return {std::move(trace), std::move(truth)};
}

}  // namespace tokleak
