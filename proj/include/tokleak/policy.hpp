#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokleak/core.hpp"

namespace tokleak {

enum class TransmissionMode { Cumulative, PerToken };

// How often consecutive tokens get merged into one message. Mirrors the
// observed vendor behavior where the first two tokens are grouped far more
// often than later ones.
struct BufferingModel {
    double first_pair_group_prob = 0.0;
    double inner_group_prob = 0.0;
};

struct PaddingModel {
    enum class Kind { None, RandomUniform, BucketRound };
    Kind kind = Kind::None;
    int min_bytes = 0;    // RandomUniform
    int max_bytes = 0;    // RandomUniform
    int bucket_bytes = 0; // BucketRound
};

// Intermittent bursts of fixed-size control packets, inserted at random
// positions among the data packets.
struct ControlNoiseModel {
    std::vector<int> packet_sizes;
    double insert_prob = 0.0;  // per inter-packet gap
};

struct TransmissionPolicy {
    TransmissionMode mode = TransmissionMode::Cumulative;
    int metadata_overhead_h = 0;
    int max_fragment_payload = 0;  // 0 = no fragmentation
    int fragment_header = 0;
    std::optional<BufferingModel> buffering;
    bool pairing = false;
    int group_size = 0;  // deterministic n-token grouping; pairing == group of 2
    bool batch = false;  // whole response in one message
    int preamble_tokens_hidden = 0;
    int preamble_extra_bytes = 0;
    PaddingModel padding;
    ControlNoiseModel control_noise;
    std::uint64_t rng_seed = 0;
};

inline void validate(const TransmissionPolicy& p) {
    if (p.metadata_overhead_h < 0) throw Error("policy: negative metadata_overhead_h");
    if (p.max_fragment_payload > 0 && p.fragment_header >= p.max_fragment_payload) {
        throw Error("policy: fragment_header must be < max_fragment_payload");
    }
    if ((p.pairing || p.group_size >= 2) && p.buffering.has_value()) {
        throw Error("policy: pairing/grouping and buffering are mutually exclusive");
    }
    if (p.buffering) {
        const auto& b = *p.buffering;
        if (b.first_pair_group_prob < 0 || b.first_pair_group_prob > 1 ||
            b.inner_group_prob < 0 || b.inner_group_prob > 1) {
            throw Error("policy: buffering probabilities must be in [0,1]");
        }
    }
    if (p.group_size == 1 || p.group_size < 0) throw Error("policy: group_size must be 0 or >= 2");
    if (p.preamble_tokens_hidden < 0 || p.preamble_extra_bytes < 0) {
        throw Error("policy: negative preamble settings");
    }
    if (p.padding.kind == PaddingModel::Kind::RandomUniform &&
        (p.padding.min_bytes < 0 || p.padding.max_bytes < p.padding.min_bytes)) {
        throw Error("policy: bad RandomUniform padding range");
    }
    if (p.padding.kind == PaddingModel::Kind::BucketRound && p.padding.bucket_bytes < 1) {
        throw Error("policy: bucket_bytes must be >= 1");
    }
}

// Effective grouping factor: pairing is shorthand for group_size 2.
inline int effective_group_size(const TransmissionPolicy& p) {
    if (p.group_size >= 2) return p.group_size;
    if (p.pairing) return 2;
    return 0;
}

inline void to_json(nlohmann::json& j, const PaddingModel& p) {
    switch (p.kind) {
        case PaddingModel::Kind::None:
            j = {{"kind", "none"}};
            break;
        case PaddingModel::Kind::RandomUniform:
            j = {{"kind", "random_uniform"}, {"min_bytes", p.min_bytes}, {"max_bytes", p.max_bytes}};
            break;
        case PaddingModel::Kind::BucketRound:
            j = {{"kind", "bucket_round"}, {"bucket_bytes", p.bucket_bytes}};
            break;
    }
}

inline void from_json(const nlohmann::json& j, PaddingModel& p) {
    std::string kind = j.value("kind", "none");
    if (kind == "none") {
        p.kind = PaddingModel::Kind::None;
    } else if (kind == "random_uniform") {
        p.kind = PaddingModel::Kind::RandomUniform;
        p.min_bytes = j.value("min_bytes", 0);
        p.max_bytes = j.value("max_bytes", 0);
    } else if (kind == "bucket_round") {
        p.kind = PaddingModel::Kind::BucketRound;
        p.bucket_bytes = j.value("bucket_bytes", 1);
    } else {
        throw Error("policy: unknown padding kind '" + kind + "'");
    }
}

inline void to_json(nlohmann::json& j, const TransmissionPolicy& p) {
    j = nlohmann::json{
        {"mode", p.mode == TransmissionMode::Cumulative ? "cumulative" : "pertoken"},
        {"metadata_overhead_h", p.metadata_overhead_h},
        {"max_fragment_payload", p.max_fragment_payload},
        {"fragment_header", p.fragment_header},
        {"pairing", p.pairing},
        {"group_size", p.group_size},
        {"batch", p.batch},
        {"preamble_tokens_hidden", p.preamble_tokens_hidden},
        {"preamble_extra_bytes", p.preamble_extra_bytes},
        {"padding", p.padding},
        {"rng_seed", p.rng_seed},
    };
    if (p.buffering) {
        j["buffering"] = {{"first_pair_group_prob", p.buffering->first_pair_group_prob},
                          {"inner_group_prob", p.buffering->inner_group_prob}};
    }
    if (!p.control_noise.packet_sizes.empty()) {
        j["control_noise"] = {{"packet_sizes", p.control_noise.packet_sizes},
                              {"insert_prob", p.control_noise.insert_prob}};
    }
}

inline void from_json(const nlohmann::json& j, TransmissionPolicy& p) {
    std::string mode = j.value("mode", "cumulative");
    if (mode == "cumulative") {
        p.mode = TransmissionMode::Cumulative;
    } else if (mode == "pertoken") {
        p.mode = TransmissionMode::PerToken;
    } else {
        throw Error("policy: unknown mode '" + mode + "'");
    }
    p.metadata_overhead_h = j.value("metadata_overhead_h", 0);
    p.max_fragment_payload = j.value("max_fragment_payload", 0);
    p.fragment_header = j.value("fragment_header", 0);
    p.pairing = j.value("pairing", false);
    p.group_size = j.value("group_size", 0);
    p.batch = j.value("batch", false);
    p.preamble_tokens_hidden = j.value("preamble_tokens_hidden", 0);
    p.preamble_extra_bytes = j.value("preamble_extra_bytes", 0);
    if (j.contains("padding")) p.padding = j.at("padding").get<PaddingModel>();
    p.rng_seed = j.value("rng_seed", std::uint64_t{0});
    if (j.contains("buffering")) {
        BufferingModel b;
        b.first_pair_group_prob = j.at("buffering").value("first_pair_group_prob", 0.0);
        b.inner_group_prob = j.at("buffering").value("inner_group_prob", 0.0);
        p.buffering = b;
    }
    if (j.contains("control_noise")) {
        p.control_noise.packet_sizes =
            j.at("control_noise").value("packet_sizes", std::vector<int>{});
        p.control_noise.insert_prob = j.at("control_noise").value("insert_prob", 0.0);
    }
}

inline TransmissionPolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open policy file: " + path);
    nlohmann::json j;
    in >> j;
    TransmissionPolicy p = j.get<TransmissionPolicy>();
    validate(p);
    return p;
}

inline void save_policy(const TransmissionPolicy& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << nlohmann::json(p).dump(2) << "\n";
}

}  // namespace tokleak
