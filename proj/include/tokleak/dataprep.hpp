#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokleak/core.hpp"
#include "tokleak/policy.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/tokenizer.hpp"

namespace tokleak {

enum class ModelTarget { FirstSegment, InnerSegment };

struct TrainingExample {
    ModelTarget model_target = ModelTarget::FirstSegment;
    std::string prompt_text;
    std::string target_text;
};

namespace detail {

inline std::string trim_leading_spaces(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

inline std::string special_tokens_line(const std::vector<int>& lengths) {
    std::string line = "Special Tokens:";
    for (int len : lengths) line += " _" + std::to_string(len);
    return line;
}

// Policy-augmented view of a length sequence: preamble-hidden tokens are
// dropped, then groupings merge neighbors the way the wire would.
inline std::vector<int> augment_lengths(std::vector<int> lengths, bool is_first_segment,
                                        const TransmissionPolicy& policy, Rng& rng) {
    if (is_first_segment && policy.preamble_tokens_hidden > 0) {
        std::size_t drop = std::min<std::size_t>(policy.preamble_tokens_hidden, lengths.size());
        lengths.erase(lengths.begin(), lengths.begin() + drop);
    }
    const int g = effective_group_size(policy);
    if (g >= 2) {
        std::vector<int> grouped;
        for (std::size_t i = 0; i < lengths.size(); i += g) {
            int sum = 0;
            for (std::size_t j = i; j < std::min(lengths.size(), i + g); ++j) sum += lengths[j];
            grouped.push_back(sum);
        }
        return grouped;
    }
    if (policy.buffering) {
        std::vector<int> grouped;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            double p = (i == 1 && is_first_segment) ? policy.buffering->first_pair_group_prob
                                                    : policy.buffering->inner_group_prob;
            if (i > 0 && next_bernoulli(rng, p)) {
                grouped.back() += lengths[i];
            } else {
                grouped.push_back(lengths[i]);
            }
        }
        return grouped;
    }
    return lengths;
}

}  // namespace detail

inline std::string render_first_prompt(const std::vector<int>& lengths) {
    return "Translate the Special Tokens to English.\n" + detail::special_tokens_line(lengths);
}

inline std::string render_inner_prompt(const std::vector<int>& lengths,
                                       const std::string& context) {
    return "Translate the Special Tokens to English, given the context.\nContext: " + context +
           "\n" + detail::special_tokens_line(lengths);
}

// Examples for one response given its segment texts. Segments are rendered
// standalone (leading space stripped, lengths regenerated) so targets read
// as plain sentences.
inline std::vector<TrainingExample> examples_for_segments(
    const std::vector<std::string>& segments, const Vocabulary& vocab,
    const std::optional<TransmissionPolicy>& augment, Rng& rng) {
    std::vector<TrainingExample> examples;
    std::string prev;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        std::string target = detail::trim_leading_spaces(segments[i]);
        std::vector<int> lengths = tokenize(target, vocab).lengths;
        if (augment) {
            lengths = detail::augment_lengths(std::move(lengths), i == 0, *augment, rng);
        }
        TrainingExample ex;
        if (i == 0) {
            ex.model_target = ModelTarget::FirstSegment;
            ex.prompt_text = render_first_prompt(lengths);
        } else {
            ex.model_target = ModelTarget::InnerSegment;
            ex.prompt_text = render_inner_prompt(lengths, prev);
        }
        ex.target_text = target;
        examples.push_back(std::move(ex));
        prev = std::move(target);
    }
    return examples;
}

// Self-supervised dataset builder: each response is segmented, every
// segment becomes one training prompt.
inline std::vector<TrainingExample> build_dataset(const std::vector<std::string>& corpus,
                                                  const Vocabulary& vocab,
                                                  const std::optional<TransmissionPolicy>& augment,
                                                  std::uint64_t seed = 0) {
    if (corpus.empty()) throw Error("build_dataset: empty corpus");
    Rng rng(seed);
    std::vector<TrainingExample> dataset;
    for (const auto& response : corpus) {
        auto examples = examples_for_segments(segment_text(response, vocab), vocab, augment, rng);
        for (auto& ex : examples) dataset.push_back(std::move(ex));
    }
    return dataset;
}

struct CorpusStats {
    double avg_segments_per_response = 0.0;
    double avg_tokens_per_segment = 0.0;
};

inline CorpusStats corpus_stats(const std::vector<std::string>& corpus, const Vocabulary& vocab) {
    if (corpus.empty()) throw Error("corpus_stats: empty corpus");
    std::size_t total_segments = 0;
    std::size_t total_tokens = 0;
    for (const auto& response : corpus) {
        for (const auto& seg : segment_text(response, vocab)) {
            ++total_segments;
            total_tokens += tokenize(seg, vocab).size();
        }
    }
    CorpusStats stats;
    stats.avg_segments_per_response =
        static_cast<double>(total_segments) / static_cast<double>(corpus.size());
    stats.avg_tokens_per_segment =
        total_segments == 0 ? 0.0
                            : static_cast<double>(total_tokens) / static_cast<double>(total_segments);
    return stats;
}

// Corpus file: one response per line, newlines escaped as `\n`.
inline std::vector<std::string> load_corpus(std::istream& in) {
    std::vector<std::string> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string response;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
                response += '\n';
                ++i;
            } else if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '\\') {
                response += '\\';
                ++i;
            } else {
                response += line[i];
            }
        }
        corpus.push_back(std::move(response));
    }
    return corpus;
}

inline std::vector<std::string> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file: " + path);
    return load_corpus(in);
}

inline void save_corpus(const std::vector<std::string>& corpus, std::ostream& out) {
    for (const auto& response : corpus) {
        std::string line;
        for (char c : response) {
            if (c == '\n') {
                line += "\\n";
            } else if (c == '\\') {
                line += "\\\\";
            } else {
                line += c;
            }
        }
        out << line << "\n";
    }
}

inline void save_dataset(const std::vector<TrainingExample>& dataset, std::ostream& out) {
    for (const auto& ex : dataset) {
        nlohmann::json j = {
            {"model", ex.model_target == ModelTarget::FirstSegment ? "first" : "inner"},
            {"prompt", ex.prompt_text},
            {"target", ex.target_text},
        };
        out << j.dump() << "\n";
    }
}

}  // namespace tokleak
