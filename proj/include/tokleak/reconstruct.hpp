#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/ngram.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/tokenizer.hpp"
#include "tokleak/vocab.hpp"

namespace tokleak {

struct ScoredCandidate {
    std::string text;
    double log_score = 0.0;
    bool exact_length_match = true;
};

// Two-model reconstruction surface: first segments are inferred without
// context, inner segments conditioned on the preceding inferred text.
class Reconstructor {
public:
    virtual ~Reconstructor() = default;
    virtual std::vector<ScoredCandidate> reconstruct_first(const std::vector<int>& lengths) = 0;
    virtual std::vector<ScoredCandidate> reconstruct_inner(const std::vector<int>& lengths,
                                                           const std::string& context) = 0;
};

struct BeamOptions {
    double temperature = 1.0;
    bool length_normalize = false;
    // Allow one observed length to be consumed by two tokens whose lengths
    // sum to it (buffered/paired deltas).
    bool allow_buffered_split = false;
    int split_tokens_per_length = 25;
    double fallback_penalty = -8.0;
};

namespace detail {

struct BeamState {
    std::vector<std::string> tokens;  // context prefix + generated
    std::size_t generated_from = 0;
    double log_prob = 0.0;
    bool inexact = false;
};

inline double gumbel(Rng& rng) {
    double u = next_double(rng);
    if (u <= 0.0) u = 1e-12;
    return -std::log(-std::log(u));
}

// Most frequent tokens of a given length, for pair expansions.
inline std::vector<std::string> top_by_frequency(const NGramModel& model, int len, int limit) {
    std::vector<std::string> toks = model.tokens_of_length(len);
    std::stable_sort(toks.begin(), toks.end(), [&](const auto& a, const auto& b) {
        return model.unigram_count(a) > model.unigram_count(b);
    });
    if (static_cast<int>(toks.size()) > limit) toks.resize(limit);
    return toks;
}

}  // namespace detail

// k seeded stochastic beam searches constrained to the token-length
// sequence; run 0 is the pure greedy beam, later runs perturb expansion
// selection with Gumbel noise. Candidates are deduplicated and ranked by
// true model log-probability.
inline std::vector<ScoredCandidate> beam_reconstruct(const NGramModel& model,
                                                     const std::vector<int>& T,
                                                     const std::optional<std::string>& context,
                                                     const Vocabulary& vocab, int beam_width,
                                                     int k, std::uint64_t seed,
                                                     const BeamOptions& opts = {}) {
    if (beam_width < 1 || k < 1) throw Error("beam_reconstruct: beam_width and k must be >= 1");

    detail::BeamState init;
    if (context && !context->empty()) {
        TokenSequence ctx = tokenize(*context, vocab);
        std::size_t keep = std::min<std::size_t>(ctx.tokens.size(), model.order - 1);
        init.tokens.assign(ctx.tokens.end() - keep, ctx.tokens.end());
    } else {
        init.tokens = model.bos_context();
    }
    init.generated_from = init.tokens.size();

    struct Expansion {
        std::size_t parent;
        std::vector<std::string> add;
        double delta;
        bool inexact;
        double key;  // selection score, possibly noisy
    };

    std::vector<ScoredCandidate> pool;
    for (int run = 0; run < k; ++run) {
        Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(run));
        std::vector<detail::BeamState> beam = {init};
        for (std::size_t step = 0; step < T.size() && !beam.empty(); ++step) {
            const int want = T[step];
            std::vector<Expansion> expansions;
            for (std::size_t s = 0; s < beam.size(); ++s) {
                const auto& state = beam[s];
                const auto& exact_toks = model.tokens_of_length(want);
                if (!exact_toks.empty()) {
                    for (const auto& tok : exact_toks) {
                        double d = model.log_prob(state.tokens, tok);
                        expansions.push_back({s, {tok}, d, false, 0.0});
                    }
                } else if (auto near = model.nearest_length(want)) {
                    for (const auto& tok : model.tokens_of_length(*near)) {
                        double d = model.log_prob(state.tokens, tok) + opts.fallback_penalty;
                        expansions.push_back({s, {tok}, d, true, 0.0});
                    }
                }
                if (opts.allow_buffered_split && want >= 4) {
                    for (int la = 2; la <= want - 2; ++la) {
                        auto first = detail::top_by_frequency(model, la, opts.split_tokens_per_length);
                        auto second = detail::top_by_frequency(model, want - la,
                                                               opts.split_tokens_per_length);
                        for (const auto& a : first) {
                            double da = model.log_prob(state.tokens, a);
                            auto ctx2 = state.tokens;
                            ctx2.push_back(a);
                            for (const auto& b : second) {
                                double d = da + model.log_prob(ctx2, b);
                                expansions.push_back({s, {a, b}, d, false, 0.0});
                            }
                        }
                    }
                }
            }
            if (expansions.empty()) {
                beam.clear();
                break;
            }
            for (auto& e : expansions) {
                e.key = beam[e.parent].log_prob + e.delta;
                if (run > 0) e.key += opts.temperature * detail::gumbel(rng);
            }
            std::size_t keep = std::min<std::size_t>(beam_width, expansions.size());
            std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(),
                              [](const Expansion& a, const Expansion& b) {
                                  if (a.key != b.key) return a.key > b.key;
                                  return a.add < b.add;
                              });
            std::vector<detail::BeamState> next;
            next.reserve(keep);
            for (std::size_t e = 0; e < keep; ++e) {
                detail::BeamState st = beam[expansions[e].parent];
                for (const auto& tok : expansions[e].add) st.tokens.push_back(tok);
                st.log_prob += expansions[e].delta;
                st.inexact = st.inexact || expansions[e].inexact;
                next.push_back(std::move(st));
            }
            beam = std::move(next);
        }
        for (const auto& st : beam) {
            ScoredCandidate cand;
            for (std::size_t i = st.generated_from; i < st.tokens.size(); ++i) {
                cand.text += st.tokens[i];
            }
            cand.log_score = opts.length_normalize && !T.empty()
                                 ? st.log_prob / static_cast<double>(T.size())
                                 : st.log_prob;
            cand.exact_length_match = !st.inexact && tokenize(cand.text, vocab).lengths == T;
            pool.push_back(std::move(cand));
        }
    }

    // Dedupe by text, keep the best score.
    std::sort(pool.begin(), pool.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.text != b.text) return a.text < b.text;
        return a.log_score > b.log_score;
    });
    pool.erase(std::unique(pool.begin(), pool.end(),
                           [](const auto& a, const auto& b) { return a.text == b.text; }),
               pool.end());
    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        if (a.log_score != b.log_score) return a.log_score > b.log_score;
        return a.text < b.text;
    });
    return pool;
}

// Baseline reconstructor backing the pipeline: n-gram beam search with the
// first/inner model split.
class NGramReconstructor : public Reconstructor {
public:
    NGramReconstructor(NGramModel first, NGramModel inner, const Vocabulary& vocab,
                       int beam_width = 16, int k = 8, std::uint64_t seed = 0,
                       BeamOptions opts = {})
        : first_(std::move(first)),
          inner_(std::move(inner)),
          vocab_(vocab),
          beam_width_(beam_width),
          k_(k),
          seed_(seed),
          opts_(opts) {}

    std::vector<ScoredCandidate> reconstruct_first(const std::vector<int>& lengths) override {
        return beam_reconstruct(first_, lengths, std::nullopt, vocab_, beam_width_, k_, seed_,
                                opts_);
    }

    std::vector<ScoredCandidate> reconstruct_inner(const std::vector<int>& lengths,
                                                   const std::string& context) override {
        return beam_reconstruct(inner_, lengths, context, vocab_, beam_width_, k_, seed_, opts_);
    }

    const NGramModel& first_model() const { return first_; }
    const NGramModel& inner_model() const { return inner_; }

private:
    NGramModel first_;
    NGramModel inner_;
    const Vocabulary& vocab_;
    int beam_width_;
    int k_;
    std::uint64_t seed_;
    BeamOptions opts_;
};

// Looks segments up in a known pool by exact length sequence. Test oracle
// and pipeline debugging aid.
class OracleReconstructor : public Reconstructor {
public:
    OracleReconstructor(std::vector<std::string> segment_pool, const Vocabulary& vocab)
        : pool_(std::move(segment_pool)), vocab_(vocab) {}

    std::vector<ScoredCandidate> reconstruct_first(const std::vector<int>& lengths) override {
        return lookup(lengths);
    }

    std::vector<ScoredCandidate> reconstruct_inner(const std::vector<int>& lengths,
                                                   const std::string&) override {
        return lookup(lengths);
    }

private:
    std::vector<ScoredCandidate> lookup(const std::vector<int>& lengths) {
        std::vector<ScoredCandidate> out;
        for (const auto& text : pool_) {
            if (tokenize(text, vocab_).lengths == lengths) {
                out.push_back({text, 0.0, true});
            }
        }
        return out;
    }

    std::vector<std::string> pool_;
    const Vocabulary& vocab_;
};

struct ReconstructionResult {
    std::string response_text;
    std::vector<ScoredCandidate> per_segment;  // best candidate per segment
};

// Sequential pipeline over segments: first segment without context, each
// subsequent one conditioned on the previous best text.
inline ReconstructionResult reconstruct_response(Reconstructor& reconstructor,
                                                 const SegmentedSequence& segments) {
    if (segments.segments.empty()) throw Error("reconstruct_response: no segments");
    ReconstructionResult result;
    for (std::size_t i = 0; i < segments.segments.size(); ++i) {
        std::vector<ScoredCandidate> cands =
            i == 0 ? reconstructor.reconstruct_first(segments.segments[i])
                   : reconstructor.reconstruct_inner(segments.segments[i],
                                                     result.per_segment.back().text);
        if (cands.empty()) {
            throw Error("reconstruct_response: no candidates for segment " + std::to_string(i));
        }
        result.per_segment.push_back(cands.front());
        result.response_text += cands.front().text;
    }
    return result;
}

}  // namespace tokleak
