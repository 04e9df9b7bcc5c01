#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tokleak/core.hpp"
#include "tokleak/tokenizer.hpp"
#include "tokleak/vocab.hpp"

namespace tokleak {

struct CountOptions {
    // When true, slot 0 is treated as mid-sentence, i.e. its word carries a
    // leading space like every later slot.
    bool mid_sentence = false;
    std::uint64_t guard = 1'000'000'000;
};

// Brute-force entropy oracle: how many dictionary token sequences map to T.
// Words occupy |w|+1 characters in non-initial slots (space prefix);
// punctuation entries are single characters with no space.
inline std::uint64_t count_candidates(const std::vector<int>& T,
                                      const std::vector<std::string>& dictionary,
                                      const CountOptions& opts = {}) {
    std::map<std::size_t, std::uint64_t> word_lengths;
    std::uint64_t punct_count = 0;
    for (const auto& entry : dictionary) {
        if (is_punct_token(entry)) {
            ++punct_count;
        } else {
            ++word_lengths[utf8_length(entry)];
        }
    }
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < T.size(); ++i) {
        const bool spaced = opts.mid_sentence || i > 0;
        const int word_len = T[i] - (spaced ? 1 : 0);
        std::uint64_t slot = 0;
        if (word_len >= 1) {
            auto it = word_lengths.find(static_cast<std::size_t>(word_len));
            if (it != word_lengths.end()) slot += it->second;
        }
        if (T[i] == 1) slot += punct_count;
        if (slot != 0 && total > opts.guard / slot) {
            throw CandidateExplosion("count_candidates: product exceeds guard");
        }
        total *= slot;
        if (total == 0) return 0;
    }
    return total;
}

// Token-level add-k n-gram model with a token-length index for constrained
// generation. Immutable once trained; safe to share across threads.
class NGramModel {
public:
    static constexpr const char* kBos = "<s>";

    int order = 3;
    double add_k = 0.01;
    std::string corpus_label;

    double log_prob(std::span<const std::string> context, const std::string& token) const {
        // Stupid-backoff flavored: shorten the context until it has been
        // seen, paying a fixed penalty per backoff step.
        const double vocab_size = static_cast<double>(std::max<std::size_t>(token_list_.size(), 1));
        double penalty = 0.0;
        std::size_t ctx_len = std::min<std::size_t>(context.size(), order - 1);
        for (;; --ctx_len) {
            std::string key = context_key(context.subspan(context.size() - ctx_len, ctx_len));
            auto tot = context_totals_.find(key);
            if (tot != context_totals_.end() || ctx_len == 0) {
                double total = tot != context_totals_.end() ? tot->second : 0.0;
                double count = 0.0;
                auto ctx_it = counts_.find(key);
                if (ctx_it != counts_.end()) {
                    auto tok_it = ctx_it->second.find(token);
                    if (tok_it != ctx_it->second.end()) count = tok_it->second;
                }
                return penalty +
                       std::log((count + add_k) / (total + add_k * vocab_size));
            }
            penalty += std::log(0.4);
        }
    }

    double score_text(const std::string& text, const Vocabulary& vocab) const {
        TokenSequence seq = tokenize(text, vocab);
        std::vector<std::string> hist = bos_context();
        double score = 0.0;
        for (const auto& tok : seq.tokens) {
            score += log_prob(hist, tok);
            hist.push_back(tok);
        }
        return score;
    }

    const std::vector<std::string>& tokens_of_length(int len) const {
        static const std::vector<std::string> kEmpty;
        auto it = length_index_.find(len);
        return it == length_index_.end() ? kEmpty : it->second;
    }

    // Closest populated length to `len`, if any (ties go short).
    std::optional<int> nearest_length(int len) const {
        std::optional<int> best;
        for (const auto& [l, toks] : length_index_) {
            if (!best || std::abs(l - len) < std::abs(*best - len)) best = l;
        }
        return best;
    }

    double unigram_count(const std::string& token) const {
        auto it = unigram_counts_.find(token);
        return it == unigram_counts_.end() ? 0.0 : it->second;
    }

    std::vector<std::string> bos_context() const {
        return std::vector<std::string>(order - 1, kBos);
    }

    std::size_t vocab_size() const { return token_list_.size(); }

    void observe(std::span<const std::string> context, const std::string& token) {
        for (std::size_t ctx_len = 0; ctx_len < static_cast<std::size_t>(order); ++ctx_len) {
            if (ctx_len > context.size()) break;
            std::string key = context_key(context.subspan(context.size() - ctx_len, ctx_len));
            counts_[key][token] += 1.0;
            context_totals_[key] += 1.0;
        }
        unigram_counts_[token] += 1.0;
        if (token_set_.insert(token).second) {
            token_list_.push_back(token);
            int len = static_cast<int>(utf8_length(token));
            length_index_[len].push_back(token);
        }
    }

    // Deterministic iteration order for generation.
    void finalize() {
        std::sort(token_list_.begin(), token_list_.end());
        for (auto& [len, toks] : length_index_) std::sort(toks.begin(), toks.end());
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["order"] = order;
        j["add_k"] = add_k;
        j["corpus_label"] = corpus_label;
        j["tokens"] = token_list_;
        nlohmann::json jc = nlohmann::json::object();
        for (const auto& [ctx, toks] : counts_) {
            nlohmann::json jt = nlohmann::json::object();
            for (const auto& [tok, c] : toks) jt[tok] = c;
            jc[ctx] = std::move(jt);
        }
        j["counts"] = std::move(jc);
        return j;
    }

    static NGramModel from_json(const nlohmann::json& j) {
        NGramModel m;
        m.order = j.at("order").get<int>();
        m.add_k = j.at("add_k").get<double>();
        m.corpus_label = j.value("corpus_label", "");
        for (const auto& tok : j.at("tokens").get<std::vector<std::string>>()) {
            if (m.token_set_.insert(tok).second) {
                m.token_list_.push_back(tok);
                m.length_index_[static_cast<int>(utf8_length(tok))].push_back(tok);
            }
        }
        for (const auto& [ctx, toks] : j.at("counts").items()) {
            for (const auto& [tok, c] : toks.items()) {
                double count = c.get<double>();
                m.counts_[ctx][tok] = count;
                m.context_totals_[ctx] += count;
                if (ctx.empty()) m.unigram_counts_[tok] = count;
            }
        }
        m.finalize();
        return m;
    }

    static std::string context_key(std::span<const std::string> context) {
        std::string key;
        for (const auto& tok : context) {
            if (!key.empty()) key += '\x1f';
            key += tok;
        }
        return key;
    }

private:
    std::unordered_map<std::string, std::unordered_map<std::string, double>> counts_;
    std::unordered_map<std::string, double> context_totals_;
    std::unordered_map<std::string, double> unigram_counts_;
    std::unordered_set<std::string> token_set_;
    std::vector<std::string> token_list_;
    std::map<int, std::vector<std::string>> length_index_;
};

// Self-supervised training over segment texts. LLM_A / LLM_B style splits
// are realized by training two models on first vs inner segments.
inline NGramModel train_ngram(const std::vector<std::string>& corpus, const Vocabulary& vocab,
                              int order = 3, std::string label = "victim") {
    if (corpus.empty()) throw Error("train_ngram: empty corpus");
    if (order < 2) throw Error("train_ngram: order must be >= 2");
    NGramModel model;
    model.order = order;
    model.corpus_label = std::move(label);
    for (const auto& text : corpus) {
        TokenSequence seq = tokenize(text, vocab);
        std::vector<std::string> hist = model.bos_context();
        for (const auto& tok : seq.tokens) {
            model.observe(hist, tok);
            hist.push_back(tok);
        }
    }
    model.finalize();
    return model;
}

inline void save_model(const NGramModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << model.to_json().dump() << "\n";
}

inline NGramModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;
    return NGramModel::from_json(j);
}

}  // namespace tokleak
