#pragma once

#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tokleak/builtin_vocab.hpp"
#include "tokleak/dataprep.hpp"
#include "tokleak/extraction.hpp"
#include "tokleak/external.hpp"
#include "tokleak/metrics.hpp"
#include "tokleak/ngram.hpp"
#include "tokleak/policy.hpp"
#include "tokleak/reconstruct.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/simulator.hpp"
#include "tokleak/trace.hpp"

namespace tokleak {

struct PipelineConfig {
    std::string vocab_path;       // empty = builtin vocabulary
    std::string policy_path;      // empty = clean cumulative policy with h=100
    std::string corpus_path;      // required
    std::string model_first_path; // empty = train on the corpus
    std::string model_inner_path;
    std::string reconstructor = "ngram";  // ngram | oracle | external:<command>
    std::uint64_t seed = 1;
    int k = 8;
    int beam_width = 16;
    int order = 3;
    int jobs = 1;
    EvalThresholds thresholds;
};

struct PipelineRow {
    std::size_t index = 0;
    std::string truth_text;
    std::string reconstructed_text;
    EvalResult eval;
    bool exact = false;
    std::string error;  // nonempty when a stage failed for this response
};

struct PipelineOutcome {
    std::vector<PipelineRow> rows;
    BatchSummary summary;
    std::size_t failures = 0;
};

inline TransmissionPolicy default_clean_policy() {
    TransmissionPolicy p;
    p.mode = TransmissionMode::Cumulative;
    p.metadata_overhead_h = 100;
    return p;
}

// First-vs-inner segment corpora for the two-model scheme.
inline std::pair<std::vector<std::string>, std::vector<std::string>> split_segment_corpus(
    const std::vector<std::string>& corpus, const Vocabulary& vocab) {
    std::vector<std::string> first, inner;
    for (const auto& response : corpus) {
        auto segs = segment_text(response, vocab);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            (i == 0 ? first : inner).push_back(segs[i]);
        }
    }
    if (inner.empty()) inner = first;  // degenerate corpora: share the model
    return {std::move(first), std::move(inner)};
}

// Attacker-side stages 2-4 for one simulated stream: message identification,
// sequence extraction, segmentation.
inline SegmentedSequence extract_and_segment(const Trace& trace, const TransmissionPolicy& policy,
                                             const std::string& stream_id = "r0") {
    auto packets = filter_stream(trace, stream_id, Direction::ServerToClient);
    auto payloads = payload_sizes(packets);
    std::vector<int> lengths;
    if (policy.mode == TransmissionMode::PerToken) {
        lengths = extract_pertoken(payloads, policy.metadata_overhead_h).lengths;
    } else {
        IdentifyOptions iopts;
        iopts.max_fragment_payload = policy.max_fragment_payload;
        iopts.fragment_header = policy.fragment_header;
        MessageSizeSequence msgs = identify_messages(payloads, iopts);
        ExtractOptions eopts;
        eopts.metadata_overhead_h = policy.metadata_overhead_h;
        eopts.preamble_extra_bytes = policy.preamble_extra_bytes;
        lengths = extract_cumulative(msgs, eopts).lengths;
    }
    return segment(lengths);
}

inline std::unique_ptr<Reconstructor> make_reconstructor(const PipelineConfig& config,
                                                         const std::vector<std::string>& corpus,
                                                         const Vocabulary& vocab) {
    if (config.reconstructor == "oracle") {
        std::vector<std::string> pool;
        for (const auto& response : corpus) {
            for (auto& seg : segment_text(response, vocab)) pool.push_back(std::move(seg));
        }
        return std::make_unique<OracleReconstructor>(std::move(pool), vocab);
    }
    if (config.reconstructor.rfind("external:", 0) == 0) {
        return std::make_unique<ExternalReconstructor>(config.reconstructor.substr(9));
    }
    if (config.reconstructor != "ngram") {
        throw Error("unknown reconstructor '" + config.reconstructor + "'");
    }
    NGramModel first, inner;
    if (!config.model_first_path.empty()) {
        first = load_model(config.model_first_path);
        inner = config.model_inner_path.empty() ? first : load_model(config.model_inner_path);
    } else {
        auto [first_corpus, inner_corpus] = split_segment_corpus(corpus, vocab);
        first = train_ngram(first_corpus, vocab, config.order, "first");
        inner = train_ngram(inner_corpus, vocab, config.order, "inner");
    }
    return std::make_unique<NGramReconstructor>(std::move(first), std::move(inner), vocab,
                                                config.beam_width, config.k, config.seed);
}

// Fig.-2-shaped batch run: simulate -> extract -> segment -> reconstruct ->
// evaluate for every corpus response. Deterministic under a fixed seed; the
// per-response seed is config.seed + index regardless of job count.
inline PipelineOutcome run_pipeline(const PipelineConfig& config) {
    Vocabulary vocab = config.vocab_path.empty() ? basic_english_vocab()
                                                 : load_vocabulary(config.vocab_path);
    TransmissionPolicy policy = config.policy_path.empty() ? default_clean_policy()
                                                           : load_policy(config.policy_path);
    std::vector<std::string> corpus = load_corpus(config.corpus_path);
    if (corpus.empty()) throw Error("pipeline: empty corpus");

    PipelineOutcome outcome;
    outcome.rows.resize(corpus.size());

    const int jobs = std::max(1, config.jobs);
    std::mutex reconstructor_mutex;  // external adapters are single-stream
    std::unique_ptr<Reconstructor> shared =
        config.reconstructor.rfind("external:", 0) == 0 ? make_reconstructor(config, corpus, vocab)
                                                        : nullptr;

    auto worker = [&](int worker_index) {
        // Each worker gets its own reconstructor instance unless the
        // backend is an external process.
        std::unique_ptr<Reconstructor> own;
        if (!shared) own = make_reconstructor(config, corpus, vocab);
        for (std::size_t i = worker_index; i < corpus.size(); i += jobs) {
            PipelineRow& row = outcome.rows[i];
            row.index = i;
            row.truth_text = corpus[i];
            try {
                TransmissionPolicy p = policy;
                p.rng_seed = config.seed + i;
                auto [trace, truth] = simulate_response(corpus[i], vocab, p);
                SegmentedSequence segs = extract_and_segment(trace, p);
                ReconstructionResult rec;
                if (shared) {
                    std::lock_guard<std::mutex> lock(reconstructor_mutex);
                    rec = reconstruct_response(*shared, segs);
                } else {
                    rec = reconstruct_response(*own, segs);
                }
                row.reconstructed_text = rec.response_text;
                TfEmbedder embedder;
                row.eval = evaluate_pair(row.reconstructed_text, row.truth_text, embedder);
                row.exact = row.reconstructed_text == row.truth_text;
            } catch (const Error& e) {
                row.error = e.what();
            }
        }
    };

    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }

    std::vector<EvalResult> evals;
    for (const auto& row : outcome.rows) {
        if (row.error.empty()) {
            evals.push_back(row.eval);
        } else {
            ++outcome.failures;
        }
    }
    if (!evals.empty()) outcome.summary = summarize(evals, config.thresholds);
    return outcome;
}

inline void write_pipeline_rows(const PipelineOutcome& outcome, std::ostream& out) {
    for (const auto& row : outcome.rows) {
        nlohmann::json j = {
            {"index", row.index},
            {"truth", row.truth_text},
            {"reconstructed", row.reconstructed_text},
            {"phi", row.eval.phi},
            {"ed", row.eval.ed},
            {"rouge1", row.eval.rouge1},
            {"rougeL", row.eval.rougeL},
            {"success", row.eval.success},
            {"exact", row.exact},
        };
        if (!row.error.empty()) j["error"] = row.error;
        out << j.dump() << "\n";
    }
}

}  // namespace tokleak
