// tokleak — token-length side-channel toolkit.
// Subcommands cover the full attack pipeline (simulate, extract, segment,
// reconstruct, evaluate) plus dataset preparation and mitigation analysis.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tokleak/builtin_vocab.hpp"
#include "tokleak/dataprep.hpp"
#include "tokleak/external.hpp"
#include "tokleak/extraction.hpp"
#include "tokleak/metrics.hpp"
#include "tokleak/mitigation.hpp"
#include "tokleak/ngram.hpp"
#include "tokleak/pipeline.hpp"
#include "tokleak/policy.hpp"
#include "tokleak/reconstruct.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/simulator.hpp"
#include "tokleak/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

// `--out -` writes to standard output.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw tokleak::Error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

tokleak::Vocabulary load_vocab_or_builtin(const std::string& path) {
    return path.empty() ? tokleak::basic_english_vocab() : tokleak::load_vocabulary(path);
}

tokleak::Mitigation parse_mitigation(const std::string& spec) {
    using tokleak::Mitigation;
    using tokleak::PaddingModel;
    if (spec == "batch") return Mitigation::Batch_();
    if (spec.rfind("group:", 0) == 0) return Mitigation::Group_(std::stoi(spec.substr(6)));
    if (spec.rfind("pad:bucket=", 0) == 0) {
        PaddingModel p;
        p.kind = PaddingModel::Kind::BucketRound;
        p.bucket_bytes = std::stoi(spec.substr(11));
        return Mitigation::Pad_(p);
    }
    if (spec.rfind("pad:uniform=", 0) == 0) {
        PaddingModel p;
        p.kind = PaddingModel::Kind::RandomUniform;
        std::string range = spec.substr(12);
        auto comma = range.find(',');
        if (comma == std::string::npos) throw tokleak::Error("pad:uniform needs min,max");
        p.min_bytes = std::stoi(range.substr(0, comma));
        p.max_bytes = std::stoi(range.substr(comma + 1));
        return Mitigation::Pad_(p);
    }
    throw tokleak::Error("unknown mitigation '" + spec +
                         "' (expected pad:bucket=N | pad:uniform=MIN,MAX | group:N | batch)");
}

int cmd_simulate(const std::string& policy_path, const std::string& corpus_path,
                 const std::string& vocab_path, const std::string& out_path,
                 std::uint64_t seed) {
    auto vocab = load_vocab_or_builtin(vocab_path);
    auto policy = tokleak::load_policy(policy_path);
    auto corpus = tokleak::load_corpus(corpus_path);
    tokleak::Trace combined;
    std::int64_t ts = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        tokleak::TransmissionPolicy p = policy;
        p.rng_seed = policy.rng_seed + seed + i;
        tokleak::SimOptions opts;
        opts.stream_id = "r" + std::to_string(i);
        opts.start_timestamp_us = ts;
        auto [trace, truth] = tokleak::simulate_response(corpus[i], vocab, p, opts);
        for (auto& pkt : trace.packets) combined.packets.push_back(pkt);
        if (!trace.packets.empty()) ts = trace.packets.back().timestamp_us + 1000;
        combined.meta = trace.meta;
    }
    OutputTarget out(out_path);
    tokleak::save_trace(combined, out.stream());
    return kExitOk;
}

int cmd_extract(const std::string& trace_path, const std::string& mode,
                const std::string& stream_id, std::optional<int> h, int max_fragment,
                int frag_header, const std::string& out_path) {
    auto trace = tokleak::load_trace(trace_path);
    auto packets = tokleak::filter_stream(trace, stream_id, tokleak::Direction::ServerToClient);
    auto payloads = tokleak::payload_sizes(packets);
    tokleak::TokenLengthSequence seq;
    if (mode == "pertoken") {
        int overhead = h ? *h : tokleak::estimate_overhead(payloads);
        seq = tokleak::extract_pertoken(payloads, overhead);
    } else {
        tokleak::IdentifyOptions iopts;
        iopts.max_fragment_payload = max_fragment;
        iopts.fragment_header = frag_header;
        auto msgs = tokleak::identify_messages(payloads, iopts);
        tokleak::ExtractOptions eopts;
        eopts.metadata_overhead_h = h;
        seq = tokleak::extract_cumulative(msgs, eopts);
    }
    OutputTarget out(out_path);
    tokleak::save_lengths(seq, out.stream());
    return kExitOk;
}

int cmd_segment(const std::string& lengths_path, const std::string& out_path) {
    std::ifstream in(lengths_path);
    if (!in) throw tokleak::Error("cannot open lengths file: " + lengths_path);
    auto seq = tokleak::load_lengths(in);
    auto segs = tokleak::segment(seq.lengths);
    OutputTarget out(out_path);
    tokleak::save_segments(segs, out.stream());
    return kExitOk;
}

int cmd_reconstruct(const std::string& segments_path, const std::string& model_path,
                    const std::string& model_inner_path, const std::string& vocab_path,
                    int k, int beam, std::uint64_t seed, const std::string& external,
                    const std::string& out_path) {
    std::ifstream in(segments_path);
    if (!in) throw tokleak::Error("cannot open segments file: " + segments_path);
    tokleak::SegmentedSequence segs;
    segs.segments = tokleak::load_segment_lines(in);
    if (segs.segments.empty()) throw tokleak::Error("no segments in " + segments_path);

    auto vocab = load_vocab_or_builtin(vocab_path);
    std::unique_ptr<tokleak::Reconstructor> rec;
    if (!external.empty()) {
        rec = std::make_unique<tokleak::ExternalReconstructor>(external);
    } else {
        auto first = tokleak::load_model(model_path);
        auto inner = model_inner_path.empty() ? first : tokleak::load_model(model_inner_path);
        rec = std::make_unique<tokleak::NGramReconstructor>(std::move(first), std::move(inner),
                                                            vocab, beam, k, seed);
    }
    auto result = tokleak::reconstruct_response(*rec, segs);
    OutputTarget out(out_path);
    nlohmann::json j = {{"response", result.response_text}};
    nlohmann::json per = nlohmann::json::array();
    for (const auto& c : result.per_segment) {
        per.push_back({{"text", c.text},
                       {"log_score", c.log_score},
                       {"exact_length_match", c.exact_length_match}});
    }
    j["segments"] = std::move(per);
    out.stream() << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_train(const std::string& corpus_path, const std::string& vocab_path, int order,
              const std::string& which, const std::string& out_path) {
    auto vocab = load_vocab_or_builtin(vocab_path);
    auto corpus = tokleak::load_corpus(corpus_path);
    auto [first_corpus, inner_corpus] = tokleak::split_segment_corpus(corpus, vocab);
    const auto& selected = which == "inner" ? inner_corpus : first_corpus;
    auto model = tokleak::train_ngram(selected, vocab, order, which);
    tokleak::save_model(model, out_path);
    return kExitOk;
}

int cmd_dataprep(const std::string& corpus_path, const std::string& vocab_path,
                 const std::string& augment_path, std::uint64_t seed, bool stats,
                 const std::string& out_path) {
    auto vocab = load_vocab_or_builtin(vocab_path);
    auto corpus = tokleak::load_corpus(corpus_path);
    std::optional<tokleak::TransmissionPolicy> augment;
    if (!augment_path.empty()) augment = tokleak::load_policy(augment_path);
    auto dataset = tokleak::build_dataset(corpus, vocab, augment, seed);
    OutputTarget out(out_path);
    tokleak::save_dataset(dataset, out.stream());
    if (stats) {
        auto s = tokleak::corpus_stats(corpus, vocab);
        std::cerr << "avg_segments_per_response=" << s.avg_segments_per_response
                  << " avg_tokens_per_segment=" << s.avg_tokens_per_segment << "\n";
    }
    return kExitOk;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& embedder_spec, const std::string& out_path) {
    auto pred = tokleak::load_corpus(pred_path);
    auto truth = tokleak::load_corpus(truth_path);
    if (pred.size() != truth.size()) {
        throw tokleak::Error("pred and truth have different record counts");
    }
    std::unique_ptr<tokleak::EmbeddingProvider> embedder;
    if (embedder_spec.rfind("cmd:", 0) == 0) {
        embedder = std::make_unique<tokleak::ExternalEmbedder>(embedder_spec.substr(4));
    } else {
        embedder = std::make_unique<tokleak::TfEmbedder>();
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < pred.size(); ++i) pairs.emplace_back(pred[i], truth[i]);
    auto summary = tokleak::evaluate_batch(pairs, *embedder);
    OutputTarget out(out_path);
    out.stream() << tokleak::render_summary_table(summary);
    return kExitOk;
}

int cmd_mitigate(const std::string& policy_path, const std::string& apply_spec,
                 const std::string& corpus_path, const std::string& vocab_path,
                 const std::string& dict_path, const std::string& report_path) {
    auto vocab = load_vocab_or_builtin(vocab_path);
    auto policy = tokleak::load_policy(policy_path);
    auto corpus = tokleak::load_corpus(corpus_path);
    std::vector<std::string> dictionary;
    if (dict_path.empty()) {
        dictionary = tokleak::basic_word_list();
        for (char c : tokleak::kPunctuation) dictionary.emplace_back(1, c);
    } else {
        std::ifstream in(dict_path);
        if (!in) throw tokleak::Error("cannot open dictionary file: " + dict_path);
        std::string word;
        while (std::getline(in, word)) {
            if (!word.empty()) dictionary.push_back(word);
        }
    }
    std::optional<tokleak::Mitigation> mitigation;
    if (!apply_spec.empty() && apply_spec != "none") mitigation = parse_mitigation(apply_spec);
    auto report = tokleak::measure_leakage(corpus, policy, mitigation, vocab, dictionary);
    OutputTarget out(report_path);
    out.stream() << "exact_recovery_rate=" << report.exact_recovery_rate << "\n"
                 << "residual_entropy_bits=" << report.residual_entropy_bits
                 << (report.entropy_is_lower_bound ? " (lower bound)" : "") << "\n"
                 << "bandwidth_overhead=" << report.bandwidth_overhead << "\n";
    return kExitOk;
}

int cmd_pipeline(const std::string& config_path, const std::string& rows_path,
                 const std::string& out_path) {
    std::ifstream in(config_path);
    if (!in) throw tokleak::Error("cannot open pipeline config: " + config_path);
    nlohmann::json j;
    in >> j;
    tokleak::PipelineConfig config;
    config.vocab_path = j.value("vocab", "");
    config.policy_path = j.value("policy", "");
    config.corpus_path = j.value("corpus", "");
    config.model_first_path = j.value("model_first", "");
    config.model_inner_path = j.value("model_inner", "");
    config.reconstructor = j.value("reconstructor", "ngram");
    config.seed = j.value("seed", std::uint64_t{1});
    config.k = j.value("k", 8);
    config.beam_width = j.value("beam_width", 16);
    config.order = j.value("order", 3);
    config.jobs = j.value("jobs", 1);
    if (config.corpus_path.empty()) throw tokleak::Error("pipeline config: 'corpus' is required");

    auto outcome = tokleak::run_pipeline(config);
    if (!rows_path.empty()) {
        OutputTarget rows(rows_path);
        tokleak::write_pipeline_rows(outcome, rows.stream());
    }
    OutputTarget out(out_path);
    out.stream() << tokleak::render_summary_table(outcome.summary);
    if (outcome.failures > 0) {
        std::cerr << outcome.failures << " responses failed a pipeline stage\n";
        return kExitStage;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token-length side-channel toolkit"};
    app.require_subcommand(1);

    std::string policy_path, corpus_path, vocab_path, out_path = "-", trace_path;
    std::string mode = "cumulative", stream_id = "r0", lengths_path, segments_path;
    std::string model_path, model_inner_path, external, augment_path, which = "first";
    std::string pred_path, truth_path, embedder_spec, apply_spec, dict_path, report_path = "-";
    std::string config_path, rows_path;
    std::uint64_t seed = 0;
    int h_value = -1, max_fragment = 0, frag_header = 0, k = 8, beam = 16, order = 3;
    bool stats = false;

    auto* simulate = app.add_subcommand("simulate", "generate a trace for a corpus");
    simulate->add_option("--policy", policy_path)->required();
    simulate->add_option("--corpus", corpus_path)->required();
    simulate->add_option("--vocab", vocab_path);
    simulate->add_option("--seed", seed);
    simulate->add_option("--out", out_path);

    auto* extract = app.add_subcommand("extract", "recover token lengths from a trace");
    extract->set_help_flag("--help", "print help");  // frees -h/--h for the overhead option
    extract->add_option("--trace", trace_path)->required();
    extract->add_option("--mode", mode)->check(CLI::IsMember({"cumulative", "pertoken"}));
    extract->add_option("--stream", stream_id);
    extract->add_option("--h", h_value);
    extract->add_option("--max-fragment", max_fragment);
    extract->add_option("--frag-header", frag_header);
    extract->add_option("--out", out_path);

    auto* seg = app.add_subcommand("segment", "split a length sequence into segments");
    seg->add_option("--lengths", lengths_path)->required();
    seg->add_option("--out", out_path);

    auto* rec = app.add_subcommand("reconstruct", "infer text from segmented lengths");
    rec->add_option("--segments", segments_path)->required();
    rec->add_option("--model", model_path);
    rec->add_option("--model-inner", model_inner_path);
    rec->add_option("--vocab", vocab_path);
    rec->add_option("--external", external, "external reconstructor command");
    rec->add_option("--k", k);
    rec->add_option("--beam", beam);
    rec->add_option("--seed", seed);
    rec->add_option("--out", out_path);

    auto* train = app.add_subcommand("train", "train an n-gram segment model");
    train->add_option("--corpus", corpus_path)->required();
    train->add_option("--vocab", vocab_path);
    train->add_option("--order", order);
    train->add_option("--which", which)->check(CLI::IsMember({"first", "inner"}));
    train->add_option("--out", out_path)->required();

    auto* dataprep = app.add_subcommand("dataprep", "build a training dataset");
    dataprep->add_option("--corpus", corpus_path)->required();
    dataprep->add_option("--vocab", vocab_path);
    dataprep->add_option("--augment", augment_path, "policy file for augmented lengths");
    dataprep->add_option("--seed", seed);
    dataprep->add_flag("--stats", stats);
    dataprep->add_option("--out", out_path);

    auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
    evaluate->add_option("--pred", pred_path)->required();
    evaluate->add_option("--truth", truth_path)->required();
    evaluate->add_option("--embedder", embedder_spec, "cmd:<prog> for an external embedder");
    evaluate->add_option("--out", out_path);

    auto* mitigate = app.add_subcommand("mitigate", "measure residual leakage of a mitigation");
    mitigate->add_option("--policy", policy_path)->required();
    mitigate->add_option("--apply", apply_spec, "pad:bucket=N | pad:uniform=MIN,MAX | group:N | batch");
    mitigate->add_option("--corpus", corpus_path)->required();
    mitigate->add_option("--vocab", vocab_path);
    mitigate->add_option("--dict", dict_path);
    mitigate->add_option("--report", report_path);

    auto* pipeline = app.add_subcommand("pipeline", "full simulate->reconstruct->evaluate run");
    pipeline->add_option("--config", config_path)->required();
    pipeline->add_option("--rows", rows_path, "per-response JSONL output");
    pipeline->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(policy_path, corpus_path, vocab_path, out_path, seed);
        }
        if (extract->parsed()) {
            std::optional<int> h;
            if (h_value >= 0) h = h_value;
            return cmd_extract(trace_path, mode, stream_id, h, max_fragment, frag_header,
                               out_path);
        }
        if (seg->parsed()) return cmd_segment(lengths_path, out_path);
        if (rec->parsed()) {
            return cmd_reconstruct(segments_path, model_path, model_inner_path, vocab_path, k,
                                   beam, seed, external, out_path);
        }
        if (train->parsed()) return cmd_train(corpus_path, vocab_path, order, which, out_path);
        if (dataprep->parsed()) {
            return cmd_dataprep(corpus_path, vocab_path, augment_path, seed, stats, out_path);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(pred_path, truth_path, embedder_spec, out_path);
        }
        if (mitigate->parsed()) {
            return cmd_mitigate(policy_path, apply_spec, corpus_path, vocab_path, dict_path,
                                report_path);
        }
        if (pipeline->parsed()) return cmd_pipeline(config_path, rows_path, out_path);
    } catch (const tokleak::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tokleak::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitConfig;
}
