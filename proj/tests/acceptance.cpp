// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run from the repository root (golden files are read from
// tests/data/).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tokleak/builtin_vocab.hpp"
#include "tokleak/dataprep.hpp"
#include "tokleak/extraction.hpp"
#include "tokleak/metrics.hpp"
#include "tokleak/mitigation.hpp"
#include "tokleak/ngram.hpp"
#include "tokleak/pipeline.hpp"
#include "tokleak/reconstruct.hpp"
#include "tokleak/segmentation.hpp"
#include "tokleak/simulator.hpp"

using namespace tokleak;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Lowercase multi-character words from the builtin list, usable mid-sentence.
std::vector<std::string> interior_words() {
    std::vector<std::string> out;
    for (const auto& w : basic_word_list()) {
        if (w.size() >= 2 && std::islower(static_cast<unsigned char>(w[0])) &&
            w.find('\'') == std::string::npos) {
            out.push_back(w);
        }
    }
    return out;
}

std::string random_response(Rng& rng, const std::vector<std::string>& words) {
    std::string text = "Here";
    int n = 8 + static_cast<int>(next_below(rng, 11));
    for (int i = 0; i < n; ++i) text += " " + words[next_below(rng, words.size())];
    text += ".";
    return text;
}

// 1. Round-trip exactness over 1,000 seeded responses in under 10 seconds.
bool criterion_roundtrip() {
    auto start = std::chrono::steady_clock::now();
    const Vocabulary& vocab = basic_english_vocab();
    auto words = interior_words();
    TransmissionPolicy policy;
    policy.metadata_overhead_h = 100;
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        std::string text = random_response(rng, words);
        auto [trace, truth] = simulate_response(text, vocab, policy);
        MessageSizeSequence msgs = identify_messages(payload_sizes(trace.packets));
        TokenLengthSequence seq = extract_cumulative(msgs);  // h unknown: first token hidden
        std::vector<int> expect(truth.token_lengths.begin() + 1, truth.token_lengths.end());
        if (seq.lengths != expect || seq.hidden_prefix_count != 1) return false;
    }
    return seconds_since(start) < 10.0;
}

// 2. Fragmentation oracle for every message size up to 5000.
bool criterion_fragmentation() {
    for (std::int64_t m = 1; m <= 5000; ++m) {
        if (defragment(fragment_message(m, 1200, 28), 28) != m) return false;
    }
    return fragment_message(2500, 1200, 28) == std::vector<std::int64_t>{1200, 1200, 184};
}

// 3. Candidate count for two mid-sentence blanks over a dictionary with 880
// four-letter and 905 five-letter nouns equals the 880 x 905 product.
bool criterion_entropy() {
    std::vector<std::string> dictionary;
    auto synth = [&](std::size_t len, int count) {
        for (int i = 0; i < count; ++i) {
            std::string w;
            int x = i;
            for (std::size_t c = 0; c < len; ++c) {
                w += static_cast<char>('a' + x % 26);
                x /= 26;
            }
            dictionary.push_back(w);
        }
    };
    synth(4, 880);
    synth(5, 905);
    CountOptions opts;
    opts.mid_sentence = true;  // both blanks sit mid-sentence: "She has a _ and a _"
    return count_candidates({5, 6}, dictionary, opts) == 880ull * 905ull;
}

// 4. Training prompts match the golden files byte for byte.
bool criterion_prompts() {
    auto slurp = [](const std::string& path) -> std::string {
        std::ifstream in(path, std::ios::binary);
        if (!in) return "<missing:" + path + ">";
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const Vocabulary& vocab = basic_english_vocab();
    Rng rng(0);
    auto examples = examples_for_segments(
        {"I need more details about your rash.",
         " Where is it, and what does it look like?"},
        vocab, std::nullopt, rng);
    if (examples.size() != 2) return false;
    return examples[0].prompt_text == slurp("tests/data/prompt_first.txt") &&
           examples[1].prompt_text == slurp("tests/data/prompt_inner.txt");
}

// 5. Segmentation invariants over 10,000 random sequences plus golden cases.
bool criterion_segmentation() {
    std::vector<int> example = {2, 3, 1, 2, 2, 6, 3, 5, 5, 1, 4, 9, 5, 6, 1};
    SegmentedSequence golden = segment(example);
    if (golden.segments.size() != 1 || golden.segments[0] != example) return false;

    std::vector<int> two(25, 4);
    two[12] = 1;
    SegmentedSequence pair = segment(two);
    if (pair.segments.size() != 2 || pair.segments[0].size() != 13 ||
        pair.segments[1].size() != 12) {
        return false;
    }

    std::vector<int> list(12, 4);
    list.insert(list.end(), {3, 1, 1});
    list.insert(list.end(), 12, 5);
    SegmentedSequence reloc = segment(list);
    if (reloc.segments.size() != 2 || reloc.segments[1][0] != 3 || reloc.segments[1][1] != 1 ||
        reloc.segments[1][2] != 1 ||
        reloc.boundary_kinds != std::vector<BoundaryKind>{BoundaryKind::ListItem}) {
        return false;
    }

    Rng rng(31);
    for (int trial = 0; trial < 10000; ++trial) {
        std::size_t n = 1 + next_below(rng, 80);
        std::vector<int> L(n);
        for (auto& x : L) x = 1 + static_cast<int>(next_below(rng, 9));
        SegmentedSequence s = segment(L);
        if (s.flatten() != L) return false;
        if (s.boundary_kinds.size() + 1 != s.segments.size()) return false;
        if (s.segments.size() > 1) {
            for (const auto& seg : s.segments) {
                if (seg.size() < kMinSegmentTokens) return false;
            }
        }
    }
    return true;
}

// Corpus for criterion 6: 50 distinct two-sentence responses whose full
// token-length sequences are pairwise distinct and whose first inner word
// varies across length classes.
std::vector<std::string> pipeline_corpus(const Vocabulary& vocab) {
    auto words = interior_words();
    std::map<std::size_t, std::vector<std::string>> by_len;
    for (const auto& w : words) by_len[w.size()].push_back(w);
    std::vector<std::vector<std::string>> classes;
    for (auto& [len, list] : by_len) {
        if (list.size() >= 10) classes.push_back(list);
    }

    Rng rng(4096);
    std::set<std::vector<int>> seen;
    std::vector<std::string> corpus;
    for (int i = 0; i < 50; ++i) {
        for (int attempt = 0;; ++attempt) {
            const auto& c1 = classes[i % classes.size()];
            const auto& c2 = classes[(i + 1) % classes.size()];
            std::string text = "Here " + c1[(i / classes.size() + attempt) % c1.size()];
            for (int w = 0; w < 9; ++w) text += " " + words[next_below(rng, words.size())];
            text += ". Also " + c2[(i / classes.size() + attempt) % c2.size()];
            for (int w = 0; w < 9; ++w) text += " " + words[next_below(rng, words.size())];
            text += ".";
            std::vector<int> T = tokenize(text, vocab).lengths;
            if (seen.insert(T).second) {
                corpus.push_back(text);
                break;
            }
        }
    }
    return corpus;
}

// 6. End-to-end reconstruction of a known 50-response corpus, plus the
// generic-vs-victim model ablation.
bool criterion_pipeline() {
    const Vocabulary& vocab = basic_english_vocab();
    std::vector<std::string> corpus = pipeline_corpus(vocab);
    if (corpus.size() != 50) return false;

    std::string corpus_path = "/tmp/tokleak_acceptance_corpus.txt";
    {
        std::ofstream out(corpus_path);
        save_corpus(corpus, out);
    }
    PipelineConfig config;
    config.corpus_path = corpus_path;
    config.seed = 7;
    config.k = 8;
    config.beam_width = 16;
    config.order = 3;
    PipelineOutcome outcome = run_pipeline(config);
    std::remove(corpus_path.c_str());
    if (outcome.failures != 0) return false;
    std::size_t exact = 0;
    for (const auto& row : outcome.rows) exact += row.exact;
    double rate = static_cast<double>(exact) / static_cast<double>(outcome.rows.size());
    if (rate < 0.90) {
        std::cerr << "  pipeline exact-match rate " << rate << "\n";
        return false;
    }

    // Ablation: a model trained on an unrelated generic corpus must do
    // strictly worse (mean phi) on the same inputs than the victim model.
    auto [first_corpus, inner_corpus] = split_segment_corpus(corpus, vocab);
    NGramModel victim = train_ngram(first_corpus, vocab, 3, "victim");
    auto words = interior_words();
    Rng grng(99);
    std::vector<std::string> generic_corpus;
    for (int i = 0; i < 50; ++i) {
        std::string text = "Also";
        for (int w = 0; w < 11; ++w) text += " " + words[next_below(grng, words.size())];
        generic_corpus.push_back(text + ".");
    }
    NGramModel generic = train_ngram(generic_corpus, vocab, 3, "generic");

    TfEmbedder embedder;
    double victim_phi = 0.0, generic_phi = 0.0;
    for (const auto& truth : first_corpus) {
        std::vector<int> T = tokenize(truth, vocab).lengths;
        auto v = beam_reconstruct(victim, T, std::nullopt, vocab, 16, 8, 7);
        auto g = beam_reconstruct(generic, T, std::nullopt, vocab, 16, 8, 7);
        victim_phi += v.empty() ? 0.0 : cosine_phi(v.front().text, truth, embedder);
        generic_phi += g.empty() ? 0.0 : cosine_phi(g.front().text, truth, embedder);
    }
    if (!(generic_phi < victim_phi)) {
        std::cerr << "  ablation mean phi: victim " << victim_phi / 50 << " generic "
                  << generic_phi / 50 << "\n";
        return false;
    }
    return true;
}

// 7. Metric implementations reproduce the published worked example.
bool criterion_metrics() {
    const std::string cand =
        "As an AI language model, I don't have access to the latest trade statistics,";
    const std::string ref =
        "As an AI language model, I don't have access to the latest crime statistics,";
    return std::abs(edit_distance_norm(cand, ref) - 0.04) <= 0.01 &&
           std::abs(rouge1_precision(cand, ref) - 0.93) <= 0.01;
}

// 8. Mitigation ordering on per-token traffic, in under 60 seconds.
bool criterion_mitigation() {
    auto start = std::chrono::steady_clock::now();
    Vocabulary vocab = Vocabulary::from_words({"it", "misunderstandings"}, "mit");
    std::vector<std::string> corpus;
    for (int i = 0; i < 20; ++i) {
        corpus.push_back("it misunderstandings it it it");
    }
    std::vector<std::string> dictionary = {"it", "misunderstandings"};
    for (char c : kPunctuation) dictionary.emplace_back(1, c);

    TransmissionPolicy policy;
    policy.mode = TransmissionMode::PerToken;
    policy.metadata_overhead_h = 62;
    policy.rng_seed = 5;

    auto rate = [&](const std::optional<Mitigation>& m) {
        return measure_leakage(corpus, policy, m, vocab, dictionary).exact_recovery_rate;
    };
    PaddingModel b16, b64;
    b16.kind = b64.kind = PaddingModel::Kind::BucketRound;
    b16.bucket_bytes = 16;
    b64.bucket_bytes = 64;

    double none = rate(std::nullopt);
    double pad16 = rate(Mitigation::Pad_(b16));
    double pad64 = rate(Mitigation::Pad_(b64));
    double batch = rate(Mitigation::Batch_());
    double batch_overhead =
        measure_leakage(corpus, policy, Mitigation::Batch_(), vocab, dictionary)
            .bandwidth_overhead;
    bool ordered = none == 1.0 && none > pad16 && pad16 > pad64 && pad64 > batch && batch == 0.0;
    if (!ordered) {
        std::cerr << "  recovery rates: none " << none << " pad16 " << pad16 << " pad64 "
                  << pad64 << " batch " << batch << "\n";
    }
    return ordered && batch_overhead <= 0.0 && seconds_since(start) < 60.0;
}

// 9. Buffering realism: first-pair grouping frequency 0.80 +/- 0.02 over
// 10,000 seeded simulations.
bool criterion_buffering() {
    const Vocabulary& vocab = basic_english_vocab();
    TransmissionPolicy policy;
    policy.metadata_overhead_h = 100;
    policy.buffering = BufferingModel{0.8, 0.02};
    int grouped = 0;
    for (int i = 0; i < 10000; ++i) {
        TransmissionPolicy p = policy;
        p.rng_seed = 1000 + i;
        auto [trace, truth] = simulate_response("Try applying some gentle cream daily.", vocab, p);
        if (!truth.grouped_indices.empty() && truth.grouped_indices[0].size() >= 2) ++grouped;
    }
    double freq = grouped / 10000.0;
    if (std::abs(freq - 0.80) > 0.02) {
        std::cerr << "  first-pair grouping frequency " << freq << "\n";
        return false;
    }
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*run)();
    };
    const Criterion criteria[] = {
        {"1 round-trip exactness (1000 responses, <10s)", criterion_roundtrip},
        {"2 fragmentation oracle (m in 1..5000)", criterion_fragmentation},
        {"3 candidate-count product (880x905)", criterion_entropy},
        {"4 prompt-format fidelity (golden files)", criterion_prompts},
        {"5 segmentation invariants (10000 sequences)", criterion_segmentation},
        {"6 known-corpus reconstruction (>=90% exact + ablation)", criterion_pipeline},
        {"7 metric reference values (ED 0.04, ROUGE-1 0.93)", criterion_metrics},
        {"8 mitigation ordering (none > pad16 > pad64 > batch)", criterion_mitigation},
        {"9 buffering realism (0.80 +/- 0.02)", criterion_buffering},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::cerr << "  exception: " << e.what() << "\n";
        }
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << "\n";
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}
