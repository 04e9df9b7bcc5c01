#include <catch2/catch_amalgamated.hpp>

#include "tokleak/metrics.hpp"

using namespace tokleak;

static const std::string kCand =
    "As an AI language model, I don't have access to the latest trade statistics,";
static const std::string kRef =
    "As an AI language model, I don't have access to the latest crime statistics,";

TEST_CASE("levenshtein basics") {
    CHECK(levenshtein("", "") == 0);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("trade", "crime") == 3);
}

TEST_CASE("reference pair reproduces the published metric values") {
    CHECK_THAT(edit_distance_norm(kCand, kRef), Catch::Matchers::WithinAbs(0.04, 0.01));
    CHECK_THAT(rouge1_precision(kCand, kRef), Catch::Matchers::WithinAbs(0.93, 0.01));
}

TEST_CASE("identical texts score perfectly") {
    TfEmbedder emb;
    EvalResult r = evaluate_pair(kRef, kRef, emb);
    CHECK(r.ed == 0.0);
    CHECK(r.rouge1 == 1.0);
    CHECK(r.rougeL == 1.0);
    CHECK_THAT(r.phi, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(r.success);
}

TEST_CASE("disjoint texts score zero and fail") {
    TfEmbedder emb;
    EvalResult r = evaluate_pair("alpha beta gamma", "delta epsilon zeta", emb);
    CHECK(r.rouge1 == 0.0);
    CHECK(r.rougeL == 0.0);
    CHECK(r.phi == 0.0);
    CHECK_FALSE(r.success);
}

TEST_CASE("metric words are lowercased and stripped of punctuation") {
    CHECK(metric_words("Don't worry, be HAPPY!") ==
          std::vector<std::string>{"dont", "worry", "be", "happy"});
}

TEST_CASE("rouge1 clips repeated words") {
    // "a a a" against "a": only one credited match out of three.
    CHECK_THAT(rouge1_precision("a a a", "a"), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("rougeL rewards order") {
    CHECK(rougeL("the cat sat", "the cat sat") == 1.0);
    CHECK_THAT(rougeL("sat cat the", "the cat sat"), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("empty text conventions") {
    CHECK(edit_distance_norm("", "") == 0.0);
    CHECK(rouge1_precision("", "anything") == 0.0);
    TfEmbedder emb;
    CHECK(cosine_phi("", "anything", emb) == 0.0);
}

TEST_CASE("summarize aggregates thresholded fractions") {
    std::vector<EvalResult> results(4);
    results[0] = {0.0, 1.0, 1.0, 1.0, true};
    results[1] = {0.05, 0.95, 0.95, 0.8, true};
    results[2] = {0.5, 0.2, 0.2, 0.3, false};
    results[3] = {0.08, 0.9, 0.9, 0.6, true};
    BatchSummary s = summarize(results);
    CHECK(s.count == 4);
    CHECK_THAT(s.asr, Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THAT(s.phi_perfect, Catch::Matchers::WithinAbs(0.25, 1e-12));
    CHECK_THAT(s.r1_high, Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THAT(s.ed_low, Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THAT(s.mean_ed, Catch::Matchers::WithinAbs((0.0 + 0.05 + 0.5 + 0.08) / 4.0, 1e-12));
    CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("summary table renders one data row") {
    BatchSummary s = summarize({{0.0, 1.0, 1.0, 1.0, true}});
    std::string table = render_summary_table(s);
    CHECK(table.find("ASR") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
}
