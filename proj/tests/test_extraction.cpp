#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tokleak/builtin_vocab.hpp"
#include "tokleak/extraction.hpp"
#include "tokleak/simulator.hpp"

using namespace tokleak;

TEST_CASE("identify_messages passes a clean increasing run through") {
    MessageSizeSequence m = identify_messages(std::vector<std::int64_t>{102, 103, 105, 110});
    CHECK(m.sizes == std::vector<std::int64_t>{102, 103, 105, 110});
    CHECK(m.start_packet_index == 0);
}

TEST_CASE("identify_messages drops control packets that break continuity") {
    MessageSizeSequence m = identify_messages(std::vector<std::int64_t>{102, 103, 33, 105, 110});
    CHECK(m.sizes == std::vector<std::int64_t>{102, 103, 105, 110});
}

TEST_CASE("identify_messages skips noise ahead of the response start") {
    MessageSizeSequence m =
        identify_messages(std::vector<std::int64_t>{900, 800, 102, 103, 105, 110});
    CHECK(m.sizes == std::vector<std::int64_t>{102, 103, 105, 110});
    CHECK(m.start_packet_index == 2);
}

TEST_CASE("identify_messages reassembles saw-tooth fragments") {
    IdentifyOptions opts;
    opts.min_run = 1;
    opts.max_fragment_payload = 1200;
    opts.fragment_header = 28;
    MessageSizeSequence m = identify_messages(std::vector<std::int64_t>{1200, 184}, opts);
    REQUIRE(m.sizes.size() == 1);
    CHECK(m.sizes[0] == defragment({1200, 184}, 28));
    CHECK(m.sizes[0] == 1328);
}

TEST_CASE("identify_messages round-trips fragmented simulated traffic") {
    TransmissionPolicy p;
    p.metadata_overhead_h = 1300;  // push every message over the fragmentation threshold
    p.max_fragment_payload = 1200;
    p.fragment_header = 28;
    const Vocabulary& v = basic_english_vocab();
    auto [trace, truth] = simulate_response("Try applying some cream.", v, p);
    IdentifyOptions opts;
    opts.max_fragment_payload = 1200;
    opts.fragment_header = 28;
    MessageSizeSequence m = identify_messages(payload_sizes(trace.packets), opts);
    CHECK(m.sizes == truth.message_sizes);
}

TEST_CASE("identify_messages requires a minimum run") {
    CHECK_THROWS_AS(identify_messages(std::vector<std::int64_t>{50, 40, 30}), NoResponseFound);
}

TEST_CASE("extract_cumulative applies the delta formula") {
    MessageSizeSequence m;
    m.sizes = {102, 103};
    ExtractOptions opts;
    opts.metadata_overhead_h = 100;
    TokenLengthSequence t = extract_cumulative(m, opts);
    CHECK(t.lengths == std::vector<int>{2, 1});
    CHECK(t.hidden_prefix_count == 0);
}

TEST_CASE("extract_cumulative hides the first token when h is unknown") {
    MessageSizeSequence m;
    m.sizes = {5, 8, 10};
    TokenLengthSequence t = extract_cumulative(m);
    CHECK(t.lengths == std::vector<int>{3, 2});
    CHECK(t.hidden_prefix_count == 1);

    MessageSizeSequence single;
    single.sizes = {42};
    TokenLengthSequence ts = extract_cumulative(single);
    CHECK(ts.lengths.empty());
    CHECK(ts.hidden_prefix_count == 1);
}

TEST_CASE("extract_cumulative rejects non-increasing sizes") {
    MessageSizeSequence m;
    m.sizes = {10, 10};
    CHECK_THROWS_AS(extract_cumulative(m), InvalidSequence);
}

TEST_CASE("large deltas are flagged as buffered suspects") {
    MessageSizeSequence m;
    m.sizes = {100, 130};
    TokenLengthSequence t = extract_cumulative(m);
    CHECK(t.provenance == Provenance::BufferedSuspect);
}

TEST_CASE("extract_pertoken subtracts the overhead") {
    CHECK(extract_pertoken({102, 101}, 100).lengths == std::vector<int>{2, 1});
    CHECK(extract_pertoken({101}, 100).lengths == std::vector<int>{1});
    CHECK_THROWS_AS(extract_pertoken({99}, 100), OverheadTooLarge);
}

TEST_CASE("estimate_overhead uses the min-minus-one rule") {
    CHECK(estimate_overhead({102, 101, 105}) == 100);
    CHECK(estimate_overhead({50}) == 49);
    CHECK_THROWS_AS(estimate_overhead({}), Error);
}

TEST_CASE("length sequences round-trip through the file format") {
    TokenLengthSequence t;
    t.lengths = {2, 3, 1};
    t.hidden_prefix_count = 1;
    t.provenance = Provenance::BufferedSuspect;
    std::stringstream buf;
    save_lengths(t, buf);
    TokenLengthSequence back = load_lengths(buf);
    CHECK(back.lengths == t.lengths);
    CHECK(back.hidden_prefix_count == 1);
    CHECK(back.provenance == Provenance::BufferedSuspect);
}

TEST_CASE("extraction inverts simulation on clean cumulative traffic") {
    TransmissionPolicy p;
    p.metadata_overhead_h = 100;
    const Vocabulary& v = basic_english_vocab();
    auto [trace, truth] =
        simulate_response("Oh no! I'm sorry to hear that. Try applying some cream.", v, p);
    MessageSizeSequence m = identify_messages(payload_sizes(trace.packets));
    ExtractOptions opts;
    opts.metadata_overhead_h = 100;
    CHECK(extract_cumulative(m, opts).lengths == truth.token_byte_lengths);
}
