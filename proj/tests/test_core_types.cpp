#include "fixtures.hpp"

#include "cue/dataset.hpp"
#include "cue/error.hpp"
#include "cue/io.hpp"
#include "cue/rng.hpp"
#include "cue/synthetic.hpp"

#include <doctest.h>

#include <fstream>
#include <numeric>

using namespace cue;

namespace {

std::vector<Sample> three_samples() {
    return {{"a", "What is the capital of France?", "Paris"},
            {"b", "What colour is the sky?", "blue"},
            {"c", "How many legs has a spider?", "eight"}};
}

std::vector<GenerationRecord> three_records() {
    std::vector<GenerationRecord> out;
    for (const char* id : {"a", "b", "c"})
        out.push_back(fixture::record(id, {fixture::gen({-0.1, -0.2}), fixture::gen({-0.3})}));
    return out;
}

}  // namespace

TEST_CASE("well-formed dataset has no violations") {
    const auto report = validate_dataset(three_samples(), three_records());
    CHECK(report.ok());
    CHECK(report.usable_records.at(Method::pe) == 3);
    CHECK(report.usable_records.at(Method::ls) == 3);
    CHECK(report.usable_records.at(Method::vc) == 0);
}

TEST_CASE("token / logprob length mismatch is one violation") {
    auto records = three_records();
    records[1].generations[0].tokens = {"x", "y"};
    records[1].generations[0].token_logprobs = std::vector<double>{-0.5};
    const auto report = validate_dataset(three_samples(), records);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == "length mismatch");
    CHECK(report.violations[0].id == "b");
}

TEST_CASE("record without a sample is an orphan") {
    auto records = three_records();
    records.push_back(fixture::record("zz", {fixture::gen({-1.0})}));
    const auto report = validate_dataset(three_samples(), records);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == "orphan record");
}

TEST_CASE("validation reports ranges, duplicates and bad logprobs") {
    auto samples = three_samples();
    samples.push_back({"a", "", "dup"});
    auto records = three_records();
    records[0].verbal_confidence = 120.0;
    records[1].p_true = -0.1;
    records[2].external_corrector_prob = 1.2;
    records[2].generations[1].token_logprobs = std::vector<double>{0.5};
    records[0].primary_index = 7;
    const auto report = validate_dataset(samples, records);
    CHECK(report.count("duplicate sample") == 1);
    CHECK(report.count("empty question") == 1);
    CHECK(report.count("verbal_confidence out of range") == 1);
    CHECK(report.count("p_true out of range") == 1);
    CHECK(report.count("external_corrector_prob out of range") == 1);
    CHECK(report.count("positive logprob") == 1);
    CHECK(report.count("primary index out of range") == 1);
}

TEST_CASE("records without logprobs stay valid but lose logit methods") {
    auto records = three_records();
    for (auto& g : records[0].generations) g.token_logprobs.reset();
    records[0].p_true = 0.3;
    const auto report = validate_dataset(three_samples(), records);
    CHECK(report.ok());
    CHECK(report.usable_records.at(Method::pe) == 2);
    CHECK(report.usable_records.at(Method::ls) == 3);
    CHECK(report.usable_records.at(Method::ptrue) == 1);
}

TEST_CASE("split cardinality, disjointness and determinism") {
    const std::vector<std::string> ids{"a", "b", "c", "d"};
    const auto s = split_dataset(ids, 7, 0.5);
    CHECK(s.dev_ids.size() == 2);
    CHECK(s.test_ids.size() == 2);
    for (const auto& d : s.dev_ids)
        CHECK(std::find(s.test_ids.begin(), s.test_ids.end(), d) == s.test_ids.end());
    CHECK(split_dataset(ids, 7, 0.5) == s);
    // Input order does not matter: ids are sorted before shuffling.
    CHECK(split_dataset({"d", "c", "b", "a"}, 7, 0.5) == s);
    CHECK(io::to_json(s).dump() == io::to_json(split_dataset(ids, 7, 0.5)).dump());
}

TEST_CASE("split rejects fewer than two ids and bad fractions") {
    CHECK_THROWS_WITH_AS(split_dataset({"a"}, 1, 0.5), "split needs at least 2 samples", InvalidInput);
    CHECK_THROWS_AS(split_dataset({"a", "b"}, 1, 1.0), InvalidInput);
    CHECK_THROWS_AS(split_dataset({"a", "b"}, 1, 0.0), InvalidInput);
}

TEST_CASE("split sizes follow round(fraction * n)") {
    std::vector<std::string> ids;
    for (int i = 0; i < 37; ++i) ids.push_back("id" + std::to_string(i));
    CHECK(split_dataset(ids, 3, 0.5).dev_ids.size() == 19);  // round(18.5) = 19
    CHECK(split_dataset(ids, 3, 0.25).dev_ids.size() == 9);
    // Different seeds give different partitions on this many ids.
    CHECK(split_dataset(ids, 3, 0.5).dev_ids != split_dataset(ids, 4, 0.5).dev_ids);
}

TEST_CASE("fisher_yates is reproducible and a permutation") {
    std::vector<int> a(50);
    std::iota(a.begin(), a.end(), 0);
    std::vector<int> b(a);
    std::mt19937_64 r1(99), r2(99);
    fisher_yates(std::span<int>(a), r1);
    fisher_yates(std::span<int>(b), r2);
    CHECK(a == b);
    std::sort(a.begin(), a.end());
    for (int i = 0; i < 50; ++i) CHECK(a[i] == i);
}

TEST_CASE("round trip: serialize then parse gives identical datasets") {
    // Property over many generated datasets, including records with nulls.
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synthetic::Config cfg;
        cfg.n_train = 5;
        cfg.n_eval = 10;
        cfg.seed = seed;
        auto data = synthetic::make_dataset(cfg);
        data.records[0].generations[0].token_logprobs.reset();
        data.records[1].external_corrector_prob = 0.25;
        const auto dir = fixture::temp_dir("roundtrip");
        io::write_samples(dir / "s.jsonl", data.samples);
        io::write_generations(dir / "g.jsonl", data.records);
        CHECK(io::read_samples(dir / "s.jsonl") == data.samples);
        CHECK(io::read_generations(dir / "g.jsonl") == data.records);
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("unknown keys are ignored with a warning") {
    const auto dir = fixture::temp_dir("unknown");
    std::ofstream(dir / "s.jsonl") << R"({"id":"a","question":"q?","reference_answer":"x","extra":1})" << "\n";
    io::Warnings warnings;
    const auto samples = io::read_samples(dir / "s.jsonl", &warnings);
    CHECK(samples.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("extra") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("unreadable file is an I/O error, malformed content a validation error") {
    CHECK_THROWS_AS(io::read_samples("/definitely/not/here.jsonl"), IoError);
    const auto dir = fixture::temp_dir("malformed");
    std::ofstream(dir / "bad.jsonl") << "{\"id\": \"a\", \"question\": 3}\n";
    CHECK_THROWS_AS(io::read_samples(dir / "bad.jsonl"), InvalidInput);
    std::ofstream(dir / "broken.jsonl") << "{not json\n";
    CHECK_THROWS_AS(io::read_generations(dir / "broken.jsonl"), InvalidInput);
    std::filesystem::remove_all(dir);
}

TEST_CASE("optional generation fields default sensibly") {
    const auto j = io::Json::parse(R"({"id":"x","generations":[{"text":"hi","tokens":["hi"],"token_logprobs":[-0.1]}]})");
    const auto r = io::record_from_json(j);
    CHECK(r.primary_index == 0);
    CHECK_FALSE(r.verbal_confidence.has_value());
    CHECK_FALSE(r.llm_judge.has_value());
    CHECK(r.generations[0].sequence_logprob() == doctest::Approx(-0.1));
}

TEST_CASE("method names round trip") {
    for (Method m : {Method::pe, Method::ln_pe, Method::se, Method::sar_t, Method::sar_s, Method::sar, Method::ls,
                     Method::vc, Method::ptrue, Method::corrector, Method::fused})
        CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("LN_PE") == Method::ln_pe);
    CHECK_THROWS_AS(parse_method("bogus"), InvalidInput);
}

TEST_CASE("score files round trip and reject mixed methods") {
    ScoreSet s;
    s.method = Method::se;
    s.scores = {{"a", 1.25}, {"b", 0.1 + 0.2}};
    const auto back = io::scores_from_jsonl(io::scores_to_jsonl(s), "mem");
    CHECK(back.scores == s.scores);
    CHECK(back.method == Method::se);
    CHECK_THROWS_AS(io::scores_from_jsonl("{\"id\":\"a\",\"method\":\"pe\",\"score\":1}\n"
                                          "{\"id\":\"b\",\"method\":\"se\",\"score\":1}\n",
                                          "mem"),
                    InvalidInput);
}
