// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "fixtures.hpp"
#include "golden.hpp"
#include "oracles.hpp"

#include "cue/corrector.hpp"
#include "cue/error.hpp"
#include "cue/estimators.hpp"
#include "cue/fusion.hpp"
#include "cue/io.hpp"
#include "cue/judge.hpp"
#include "cue/metrics.hpp"
#include "cue/pipeline.hpp"
#include "cue/rng.hpp"
#include "cue/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace cue;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    // Records the first failure only.
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
    void expect(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> random_similarity(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = uniform_unit(rng);
    return m;
}

std::vector<std::vector<double>> identity(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

SimilarityOracle precomputed(const std::string& id, std::vector<std::vector<double>> sim,
                             std::vector<std::vector<double>> relevance) {
    std::map<std::string, SimilarityEntry> m;
    m[id] = SimilarityEntry{std::move(sim), std::move(relevance)};
    return SimilarityOracle::precomputed(std::move(m));
}

Outcome estimator_oracle_suite() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> lp(-3.0, -0.01);
    const double tol = 1e-9;
    std::size_t checks = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t b = 1 + rng() % 5;
        std::vector<Generation> gens;
        std::vector<std::vector<double>> relevance;
        for (std::size_t i = 0; i < b; ++i) {
            std::vector<double> lps(1 + rng() % 6);
            for (auto& x : lps) x = lp(rng);
            std::vector<double> rel(lps.size());
            for (auto& r : rel) r = rng() % 4 == 0 ? 0.0 : uniform_unit(rng);
            relevance.push_back(rel);
            gens.push_back(fixture::gen(lps, "g" + std::to_string(rng() % 3)));
        }
        const auto record = fixture::record("r", gens);
        const auto sim = random_similarity(rng, b);
        const auto source = precomputed("r", sim, relevance);
        SarConfig sar_cfg;
        sar_cfg.sentence_temperature = trial % 2 ? 0.001 : 0.5;
        const double t = sar_cfg.sentence_temperature;
        const std::string at = " (fixture " + std::to_string(trial) + ")";

        o.expect(close(predictive_entropy(record), oracle::pe(record), tol), "PE" + at);
        o.expect(close(length_normalized_pe(record), oracle::ln_pe(record), tol), "LN-PE" + at);
        const auto clusters = cluster_generations(record, source, 0.5);
        o.expect(close(semantic_entropy(record, clusters), oracle::se(record, clusters), tol), "SE" + at);
        o.expect(close(sar_token(record, source), oracle::sar_t(record, relevance), tol), "SAR-t" + at);
        o.expect(close(sar_sentence(record, source, sar_cfg), oracle::sar_s(record, sim, t), tol), "SAR-s" + at);
        o.expect(close(sar_combined(record, source, sar_cfg), oracle::sar(record, relevance, sim, t), tol),
                 "SAR" + at);
        checks += 6;

        // Reductions: singleton clusters, uniform relevance, zero similarity.
        const auto plain = precomputed("r", identity(b), std::vector<std::vector<double>>{});
        const auto singletons = cluster_generations(record, plain, 0.5);
        o.expect(singletons.size() == b, "identity similarity did not give singleton clusters" + at);
        o.expect(semantic_entropy(record, singletons) == predictive_entropy(record), "SE-singleton != PE" + at);
        std::vector<std::vector<double>> uniform;
        for (const auto& g : gens) uniform.emplace_back(g.tokens.size(), 1.0);
        const auto flat = precomputed("r", identity(b), uniform);
        o.expect(sar_token(record, flat) == length_normalized_pe(record), "uniform SAR-t != LN-PE" + at);
        o.expect(sar_sentence(record, plain, sar_cfg) == predictive_entropy(record), "zero-sim SAR-s != PE" + at);
        checks += 4;
    }
    const double elapsed = seconds_since(t0);
    o.expect(elapsed < 5.0, "runtime " + fmt(elapsed) + " s >= 5 s");
    if (o.pass) o.detail = std::to_string(checks) + " checks on 100 fixtures, " + fmt(elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------------------

Outcome lcs_exhaustive_and_judge_table() {
    Outcome o;
    // Every sequence of length 0..8 over {a, b, c}; id order = (length, base-3 value).
    const std::vector<std::string> alphabet{"a", "b", "c"};
    std::vector<std::vector<std::string>> seqs;
    std::vector<std::size_t> offset;
    for (std::size_t len = 0, count = 1; len <= 8; ++len, count *= 3) {
        offset.push_back(seqs.size());
        for (std::size_t v = 0; v < count; ++v) {
            std::vector<std::string> s(len);
            for (std::size_t i = len, x = v; i-- > 0; x /= 3) s[i] = alphabet[x % 3];
            seqs.push_back(std::move(s));
        }
    }
    const std::size_t n = seqs.size();
    // Id of a sequence with its last token dropped.
    std::vector<std::size_t> prefix(n, 0);
    for (std::size_t len = 1; len <= 8; ++len) {
        const std::size_t count = offset.size() > len + 1 ? offset[len + 1] - offset[len] : n - offset[len];
        for (std::size_t v = 0; v < count; ++v) prefix[offset[len] + v] = offset[len - 1] + v / 3;
    }
    // Memoized recursion on (a, b) ids; 255 marks "not computed".
    std::vector<std::uint8_t> memo(n * n, 255);
    std::function<std::uint8_t(std::size_t, std::size_t)> rec = [&](std::size_t a, std::size_t b) -> std::uint8_t {
        if (seqs[a].empty() || seqs[b].empty()) return 0;
        auto& slot = memo[a * n + b];
        if (slot != 255) return slot;
        if (seqs[a].back() == seqs[b].back()) slot = static_cast<std::uint8_t>(rec(prefix[a], prefix[b]) + 1);
        else slot = std::max(rec(prefix[a], b), rec(a, prefix[b]));
        return slot;
    };
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < n && o.pass; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (lcs_length(seqs[a], seqs[b]) != rec(a, b)) {
                o.fail("LCS mismatch at pair (" + std::to_string(a) + ", " + std::to_string(b) + ")");
                break;
            }
            ++pairs;
        }
    }

    // Judge OR logic over rule verdict x ingested verdict x judge switch.
    std::size_t rows = 0;
    const Sample sample{"q", "question", "blue whale"};
    for (bool rule : {false, true}) {
        for (std::optional<bool> llm : {std::optional<bool>{}, std::optional<bool>{false}, std::optional<bool>{true}}) {
            for (bool use_llm : {false, true}) {
                auto record = fixture::record("q", {fixture::gen({-0.1}, rule ? "the blue whale" : "an orca")});
                record.llm_judge = llm;
                const auto j = judge_sample(sample, record, JudgeConfig{0.7, use_llm});
                const bool expected = rule || (use_llm && llm.value_or(false));
                o.expect(j.rule_correct == rule, "rule verdict wrong in truth table");
                o.expect(j.correct == expected, "OR logic wrong in truth table");
                o.expect(j.corrector_target == (expected ? 0 : 1), "corrector target wrong in truth table");
                ++rows;
            }
        }
    }
    if (o.pass) o.detail = std::to_string(pairs) + " sequence pairs, " + std::to_string(rows) + " truth-table rows";
    return o;
}

// ---------------------------------------------------------------------------

Outcome auroc_vs_pairwise() {
    Outcome o;
    std::mt19937_64 rng(42);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 199;
        const std::size_t levels = 1 + rng() % (trial % 2 ? 4 : 50);  // half the instances are tie-heavy
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % levels) / static_cast<double>(levels);
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        const double diff = std::abs(auroc(s, y) - oracle::auroc_pairwise(s, y));
        worst = std::max(worst, diff);
        o.expect(diff <= 1e-9, "instance " + std::to_string(trial) + " differs by " + fmt(diff));
    }
    if (o.pass) o.detail = "50 instances, max |diff| " + fmt(worst);
    return o;
}

// ---------------------------------------------------------------------------

Outcome ece_fixtures() {
    Outcome o;
    const double two = ece(std::vector<double>{0.05, 0.05}, std::vector<int>{0, 1}, 10).value;
    o.expect(std::abs(two - 0.45) <= 1e-12, "two-sample fixture gave " + fmt(two));
    const double calibrated =
        ece(std::vector<double>(10, 0.3), std::vector<int>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1}, 10).value;
    o.expect(std::abs(calibrated) <= 1e-12, "calibrated fixture gave " + fmt(calibrated));

    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        const std::size_t m = 1 + rng() % 20;
        std::vector<double> u(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = rng() % 3 ? uniform_unit(rng) : static_cast<double>(rng() % (m + 1)) / static_cast<double>(m);
            y[i] = static_cast<int>(rng() % 2);
        }
        const auto r = ece(u, y, m);
        o.expect(r.value >= 0.0 && r.value <= 1.0, "ECE out of [0, 1]");
        o.expect(std::abs(r.value - oracle::ece(u, y, m)) <= 1e-12, "ECE differs from bin-by-bin oracle");
        o.expect(r.bins.size() == m, "wrong bin count");
        std::size_t counted = 0;
        for (const auto& b : r.bins) {
            counted += b.count;
            if (b.count == 0) o.expect(b.confidence == 0.0 && b.accuracy == 0.0, "empty bin not zeroed");
        }
        o.expect(counted == n, "bins do not partition the samples");
    }
    if (o.pass) o.detail = "hand fixtures 0.45 / 0; 200 random invariant checks";
    return o;
}

// ---------------------------------------------------------------------------

Outcome bce_gradient_check() {
    Outcome o;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto c = oracle::random_gradient_case(seed);
        const auto analytic = bce_gradient(c.model, c.features, c.targets);
        const auto [numeric, numeric_bias] = oracle::bce_numeric_gradient(c.model, c.features, c.targets, 1e-5);
        const double err = oracle::relative_error(analytic.weights, analytic.bias, numeric, numeric_bias);
        worst = std::max(worst, err);
        o.expect(err < 1e-4, "model " + std::to_string(seed) + " relative error " + fmt(err));
    }
    if (o.pass) o.detail = "20 models, max relative error " + fmt(worst);
    return o;
}

// ---------------------------------------------------------------------------

ScoreSet to_set(Method m, const std::vector<double>& v) {
    ScoreSet s;
    s.method = m;
    for (std::size_t i = 0; i < v.size(); ++i) s.scores["s" + std::to_string(1000 + i)] = v[i];
    return s;
}

Labels to_labels(const std::vector<int>& v) {
    Labels l;
    for (std::size_t i = 0; i < v.size(); ++i) l["s" + std::to_string(1000 + i)] = v[i];
    return l;
}

Outcome grid_search_checks() {
    Outcome o;
    std::mt19937_64 rng(42);
    const auto grid = weight_grid(0.01);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 8 + rng() % 40;
        std::vector<double> u(n), c(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = static_cast<double>(rng() % 6) / 5.0;
            c[i] = uniform_unit(rng);
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        FusionConfig cfg;
        cfg.grid_step = 0.01;
        cfg.jobs = 1 + trial % 4;
        const auto r = grid_search_w(to_set(Method::pe, u), to_set(Method::corrector, c), to_labels(y), cfg);
        // Exhaustive re-evaluation; strict improvement keeps the smallest maximizer.
        std::vector<double> values;
        double best = -1.0;
        double best_w = 0.0;
        for (double w : grid) {
            const double a = oracle::fused_auroc(u, c, y, w);
            values.push_back(a);
            if (a > best + 1e-12) {
                best = a;
                best_w = w;
            }
        }
        o.expect(r.w_star == best_w, "trial " + std::to_string(trial) + ": w* " + fmt(r.w_star) + " vs " + fmt(best_w));
        o.expect(std::abs(r.objective - best) <= 1e-12, "objective differs from exhaustive maximum");

        const std::size_t centre = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), r.w_star) - grid.begin());
        for (double tol : {0.0, 0.01, 0.05}) {
            const auto [lo, hi] = oracle::stable_interval(values, centre, tol);
            const auto got = stable_range(r.curve, r.w_star, tol);
            o.expect(got.first == grid[lo] && got.second == grid[hi], "stable_range differs from linear-scan oracle");
        }
    }
    // All-tie curve: constant inputs make every w equally good.
    const auto tie = grid_search_w(to_set(Method::pe, {0.5, 0.5, 0.5, 0.5}),
                                   to_set(Method::corrector, {0.2, 0.2, 0.2, 0.2}), to_labels({0, 1, 0, 1}),
                                   FusionConfig{});
    o.expect(tie.w_star == 0.0, "all-tie fixture picked w* = " + fmt(tie.w_star));
    o.expect(stable_range(tie.curve, tie.w_star, 0.01) == std::pair<double, double>{0.0, 1.0},
             "all-tie stable range is not [0, 1]");
    if (o.pass) o.detail = "20 random instances x 101 grid points, all-tie w* = 0";
    return o;
}

// ---------------------------------------------------------------------------

PipelineConfig e2e_config(const fs::path& dir, const fs::path& out, unsigned jobs) {
    auto cfg = load_pipeline_config(dir / "pipeline.json");
    cfg.out_dir = out;
    cfg.jobs = jobs;
    return cfg;
}

Outcome end_to_end(const fs::path& dir) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream log;
    run_pipeline(e2e_config(dir, dir / "run1", 1), log);
    const double elapsed = seconds_since(t0);

    const auto report = report_from_json(io::Json::parse(io::read_text_file(dir / "run1" / artifacts::eval_report(Method::pe))));
    const double fused = report.deltas->auroc.corrected;
    const double vanilla = report.deltas->auroc.vanilla;
    o.expect(report.n_dev + report.n_test == 200, "fixture does not have 200 evaluation samples");
    o.expect(fused > vanilla, "fused AUROC " + fmt(fused) + " not above vanilla " + fmt(vanilla));
    o.expect(fused - vanilla >= 0.05, "margin " + fmt(fused - vanilla) + " below 0.05");
    o.expect(elapsed < 30.0, "runtime " + fmt(elapsed) + " s >= 30 s");

    const fs::path golden_dir = fs::path(CUE_TEST_DATA_DIR) / "golden";
    for (const auto& [artifact, golden_file] :
         std::vector<std::pair<std::string, std::string>>{{artifacts::summary, "e2e_summary.json"},
                                                          {artifacts::eval_report(Method::pe), "e2e_eval_pe.json"},
                                                          {artifacts::fusion_report(Method::pe), "e2e_fusion_pe.json"}}) {
        const auto diff = golden::compare_files(dir / "run1" / artifact, golden_dir / golden_file, 1e-9);
        o.expect(diff.empty(), artifact + " differs from golden at " + diff);
    }
    if (o.pass)
        o.detail = "PE test AUROC " + fmt(vanilla) + " -> " + fmt(fused) + " (margin " + fmt(fused - vanilla) +
                   "), " + fmt(elapsed) + " s, golden files match";
    return o;
}

Outcome determinism(const fs::path& dir) {
    Outcome o;
    std::ostringstream log;
    // run1 comes from the end-to-end criterion; rerun twice, once multithreaded.
    if (!fs::exists(dir / "run1")) run_pipeline(e2e_config(dir, dir / "run1", 1), log);
    run_pipeline(e2e_config(dir, dir / "run2", 1), log);
    run_pipeline(e2e_config(dir, dir / "run3", 4), log);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir / "run1")) {
        const auto name = entry.path().filename();
        const auto reference = io::read_text_file(entry.path());
        for (const char* other : {"run2", "run3"}) {
            if (!fs::exists(dir / other / name) || io::read_text_file(dir / other / name) != reference)
                o.fail(name.string() + " differs in " + other);
        }
        ++files;
    }
    for (const char* other : {"run2", "run3"}) {
        std::size_t count = 0;
        for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir / other)) ++count;
        o.expect(count == files, std::string(other) + " has a different artifact set");
    }
    if (o.pass) o.detail = std::to_string(files) + " artifacts byte-identical across 3 runs (jobs 1, 1, 4)";
    return o;
}

}  // namespace

int main() {
    const auto dir = fixture::temp_dir("acceptance");
    synthetic::write_dataset(dir, synthetic::make_dataset(synthetic::Config{}));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"estimator oracle suite and reduction identities", estimator_oracle_suite},
        {"LCS exhaustive oracle and judge OR truth table", lcs_exhaustive_and_judge_table},
        {"AUROC rank statistic vs pairwise oracle", auroc_vs_pairwise},
        {"ECE hand fixtures and invariants", ece_fixtures},
        {"BCE gradient vs central finite differences", bce_gradient_check},
        {"grid search, tie-break and stable range", grid_search_checks},
        {"end-to-end synthetic benchmark", [&] { return end_to_end(dir); }},
        {"whole-pipeline determinism", [&] { return determinism(dir); }},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail << "]" << std::endl;
        failed += o.pass ? 0 : 1;
    }
    fs::remove_all(dir);
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
