#include "cue/cli.hpp"

#include "cue/dataset.hpp"
#include "cue/error.hpp"
#include "cue/pipeline.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <ostream>

namespace cue {

namespace {

namespace fs = std::filesystem;

void print_warnings(std::ostream& err, const io::Warnings& warnings) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::optional<double> parse_auto_or_number(const std::string& text, const char* what) {
    if (text == "auto") return std::nullopt;
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidInput(std::string(what) + " must be 'auto' or a number");
    return v;
}

std::pair<double, double> parse_costs(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw InvalidInput("--costs must be LAMBDA_01,LAMBDA_10");
    const auto a = parse_auto_or_number(text.substr(0, comma), "--costs");
    const auto b = parse_auto_or_number(text.substr(comma + 1), "--costs");
    if (!a || !b) throw InvalidInput("--costs must be LAMBDA_01,LAMBDA_10");
    return {*a, *b};
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::invalid_input:
            return exit_validation;
        case ErrorKind::io:
            return exit_missing_input;
        case ErrorKind::metric_undefined:
            return exit_metric_undefined;
    }
    return exit_usage;
}

struct ValidateArgs {
    std::string samples, generations;
};

struct JudgeArgs {
    std::string samples, generations, out;
    double threshold = 0.7;
    bool no_llm_judge = false;
};

struct SplitArgs {
    std::string samples, out;
    std::uint64_t seed = 42;
    double dev_fraction = 0.5;
};

struct ScoreArgs {
    std::string method, generations, out, similarities;
    double threshold = 0.7;
    double sar_temp = 0.001;
    bool sar_length_normalized = false;
    unsigned jobs = 1;
};

struct TrainArgs {
    std::string judgments, samples, out;
    std::uint64_t seed = 42;
    int epochs = 10;
    double lr = 0.1;
    std::size_t batch = 32;
    std::uint32_t buckets = 1u << 18;
    std::uint64_t hash_seed = 0;
};

struct CorrectorScoreArgs {
    std::string model, samples, generations, out;
};

struct FuseArgs {
    std::string scores, corrector, judgments, split, w = "auto", out, report;
    double grid_step = 0.001;
    double stable_tolerance = 0.01;
    unsigned jobs = 1;
};

struct EvaluateArgs {
    std::string scores, judgments, split, tau = "auto", costs = "1,1", out, calibration_csv, baseline;
    std::size_t bins = 10;
    bool normalize = false;
};

struct PipelineArgs {
    std::string config, out_dir, samples, generations, train_samples, train_generations, similarities, w;
    std::vector<std::string> methods;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
};

int do_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    const auto samples = io::read_samples(a.samples, &warnings);
    const auto records = io::read_generations(a.generations, &warnings);
    print_warnings(err, warnings);
    const auto report = validate_dataset(samples, records);
    for (const auto& v : report.violations) out << v.kind << " [" << v.id << "]: " << v.message << '\n';
    out << "usable records per method:";
    for (const auto& [m, n] : report.usable_records) out << ' ' << method_name(m) << '=' << n;
    out << '\n';
    if (!report.ok()) {
        err << report.violations.size() << " violation(s)\n";
        return exit_validation;
    }
    out << "ok: " << samples.size() << " samples, " << records.size() << " records\n";
    return exit_ok;
}

int do_judge(const JudgeArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    const auto samples = io::read_samples(a.samples, &warnings);
    const auto records = io::read_generations(a.generations, &warnings);
    print_warnings(err, warnings);
    const JudgeConfig config{a.threshold, !a.no_llm_judge};
    const auto judgments = judge_dataset(samples, records, config);
    io::write_judgments(a.out, judgments);
    const auto correct = std::count_if(judgments.begin(), judgments.end(), [](const Judgment& j) { return j.correct; });
    out << "judged " << judgments.size() << " samples, " << correct << " correct\n";
    return exit_ok;
}

int do_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    const auto samples = io::read_samples(a.samples, &warnings);
    print_warnings(err, warnings);
    const auto split = split_dataset(sample_ids(samples), a.seed, a.dev_fraction);
    io::write_split(a.out, split);
    out << "split: " << split.dev_ids.size() << " dev / " << split.test_ids.size() << " test\n";
    return exit_ok;
}

int do_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
    const Method method = parse_method(a.method);
    if (method == Method::corrector || method == Method::fused)
        throw InvalidInput("use corrector-score / fuse for method " + a.method);
    io::Warnings warnings;
    const auto records = io::read_generations(a.generations, &warnings);
    print_warnings(err, warnings);
    const auto oracle = a.similarities.empty() ? SimilarityOracle::rouge()
                                               : SimilarityOracle::precomputed(read_similarity_sidecar(a.similarities));
    EstimatorConfig config;
    config.equivalence_threshold = a.threshold;
    config.sar = SarConfig{a.sar_temp, a.sar_length_normalized};
    const auto scores = score_dataset(method, records, oracle, config, a.jobs);
    io::write_scores(a.out, scores);
    out << "scored " << scores.scores.size() << " records with " << method_name(method) << '\n';
    return exit_ok;
}

int do_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    const auto samples = io::read_samples(a.samples, &warnings);
    const auto judgments = io::read_judgments(a.judgments, &warnings);
    print_warnings(err, warnings);
    FeatureExtractor extractor;
    extractor.n_buckets = a.buckets;
    extractor.hash_seed = a.hash_seed;
    const auto dataset = correction_dataset_from_judgments(samples, judgments);
    const auto model = train_corrector(dataset, extractor, TrainOptions{a.seed, a.epochs, a.lr, a.batch});
    for (const auto& w : model.meta.warnings) err << "warning: " << w << '\n';
    save_model(a.out, model);
    out << "trained on " << dataset.size() << " questions, final loss " << model.meta.final_loss << '\n';
    return exit_ok;
}

int do_corrector_score(const CorrectorScoreArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    ScoreSet scores;
    if (!a.generations.empty()) {
        const auto records = io::read_generations(a.generations, &warnings);
        scores = scores_from_external(records);
    } else {
        if (a.model.empty() || a.samples.empty())
            throw InvalidInput("corrector-score needs --model and --samples, or --external-from GENERATIONS");
        const auto model = load_model(a.model);
        const auto samples = io::read_samples(a.samples, &warnings);
        scores = corrector_scores(model, samples);
    }
    print_warnings(err, warnings);
    io::write_scores(a.out, scores);
    out << "wrote " << scores.scores.size() << " corrector scores\n";
    return exit_ok;
}

int do_fuse(const FuseArgs& a, std::ostream& out, std::ostream& err) {
    const auto vanilla = io::read_scores(a.scores);
    const auto corrector = io::read_scores(a.corrector);
    io::Warnings warnings;
    const auto judgments = io::read_judgments(a.judgments, &warnings);
    print_warnings(err, warnings);
    const auto split = io::read_split(a.split);
    FusionConfig config;
    config.w = parse_auto_or_number(a.w, "--w");
    config.grid_step = a.grid_step;
    config.stable_tolerance = a.stable_tolerance;
    config.jobs = a.jobs;
    const auto result = run_fusion(vanilla, corrector, labels_from_judgments(judgments), split, config);
    io::write_scores(a.out, result.fused);
    if (!a.report.empty()) io::write_json(a.report, fusion_report_to_json(result));
    out << "w* = " << result.w_star << ", dev AUROC " << result.objective << '\n';
    return exit_ok;
}

int do_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    const auto judgments = io::read_judgments(a.judgments, &warnings);
    print_warnings(err, warnings);
    const auto split = io::read_split(a.split);
    const auto labels = labels_from_judgments(judgments);
    auto scores = io::read_scores(a.scores);
    if (a.normalize) scores = normalize_over_split(scores, split);

    EvalConfig config;
    config.bins = a.bins;
    config.tau = parse_auto_or_number(a.tau, "--tau");
    std::tie(config.lambda_01, config.lambda_10) = parse_costs(a.costs);

    const auto report =
        a.baseline.empty()
            ? evaluate(scores, labels, split, config)
            : evaluate_with_baseline(normalize_over_split(io::read_scores(a.baseline), split), scores, labels, split,
                                     config);
    io::write_json(a.out, report_to_json(report));
    if (!a.calibration_csv.empty()) io::write_file_atomic(a.calibration_csv, calibration_csv(report.ece));
    out << report.method << ": AUROC " << report.auroc << ", F1 " << report.f1.f1 << ", ECE " << report.ece.value
        << '\n';
    return exit_ok;
}

int do_pipeline(const PipelineArgs& a, std::ostream& out, std::ostream& err) {
    io::Warnings warnings;
    PipelineConfig config = load_pipeline_config(a.config, &warnings);
    print_warnings(err, warnings);
    // Flags override the config file.
    if (!a.out_dir.empty()) config.out_dir = a.out_dir;
    if (!a.samples.empty()) config.samples = a.samples;
    if (!a.generations.empty()) config.generations = a.generations;
    if (!a.train_samples.empty()) config.train_samples = a.train_samples;
    if (!a.train_generations.empty()) config.train_generations = a.train_generations;
    if (!a.similarities.empty()) config.similarities = fs::path(a.similarities);
    if (!a.w.empty()) config.fusion.w = parse_auto_or_number(a.w, "--w");
    if (!a.methods.empty()) {
        config.methods.clear();
        for (const auto& m : a.methods) config.methods.push_back(parse_method(m));
    }
    if (a.seed) {
        config.seed = *a.seed;
        config.training.seed = *a.seed;
    }
    if (a.jobs) config.jobs = *a.jobs;
    run_pipeline(config, out);
    out << "artifacts written to " << config.out_dir.string() << '\n';
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cue: uncertainty correction for language-model answers"};
    app.set_version_flag("--version", std::string("cue ") + kVersion);
    app.require_subcommand(1);

    ValidateArgs va;
    auto* validate_cmd = app.add_subcommand("validate", "Check samples/generations files against the schema");
    validate_cmd->add_option("--samples", va.samples, "samples.jsonl")->required();
    validate_cmd->add_option("--generations", va.generations, "generations.jsonl")->required();

    JudgeArgs ja;
    auto* judge_cmd = app.add_subcommand("judge", "Judge primary responses against reference answers");
    judge_cmd->add_option("--samples", ja.samples)->required();
    judge_cmd->add_option("--generations", ja.generations)->required();
    judge_cmd->add_option("--out", ja.out, "judgments.jsonl")->required();
    judge_cmd->add_option("--rouge-threshold", ja.threshold, "rule judge passes when ROUGE-L exceeds this")
        ->capture_default_str();
    judge_cmd->add_flag("--no-llm-judge", ja.no_llm_judge, "ignore ingested llm_judge verdicts");

    SplitArgs sa;
    auto* split_cmd = app.add_subcommand("split", "Seeded dev/test split of the evaluation samples");
    split_cmd->add_option("--samples", sa.samples)->required();
    split_cmd->add_option("--out", sa.out, "split.json")->required();
    split_cmd->add_option("--seed", sa.seed)->capture_default_str();
    split_cmd->add_option("--dev-fraction", sa.dev_fraction)->capture_default_str();

    ScoreArgs sc;
    auto* score_cmd = app.add_subcommand("score", "Compute an uncertainty estimator over generation records");
    score_cmd->add_option("--method", sc.method, "pe|ln-pe|se|sar-t|sar-s|sar|ls|vc|ptrue")->required();
    score_cmd->add_option("--generations", sc.generations)->required();
    score_cmd->add_option("--out", sc.out, "scores.jsonl")->required();
    score_cmd->add_option("--similarities", sc.similarities, "precomputed similarities.jsonl sidecar");
    score_cmd->add_option("--threshold", sc.threshold, "SE clustering threshold")->capture_default_str();
    score_cmd->add_option("--sar-temp", sc.sar_temp, "SAR sentence temperature")->capture_default_str();
    score_cmd->add_flag("--sar-length-normalized", sc.sar_length_normalized,
                        "length-normalized sequence probabilities for SAR-s");
    score_cmd->add_option("--jobs", sc.jobs)->capture_default_str();

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train-corrector", "Train the hashed n-gram corrector");
    train_cmd->add_option("--judgments", ta.judgments)->required();
    train_cmd->add_option("--samples", ta.samples)->required();
    train_cmd->add_option("--out", ta.out, "corrector.model")->required();
    train_cmd->add_option("--seed", ta.seed)->capture_default_str();
    train_cmd->add_option("--epochs", ta.epochs)->capture_default_str();
    train_cmd->add_option("--lr", ta.lr)->capture_default_str();
    train_cmd->add_option("--batch", ta.batch)->capture_default_str();
    train_cmd->add_option("--buckets", ta.buckets, "hash buckets (power of two)")->capture_default_str();
    train_cmd->add_option("--hash-seed", ta.hash_seed)->capture_default_str();

    CorrectorScoreArgs ca;
    auto* cscore_cmd = app.add_subcommand("corrector-score", "Score questions with a trained corrector");
    cscore_cmd->add_option("--model", ca.model);
    cscore_cmd->add_option("--samples", ca.samples);
    cscore_cmd->add_option("--external-from", ca.generations,
                           "take external_corrector_prob from this generations.jsonl instead");
    cscore_cmd->add_option("--out", ca.out, "scores.jsonl")->required();

    FuseArgs fa;
    auto* fuse_cmd = app.add_subcommand("fuse", "Normalize and fuse uncertainty with corrector scores");
    fuse_cmd->add_option("--scores", fa.scores)->required();
    fuse_cmd->add_option("--corrector", fa.corrector)->required();
    fuse_cmd->add_option("--judgments", fa.judgments)->required();
    fuse_cmd->add_option("--split", fa.split)->required();
    fuse_cmd->add_option("--w", fa.w, "auto or a fixed weight in [0,1]")->capture_default_str();
    fuse_cmd->add_option("--out", fa.out, "fused.jsonl")->required();
    fuse_cmd->add_option("--report", fa.report, "fusion_report.json");
    fuse_cmd->add_option("--grid-step", fa.grid_step)->capture_default_str();
    fuse_cmd->add_option("--stable-tolerance", fa.stable_tolerance)->capture_default_str();
    fuse_cmd->add_option("--jobs", fa.jobs)->capture_default_str();

    EvaluateArgs ea;
    auto* eval_cmd = app.add_subcommand("evaluate", "AUROC / F1 / ECE / risk on the test split");
    eval_cmd->add_option("--scores", ea.scores)->required();
    eval_cmd->add_option("--judgments", ea.judgments)->required();
    eval_cmd->add_option("--split", ea.split)->required();
    eval_cmd->add_option("--bins", ea.bins)->capture_default_str();
    eval_cmd->add_option("--tau", ea.tau, "auto (dev-selected) or a number")->capture_default_str();
    eval_cmd->add_option("--costs", ea.costs, "LAMBDA_01,LAMBDA_10")->capture_default_str();
    eval_cmd->add_option("--baseline", ea.baseline, "raw vanilla scores; adds vanilla/corrected deltas");
    eval_cmd->add_flag("--normalize", ea.normalize, "min-max normalize --scores over dev+test first");
    eval_cmd->add_option("--out", ea.out, "eval_report.json")->required();
    eval_cmd->add_option("--calibration-csv", ea.calibration_csv);

    PipelineArgs pa;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run judge, split, train, score, fuse and evaluate");
    pipe_cmd->add_option("--config", pa.config, "pipeline JSON config")->required();
    pipe_cmd->add_option("--out-dir", pa.out_dir);
    pipe_cmd->add_option("--samples", pa.samples);
    pipe_cmd->add_option("--generations", pa.generations);
    pipe_cmd->add_option("--train-samples", pa.train_samples);
    pipe_cmd->add_option("--train-generations", pa.train_generations);
    pipe_cmd->add_option("--similarities", pa.similarities);
    pipe_cmd->add_option("--methods", pa.methods)->delimiter(',');
    pipe_cmd->add_option("--w", pa.w, "auto or a fixed weight");
    pipe_cmd->add_option("--seed", pa.seed);
    pipe_cmd->add_option("--jobs", pa.jobs);

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*validate_cmd) return do_validate(va, out, err);
        if (*judge_cmd) return do_judge(ja, out, err);
        if (*split_cmd) return do_split(sa, out, err);
        if (*score_cmd) return do_score(sc, out, err);
        if (*train_cmd) return do_train(ta, out, err);
        if (*cscore_cmd) return do_corrector_score(ca, out, err);
        if (*fuse_cmd) return do_fuse(fa, out, err);
        if (*eval_cmd) return do_evaluate(ea, out, err);
        if (*pipe_cmd) return do_pipeline(pa, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace cue
