#include "cue/pipeline.hpp"

#include "cue/dataset.hpp"
#include "cue/error.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace cue {

namespace fs = std::filesystem;

namespace artifacts {
std::string scores(Method m) { return "scores_" + std::string(method_name(m)) + ".jsonl"; }
std::string fused(Method m) { return "fused_" + std::string(method_name(m)) + ".jsonl"; }
std::string fusion_report(Method m) { return "fusion_" + std::string(method_name(m)) + ".json"; }
std::string eval_report(Method m) { return "eval_" + std::string(method_name(m)) + ".json"; }
std::string calibration(Method m) { return "cal_" + std::string(method_name(m)) + ".csv"; }
}  // namespace artifacts

namespace {

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "train_samples", "train_generations", "samples",       "generations",   "similarities",
        "out_dir",       "methods",           "seed",          "dev_fraction",  "rouge_threshold",
        "use_llm_judge", "se_threshold",      "sar_temp",      "sar_length_normalized",
        "epochs",        "lr",                "batch",         "n_buckets",     "hash_seed",
        "ngram_orders",  "external_corrector", "w",            "grid_step",     "stable_tolerance",
        "bins",          "tau",               "costs",         "jobs"};
    return keys;
}

template <typename T>
void read_key(const io::Json& j, const char* key, T& into) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        into = it->get<T>();
    } catch (const io::Json::exception&) {
        throw InvalidInput(std::string("pipeline config: bad value for '") + key + "'");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void require_valid(const ValidationReport& report, const std::string& what) {
    if (report.ok()) return;
    std::string msg = what + ": " + std::to_string(report.violations.size()) + " validation violation(s)";
    const std::size_t shown = std::min<std::size_t>(report.violations.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& v = report.violations[i];
        msg += "\n  " + v.kind + " [" + v.id + "]: " + v.message;
    }
    throw InvalidInput(msg);
}

void emit_warnings(std::ostream& log, const io::Warnings& warnings) {
    for (const auto& w : warnings) log << "warning: " << w << '\n';
}

}  // namespace

PipelineConfig pipeline_config_from_json(const io::Json& j, const fs::path& base_dir, io::Warnings* warnings) {
    if (!j.is_object()) throw InvalidInput("pipeline config must be a JSON object");
    if (warnings)
        for (const auto& [key, _] : j.items())
            if (!known_config_keys().contains(key)) warnings->push_back("ignoring unknown config key '" + key + "'");

    PipelineConfig c;
    auto path_key = [&](const char* key, fs::path& into) {
        std::string s;
        read_key(j, key, s);
        if (!s.empty()) into = resolve(base_dir, s);
    };
    path_key("train_samples", c.train_samples);
    path_key("train_generations", c.train_generations);
    path_key("samples", c.samples);
    path_key("generations", c.generations);
    path_key("out_dir", c.out_dir);
    if (auto it = j.find("similarities"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw InvalidInput("pipeline config: bad value for 'similarities'");
        c.similarities = resolve(base_dir, it->get<std::string>());
    }
    if (auto it = j.find("methods"); it != j.end() && !it->is_null()) {
        if (!it->is_array() || it->empty()) throw InvalidInput("pipeline config: 'methods' must be a non-empty array");
        c.methods.clear();
        for (const auto& m : *it) {
            if (!m.is_string()) throw InvalidInput("pipeline config: 'methods' must hold strings");
            const Method method = parse_method(m.get<std::string>());
            if (method == Method::corrector || method == Method::fused)
                throw InvalidInput("pipeline config: '" + m.get<std::string>() + "' is not an estimator method");
            c.methods.push_back(method);
        }
    }
    read_key(j, "seed", c.seed);
    read_key(j, "dev_fraction", c.dev_fraction);
    read_key(j, "rouge_threshold", c.judge.rouge_threshold);
    read_key(j, "use_llm_judge", c.judge.use_llm_judge);
    read_key(j, "se_threshold", c.estimators.equivalence_threshold);
    read_key(j, "sar_temp", c.estimators.sar.sentence_temperature);
    read_key(j, "sar_length_normalized", c.estimators.sar.use_length_normalized_probs);
    read_key(j, "epochs", c.training.epochs);
    read_key(j, "lr", c.training.learning_rate);
    read_key(j, "batch", c.training.batch_size);
    read_key(j, "n_buckets", c.extractor.n_buckets);
    read_key(j, "hash_seed", c.extractor.hash_seed);
    read_key(j, "ngram_orders", c.extractor.ngram_orders);
    read_key(j, "external_corrector", c.external_corrector);
    if (auto it = j.find("w"); it != j.end() && !it->is_null()) {
        if (it->is_string() && it->get<std::string>() == "auto") c.fusion.w.reset();
        else if (it->is_number()) c.fusion.w = it->get<double>();
        else throw InvalidInput("pipeline config: 'w' must be \"auto\" or a number");
    }
    read_key(j, "grid_step", c.fusion.grid_step);
    read_key(j, "stable_tolerance", c.fusion.stable_tolerance);
    read_key(j, "bins", c.evaluation.bins);
    if (auto it = j.find("tau"); it != j.end() && !it->is_null()) {
        if (it->is_string() && it->get<std::string>() == "auto") c.evaluation.tau.reset();
        else if (it->is_number()) c.evaluation.tau = it->get<double>();
        else throw InvalidInput("pipeline config: 'tau' must be \"auto\" or a number");
    }
    if (auto it = j.find("costs"); it != j.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
            throw InvalidInput("pipeline config: 'costs' must be [lambda_01, lambda_10]");
        c.evaluation.lambda_01 = (*it)[0].get<double>();
        c.evaluation.lambda_10 = (*it)[1].get<double>();
    }
    read_key(j, "jobs", c.jobs);
    c.training.seed = c.seed;
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path, io::Warnings* warnings) {
    const auto text = io::read_text_file(path);
    io::Json j;
    try {
        j = io::Json::parse(text);
    } catch (const io::Json::parse_error& e) {
        throw InvalidInput(path.string() + ": invalid JSON: " + e.what());
    }
    return pipeline_config_from_json(j, path.parent_path(), warnings);
}

void check_inputs_exist(const PipelineConfig& c) {
    auto check = [](const fs::path& p, const char* what) {
        if (p.empty()) throw InvalidInput(std::string("pipeline config: '") + what + "' is required");
        std::error_code ec;
        if (!fs::is_regular_file(p, ec)) throw IoError(std::string("missing input ") + what + ": " + p.string());
    };
    if (!c.external_corrector) {
        check(c.train_samples, "train_samples");
        check(c.train_generations, "train_generations");
    }
    check(c.samples, "samples");
    check(c.generations, "generations");
    if (c.similarities) check(*c.similarities, "similarities");
}

std::vector<std::string> sample_ids(const std::vector<Sample>& samples) {
    std::vector<std::string> ids;
    ids.reserve(samples.size());
    for (const auto& s : samples) ids.push_back(s.id);
    return ids;
}

ScoreSet normalize_over_split(const ScoreSet& scores, const DatasetSplit& split) {
    std::vector<std::string> ids = split.dev_ids;
    ids.insert(ids.end(), split.test_ids.begin(), split.test_ids.end());
    return min_max_normalize(restrict_to(scores, ids)).scores;
}

void run_pipeline(const PipelineConfig& config, std::ostream& log) {
    check_inputs_exist(config);
    validate(config.judge);
    validate(config.extractor);
    validate(config.fusion);
    const fs::path& out = config.out_dir;

    io::Warnings warnings;
    const auto samples = io::read_samples(config.samples, &warnings);
    const auto records = io::read_generations(config.generations, &warnings);
    require_valid(validate_dataset(samples, records), "evaluation dataset");

    std::vector<Sample> train_samples;
    std::vector<GenerationRecord> train_records;
    if (!config.external_corrector) {
        train_samples = io::read_samples(config.train_samples, &warnings);
        train_records = io::read_generations(config.train_generations, &warnings);
        require_valid(validate_dataset(train_samples, train_records), "training dataset");
    }
    emit_warnings(log, warnings);

    const auto judgments = judge_dataset(samples, records, config.judge);
    io::write_judgments(out / artifacts::judgments, judgments);
    log << "judged " << judgments.size() << " evaluation samples\n";

    const auto split = split_dataset(sample_ids(samples), config.seed, config.dev_fraction);
    io::write_split(out / artifacts::split, split);
    log << "split: " << split.dev_ids.size() << " dev / " << split.test_ids.size() << " test\n";

    ScoreSet corrector;
    if (config.external_corrector) {
        corrector = scores_from_external(records);
    } else {
        const auto train_judgments = judge_dataset(train_samples, train_records, config.judge);
        io::write_judgments(out / artifacts::train_judgments, train_judgments);
        const auto dataset = correction_dataset_from_judgments(train_samples, train_judgments);
        const auto model = train_corrector(dataset, config.extractor, config.training);
        for (const auto& w : model.meta.warnings) log << "warning: " << w << '\n';
        save_model(out / artifacts::model, model);
        log << "trained corrector on " << dataset.size() << " questions (final loss " << model.meta.final_loss
            << ")\n";
        corrector = corrector_scores(model, samples);
    }
    io::write_scores(out / artifacts::corrector_scores, corrector);

    const auto labels = labels_from_judgments(judgments);
    const auto oracle = config.similarities ? SimilarityOracle::precomputed(read_similarity_sidecar(*config.similarities))
                                            : SimilarityOracle::rouge();
    FusionConfig fusion = config.fusion;
    fusion.jobs = config.jobs;

    io::Json summary;
    summary["seed"] = config.seed;
    summary["n_dev"] = split.dev_ids.size();
    summary["n_test"] = split.test_ids.size();
    io::Json per_method = io::Json::object();
    for (Method m : config.methods) {
        const auto vanilla = score_dataset(m, records, oracle, config.estimators, config.jobs);
        io::write_scores(out / artifacts::scores(m), vanilla);

        const auto fused = run_fusion(vanilla, corrector, labels, split, fusion);
        io::write_scores(out / artifacts::fused(m), fused.fused);
        io::write_json(out / artifacts::fusion_report(m), fusion_report_to_json(fused));

        const auto report = evaluate_with_baseline(normalize_over_split(vanilla, split), fused.fused, labels,
                                                   split, config.evaluation);
        io::write_json(out / artifacts::eval_report(m), report_to_json(report));
        io::write_file_atomic(out / artifacts::calibration(m), calibration_csv(report.ece));

        per_method[std::string(method_name(m))] = {{"w_star", fused.w_star},
                                                   {"auroc_vanilla", report.deltas->auroc.vanilla},
                                                   {"auroc_corrected", report.deltas->auroc.corrected},
                                                   {"auroc_improvement", report.deltas->auroc.improvement},
                                                   {"ece_vanilla", report.deltas->ece.vanilla},
                                                   {"ece_corrected", report.deltas->ece.corrected}};
        log << method_name(m) << ": w*=" << fused.w_star << " test AUROC " << report.deltas->auroc.vanilla << " -> "
            << report.deltas->auroc.corrected << '\n';
    }
    summary["methods"] = std::move(per_method);
    io::write_json(out / artifacts::summary, summary);
}

}  // namespace cue
