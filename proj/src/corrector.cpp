#include "cue/corrector.hpp"

#include "cue/error.hpp"
#include "cue/io.hpp"
#include "cue/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace cue {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

// splitmix64 finalizer; spreads FNV's weak low bits before masking.
std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void validate(const FeatureExtractor& extractor) {
    if (extractor.n_buckets < 2 || !std::has_single_bit(extractor.n_buckets))
        throw InvalidInput("n_buckets must be a power of two >= 2");
    if (extractor.ngram_orders.empty()) throw InvalidInput("ngram_orders must not be empty");
    for (int n : extractor.ngram_orders)
        if (n < 1) throw InvalidInput("ngram orders must be >= 1");
}

SparseVector featurize(std::string_view question, const FeatureExtractor& extractor) {
    const auto tokens = normalize_tokens(question);
    std::map<std::uint32_t, double> counts;
    const std::uint64_t seeded = fnv1a_u64(kFnvOffset, extractor.hash_seed);
    for (int order : extractor.ngram_orders) {
        const auto n = static_cast<std::size_t>(order);
        if (tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::uint64_t h = fnv1a_u64(seeded, n);
            for (std::size_t k = 0; k < n; ++k) {
                if (k) h = fnv1a(h, "\x1f");
                h = fnv1a(h, tokens[i + k]);
            }
            counts[static_cast<std::uint32_t>(mix(h) & (extractor.n_buckets - 1))] += 1.0;
        }
    }
    return SparseVector(counts.begin(), counts.end());
}

CorrectorModel CorrectorModel::zeros(const FeatureExtractor& extractor) {
    validate(extractor);
    CorrectorModel m;
    m.extractor = extractor;
    m.weights.assign(extractor.n_buckets, 0.0);
    return m;
}

double CorrectorModel::logit(const SparseVector& features) const {
    double z = bias;
    for (const auto& [idx, value] : features) z += weights[idx] * value;
    return z;
}

double sigmoid(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double bce_loss(std::span<const double> predictions, std::span<const int> targets) {
    if (predictions.size() != targets.size()) throw InvalidInput("bce_loss: length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::clamp(predictions[i], kLogClampEpsilon, 1.0 - kLogClampEpsilon);
        loss -= targets[i] ? std::log(p) : std::log1p(-p);
    }
    return loss;
}

double model_loss(const CorrectorModel& model, std::span<const SparseVector> features, std::span<const int> targets) {
    std::vector<double> preds;
    preds.reserve(features.size());
    for (const auto& f : features) preds.push_back(sigmoid(model.logit(f)));
    return bce_loss(preds, targets);
}

BceGradient bce_gradient(const CorrectorModel& model, std::span<const SparseVector> features,
                         std::span<const int> targets) {
    if (features.size() != targets.size()) throw InvalidInput("bce_gradient: length mismatch");
    BceGradient g;
    g.weights.assign(model.weights.size(), 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        // d/dz of -[y ln s(z) + (1-y) ln(1-s(z))] is s(z) - y.
        const double residual = sigmoid(model.logit(features[i])) - targets[i];
        for (const auto& [idx, value] : features[i]) g.weights[idx] += residual * value;
        g.bias += residual;
    }
    return g;
}

CorrectorModel train_corrector(std::span<const CorrectionExample> dataset, const FeatureExtractor& extractor,
                               const TrainOptions& options) {
    if (dataset.empty()) throw InvalidInput("cannot train the corrector on an empty dataset");
    if (options.epochs < 0) throw InvalidInput("epochs must be >= 0");
    if (options.batch_size == 0) throw InvalidInput("batch size must be >= 1");
    if (!std::isfinite(options.learning_rate) || options.learning_rate < 0.0)
        throw InvalidInput("learning rate must be finite and >= 0");

    CorrectorModel model = CorrectorModel::zeros(extractor);
    auto& meta = model.meta;
    meta.seed = options.seed;
    meta.epochs = options.epochs;
    meta.learning_rate = options.learning_rate;
    meta.batch_size = options.batch_size;
    meta.n_examples = dataset.size();

    std::vector<SparseVector> features;
    std::vector<int> targets;
    features.reserve(dataset.size());
    for (const auto& ex : dataset) {
        if (ex.target != 0 && ex.target != 1) throw InvalidInput("corrector targets must be 0 or 1");
        features.push_back(featurize(ex.question, extractor));
        targets.push_back(ex.target);
    }
    const auto positives = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 1));
    if (positives == 0 || positives == targets.size())
        meta.warnings.push_back("single-class training data: every target is " + std::to_string(targets.front()));

    const double n = static_cast<double>(dataset.size());
    meta.initial_loss = model_loss(model, features, targets) / n;

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(options.seed);
    std::map<std::uint32_t, double> step;  // sparse batch gradient, ordered for reproducible summation

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        fisher_yates(std::span<std::size_t>(order), rng);
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            const double scale = options.learning_rate / static_cast<double>(stop - start);
            step.clear();
            double bias_grad = 0.0;
            for (std::size_t k = start; k < stop; ++k) {
                const auto i = order[k];
                const double residual = sigmoid(model.logit(features[i])) - targets[i];
                for (const auto& [idx, value] : features[i]) step[idx] += residual * value;
                bias_grad += residual;
            }
            for (const auto& [idx, grad] : step) model.weights[idx] -= scale * grad;
            model.bias -= scale * bias_grad;
        }
        meta.epoch_losses.push_back(model_loss(model, features, targets) / n);
    }
    meta.final_loss = meta.epoch_losses.empty() ? meta.initial_loss : meta.epoch_losses.back();
    return model;
}

double predict(const CorrectorModel& model, std::string_view question) {
    return sigmoid(model.logit(featurize(question, model.extractor)));
}

ScoreSet corrector_scores(const CorrectorModel& model, std::span<const Sample> samples) {
    ScoreSet set;
    set.method = Method::corrector;
    set.normalized = true;
    for (const auto& s : samples) set.scores[s.id] = predict(model, s.question);
    return set;
}

ScoreSet scores_from_external(std::span<const GenerationRecord> records) {
    ScoreSet set;
    set.method = Method::corrector;
    set.normalized = true;
    for (const auto& r : records) {
        if (!r.external_corrector_prob) throw InvalidInput("external corrector prob missing: " + r.id);
        const double p = *r.external_corrector_prob;
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidInput("external corrector prob out of range [0, 1]: " + r.id);
        set.scores[r.id] = p;
    }
    return set;
}

std::string model_to_json(const CorrectorModel& model) {
    io::Json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "hashed-ngram-logistic";
    j["extractor"] = {{"n_buckets", model.extractor.n_buckets},
                      {"ngram_orders", model.extractor.ngram_orders},
                      {"hash_seed", model.extractor.hash_seed}};
    j["bias"] = model.bias;
    io::Json weights = io::Json::array();
    for (std::size_t i = 0; i < model.weights.size(); ++i)
        if (model.weights[i] != 0.0) weights.push_back(io::Json::array({i, model.weights[i]}));
    j["weights"] = std::move(weights);
    const auto& m = model.meta;
    j["training_meta"] = {{"seed", m.seed},
                          {"epochs", m.epochs},
                          {"learning_rate", m.learning_rate},
                          {"batch_size", m.batch_size},
                          {"n_examples", m.n_examples},
                          {"initial_loss", m.initial_loss},
                          {"final_loss", m.final_loss},
                          {"epoch_losses", m.epoch_losses},
                          {"warnings", m.warnings}};
    return j.dump(2) + "\n";
}

CorrectorModel model_from_json(const std::string& text) {
    io::Json j;
    try {
        j = io::Json::parse(text);
    } catch (const io::Json::parse_error& e) {
        throw InvalidInput(std::string("corrector model: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw InvalidInput("corrector model: unsupported format_version");
        FeatureExtractor ex;
        const auto& je = j.at("extractor");
        ex.n_buckets = je.at("n_buckets").get<std::uint32_t>();
        ex.ngram_orders = je.at("ngram_orders").get<std::vector<int>>();
        ex.hash_seed = je.at("hash_seed").get<std::uint64_t>();
        CorrectorModel model = CorrectorModel::zeros(ex);
        model.bias = j.at("bias").get<double>();
        for (const auto& w : j.at("weights")) {
            const auto idx = w.at(0).get<std::size_t>();
            if (idx >= model.weights.size()) throw InvalidInput("corrector model: weight index out of range");
            model.weights[idx] = w.at(1).get<double>();
        }
        const auto& jm = j.at("training_meta");
        auto& m = model.meta;
        m.seed = jm.at("seed").get<std::uint64_t>();
        m.epochs = jm.at("epochs").get<int>();
        m.learning_rate = jm.at("learning_rate").get<double>();
        m.batch_size = jm.at("batch_size").get<std::size_t>();
        m.n_examples = jm.at("n_examples").get<std::size_t>();
        m.initial_loss = jm.at("initial_loss").get<double>();
        m.final_loss = jm.at("final_loss").get<double>();
        m.epoch_losses = jm.at("epoch_losses").get<std::vector<double>>();
        m.warnings = jm.at("warnings").get<std::vector<std::string>>();
        if (!std::isfinite(model.bias) ||
            !std::all_of(model.weights.begin(), model.weights.end(), [](double w) { return std::isfinite(w); }))
            throw InvalidInput("corrector model: non-finite parameters");
        return model;
    } catch (const io::Json::exception& e) {
        throw InvalidInput(std::string("corrector model: malformed: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const CorrectorModel& model) {
    io::write_file_atomic(path, model_to_json(model));
}

CorrectorModel load_model(const std::filesystem::path& path) {
    return model_from_json(io::read_text_file(path));
}

}  // namespace cue
