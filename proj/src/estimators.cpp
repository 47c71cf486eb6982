#include "cue/estimators.hpp"

#include "cue/error.hpp"
#include "cue/io.hpp"
#include "cue/judge.hpp"
#include "cue/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cue {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

const std::vector<double>& logprobs_of(const Generation& g) {
    if (!g.token_logprobs) throw InvalidInput("method requires token logprobs");
    return *g.token_logprobs;
}

void require_generations(const GenerationRecord& record) {
    if (record.generations.empty()) throw InvalidInput("record " + record.id + " has no generations");
}

double log_sum_exp(std::span<const double> xs) {
    const double hi = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

std::string concat_tokens(std::span<const std::string> tokens, std::size_t skip) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (i != skip) out += tokens[i];
    return out;
}

/// -(1/B) sum_b ln(p_b + (1/t) sum_{j != b} sim(b, j) p_j), evaluated in log space.
double shifted_sentence_entropy(std::span<const double> log_probs, const std::vector<std::vector<double>>& sim,
                                double temperature) {
    if (!(temperature > 0.0)) throw InvalidInput("sentence temperature must be positive");
    const std::size_t n = log_probs.size();
    const double log_inv_t = -std::log(temperature);
    double total = 0.0;
    std::vector<double> terms;
    for (std::size_t b = 0; b < n; ++b) {
        terms.assign(1, log_probs[b]);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == b || sim[b][j] <= 0.0) continue;
            terms.push_back(std::log(sim[b][j]) + log_inv_t + log_probs[j]);
        }
        const double shifted = log_sum_exp(terms);
        if (!std::isfinite(shifted)) throw InvalidInput("shifted sentence probability is not finite");
        total += shifted;
    }
    return -total / static_cast<double>(n);
}

void check_matrix_shape(const std::vector<std::vector<double>>& m, std::size_t n, const std::string& id) {
    if (m.size() != n) throw InvalidInput("similarities for " + id + ": pairwise matrix is not " +
                                          std::to_string(n) + "x" + std::to_string(n));
    for (const auto& row : m)
        if (row.size() != n) throw InvalidInput("similarities for " + id + ": pairwise matrix is not square");
}

}  // namespace

SimilarityOracle SimilarityOracle::rouge() {
    return SimilarityOracle(Kind::rouge_l, nullptr);
}

SimilarityOracle SimilarityOracle::precomputed(std::map<std::string, SimilarityEntry> entries) {
    return SimilarityOracle(Kind::precomputed,
                            std::make_shared<const std::map<std::string, SimilarityEntry>>(std::move(entries)));
}

const SimilarityEntry& SimilarityOracle::entry(const std::string& id) const {
    auto it = entries_->find(id);
    if (it == entries_->end()) throw InvalidInput("no precomputed similarities for id " + id);
    return it->second;
}

std::vector<std::vector<double>> SimilarityOracle::pairwise(const GenerationRecord& record) const {
    const std::size_t n = record.generations.size();
    if (kind_ == Kind::precomputed) {
        const auto& m = entry(record.id).pairwise;
        check_matrix_shape(m, n, record.id);
        return m;
    }
    std::vector<std::vector<std::string>> toks;
    toks.reserve(n);
    for (const auto& g : record.generations) toks.push_back(normalize_tokens(g.text));
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = rouge_l_tokens(toks[i], toks[j]);
    return m;
}

std::vector<double> SimilarityOracle::token_relevance(const GenerationRecord& record, std::size_t b) const {
    const auto& g = record.generations.at(b);
    if (kind_ == Kind::precomputed) {
        const auto& rows = entry(record.id).token_relevance;
        if (b >= rows.size() || rows[b].size() != g.tokens.size())
            throw InvalidInput("similarities for " + record.id + ": token_relevance row " + std::to_string(b) +
                               " does not match the token count");
        return rows[b];
    }
    const auto full = normalize_tokens(concat_tokens(g.tokens, g.tokens.size()));
    std::vector<double> rel(g.tokens.size());
    for (std::size_t l = 0; l < g.tokens.size(); ++l) {
        const auto without = normalize_tokens(concat_tokens(g.tokens, l));
        rel[l] = 1.0 - rouge_l_tokens(full, without);
    }
    return rel;
}

std::map<std::string, SimilarityEntry> read_similarity_sidecar(const std::filesystem::path& path) {
    std::map<std::string, SimilarityEntry> out;
    std::size_t line = 0;
    auto matrix = [&](const io::Json& j, const char* key, const std::string& where) {
        std::vector<std::vector<double>> m;
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return m;
        if (!it->is_array()) throw InvalidInput(where + ": '" + key + "' must be an array of arrays");
        for (const auto& row : *it) {
            if (!row.is_array()) throw InvalidInput(where + ": '" + key + "' must be an array of arrays");
            std::vector<double> r;
            for (const auto& v : row) {
                if (!v.is_number()) throw InvalidInput(where + ": '" + key + "' entries must be numbers");
                const double x = v.get<double>();
                if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput(where + ": '" + key + "' entries must lie in [0, 1]");
                r.push_back(x);
            }
            m.push_back(std::move(r));
        }
        return m;
    };
    for (const auto& j : io::parse_jsonl(io::read_text_file(path), path.string())) {
        ++line;
        const std::string where = path.string() + ": record " + std::to_string(line);
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
            throw InvalidInput(where + ": expected an object with a string 'id'");
        SimilarityEntry e;
        e.pairwise = matrix(j, "pairwise", where);
        e.token_relevance = matrix(j, "token_relevance", where);
        const std::size_t n = e.pairwise.size();
        for (std::size_t a = 0; a < n; ++a) {
            if (e.pairwise[a].size() != n) throw InvalidInput(where + ": pairwise matrix is not square");
            if (std::abs(e.pairwise[a][a] - 1.0) > kSymmetryTolerance)
                throw InvalidInput(where + ": pairwise matrix must have a unit diagonal");
            for (std::size_t b = 0; b < a; ++b)
                if (std::abs(e.pairwise[a][b] - e.pairwise[b][a]) > kSymmetryTolerance)
                    throw InvalidInput(where + ": pairwise matrix must be symmetric");
        }
        const auto id = j["id"].get<std::string>();
        if (!out.emplace(id, std::move(e)).second) throw InvalidInput(where + ": duplicate id " + id);
    }
    return out;
}

double predictive_entropy(const GenerationRecord& record) {
    require_generations(record);
    double total = 0.0;
    for (const auto& g : record.generations) {
        const auto& lps = logprobs_of(g);
        total += std::accumulate(lps.begin(), lps.end(), 0.0);
    }
    return -total / static_cast<double>(record.generations.size());
}

double length_normalized_pe(const GenerationRecord& record) {
    require_generations(record);
    double total = 0.0;
    for (const auto& g : record.generations) {
        const auto& lps = logprobs_of(g);
        if (lps.empty()) throw InvalidInput("empty generation");
        total += std::accumulate(lps.begin(), lps.end(), 0.0) / static_cast<double>(lps.size());
    }
    return -total / static_cast<double>(record.generations.size());
}

std::vector<Cluster> cluster_generations(const GenerationRecord& record, const SimilarityOracle& oracle,
                                         double equivalence_threshold) {
    const auto sim = oracle.pairwise(record);
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < record.generations.size(); ++i) {
        bool placed = false;
        for (auto& c : clusters) {
            const std::size_t rep = c.front();
            if (sim[i][rep] >= equivalence_threshold && sim[rep][i] >= equivalence_threshold) {
                c.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({i});
    }
    return clusters;
}

double semantic_entropy(const GenerationRecord& record, std::span<const Cluster> clusters) {
    require_generations(record);
    if (clusters.empty()) throw InvalidInput("semantic entropy needs at least one cluster");
    std::vector<bool> seen(record.generations.size(), false);
    double total = 0.0;
    std::vector<double> member_lps;
    for (const auto& c : clusters) {
        if (c.empty()) throw InvalidInput("empty cluster");
        member_lps.clear();
        for (std::size_t idx : c) {
            if (idx >= seen.size() || seen[idx]) throw InvalidInput("clusters must partition the generations");
            seen[idx] = true;
            member_lps.push_back(record.generations[idx].sequence_logprob());
        }
        const double log_p = log_sum_exp(member_lps);
        if (!std::isfinite(log_p)) throw InvalidInput("cluster probability underflow");
        total += log_p;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw InvalidInput("clusters must partition the generations");
    return -total / static_cast<double>(clusters.size());
}

std::vector<double> token_weights(const GenerationRecord& record, std::size_t b, const SimilarityOracle& oracle) {
    auto w = oracle.token_relevance(record, b);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (sum > 0.0) {
        for (auto& x : w) x /= sum;
    } else if (!w.empty()) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    }
    return w;
}

namespace {

/// sum_l w_l * logprob_l for generation b.
double weighted_logprob(const GenerationRecord& record, std::size_t b, const SimilarityOracle& oracle) {
    const auto& g = record.generations[b];
    const auto& lps = logprobs_of(g);
    if (lps.empty()) throw InvalidInput("empty generation");
    if (lps.size() != g.tokens.size())
        throw InvalidInput("record " + record.id + ": tokens and token_logprobs differ in length");
    // Dividing once at the end keeps unit or all-zero relevance bit-identical
    // to the length-normalized sum.
    const auto r = oracle.token_relevance(record, b);
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    if (!(sum > 0.0)) return std::accumulate(lps.begin(), lps.end(), 0.0) / static_cast<double>(lps.size());
    double acc = 0.0;
    for (std::size_t l = 0; l < lps.size(); ++l) acc += r[l] * lps[l];
    return acc / sum;
}

}  // namespace

double sar_token(const GenerationRecord& record, const SimilarityOracle& oracle) {
    require_generations(record);
    double total = 0.0;
    for (std::size_t b = 0; b < record.generations.size(); ++b) total += weighted_logprob(record, b, oracle);
    return -total / static_cast<double>(record.generations.size());
}

double sar_sentence(const GenerationRecord& record, const SimilarityOracle& oracle, const SarConfig& config) {
    require_generations(record);
    std::vector<double> log_probs;
    for (const auto& g : record.generations) {
        const auto& lps = logprobs_of(g);
        double lp = std::accumulate(lps.begin(), lps.end(), 0.0);
        if (config.use_length_normalized_probs) {
            if (lps.empty()) throw InvalidInput("empty generation");
            lp /= static_cast<double>(lps.size());
        }
        log_probs.push_back(lp);
    }
    return shifted_sentence_entropy(log_probs, oracle.pairwise(record), config.sentence_temperature);
}

double sar_combined(const GenerationRecord& record, const SimilarityOracle& oracle, const SarConfig& config) {
    require_generations(record);
    std::vector<double> log_probs;
    for (std::size_t b = 0; b < record.generations.size(); ++b)
        log_probs.push_back(weighted_logprob(record, b, oracle));
    return shifted_sentence_entropy(log_probs, oracle.pairwise(record), config.sentence_temperature);
}

double lexical_similarity_uncertainty(const GenerationRecord& record) {
    const std::size_t n = record.generations.size();
    if (n < 2) throw InvalidInput("LS needs at least 2 generations");
    std::vector<std::vector<std::string>> toks;
    for (const auto& g : record.generations) toks.push_back(normalize_tokens(g.text));
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++pairs) total += rouge_l_tokens(toks[i], toks[j]);
    return 1.0 - total / static_cast<double>(pairs);
}

double verbal_confidence_uncertainty(const GenerationRecord& record) {
    if (!record.verbal_confidence) throw InvalidInput("vc: verbal_confidence missing for id " + record.id);
    return 1.0 - *record.verbal_confidence / 100.0;
}

double ptrue_uncertainty(const GenerationRecord& record) {
    if (!record.p_true) throw InvalidInput("ptrue: p_true missing for id " + record.id);
    return 1.0 - *record.p_true;
}

double score_record(Method method, const GenerationRecord& record, const SimilarityOracle& oracle,
                    const EstimatorConfig& config) {
    switch (method) {
        case Method::pe:
            return predictive_entropy(record);
        case Method::ln_pe:
            return length_normalized_pe(record);
        case Method::se: {
            const auto clusters = cluster_generations(record, oracle, config.equivalence_threshold);
            return semantic_entropy(record, clusters);
        }
        case Method::sar_t:
            return sar_token(record, oracle);
        case Method::sar_s:
            return sar_sentence(record, oracle, config.sar);
        case Method::sar:
            return sar_combined(record, oracle, config.sar);
        case Method::ls:
            return lexical_similarity_uncertainty(record);
        case Method::vc:
            return verbal_confidence_uncertainty(record);
        case Method::ptrue:
            return ptrue_uncertainty(record);
        case Method::corrector:
        case Method::fused:
            break;
    }
    throw InvalidInput(std::string(method_name(method)) + " is not an estimator method");
}

ScoreSet score_dataset(Method method, std::span<const GenerationRecord> records, const SimilarityOracle& oracle,
                       const EstimatorConfig& config, unsigned jobs) {
    std::vector<double> values(records.size());
    parallel_for(records.size(), jobs, [&](std::size_t i) {
        try {
            values[i] = score_record(method, records[i], oracle, config);
        } catch (const InvalidInput& e) {
            const std::string msg = e.what();
            if (msg.find(records[i].id) != std::string::npos) throw;
            throw InvalidInput(std::string(method_name(method)) + ": " + msg + " (id " + records[i].id + ")");
        }
    });
    ScoreSet set;
    set.method = method;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw InvalidInput(std::string(method_name(method)) + ": non-finite score for id " + records[i].id);
        if (!set.scores.emplace(records[i].id, values[i]).second)
            throw InvalidInput("duplicate record id " + records[i].id);
    }
    return set;
}

}  // namespace cue
