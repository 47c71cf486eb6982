#include "cue/io.hpp"

#include "cue/error.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>
#include <system_error>

namespace cue::io {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw IoError("cannot read file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading file: " + path.string());
    return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("error writing file: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot replace file: " + path.string());
    }
}

namespace {

void warn_unknown_keys(const Json& j, std::initializer_list<std::string_view> known,
                       std::string_view what, Warnings* warnings) {
    if (!warnings) return;
    for (const auto& [key, _] : j.items()) {
        bool found = false;
        for (auto k : known) found = found || k == key;
        if (!found) warnings->push_back("ignoring unknown key '" + key + "' in " + std::string(what));
    }
}

void require_object(const Json& j, std::string_view what) {
    if (!j.is_object()) throw InvalidInput(std::string(what) + " must be a JSON object");
}

std::string get_string(const Json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw InvalidInput(std::string(what) + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

double get_number(const Json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number())
        throw InvalidInput(std::string(what) + ": field '" + key + "' must be a number");
    return it->get<double>();
}

bool get_bool(const Json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_boolean())
        throw InvalidInput(std::string(what) + ": field '" + key + "' must be a boolean");
    return it->get<bool>();
}

std::optional<double> get_optional_number(const Json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw InvalidInput(std::string(what) + ": field '" + key + "' must be a number or null");
    return it->get<double>();
}

std::optional<bool> get_optional_bool(const Json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_boolean()) throw InvalidInput(std::string(what) + ": field '" + key + "' must be a boolean or null");
    return it->get<bool>();
}

template <typename T>
Json optional_to_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::vector<std::string> string_list(const Json& j, std::string_view what) {
    if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of strings");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_string()) throw InvalidInput(std::string(what) + " must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Generation generation_from_json(const Json& j, Warnings* warnings) {
    require_object(j, "generation");
    warn_unknown_keys(j, {"text", "tokens", "token_logprobs"}, "generation", warnings);
    Generation g;
    g.text = get_string(j, "text", "generation");
    if (auto it = j.find("tokens"); it != j.end() && !it->is_null())
        g.tokens = string_list(*it, "generation.tokens");
    if (auto it = j.find("token_logprobs"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw InvalidInput("generation.token_logprobs must be an array of numbers");
        std::vector<double> lps;
        lps.reserve(it->size());
        for (const auto& e : *it) {
            if (!e.is_number()) throw InvalidInput("generation.token_logprobs must be an array of numbers");
            lps.push_back(e.get<double>());
        }
        g.token_logprobs = std::move(lps);
    }
    return g;
}

template <typename T, typename Parse>
std::vector<T> read_rows(const fs::path& path, Parse parse) {
    const auto rows = parse_jsonl(read_text_file(path), path.string());
    std::vector<T> out;
    out.reserve(rows.size());
    std::size_t line = 0;
    for (const auto& row : rows) {
        ++line;
        try {
            out.push_back(parse(row));
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ": record " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

Json to_json(const Sample& s) {
    Json j;
    j["id"] = s.id;
    j["question"] = s.question;
    j["reference_answer"] = s.reference_answer;
    return j;
}

Json to_json(const Generation& g) {
    Json j;
    j["text"] = g.text;
    j["tokens"] = g.tokens;
    j["token_logprobs"] = optional_to_json(g.token_logprobs);
    return j;
}

Json to_json(const GenerationRecord& r) {
    Json j;
    j["id"] = r.id;
    Json gens = Json::array();
    for (const auto& g : r.generations) gens.push_back(to_json(g));
    j["generations"] = std::move(gens);
    j["primary_index"] = r.primary_index;
    j["verbal_confidence"] = optional_to_json(r.verbal_confidence);
    j["p_true"] = optional_to_json(r.p_true);
    j["llm_judge"] = optional_to_json(r.llm_judge);
    j["external_corrector_prob"] = optional_to_json(r.external_corrector_prob);
    return j;
}

Json to_json(const Judgment& jd) {
    Json j;
    j["id"] = jd.id;
    j["rouge_l"] = jd.rouge_l;
    j["rule_correct"] = jd.rule_correct;
    j["llm_correct"] = optional_to_json(jd.llm_correct);
    j["correct"] = jd.correct;
    j["corrector_target"] = jd.corrector_target;
    return j;
}

Json to_json(const DatasetSplit& s) {
    Json j;
    j["seed"] = s.seed;
    j["dev_fraction"] = s.dev_fraction;
    j["dev"] = s.dev_ids;
    j["test"] = s.test_ids;
    return j;
}

Sample sample_from_json(const Json& j, Warnings* warnings) {
    require_object(j, "sample");
    warn_unknown_keys(j, {"id", "question", "reference_answer"}, "sample", warnings);
    return Sample{get_string(j, "id", "sample"), get_string(j, "question", "sample"),
                  get_string(j, "reference_answer", "sample")};
}

GenerationRecord record_from_json(const Json& j, Warnings* warnings) {
    require_object(j, "generation record");
    warn_unknown_keys(j,
                      {"id", "generations", "primary_index", "verbal_confidence", "p_true", "llm_judge",
                       "external_corrector_prob"},
                      "generation record", warnings);
    GenerationRecord r;
    r.id = get_string(j, "id", "generation record");
    auto gens = j.find("generations");
    if (gens == j.end() || !gens->is_array())
        throw InvalidInput("generation record: field 'generations' must be an array");
    for (const auto& g : *gens) r.generations.push_back(generation_from_json(g, warnings));
    if (auto it = j.find("primary_index"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<long long>() < 0)
            throw InvalidInput("generation record: field 'primary_index' must be a non-negative integer");
        r.primary_index = it->get<std::size_t>();
    }
    r.verbal_confidence = get_optional_number(j, "verbal_confidence", "generation record");
    r.p_true = get_optional_number(j, "p_true", "generation record");
    r.llm_judge = get_optional_bool(j, "llm_judge", "generation record");
    r.external_corrector_prob = get_optional_number(j, "external_corrector_prob", "generation record");
    return r;
}

Judgment judgment_from_json(const Json& j, Warnings* warnings) {
    require_object(j, "judgment");
    warn_unknown_keys(j, {"id", "rouge_l", "rule_correct", "llm_correct", "correct", "corrector_target"},
                      "judgment", warnings);
    Judgment jd;
    jd.id = get_string(j, "id", "judgment");
    jd.rouge_l = get_number(j, "rouge_l", "judgment");
    jd.rule_correct = get_bool(j, "rule_correct", "judgment");
    jd.llm_correct = get_optional_bool(j, "llm_correct", "judgment");
    jd.correct = get_bool(j, "correct", "judgment");
    auto it = j.find("corrector_target");
    if (it == j.end() || !it->is_number_integer())
        throw InvalidInput("judgment: field 'corrector_target' must be 0 or 1");
    jd.corrector_target = it->get<int>();
    if (jd.corrector_target != 0 && jd.corrector_target != 1)
        throw InvalidInput("judgment: field 'corrector_target' must be 0 or 1");
    if (jd.corrector_target != (jd.correct ? 0 : 1))
        throw InvalidInput("judgment " + jd.id + ": corrector_target must equal 1 - correct");
    return jd;
}

DatasetSplit split_from_json(const Json& j) {
    require_object(j, "split");
    DatasetSplit s;
    auto seed = j.find("seed");
    if (seed == j.end() || !seed->is_number_unsigned())
        throw InvalidInput("split: field 'seed' must be a non-negative integer");
    s.seed = seed->get<std::uint64_t>();
    s.dev_fraction = get_number(j, "dev_fraction", "split");
    auto dev = j.find("dev");
    auto test = j.find("test");
    if (dev == j.end() || test == j.end()) throw InvalidInput("split: fields 'dev' and 'test' are required");
    s.dev_ids = string_list(*dev, "split.dev");
    s.test_ids = string_list(*test, "split.test");
    return s;
}

std::string dump_jsonl(const std::vector<Json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

std::vector<Json> parse_jsonl(const std::string& text, const std::string& source_name) {
    std::vector<Json> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            rows.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
    }
    return rows;
}

std::vector<Sample> read_samples(const fs::path& path, Warnings* warnings) {
    return read_rows<Sample>(path, [&](const Json& j) { return sample_from_json(j, warnings); });
}

std::vector<GenerationRecord> read_generations(const fs::path& path, Warnings* warnings) {
    return read_rows<GenerationRecord>(path, [&](const Json& j) { return record_from_json(j, warnings); });
}

std::vector<Judgment> read_judgments(const fs::path& path, Warnings* warnings) {
    return read_rows<Judgment>(path, [&](const Json& j) { return judgment_from_json(j, warnings); });
}

std::string scores_to_jsonl(const ScoreSet& scores) {
    std::vector<Json> rows;
    rows.reserve(scores.scores.size());
    for (const auto& [id, score] : scores.scores) {
        Json j;
        j["id"] = id;
        j["method"] = method_name(scores.method);
        j["score"] = score;
        rows.push_back(std::move(j));
    }
    return dump_jsonl(rows);
}

ScoreSet scores_from_jsonl(const std::string& text, const std::string& source_name) {
    ScoreSet set;
    bool first = true;
    std::size_t line = 0;
    for (const auto& row : parse_jsonl(text, source_name)) {
        ++line;
        const std::string where = source_name + ": record " + std::to_string(line);
        if (!row.is_object()) throw InvalidInput(where + ": score row must be a JSON object");
        const auto method = parse_method(get_string(row, "method", where));
        const auto id = get_string(row, "id", where);
        const double score = get_number(row, "score", where);
        if (first) {
            set.method = method;
            first = false;
        } else if (method != set.method) {
            throw InvalidInput(where + ": mixed methods in one score file");
        }
        if (!set.scores.emplace(id, score).second) throw InvalidInput(where + ": duplicate id " + id);
    }
    set.normalized = !set.scores.empty() && std::all_of(set.scores.begin(), set.scores.end(), [](const auto& kv) {
        return kv.second >= 0.0 && kv.second <= 1.0;
    });
    return set;
}

ScoreSet read_scores(const fs::path& path) {
    return scores_from_jsonl(read_text_file(path), path.string());
}

DatasetSplit read_split(const fs::path& path) {
    const auto text = read_text_file(path);
    try {
        return split_from_json(Json::parse(text));
    } catch (const Json::parse_error& e) {
        throw InvalidInput(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_samples(const fs::path& path, const std::vector<Sample>& samples) {
    std::vector<Json> rows;
    for (const auto& s : samples) rows.push_back(to_json(s));
    write_file_atomic(path, dump_jsonl(rows));
}

void write_generations(const fs::path& path, const std::vector<GenerationRecord>& records) {
    std::vector<Json> rows;
    for (const auto& r : records) rows.push_back(to_json(r));
    write_file_atomic(path, dump_jsonl(rows));
}

void write_judgments(const fs::path& path, const std::vector<Judgment>& judgments) {
    std::vector<Json> rows;
    for (const auto& j : judgments) rows.push_back(to_json(j));
    write_file_atomic(path, dump_jsonl(rows));
}

void write_scores(const fs::path& path, const ScoreSet& scores) {
    write_file_atomic(path, scores_to_jsonl(scores));
}

void write_split(const fs::path& path, const DatasetSplit& split) {
    write_json(path, to_json(split));
}

void write_json(const fs::path& path, const Json& value) {
    write_file_atomic(path, value.dump(2) + "\n");
}

}  // namespace cue::io
