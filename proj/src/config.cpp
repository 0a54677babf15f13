#include "surveysim/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "surveysim/delimited.hpp"

namespace surveysim {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / path).string();
}

ColumnMapping mapping_from_json(const json& j, const std::string& base_dir) {
    ColumnMapping m;
    std::string delim = j.value("delimiter", ",");
    if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
    m.delimiter = delim[0];

    const json& cols = j.at("columns");
    m.id_column = cols.at("id").get<std::string>();
    m.country_column = cols.at("country").get<std::string>();
    m.gender_column = cols.at("gender").get<std::string>();
    m.birth_year_column = cols.at("birth_year").get<std::string>();
    m.weight_column = cols.at("weight").get<std::string>();
    m.isco_column = cols.value("isco", "");

    for (const auto& [code, word] : j.at("gender_codes").items()) {
        auto g = gender_from_word(word.get<std::string>());
        if (!g) throw ConfigError("unknown gender word: " + word.get<std::string>());
        m.gender_codes[code] = *g;
    }
    for (const auto& [code, name] : j.at("missing_codes").items()) {
        auto k = missing_kind_from_name(name.get<std::string>());
        if (!k) throw ConfigError("unknown missing kind: " + name.get<std::string>());
        m.missing_codes[code] = *k;
    }
    for (const auto& [qid, column] : j.at("questions").items())
        m.question_columns[qid] = column.get<std::string>();

    m.birth_year_min = j.value("birth_year_min", 1900);
    m.birth_year_max = j.value("birth_year_max", 2010);

    if (j.contains("isco_lookup_file")) {
        std::string path = resolve(j["isco_lookup_file"].get<std::string>(), base_dir);
        DelimitedFile lookup = read_delimited(path, ',');
        for (const auto& row : lookup.rows)
            if (row.size() >= 2) m.isco_lookup[row[0]] = row[1];
    }
    return m;
}

BackendConfig backend_from_json(const std::string& name, const json& j,
                                const std::string& base_dir) {
    BackendConfig b;
    b.name = name;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "mock") b.kind = BackendConfig::Kind::Mock;
    else if (kind == "remote_chat") b.kind = BackendConfig::Kind::RemoteChat;
    else throw ConfigError("unknown backend kind: " + kind);

    b.model_name = j.at("model_name").get<std::string>();
    b.base_url = j.value("base_url", "");
    b.api_key_env = j.value("api_key_env", "");
    b.temperature = j.value("temperature", 1.0);
    b.top_p = j.value("top_p", 0.9);
    b.max_retries = j.value("max_retries", 3);
    b.parallelism = j.value("parallelism", 4);
    b.retry_backoff_ms = j.value("retry_backoff_ms", 250);
    b.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
    b.failure_budget = j.value("failure_budget", 0.05);
    b.mock_spec_file = resolve(j.value("mock_spec_file", ""), base_dir);

    if (b.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (b.top_p <= 0.0 || b.top_p > 1.0) throw ConfigError("top_p must be in (0,1]");
    if (b.parallelism < 1) throw ConfigError("parallelism must be positive");
    if (b.kind == BackendConfig::Kind::RemoteChat && b.base_url.empty())
        throw ConfigError("remote backend needs base_url");
    return b;
}

}  // namespace

ColumnMapping column_mapping_from_json_text(const std::string& text,
                                            const std::string& base_dir) {
    return mapping_from_json(json::parse(text), base_dir);
}

PanelSpec panel_spec_from_json_text(const std::string& text) {
    json j = json::parse(text);
    PanelSpec spec;
    for (const json& c : j.at("cells")) {
        PanelCell cell;
        cell.country = c.at("country").get<std::string>();
        auto g = gender_from_word(c.at("gender").get<std::string>());
        if (!g) throw ConfigError("unknown gender in panel cell");
        cell.gender = *g;
        cell.birth_year = c.at("birth_year").get<int>();
        cell.count = c.at("count").get<std::size_t>();
        if (c.contains("weight")) {
            cell.weight_min = c["weight"].value("min", 1.0);
            cell.weight_max = c["weight"].value("max", cell.weight_min);
        }
        if (c.contains("isco")) cell.isco_label = c["isco"].get<std::string>();
        for (const auto& [qid, dist] : c.at("answers").items())
            cell.answer_distributions[qid] = dist.get<std::vector<double>>();
        spec.cells.push_back(std::move(cell));
    }
    return spec;
}

PanelSpec load_panel_spec(const std::string& path) {
    return panel_spec_from_json_text(read_text_file(path));
}

RunConfig RunConfig::load(const std::string& path) {
    json j = json::parse(read_text_file(path));
    const std::string base_dir = fs::path(path).parent_path().string();

    RunConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    cfg.countries_file = resolve(j.at("countries_file").get<std::string>(), base_dir);
    cfg.refusal_cues_file = resolve(j.value("refusal_cues_file", ""), base_dir);

    for (const json& q : j.at("questions"))
        cfg.questions.push_back(
            {q.at("id").get<std::string>(), q.at("statement").get<std::string>()});
    if (cfg.questions.empty()) throw ConfigError("no questions configured");
    for (const auto& q : cfg.questions)
        if (q.statement.empty()) throw ConfigError("empty statement for " + q.id);

    const json& panel = j.at("panel");
    if (panel.contains("path")) {
        cfg.panel_path = resolve(panel.at("path").get<std::string>(), base_dir);
        if (panel.contains("mapping"))
            cfg.panel_mapping = mapping_from_json(panel["mapping"], base_dir);
        else if (panel.contains("mapping_file"))
            cfg.panel_mapping = mapping_from_json(
                json::parse(read_text_file(
                    resolve(panel["mapping_file"].get<std::string>(), base_dir))),
                base_dir);
        else
            cfg.panel_mapping = canonical_mapping(cfg.questions);
    } else if (panel.contains("synth_spec_file")) {
        cfg.synth_spec_file = resolve(panel.at("synth_spec_file").get<std::string>(), base_dir);
        cfg.synth_seed = panel.value("seed", std::uint64_t{0});
    } else {
        throw ConfigError("panel needs either path or synth_spec_file");
    }

    for (const auto& [name, backend] : j.at("backends").items())
        cfg.backends.emplace(name, backend_from_json(name, backend, base_dir));

    for (const json& cell : j.at("matrix").at("cells")) {
        MatrixCell m;
        m.backend = cell.at("backend").get<std::string>();
        m.template_id = template_from_name(cell.at("template").get<std::string>());
        m.question_ids = cell.at("questions").get<std::vector<std::string>>();
        m.run_salt = cell.value("run_salt", std::uint64_t{0});
        if (!cfg.backends.contains(m.backend))
            throw ConfigError("matrix cell references unknown backend: " + m.backend);
        for (const auto& qid : m.question_ids) cfg.question(qid);  // must resolve
        cfg.matrix.push_back(std::move(m));
    }
    if (cfg.matrix.empty()) throw ConfigError("matrix has no cells");

    cfg.grouping = grouping_from_name(j.value("grouping", "country_gender_year"));
    return cfg;
}

std::vector<Respondent> RunConfig::load_panel() const {
    if (panel_path) return load_survey(*panel_path, *panel_mapping, questions);
    return synthesize_panel(load_panel_spec(*synth_spec_file), synth_seed);
}

std::vector<std::string> RunConfig::refusal_cues() const {
    if (refusal_cues_file.empty()) return default_refusal_cues();
    return load_refusal_cues(refusal_cues_file);
}

const Question& RunConfig::question(const std::string& id) const {
    for (const auto& q : questions)
        if (q.id == id) return q;
    throw ConfigError("unknown question id: " + id);
}

}  // namespace surveysim
