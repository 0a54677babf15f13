// Command-line pipeline: panel ingest/synthesis, simulation campaigns against
// chat backends, reply parsing, and report emission.  Each subcommand works
// from intermediate JSONL artifacts so stages can be re-run independently.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "surveysim/config.hpp"
#include "surveysim/gateway.hpp"
#include "surveysim/metrics.hpp"
#include "surveysim/panel.hpp"
#include "surveysim/parser.hpp"
#include "surveysim/prompt.hpp"
#include "surveysim/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surveysim;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string cache_path = "cache.jsonl";
    std::string out = "out";
    std::optional<std::string> grouping;
    std::optional<int> only_cell;
    std::optional<std::uint64_t> seed_salt;
};

std::vector<std::size_t> selected_cells(const RunConfig& cfg, const CommonOpts& opts) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < cfg.matrix.size(); ++i) {
        if (opts.only_cell && *opts.only_cell != static_cast<int>(i)) continue;
        cells.push_back(i);
    }
    if (cells.empty()) throw ConfigError("no matrix cell matches --only-cell");
    return cells;
}

int cmd_ingest(const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(opts.config_path);
    if (!cfg.panel_path) throw ConfigError("ingest needs a panel path in config");
    LoadStats stats;
    auto panel = load_survey(*cfg.panel_path, *cfg.panel_mapping, cfg.questions, &stats);
    write_panel(opts.out, panel, cfg.questions);
    std::cout << "rows " << stats.input_rows << ", accepted " << stats.accepted
              << ", dropped " << stats.dropped << " -> " << opts.out << "\n";
    return 0;
}

int cmd_synth(const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(opts.config_path);
    if (!cfg.synth_spec_file) throw ConfigError("synth needs a synth_spec_file in config");
    auto panel = synthesize_panel(load_panel_spec(*cfg.synth_spec_file),
                                  opts.seed_salt.value_or(cfg.synth_seed));
    write_panel(opts.out, panel, cfg.questions);
    std::cout << "synthesized " << panel.size() << " respondents -> " << opts.out << "\n";
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(opts.config_path);
    auto panel = cfg.load_panel();
    auto countries = CountryNames::load(cfg.countries_file);
    auto cues = cfg.refusal_cues();
    ResponseCache cache(opts.cache_path);

    fs::create_directories(opts.out);
    json manifest = {{"schema_version", 1}, {"cells", json::array()}, {"aborted", false}};
    int exit_code = 0;

    for (std::size_t i : selected_cells(cfg, opts)) {
        const MatrixCell& cell = cfg.matrix[i];
        const BackendConfig& backend_cfg = cfg.backends.at(cell.backend);
        std::vector<Question> questions;
        for (const auto& qid : cell.question_ids) questions.push_back(cfg.question(qid));
        std::uint64_t salt = opts.seed_salt.value_or(cell.run_salt);

        json entry = {{"index", i},
                      {"backend", cell.backend},
                      {"template", template_name(cell.template_id)},
                      {"questions", cell.question_ids},
                      {"run_salt", salt}};
        try {
            auto backend = make_backend(backend_cfg, panel);
            CampaignResult result =
                run_campaign(panel, questions, PromptTemplate::from_id(cell.template_id),
                             backend_cfg, *backend, cache, salt, countries, cues);
            entry["records"] = result.records.size();
            entry["cache_hits"] = result.cache_hits;
            entry["backend_calls"] = result.backend_calls;
            entry["render_failures"] = result.render_failures;
            entry["cache_hit_ratio"] =
                result.records.empty()
                    ? 0.0
                    : static_cast<double>(result.cache_hits) /
                          static_cast<double>(result.records.size());
        } catch (const std::exception& e) {
            std::cerr << "cell " << i << " failed: " << e.what() << "\n";
            entry["error"] = e.what();
            manifest["aborted"] = true;
            exit_code = 1;
        }
        manifest["cells"].push_back(std::move(entry));
    }

    std::ofstream out(fs::path(opts.out) / "manifest.json");
    out << manifest.dump(2) << "\n";
    std::cout << "manifest -> " << (fs::path(opts.out) / "manifest.json").string() << "\n";
    return exit_code;
}

int cmd_parse(const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(opts.config_path);
    auto cues = cfg.refusal_cues();
    ResponseCache cache(opts.cache_path);

    std::ofstream out(opts.out);
    if (!out) throw std::runtime_error("cannot write " + opts.out);
    std::size_t n = 0;
    for (SimulationRecord rec : cache.all_records()) {
        PromptTemplate tmpl = PromptTemplate::from_id(rec.template_id);
        rec.parse_outcome = parse(rec.raw_reply, option_labels(tmpl), cues);
        rec.canonical_value.reset();
        if (rec.parse_outcome.is_valid())
            rec.canonical_value = to_canonical(tmpl, rec.parse_outcome.reply);
        out << simulation_record_to_json(rec) << "\n";
        ++n;
    }
    std::cout << "re-parsed " << n << " records -> " << opts.out << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts) {
    RunConfig cfg = RunConfig::load(opts.config_path);
    if (opts.grouping) cfg.grouping = grouping_from_name(*opts.grouping);
    auto panel = cfg.load_panel();
    auto countries = CountryNames::load(cfg.countries_file);
    auto cues = cfg.refusal_cues();
    ResponseCache cache(opts.cache_path);

    std::vector<EvalCell> report_cells;
    std::vector<SeriesRow> series;
    std::vector<ExclusionRow> exclusions;
    int exit_code = 0;

    for (std::size_t i : selected_cells(cfg, opts)) {
        const MatrixCell& cell = cfg.matrix[i];
        const BackendConfig& backend_cfg = cfg.backends.at(cell.backend);
        PromptTemplate tmpl = PromptTemplate::from_id(cell.template_id);
        std::uint64_t salt = opts.seed_salt.value_or(cell.run_salt);

        try {
            std::vector<Question> questions;
            for (const auto& qid : cell.question_ids) questions.push_back(cfg.question(qid));
            auto backend = make_backend(backend_cfg, panel);
            CampaignResult result = run_campaign(panel, questions, tmpl, backend_cfg,
                                                 *backend, cache, salt, countries, cues);

            for (const auto& q : questions) {
                auto cells = evaluate(panel, result.records, q, tmpl, cell.backend,
                                      cfg.grouping);
                for (const auto& c : cells) {
                    if (c.zero_pairs)
                        std::cerr << "zero pairs: " << c.country << " " << q.id << " "
                                  << c.template_name << " " << c.backend_name << "\n";
                }
                ExclusionRow excl;
                excl.question_id = q.id;
                excl.template_name = template_name(tmpl.id);
                excl.backend_name = cell.backend;
                excl.panel_size = panel.size();
                excl.render_failures = result.render_failures;
                for (const auto& c : cells) {
                    excl.n_pairs += c.n_pairs;
                    excl.n_human_missing += c.n_human_missing;
                    excl.n_model_invalid += c.n_model_invalid;
                }
                exclusions.push_back(excl);
                report_cells.insert(report_cells.end(), cells.begin(), cells.end());
                auto s = build_series(panel, result.records, q, tmpl, cell.backend);
                series.insert(series.end(), s.begin(), s.end());
            }
        } catch (const std::exception& e) {
            std::cerr << "cell " << i << " failed: " << e.what() << "\n";
            exit_code = 1;
        }
    }

    fs::create_directories(opts.out);
    write_report_csv((fs::path(opts.out) / "report.csv").string(), report_cells);
    write_report_text((fs::path(opts.out) / "report.txt").string(), report_cells);
    write_series_csv((fs::path(opts.out) / "series.csv").string(), series);
    write_exclusions_csv((fs::path(opts.out) / "exclusions.csv").string(), exclusions);
    std::cout << format_report_tables(report_cells);
    return exit_code;
}

int cmd_corpus_check(const std::string& corpus_dir) {
    if (!fs::is_directory(corpus_dir)) {
        std::cerr << "no fixtures: " << corpus_dir << " is not a directory\n";
        return 2;
    }
    std::vector<fs::path> fixtures;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.path().extension() == ".txt") fixtures.push_back(entry.path());
    std::sort(fixtures.begin(), fixtures.end());
    if (fixtures.empty()) {
        std::cerr << "no fixtures found in " << corpus_dir << "\n";
        return 2;
    }

    auto cues = default_refusal_cues();
    int failures = 0;
    for (const auto& fixture : fixtures) {
        fs::path sidecar = fixture;
        sidecar.replace_extension(".expected");
        std::string raw = read_text_file(fixture.string());
        std::string expected = read_text_file(sidecar.string());
        while (!expected.empty() && (expected.back() == '\n' || expected.back() == '\r'))
            expected.pop_back();

        ParsedResponse got = parse(raw, canonical_labels(), cues);
        std::string got_text;
        switch (got.kind) {
            case ParsedResponse::Kind::Valid:
                got_text = "valid " + std::to_string(got.reply);
                break;
            case ParsedResponse::Kind::Refusal: got_text = "refusal"; break;
            case ParsedResponse::Kind::Invalid: got_text = "invalid " + got.reason; break;
        }
        if (got_text == expected) {
            std::cout << "PASS " << fixture.stem().string() << " (" << got_text << ")\n";
        } else {
            std::cout << "FAIL " << fixture.stem().string() << ": expected '" << expected
                      << "', got '" << got_text << "'\n";
            ++failures;
        }
    }
    std::cout << (fixtures.size() - static_cast<std::size_t>(failures)) << "/"
              << fixtures.size() << " fixtures pass\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survey simulation and congruence evaluation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string corpus_dir = std::string(SURVEYSIM_SOURCE_DIR) + "/assets/corpus";

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", opts.config_path, "run config JSON");
        if (needs_config) opt->required();
        cmd->add_option("--cache", opts.cache_path, "response cache JSONL path");
        cmd->add_option("--out", opts.out, "output file or directory");
        cmd->add_option("--grouping", opts.grouping,
                        "J-index subgrouping: country | country_gender | country_gender_year");
        cmd->add_option("--only-cell", opts.only_cell, "run a single matrix cell");
        cmd->add_option("--seed-salt", opts.seed_salt, "override run salt");
    };

    auto* ingest = app.add_subcommand("ingest", "load survey data, write canonical panel");
    add_common(ingest);
    auto* synth = app.add_subcommand("synth", "synthesize a panel from a spec");
    add_common(synth);
    auto* simulate = app.add_subcommand("simulate", "run the experiment matrix");
    add_common(simulate);
    auto* parse_cmd = app.add_subcommand("parse", "re-parse cached raw replies");
    add_common(parse_cmd);
    auto* evaluate_cmd = app.add_subcommand("evaluate", "emit tables and series files");
    add_common(evaluate_cmd);
    auto* corpus = app.add_subcommand("corpus-check", "verify the reply fixture corpus");
    corpus->add_option("--corpus", corpus_dir, "fixture directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(opts);
        if (synth->parsed()) return cmd_synth(opts);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (parse_cmd->parsed()) return cmd_parse(opts);
        if (evaluate_cmd->parsed()) return cmd_evaluate(opts);
        if (corpus->parsed()) return cmd_corpus_check(corpus_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
