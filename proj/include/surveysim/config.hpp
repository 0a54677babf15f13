#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysim/gateway.hpp"
#include "surveysim/panel.hpp"
#include "surveysim/prompt.hpp"
#include "surveysim/report.hpp"

namespace surveysim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what)
        : std::runtime_error("config error: " + what) {}
};

struct MatrixCell {
    std::string backend;                 // key into RunConfig::backends
    TemplateId template_id = TemplateId::P1;
    std::vector<std::string> question_ids;
    std::uint64_t run_salt = 0;
};

/// One run's worth of configuration: panel source, question list, backends,
/// and the experiment matrix.  Relative paths resolve against the config
/// file's directory.  See docs/config.md for the exact key list.
struct RunConfig {
    int schema_version = 1;
    std::string countries_file;
    std::string refusal_cues_file;  // empty = built-in default list
    std::vector<Question> questions;

    // Exactly one of the two panel sources is set.
    std::optional<std::string> panel_path;
    std::optional<ColumnMapping> panel_mapping;
    std::optional<std::string> synth_spec_file;
    std::uint64_t synth_seed = 0;

    std::map<std::string, BackendConfig> backends;
    std::vector<MatrixCell> matrix;
    Grouping grouping = Grouping::CountryGenderYear;

    static RunConfig load(const std::string& path);

    std::vector<Respondent> load_panel() const;
    std::vector<std::string> refusal_cues() const;
    const Question& question(const std::string& id) const;
};

ColumnMapping column_mapping_from_json_text(const std::string& text,
                                            const std::string& base_dir);
PanelSpec panel_spec_from_json_text(const std::string& text);
PanelSpec load_panel_spec(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace surveysim
