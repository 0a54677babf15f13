#pragma once

#include <map>
#include <string>
#include <vector>

#include "surveysim/gateway.hpp"
#include "surveysim/metrics.hpp"
#include "surveysim/panel.hpp"
#include "surveysim/prompt.hpp"

namespace surveysim {

/// Subgroup granularity used for the J-index sums.  Reported rows are always
/// per country; this only controls how fine the inner partition is.
enum class Grouping { Country, CountryGender, CountryGenderYear };

Grouping grouping_from_name(const std::string& name);
std::string grouping_name(Grouping g);

GroupKey coarsen(const GroupKey& key, Grouping grouping);

struct EvalCell {
    std::string country;
    std::string question_id;
    std::string template_name;
    std::string backend_name;
    bool zero_pairs = false;
    double mean_diff = 0.0;
    double human_mean = 0.0;
    double model_mean = 0.0;
    double human_std = 0.0;
    double model_std = 0.0;
    double j = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_human_missing = 0;
    std::size_t n_model_invalid = 0;
};

/// Per-country evaluation of one (question, template, backend) slice.
std::vector<EvalCell> evaluate(const std::vector<Respondent>& panel,
                               const std::vector<SimulationRecord>& records,
                               const Question& question, const PromptTemplate& tmpl,
                               const std::string& backend_name, Grouping grouping);

/// Aligned plain-text tables, one mean-difference table and one J-index table
/// per question: rows are country x template, columns are backends, cells are
/// two-decimal fixed point with the best value per row starred and the worst
/// bracketed.  Closest-to-zero wins for mean difference, largest for J.
std::string format_report_tables(const std::vector<EvalCell>& cells);

void write_report_csv(const std::string& path, const std::vector<EvalCell>& cells,
                      bool timestamp_header = true);
void write_report_text(const std::string& path, const std::vector<EvalCell>& cells,
                       bool timestamp_header = true);

struct SeriesRow {
    std::string country;
    Gender gender = Gender::Man;
    int birth_year = 0;
    std::string question_id;
    std::string template_name;
    std::string backend_name;
    double human_mean = 0.0, human_std = 0.0;
    double model_mean = 0.0, model_std = 0.0;
    std::size_t n_pairs = 0;
};

/// Figure-ready series: one row per (country, gender, birth year), the data
/// behind mean/std error-bar plots.
std::vector<SeriesRow> build_series(const std::vector<Respondent>& panel,
                                    const std::vector<SimulationRecord>& records,
                                    const Question& question,
                                    const PromptTemplate& tmpl,
                                    const std::string& backend_name);
void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows,
                      bool timestamp_header = true);

struct ExclusionRow {
    std::string question_id;
    std::string template_name;
    std::string backend_name;
    std::size_t panel_size = 0;
    std::size_t n_pairs = 0;
    std::size_t n_human_missing = 0;
    std::size_t n_model_invalid = 0;
    std::size_t render_failures = 0;
};

void write_exclusions_csv(const std::string& path,
                          const std::vector<ExclusionRow>& rows,
                          bool timestamp_header = true);

}  // namespace surveysim
