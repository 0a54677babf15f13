#include "surveysim/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "surveysim/delimited.hpp"

namespace surveysim {

Grouping grouping_from_name(const std::string& name) {
    if (name == "country") return Grouping::Country;
    if (name == "country_gender") return Grouping::CountryGender;
    if (name == "country_gender_year") return Grouping::CountryGenderYear;
    throw std::invalid_argument("unknown grouping: " + name);
}

std::string grouping_name(Grouping g) {
    switch (g) {
        case Grouping::Country: return "country";
        case Grouping::CountryGender: return "country_gender";
        case Grouping::CountryGenderYear: return "country_gender_year";
    }
    return "";
}

GroupKey coarsen(const GroupKey& key, Grouping grouping) {
    GroupKey out = key;
    if (grouping == Grouping::Country) {
        out.gender = Gender::Man;
        out.birth_year = 0;
    } else if (grouping == Grouping::CountryGender) {
        out.birth_year = 0;
    }
    return out;
}

namespace {

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::int64_t now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

std::vector<EvalCell> evaluate(const std::vector<Respondent>& panel,
                               const std::vector<SimulationRecord>& records,
                               const Question& question, const PromptTemplate& tmpl,
                               const std::string& backend_name, Grouping grouping) {
    std::set<std::string> countries;
    for (const auto& r : panel) countries.insert(r.country);

    std::vector<EvalCell> cells;
    for (const auto& country : countries) {
        std::vector<Respondent> subset;
        for (const auto& r : panel)
            if (r.country == country) subset.push_back(r);

        PairedGroups paired = build_pairs(subset, records, question.id, tmpl);

        EvalCell cell;
        cell.country = country;
        cell.question_id = question.id;
        cell.template_name = template_name(tmpl.id);
        cell.backend_name = backend_name;
        cell.n_human_missing = paired.n_excluded_human_missing;
        cell.n_model_invalid = paired.n_excluded_model_invalid;

        PairedSample merged;
        for (const auto& [key, sample] : paired.groups)
            merged.pairs.insert(merged.pairs.end(), sample.pairs.begin(),
                                sample.pairs.end());
        cell.n_pairs = merged.pairs.size();

        if (merged.pairs.empty() || merged.total_weight() <= 0.0) {
            cell.zero_pairs = true;
            cells.push_back(std::move(cell));
            continue;
        }

        cell.human_mean = weighted_mean(merged, Side::Human);
        cell.model_mean = weighted_mean(merged, Side::Model);
        cell.human_std = weighted_std(merged, Side::Human);
        cell.model_std = weighted_std(merged, Side::Model);
        cell.mean_diff = cell.model_mean - cell.human_mean;

        std::map<GroupKey, PairedSample> subgroups;
        for (const auto& [key, sample] : paired.groups) {
            auto& target = subgroups[coarsen(key, grouping)];
            target.pairs.insert(target.pairs.end(), sample.pairs.begin(),
                                sample.pairs.end());
        }
        cell.j = j_index(subgroups);
        cells.push_back(std::move(cell));
    }
    return cells;
}

namespace {

struct TableLayout {
    std::vector<std::string> backends;                       // columns
    std::vector<std::pair<std::string, std::string>> rows;   // (country, template)
};

TableLayout layout_for(const std::vector<const EvalCell*>& cells) {
    TableLayout layout;
    std::set<std::string> backends;
    std::set<std::pair<std::string, std::string>> rows;
    for (const auto* c : cells) {
        backends.insert(c->backend_name);
        rows.insert({c->country, c->template_name});
    }
    layout.backends.assign(backends.begin(), backends.end());
    layout.rows.assign(rows.begin(), rows.end());
    return layout;
}

const EvalCell* find_cell(const std::vector<const EvalCell*>& cells,
                          const std::string& country, const std::string& tmpl,
                          const std::string& backend) {
    for (const auto* c : cells)
        if (c->country == country && c->template_name == tmpl &&
            c->backend_name == backend)
            return c;
    return nullptr;
}

void append_table(std::ostringstream& out, const std::string& title,
                  const std::vector<const EvalCell*>& cells, bool mean_table) {
    TableLayout layout = layout_for(cells);
    out << title << '\n';

    // cell text grid, then align
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header = {"country", "prompt"};
    header.insert(header.end(), layout.backends.begin(), layout.backends.end());
    grid.push_back(header);

    for (const auto& [country, tmpl] : layout.rows) {
        std::vector<std::string> texts = {country, tmpl};
        std::vector<double> values;
        std::vector<bool> present;
        for (const auto& backend : layout.backends) {
            const EvalCell* c = find_cell(cells, country, tmpl, backend);
            if (c && !c->zero_pairs) {
                values.push_back(mean_table ? c->mean_diff : c->j);
                present.push_back(true);
            } else {
                values.push_back(0.0);
                present.push_back(false);
            }
        }
        // best per row: closest to zero for mean difference, largest for J;
        // worst is the opposite end
        std::size_t best = layout.backends.size(), worst = layout.backends.size();
        double best_score = 0.0, worst_score = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!present[i]) continue;
            double score = mean_table ? std::abs(values[i]) : -values[i];
            if (best == layout.backends.size() || score < best_score) {
                best = i;
                best_score = score;
            }
            if (worst == layout.backends.size() || score > worst_score) {
                worst = i;
                worst_score = score;
            }
        }
        bool mark = layout.backends.size() > 1 && best != worst;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!present[i]) {
                texts.push_back("n/a");
            } else {
                std::string v = two_decimals(values[i]);
                if (mark && i == best) v = "*" + v + "*";
                else if (mark && i == worst) v = "[" + v + "]";
                texts.push_back(v);
            }
        }
        grid.push_back(std::move(texts));
    }

    // cross-country average row: absolute values for the mean table
    {
        std::vector<std::string> texts = {mean_table ? "Avg. (abs.)" : "Avg.", "all"};
        for (const auto& backend : layout.backends) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& [country, tmpl] : layout.rows) {
                const EvalCell* c = find_cell(cells, country, tmpl, backend);
                if (!c || c->zero_pairs) continue;
                sum += mean_table ? std::abs(c->mean_diff) : c->j;
                ++n;
            }
            texts.push_back(n ? two_decimals(sum / static_cast<double>(n)) : "n/a");
        }
        grid.push_back(std::move(texts));
    }

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << std::string(widths[i] - row[i].size(), ' ');
            out << (i + 1 < row.size() ? "  " : "");
        }
        out << '\n';
    }
    out << '\n';
}

}  // namespace

std::string format_report_tables(const std::vector<EvalCell>& cells) {
    std::set<std::string> questions;
    for (const auto& c : cells) questions.insert(c.question_id);

    std::ostringstream out;
    for (const auto& q : questions) {
        std::vector<const EvalCell*> slice;
        for (const auto& c : cells)
            if (c.question_id == q) slice.push_back(&c);
        out << "== " << q << " ==\n";
        append_table(out, "mean difference (model - human)", slice, true);
        append_table(out, "J-index", slice, false);
    }
    return out.str();
}

void write_report_text(const std::string& path, const std::vector<EvalCell>& cells,
                       bool timestamp_header) {
    auto out = open_out(path);
    if (timestamp_header) out << "# generated_at " << now_unix() << '\n';
    out << format_report_tables(cells);
}

void write_report_csv(const std::string& path, const std::vector<EvalCell>& cells,
                      bool timestamp_header) {
    auto out = open_out(path);
    if (timestamp_header) out << "# generated_at " << now_unix() << '\n';
    out << "country,question,template,backend,mean_diff,human_mean,model_mean,"
           "human_std,model_std,j_index,n_pairs,n_human_missing,n_model_invalid,"
           "zero_pairs\n";
    for (const auto& c : cells) {
        std::vector<std::string> fields = {
            c.country, c.question_id, c.template_name, c.backend_name};
        if (c.zero_pairs) {
            fields.insert(fields.end(), {"", "", "", "", "", ""});
        } else {
            fields.push_back(full_precision(c.mean_diff));
            fields.push_back(full_precision(c.human_mean));
            fields.push_back(full_precision(c.model_mean));
            fields.push_back(full_precision(c.human_std));
            fields.push_back(full_precision(c.model_std));
            fields.push_back(full_precision(c.j));
        }
        fields.push_back(std::to_string(c.n_pairs));
        fields.push_back(std::to_string(c.n_human_missing));
        fields.push_back(std::to_string(c.n_model_invalid));
        fields.push_back(c.zero_pairs ? "true" : "false");
        out << join_delimited(fields, ',') << '\n';
    }
}

std::vector<SeriesRow> build_series(const std::vector<Respondent>& panel,
                                    const std::vector<SimulationRecord>& records,
                                    const Question& question,
                                    const PromptTemplate& tmpl,
                                    const std::string& backend_name) {
    PairedGroups paired = build_pairs(panel, records, question.id, tmpl);
    std::vector<SeriesRow> rows;
    for (const auto& [key, sample] : paired.groups) {
        if (sample.pairs.empty() || sample.total_weight() <= 0.0) continue;
        SeriesRow row;
        row.country = key.country;
        row.gender = key.gender;
        row.birth_year = key.birth_year;
        row.question_id = question.id;
        row.template_name = template_name(tmpl.id);
        row.backend_name = backend_name;
        row.human_mean = weighted_mean(sample, Side::Human);
        row.human_std = weighted_std(sample, Side::Human);
        row.model_mean = weighted_mean(sample, Side::Model);
        row.model_std = weighted_std(sample, Side::Model);
        row.n_pairs = sample.pairs.size();
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows,
                      bool timestamp_header) {
    auto out = open_out(path);
    if (timestamp_header) out << "# generated_at " << now_unix() << '\n';
    out << "country,gender,birth_year,question,template,backend,human_mean,"
           "human_std,model_mean,model_std,n_pairs\n";
    for (const auto& r : rows) {
        std::vector<std::string> fields = {r.country,
                                           gender_word(r.gender),
                                           std::to_string(r.birth_year),
                                           r.question_id,
                                           r.template_name,
                                           r.backend_name,
                                           full_precision(r.human_mean),
                                           full_precision(r.human_std),
                                           full_precision(r.model_mean),
                                           full_precision(r.model_std),
                                           std::to_string(r.n_pairs)};
        out << join_delimited(fields, ',') << '\n';
    }
}

void write_exclusions_csv(const std::string& path,
                          const std::vector<ExclusionRow>& rows,
                          bool timestamp_header) {
    auto out = open_out(path);
    if (timestamp_header) out << "# generated_at " << now_unix() << '\n';
    out << "question,template,backend,panel_size,n_pairs,n_human_missing,"
           "n_model_invalid,render_failures\n";
    for (const auto& r : rows) {
        out << r.question_id << ',' << r.template_name << ',' << r.backend_name << ','
            << r.panel_size << ',' << r.n_pairs << ',' << r.n_human_missing << ','
            << r.n_model_invalid << ',' << r.render_failures << '\n';
    }
}

}  // namespace surveysim
