#include "surveysim/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "surveysim/delimited.hpp"
#include "surveysim/hashing.hpp"

namespace surveysim {

std::string gender_word(Gender g) { return g == Gender::Man ? "man" : "woman"; }

std::optional<Gender> gender_from_word(const std::string& word) {
    if (word == "man") return Gender::Man;
    if (word == "woman") return Gender::Woman;
    return std::nullopt;
}

std::string missing_kind_name(MissingKind k) {
    switch (k) {
        case MissingKind::Refusal: return "refusal";
        case MissingKind::DontKnow: return "dont_know";
        case MissingKind::NoAnswer: return "no_answer";
    }
    return "";
}

std::optional<MissingKind> missing_kind_from_name(const std::string& name) {
    if (name == "refusal") return MissingKind::Refusal;
    if (name == "dont_know") return MissingKind::DontKnow;
    if (name == "no_answer") return MissingKind::NoAnswer;
    return std::nullopt;
}

AnswerValue AnswerValue::valid(int v) {
    if (v < 1 || v > kScaleSize)
        throw std::invalid_argument("answer value out of 1..5: " + std::to_string(v));
    return AnswerValue(v);
}

AnswerValue AnswerValue::missing(MissingKind k) {
    return AnswerValue(-1 - static_cast<int>(k));
}

int AnswerValue::value() const {
    if (!is_valid()) throw std::logic_error("value() on missing answer");
    return code_;
}

MissingKind AnswerValue::missing_kind() const {
    if (is_valid()) throw std::logic_error("missing_kind() on valid answer");
    return static_cast<MissingKind>(-code_ - 1);
}

namespace {

std::optional<int> parse_int(const std::string& text) {
    int value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        double value = std::stod(text, &pos);
        if (pos != text.size()) return std::nullopt;
        return value;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MappingColumnAbsent(name);
    return static_cast<std::size_t>(it - header.begin());
}

std::string format_weight(double w) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return buf;
}

}  // namespace

std::vector<Respondent> load_survey(const std::string& data_path,
                                    const ColumnMapping& mapping,
                                    const std::vector<Question>& questions,
                                    LoadStats* stats) {
    DelimitedFile file;
    try {
        file = read_delimited(data_path, mapping.delimiter);
    } catch (const std::runtime_error&) {
        throw FileUnreadable(data_path);
    }

    const std::size_t id_col = column_index(file.header, mapping.id_column);
    const std::size_t country_col = column_index(file.header, mapping.country_column);
    const std::size_t gender_col = column_index(file.header, mapping.gender_column);
    const std::size_t year_col = column_index(file.header, mapping.birth_year_column);
    const std::size_t weight_col = column_index(file.header, mapping.weight_column);
    std::optional<std::size_t> isco_col;
    if (!mapping.isco_column.empty())
        isco_col = column_index(file.header, mapping.isco_column);

    std::vector<std::pair<std::string, std::size_t>> question_cols;
    for (const auto& q : questions) {
        auto it = mapping.question_columns.find(q.id);
        if (it == mapping.question_columns.end()) throw MappingColumnAbsent(q.id);
        question_cols.emplace_back(q.id, column_index(file.header, it->second));
    }

    std::vector<Respondent> panel;
    std::set<std::string> seen_ids;
    LoadStats local;
    local.input_rows = file.rows.size();

    for (const auto& row : file.rows) {
        auto cell = [&](std::size_t i) -> std::string {
            return i < row.size() ? row[i] : std::string{};
        };

        Respondent r;
        r.id = cell(id_col);
        r.country = cell(country_col);

        auto gender_it = mapping.gender_codes.find(cell(gender_col));
        auto year = parse_int(cell(year_col));
        auto weight = parse_double(cell(weight_col));

        bool ok = !r.id.empty() && !r.country.empty() &&
                  gender_it != mapping.gender_codes.end() && year.has_value() &&
                  *year >= mapping.birth_year_min && *year <= mapping.birth_year_max &&
                  weight.has_value() && *weight >= 0.0;

        if (ok) {
            r.gender = gender_it->second;
            r.birth_year = *year;
            r.weight = *weight;
            if (isco_col) {
                std::string isco = cell(*isco_col);
                if (!isco.empty()) {
                    auto lookup = mapping.isco_lookup.find(isco);
                    r.isco_label = lookup != mapping.isco_lookup.end() ? lookup->second : isco;
                }
            }
            for (const auto& [qid, col] : question_cols) {
                std::string value = cell(col);
                if (value.empty()) continue;
                auto missing_it = mapping.missing_codes.find(value);
                if (missing_it != mapping.missing_codes.end()) {
                    r.answers.emplace(qid, AnswerValue::missing(missing_it->second));
                    continue;
                }
                auto v = parse_int(value);
                if (!v || *v < 1 || *v > kScaleSize) {
                    ok = false;
                    break;
                }
                r.answers.emplace(qid, AnswerValue::valid(*v));
            }
        }

        if (!ok) {
            ++local.dropped;
            continue;
        }
        if (!seen_ids.insert(r.id).second) throw DuplicateRespondentId(r.id);
        panel.push_back(std::move(r));
        ++local.accepted;
    }

    if (stats) *stats = local;
    return panel;
}

ColumnMapping canonical_mapping(const std::vector<Question>& questions) {
    ColumnMapping m;
    m.delimiter = ',';
    m.id_column = "id";
    m.country_column = "country";
    m.gender_column = "gender";
    m.birth_year_column = "birth_year";
    m.isco_column = "isco";
    m.weight_column = "weight";
    m.gender_codes = {{"man", Gender::Man}, {"woman", Gender::Woman}};
    m.missing_codes = {{"refusal", MissingKind::Refusal},
                       {"dont_know", MissingKind::DontKnow},
                       {"no_answer", MissingKind::NoAnswer}};
    for (const auto& q : questions) m.question_columns[q.id] = q.id;
    return m;
}

void write_panel(const std::string& path, const std::vector<Respondent>& panel,
                 const std::vector<Question>& questions) {
    DelimitedFile file;
    file.header = {"id", "country", "gender", "birth_year", "isco", "weight"};
    for (const auto& q : questions) file.header.push_back(q.id);

    for (const auto& r : panel) {
        std::vector<std::string> row = {r.id,
                                        r.country,
                                        gender_word(r.gender),
                                        std::to_string(r.birth_year),
                                        r.isco_label.value_or(""),
                                        format_weight(r.weight)};
        for (const auto& q : questions) {
            auto it = r.answers.find(q.id);
            if (it == r.answers.end()) {
                row.emplace_back();
            } else if (it->second.is_valid()) {
                row.push_back(std::to_string(it->second.value()));
            } else {
                row.push_back(missing_kind_name(it->second.missing_kind()));
            }
        }
        file.rows.push_back(std::move(row));
    }
    write_delimited(path, file, ',');
}

std::vector<Respondent> synthesize_panel(const PanelSpec& spec, std::uint64_t seed) {
    if (spec.cells.empty()) throw EmptySpec();

    for (const auto& cell : spec.cells) {
        for (const auto& [qid, dist] : cell.answer_distributions) {
            if (dist.size() != 5 && dist.size() != 6)
                throw InvalidDistribution(qid + ": expected 5 or 6 probabilities");
            double sum = 0.0;
            for (double p : dist) {
                if (p < 0.0) throw InvalidDistribution(qid + ": negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw InvalidDistribution(qid + ": probabilities sum to " + std::to_string(sum));
        }
    }

    std::vector<Respondent> panel;
    std::size_t serial = 0;
    for (const auto& cell : spec.cells) {
        for (std::size_t i = 0; i < cell.count; ++i, ++serial) {
            Respondent r;
            r.id = "r" + std::to_string(serial);
            r.country = cell.country;
            r.gender = cell.gender;
            r.birth_year = cell.birth_year;
            r.isco_label = cell.isco_label;

            SplitMixStream rng(splitmix64(fnv1a64_of(r.id) ^ seed));
            r.weight = cell.weight_min +
                       (cell.weight_max - cell.weight_min) * rng.next_unit();

            for (const auto& [qid, dist] : cell.answer_distributions) {
                double u = rng.next_unit();
                double cumulative = 0.0;
                int drawn = 0;  // 1..5 valid, 6 missing
                for (std::size_t k = 0; k < dist.size(); ++k) {
                    cumulative += dist[k];
                    if (u < cumulative) {
                        drawn = static_cast<int>(k) + 1;
                        break;
                    }
                }
                if (drawn == 0) drawn = static_cast<int>(dist.size());
                if (drawn <= kScaleSize)
                    r.answers.emplace(qid, AnswerValue::valid(drawn));
                else
                    r.answers.emplace(qid, AnswerValue::missing(MissingKind::DontKnow));
            }
            panel.push_back(std::move(r));
        }
    }
    return panel;
}

}  // namespace surveysim
