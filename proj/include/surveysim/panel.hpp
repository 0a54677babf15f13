#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace surveysim {

inline constexpr int kScaleSize = 5;

enum class Gender { Man, Woman };

std::string gender_word(Gender g);
std::optional<Gender> gender_from_word(const std::string& word);

enum class MissingKind { Refusal, DontKnow, NoAnswer };

std::string missing_kind_name(MissingKind k);
std::optional<MissingKind> missing_kind_from_name(const std::string& name);

/// One answer on the 5-point agreement scale, or one of the three
/// missing-data categories.  1 = "Agree strongly" ... 5 = "Disagree strongly".
class AnswerValue {
public:
    static AnswerValue valid(int v);
    static AnswerValue missing(MissingKind k);

    bool is_valid() const { return code_ > 0; }
    int value() const;               // requires is_valid()
    MissingKind missing_kind() const;  // requires !is_valid()

    bool operator==(const AnswerValue&) const = default;

private:
    explicit AnswerValue(int code) : code_(code) {}
    int code_;  // 1..5 valid, -1 refusal, -2 don't know, -3 no answer
};

struct Question {
    std::string id;         // short token, e.g. "Q1"
    std::string statement;  // text put to respondents
};

struct Respondent {
    std::string id;
    std::string country;  // ISO-like code, e.g. "DE"
    Gender gender = Gender::Man;
    int birth_year = 0;
    std::optional<std::string> isco_label;  // occupation display label
    double weight = 0.0;                    // analysis weight, >= 0
    std::map<std::string, AnswerValue> answers;  // question id -> answer
};

/// Maps dataset column names onto respondent fields.  Column names and the
/// integer codes for gender and the missing categories vary by dataset, so
/// all of it lives in config rather than code.
struct ColumnMapping {
    char delimiter = ',';
    std::string id_column;
    std::string country_column;
    std::string gender_column;
    std::string birth_year_column;
    std::string isco_column;  // optional; empty = not present
    std::string weight_column;
    std::map<std::string, std::string> question_columns;  // question id -> column
    std::map<std::string, Gender> gender_codes;           // cell value -> gender
    std::map<std::string, MissingKind> missing_codes;     // cell value -> missing kind
    std::map<std::string, std::string> isco_lookup;       // code -> display label
    int birth_year_min = 1900;
    int birth_year_max = 2010;
};

struct LoadStats {
    std::size_t input_rows = 0;
    std::size_t accepted = 0;
    std::size_t dropped = 0;  // unparseable or incomplete demographics
};

struct FileUnreadable : std::runtime_error {
    explicit FileUnreadable(const std::string& path)
        : std::runtime_error("cannot read file: " + path) {}
};
struct MappingColumnAbsent : std::runtime_error {
    explicit MappingColumnAbsent(const std::string& name)
        : std::runtime_error("mapped column absent from header: " + name) {}
};
struct DuplicateRespondentId : std::runtime_error {
    explicit DuplicateRespondentId(const std::string& id)
        : std::runtime_error("duplicate respondent id: " + id) {}
};

std::vector<Respondent> load_survey(const std::string& data_path,
                                    const ColumnMapping& mapping,
                                    const std::vector<Question>& questions,
                                    LoadStats* stats = nullptr);

/// Canonical delimited serialization; load_survey(write_panel(panel)) with
/// canonical_mapping(questions) round-trips field-identically.
void write_panel(const std::string& path, const std::vector<Respondent>& panel,
                 const std::vector<Question>& questions);
ColumnMapping canonical_mapping(const std::vector<Question>& questions);

/// One demographic cell of a synthetic panel.  Answer distributions are over
/// the canonical values 1..5 plus an optional missing probability.
struct PanelCell {
    std::string country;
    Gender gender = Gender::Man;
    int birth_year = 0;
    std::size_t count = 0;
    double weight_min = 1.0;
    double weight_max = 1.0;
    std::optional<std::string> isco_label;
    // question id -> {p1..p5, p_missing}; sums to 1 within 1e-9
    std::map<std::string, std::vector<double>> answer_distributions;
};

struct PanelSpec {
    std::vector<PanelCell> cells;
};

struct EmptySpec : std::runtime_error {
    EmptySpec() : std::runtime_error("panel spec has no cells") {}
};
struct InvalidDistribution : std::runtime_error {
    explicit InvalidDistribution(const std::string& what)
        : std::runtime_error("invalid distribution: " + what) {}
};

std::vector<Respondent> synthesize_panel(const PanelSpec& spec, std::uint64_t seed);

}  // namespace surveysim
