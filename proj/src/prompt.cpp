#include "surveysim/prompt.hpp"

#include <algorithm>

#include "surveysim/delimited.hpp"

namespace surveysim {

std::string template_name(TemplateId id) {
    switch (id) {
        case TemplateId::P1: return "P1";
        case TemplateId::P2: return "P2";
        case TemplateId::P3: return "P3";
    }
    return "";
}

TemplateId template_from_name(const std::string& name) {
    if (name == "P1") return TemplateId::P1;
    if (name == "P2") return TemplateId::P2;
    if (name == "P3") return TemplateId::P3;
    throw std::invalid_argument("unknown prompt template: " + name);
}

const std::array<std::string, 5>& canonical_labels() {
    static const std::array<std::string, 5> labels = {
        "Agree strongly", "Agree", "Neither agree nor disagree", "Disagree",
        "Disagree strongly"};
    return labels;
}

std::array<std::string, 5> option_labels(const PromptTemplate& tmpl) {
    std::array<std::string, 5> labels = canonical_labels();
    if (tmpl.reversed_options()) std::reverse(labels.begin(), labels.end());
    return labels;
}

int to_canonical(const PromptTemplate& tmpl, int reply) {
    if (reply < 1 || reply > 5) throw OutOfRangeReply(reply);
    return tmpl.reversed_options() ? 6 - reply : reply;
}

int from_canonical(const PromptTemplate& tmpl, int value) {
    // the positional map is its own inverse
    return to_canonical(tmpl, value);
}

CountryNames CountryNames::load(const std::string& path) {
    DelimitedFile file = read_delimited(path, ',');
    CountryNames names;
    for (const auto& row : file.rows) {
        if (row.size() >= 2) names.table_[row[0]] = row[1];
    }
    return names;
}

CountryNames CountryNames::from_pairs(std::map<std::string, std::string> table) {
    CountryNames names;
    names.table_ = std::move(table);
    return names;
}

const std::string& CountryNames::name_for(const std::string& code) const {
    auto it = table_.find(code);
    if (it == table_.end()) throw UnknownCountryDisplayName(code);
    return it->second;
}

RenderedPrompt render(const Respondent& respondent, const Question& question,
                      const PromptTemplate& tmpl, const CountryNames& countries) {
    if (tmpl.includes_occupation() && !respondent.isco_label)
        throw MissingOccupation(respondent.id);

    std::string text = "You are a " + gender_word(respondent.gender) + " born in " +
                       std::to_string(respondent.birth_year) + " living in " +
                       countries.name_for(respondent.country) + ". ";
    if (tmpl.includes_occupation())
        text += "Occupation category: " + *respondent.isco_label + ". ";
    text += "To what extent do you agree with the following statement: '" +
            question.statement + "'? Please respond with only a number";

    const auto labels = option_labels(tmpl);
    for (int k = 1; k <= 5; ++k)
        text += " (" + std::to_string(k) + ") " + labels[k - 1];
    text += ".";

    return RenderedPrompt{std::move(text), tmpl.id, respondent.id, question.id};
}

}  // namespace surveysim
