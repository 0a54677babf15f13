#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>

#include "surveysim/panel.hpp"

namespace surveysim {

enum class TemplateId { P1, P2, P3 };

std::string template_name(TemplateId id);
TemplateId template_from_name(const std::string& name);

/// P1: demographics only, canonical option order.
/// P2: demographics + occupation, canonical order.
/// P3: demographics only, reversed option order.
struct PromptTemplate {
    TemplateId id = TemplateId::P1;

    bool includes_occupation() const { return id == TemplateId::P2; }
    bool reversed_options() const { return id == TemplateId::P3; }

    static PromptTemplate p1() { return {TemplateId::P1}; }
    static PromptTemplate p2() { return {TemplateId::P2}; }
    static PromptTemplate p3() { return {TemplateId::P3}; }
    static PromptTemplate from_id(TemplateId id) { return {id}; }
};

/// Option labels in canonical meaning order (value 1 first).
const std::array<std::string, 5>& canonical_labels();

/// Option labels in the order they appear in this template's option list.
std::array<std::string, 5> option_labels(const PromptTemplate& tmpl);

struct OutOfRangeReply : std::runtime_error {
    explicit OutOfRangeReply(int reply)
        : std::runtime_error("reply out of range 1..5: " + std::to_string(reply)) {}
};

/// Positional reply number -> canonical value (identity, or 6-k when the
/// option list is reversed).
int to_canonical(const PromptTemplate& tmpl, int reply);
/// Canonical value -> positional number under this template.
int from_canonical(const PromptTemplate& tmpl, int value);

struct RenderedPrompt {
    std::string text;
    TemplateId template_id = TemplateId::P1;
    std::string respondent_id;
    std::string question_id;
};

struct UnknownCountryDisplayName : std::runtime_error {
    explicit UnknownCountryDisplayName(const std::string& code)
        : std::runtime_error("no display name for country code: " + code) {}
};
struct MissingOccupation : std::runtime_error {
    explicit MissingOccupation(const std::string& respondent_id)
        : std::runtime_error("respondent has no occupation label: " + respondent_id) {}
};

/// Country code -> English display name, loaded from a delimited asset file.
class CountryNames {
public:
    static CountryNames load(const std::string& path);
    static CountryNames from_pairs(std::map<std::string, std::string> table);

    const std::string& name_for(const std::string& code) const;

private:
    std::map<std::string, std::string> table_;
};

RenderedPrompt render(const Respondent& respondent, const Question& question,
                      const PromptTemplate& tmpl, const CountryNames& countries);

}  // namespace surveysim
