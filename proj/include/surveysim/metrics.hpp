#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysim/gateway.hpp"
#include "surveysim/panel.hpp"
#include "surveysim/prompt.hpp"

namespace surveysim {

/// Finest comparison cell: same country, gender, and year of birth.
struct GroupKey {
    std::string country;
    Gender gender = Gender::Man;
    int birth_year = 0;

    auto operator<=>(const GroupKey&) const = default;
};

enum class Side { Human, Model };

struct WeightedPair {
    double weight = 0.0;
    int human = 0;  // canonical 1..5
    int model = 0;  // canonical 1..5
};

/// Respondents where BOTH sides have a valid canonical value.
struct PairedSample {
    std::vector<WeightedPair> pairs;
    double total_weight() const;
};

/// Weighted mass per canonical value; masses[v-1] is the sum of analysis
/// weights of respondents answering v.
struct DistributionTable {
    std::array<double, 5> masses{};
    double total_mass() const;
};

DistributionTable distribution(const PairedSample& sample, Side side);

struct GroupMasses {
    std::array<double, 5> human{};
    std::array<double, 5> model{};
};

struct ZeroTotalWeight : std::runtime_error {
    ZeroTotalWeight() : std::runtime_error("sample has zero total weight") {}
};
struct ZeroUnion : std::runtime_error {
    ZeroUnion() : std::runtime_error("all masses zero; union is empty") {}
};
struct MissingRecord : std::runtime_error {
    MissingRecord(const std::string& respondent_id, const std::string& question_id)
        : std::runtime_error("no simulation record for respondent " + respondent_id +
                             ", question " + question_id) {}
};

double weighted_mean(const PairedSample& sample, Side side);
double weighted_std(const PairedSample& sample, Side side);
/// Weighted model mean minus weighted human mean; positive = model more
/// on the disagreement side.
double mean_difference(const PairedSample& sample);

/// Congruence index: sum over subgroups of per-value weighted minima divided
/// by the sum of per-value weighted maxima.  1 = identical distributions.
double j_index(std::span<const GroupMasses> groups);
double j_index(const std::map<GroupKey, PairedSample>& groups);

struct PairedGroups {
    std::map<GroupKey, PairedSample> groups;
    std::size_t n_excluded_human_missing = 0;
    std::size_t n_excluded_model_invalid = 0;
};

/// Pair each respondent's survey answer with the canonicalized simulated one,
/// keeping only respondents valid on both sides.  Exclusion precedence:
/// human-missing first, then model-invalid, so the counts partition the panel.
PairedGroups build_pairs(const std::vector<Respondent>& panel,
                         const std::vector<SimulationRecord>& records,
                         const std::string& question_id,
                         const PromptTemplate& tmpl);

/// Numerically careful sum (pairwise splitting).
double pairwise_sum(std::span<const double> values);

}  // namespace surveysim
