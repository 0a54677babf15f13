#include "surveysim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace surveysim {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double PairedSample::total_weight() const {
    std::vector<double> weights;
    weights.reserve(pairs.size());
    for (const auto& p : pairs) weights.push_back(p.weight);
    return pairwise_sum(weights);
}

double DistributionTable::total_mass() const {
    return pairwise_sum(std::span<const double>(masses.data(), masses.size()));
}

DistributionTable distribution(const PairedSample& sample, Side side) {
    DistributionTable table;
    for (const auto& p : sample.pairs) {
        int v = side == Side::Human ? p.human : p.model;
        table.masses[static_cast<std::size_t>(v - 1)] += p.weight;
    }
    return table;
}

double weighted_mean(const PairedSample& sample, Side side) {
    double total = sample.total_weight();
    if (total <= 0.0) throw ZeroTotalWeight();
    std::vector<double> terms;
    terms.reserve(sample.pairs.size());
    for (const auto& p : sample.pairs)
        terms.push_back(p.weight * (side == Side::Human ? p.human : p.model));
    return pairwise_sum(terms) / total;
}

double weighted_std(const PairedSample& sample, Side side) {
    double total = sample.total_weight();
    if (total <= 0.0) throw ZeroTotalWeight();
    double mean = weighted_mean(sample, side);
    std::vector<double> terms;
    terms.reserve(sample.pairs.size());
    for (const auto& p : sample.pairs) {
        double d = (side == Side::Human ? p.human : p.model) - mean;
        terms.push_back(p.weight * d * d);
    }
    double variance = pairwise_sum(terms) / total;
    return std::sqrt(std::max(variance, 0.0));
}

double mean_difference(const PairedSample& sample) {
    return weighted_mean(sample, Side::Model) - weighted_mean(sample, Side::Human);
}

double j_index(std::span<const GroupMasses> groups) {
    std::vector<double> minima, maxima;
    minima.reserve(groups.size() * 5);
    maxima.reserve(groups.size() * 5);
    for (const auto& g : groups) {
        for (std::size_t v = 0; v < 5; ++v) {
            minima.push_back(std::min(g.human[v], g.model[v]));
            maxima.push_back(std::max(g.human[v], g.model[v]));
        }
    }
    double intersection = pairwise_sum(minima);
    double union_mass = pairwise_sum(maxima);
    if (union_mass <= 0.0) throw ZeroUnion();
    return intersection / union_mass;
}

double j_index(const std::map<GroupKey, PairedSample>& groups) {
    std::vector<GroupMasses> masses;
    masses.reserve(groups.size());
    for (const auto& [key, sample] : groups) {
        GroupMasses g;
        g.human = distribution(sample, Side::Human).masses;
        g.model = distribution(sample, Side::Model).masses;
        masses.push_back(g);
    }
    return j_index(std::span<const GroupMasses>(masses));
}

PairedGroups build_pairs(const std::vector<Respondent>& panel,
                         const std::vector<SimulationRecord>& records,
                         const std::string& question_id,
                         const PromptTemplate& tmpl) {
    std::map<std::string, const SimulationRecord*> by_respondent;
    for (const auto& rec : records) {
        if (rec.question_id == question_id && rec.template_id == tmpl.id)
            by_respondent.emplace(rec.respondent_id, &rec);
    }

    PairedGroups result;
    for (const auto& r : panel) {
        auto answer = r.answers.find(question_id);
        bool human_valid = answer != r.answers.end() && answer->second.is_valid();
        if (!human_valid) {
            ++result.n_excluded_human_missing;
            continue;
        }
        auto rec_it = by_respondent.find(r.id);
        if (rec_it == by_respondent.end()) throw MissingRecord(r.id, question_id);
        const SimulationRecord& rec = *rec_it->second;
        if (!rec.parse_outcome.is_valid() || !rec.canonical_value) {
            ++result.n_excluded_model_invalid;
            continue;
        }
        GroupKey key{r.country, r.gender, r.birth_year};
        result.groups[key].pairs.push_back(
            {r.weight, answer->second.value(), *rec.canonical_value});
    }
    return result;
}

}  // namespace surveysim
