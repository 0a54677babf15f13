#include "surveysim/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>

namespace surveysim {

ParsedResponse ParsedResponse::valid(int reply, std::string evidence) {
    ParsedResponse r;
    r.kind = Kind::Valid;
    r.reply = reply;
    r.evidence = std::move(evidence);
    return r;
}

ParsedResponse ParsedResponse::refusal(std::string evidence) {
    ParsedResponse r;
    r.kind = Kind::Refusal;
    r.evidence = std::move(evidence);
    return r;
}

ParsedResponse ParsedResponse::invalid(std::string reason) {
    ParsedResponse r;
    r.kind = Kind::Invalid;
    r.reason = std::move(reason);
    return r;
}

std::vector<std::string> default_refusal_cues() {
    return {"I cannot provide", "I apologize", "As an AI",
            "not possible to assign a number", "I don't have personal"};
}

std::vector<std::string> load_refusal_cues(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read refusal cue file: " + path);
    std::vector<std::string> cues;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') cues.push_back(line);
    }
    return cues;
}

namespace {

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_word_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

bool equals_icase_at(std::string_view text, std::size_t pos, std::string_view pattern) {
    if (pos + pattern.size() > text.size()) return false;
    for (std::size_t i = 0; i < pattern.size(); ++i)
        if (lower(text[pos + i]) != lower(pattern[i])) return false;
    return true;
}

std::size_t find_icase(std::string_view text, std::string_view pattern, std::size_t from = 0) {
    if (pattern.empty() || pattern.size() > text.size()) return std::string_view::npos;
    for (std::size_t i = from; i + pattern.size() <= text.size(); ++i)
        if (equals_icase_at(text, i, pattern)) return i;
    return std::string_view::npos;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct LabelHit {
    std::size_t begin = 0;
    std::size_t end = 0;
    int position = 0;  // 1..5 in the template's option order
};

// Non-overlapping, longest-match-first, word-boundary label occurrences.
std::vector<LabelHit> find_labels(std::string_view text,
                                  const std::array<std::string, 5>& labels) {
    std::array<int, 5> by_length = {0, 1, 2, 3, 4};
    std::sort(by_length.begin(), by_length.end(), [&](int a, int b) {
        return labels[a].size() > labels[b].size();
    });

    std::vector<LabelHit> hits;
    std::size_t i = 0;
    while (i < text.size()) {
        bool matched = false;
        for (int idx : by_length) {
            const std::string& label = labels[idx];
            if (label.empty() || !equals_icase_at(text, i, label)) continue;
            bool left_ok = i == 0 || !is_word_char(text[i - 1]);
            std::size_t end = i + label.size();
            bool right_ok = end == text.size() || !is_word_char(text[end]);
            if (left_ok && right_ok) {
                hits.push_back({i, end, idx + 1});
                i = end;
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return hits;
}

// Rule 1: the whole (trimmed) reply is one digit, optionally parenthesized,
// optionally followed by punctuation and/or one option label.
std::optional<int> match_bare_reply(std::string_view trimmed,
                                    const std::array<std::string, 5>& labels) {
    std::size_t i = 0;
    bool paren = false;
    if (i < trimmed.size() && trimmed[i] == '(') {
        paren = true;
        ++i;
    }
    if (i >= trimmed.size() || trimmed[i] < '1' || trimmed[i] > '5') return std::nullopt;
    int digit = trimmed[i] - '0';
    ++i;
    if (paren) {
        if (i >= trimmed.size() || trimmed[i] != ')') return std::nullopt;
        ++i;
    }
    while (i < trimmed.size() &&
           (std::isspace(static_cast<unsigned char>(trimmed[i])) ||
            trimmed[i] == '.' || trimmed[i] == ',' || trimmed[i] == ':' ||
            trimmed[i] == ';' || trimmed[i] == '!' || trimmed[i] == '-'))
        ++i;
    if (i == trimmed.size()) return digit;

    std::string_view rest = trim(trimmed.substr(i));
    while (!rest.empty() && (rest.back() == '.' || rest.back() == '!')) rest.remove_suffix(1);
    for (const auto& label : labels)
        if (rest.size() == label.size() && equals_icase_at(rest, 0, label)) return digit;
    return std::nullopt;
}

struct Candidate {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the digit (or closing paren)
    int value = 0;
};

void collect_parenthesized(std::string_view text, std::vector<Candidate>& out) {
    if (text.size() < 3) return;
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        if (text[i] == '(' && text[i + 1] >= '1' && text[i + 1] <= '5' &&
            text[i + 2] == ')')
            out.push_back({i, i + 3, text[i + 1] - '0'});
    }
}

void collect_phrase(std::string_view text, std::string_view phrase,
                    std::vector<Candidate>& out) {
    std::size_t pos = 0;
    while ((pos = find_icase(text, phrase, pos)) != std::string_view::npos) {
        std::size_t i = pos + phrase.size();
        while (i < text.size() && text[i] == ' ') ++i;
        bool paren = i < text.size() && text[i] == '(';
        if (paren) ++i;
        if (i < text.size() && text[i] >= '1' && text[i] <= '5') {
            std::size_t end = i + 1;
            bool digit_ok = end == text.size() || !std::isdigit(static_cast<unsigned char>(text[end]));
            if (paren) {
                if (end < text.size() && text[end] == ')') ++end;
                else digit_ok = false;
            }
            if (digit_ok) out.push_back({pos, end, text[i] - '0'});
        }
        pos += phrase.size();
    }
}

std::size_t span_gap(std::size_t a_begin, std::size_t a_end, std::size_t b_begin,
                     std::size_t b_end) {
    if (b_begin >= a_end) return b_begin - a_end;
    if (a_begin >= b_end) return a_begin - b_end;
    return 0;  // overlapping
}

}  // namespace

ParsedResponse parse(std::string_view raw,
                     const std::array<std::string, 5>& option_labels,
                     const std::vector<std::string>& refusal_cues) {
    constexpr std::size_t kLabelWindow = 40;

    const std::string_view trimmed = trim(raw);
    if (auto digit = match_bare_reply(trimmed, option_labels))
        return ParsedResponse::valid(*digit, std::string(trimmed));

    const std::vector<LabelHit> labels = find_labels(raw, option_labels);

    // Number pattern adjacent to an option label; the mention nearest the end
    // of the text wins (models tend to conclude with their answer).
    std::vector<Candidate> candidates;
    collect_parenthesized(raw, candidates);
    collect_phrase(raw, "score of", candidates);
    collect_phrase(raw, "respond with", candidates);

    const Candidate* best = nullptr;
    const LabelHit* best_label = nullptr;
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    bool ambiguous = false;
    for (const auto& cand : candidates) {
        const LabelHit* nearest = nullptr;
        std::size_t nearest_gap = std::numeric_limits<std::size_t>::max();
        for (const auto& hit : labels) {
            std::size_t gap = span_gap(cand.begin, cand.end, hit.begin, hit.end);
            if (gap < nearest_gap) {
                nearest_gap = gap;
                nearest = &hit;
            }
        }
        if (!nearest || nearest_gap > kLabelWindow) continue;
        std::size_t distance = raw.size() - cand.end;
        if (distance < best_distance) {
            best_distance = distance;
            best = &cand;
            best_label = nearest;
            ambiguous = false;
        } else if (distance == best_distance && best && cand.value != best->value) {
            ambiguous = true;
        }
    }
    if (best) {
        if (ambiguous) return ParsedResponse::invalid("ambiguous");
        std::size_t begin = std::min(best->begin, best_label->begin);
        std::size_t end = std::max(best->end, best_label->end);
        return ParsedResponse::valid(best->value,
                                     std::string(raw.substr(begin, end - begin)));
    }

    // A single option label written out is an answer by name.
    bool single_label = !labels.empty();
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i].position != labels[0].position) single_label = false;
    if (single_label)
        return ParsedResponse::valid(
            labels[0].position,
            std::string(raw.substr(labels[0].begin, labels[0].end - labels[0].begin)));

    for (const auto& cue : refusal_cues) {
        std::size_t pos = find_icase(raw, cue);
        if (pos != std::string_view::npos)
            return ParsedResponse::refusal(std::string(raw.substr(pos, cue.size())));
    }

    return ParsedResponse::invalid("unparseable");
}

}  // namespace surveysim
