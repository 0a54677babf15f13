#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace surveysim {

/// Outcome of extracting an answer from raw model text.  Total: every input
/// maps to exactly one of the three kinds, never an exception.
struct ParsedResponse {
    enum class Kind { Valid, Refusal, Invalid };

    Kind kind = Kind::Invalid;
    int reply = 0;          // positional 1..5, Valid only
    std::string evidence;   // substring of the raw reply that decided it
    std::string reason;     // Invalid only: "ambiguous" or "unparseable"

    bool is_valid() const { return kind == Kind::Valid; }

    static ParsedResponse valid(int reply, std::string evidence);
    static ParsedResponse refusal(std::string evidence);
    static ParsedResponse invalid(std::string reason);

    bool operator==(const ParsedResponse&) const = default;
};

std::vector<std::string> default_refusal_cues();
std::vector<std::string> load_refusal_cues(const std::string& path);

/// Extract the POSITIONAL reply number from free-form model output.
/// option_labels must match the template the reply was produced under;
/// mapping positions back to canonical values is to_canonical's job.
///
/// Precedence: a bare (possibly parenthesized/labelled) digit reply, then a
/// number pattern adjacent to an option label (latest in the text wins),
/// then a single verbatim option label, then a refusal cue, else invalid.
ParsedResponse parse(std::string_view raw,
                     const std::array<std::string, 5>& option_labels,
                     const std::vector<std::string>& refusal_cues);

}  // namespace surveysim
