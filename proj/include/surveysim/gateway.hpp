#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surveysim/panel.hpp"
#include "surveysim/parser.hpp"
#include "surveysim/prompt.hpp"

namespace surveysim {

struct BackendConfig {
    enum class Kind { RemoteChat, Mock };

    Kind kind = Kind::Mock;
    std::string name;        // matrix-facing identifier
    std::string model_name;
    std::string base_url;    // remote only, e.g. "http://localhost:8080/v1"
    std::string api_key_env; // name of the env var holding the key, if any
    double temperature = 1.0;
    double top_p = 0.9;
    int max_retries = 3;
    int parallelism = 4;
    int retry_backoff_ms = 250;
    std::chrono::milliseconds timeout{30000};
    double failure_budget = 0.05;  // abort once this fraction hard-fails
    std::string mock_spec_file;    // mock only
};

/// Stable per-respondent seed: constant across questions for one respondent,
/// distinct across respondents and across run salts.
std::uint64_t derive_seed(std::string_view respondent_id, std::uint64_t run_salt);

std::uint64_t fnv1a64(std::string_view bytes);

struct SimulationRecord {
    std::string respondent_id;
    std::string question_id;
    TemplateId template_id = TemplateId::P1;
    std::string model_name;
    double temperature = 1.0;
    double top_p = 0.9;
    std::uint64_t seed = 0;
    std::string raw_reply;
    ParsedResponse parse_outcome;
    std::optional<int> canonical_value;  // present iff parse_outcome valid
    int attempt_count = 1;
    std::int64_t timestamp = 0;  // unix seconds
    std::string cache_key;
};

std::string simulation_record_to_json(const SimulationRecord& rec);
SimulationRecord simulation_record_from_json(const std::string& line);

std::string cache_key_for(const BackendConfig& backend, TemplateId tmpl,
                          const std::string& prompt_text, std::uint64_t seed);

struct ProtocolError : std::runtime_error {
    int status;
    ProtocolError(int status_, const std::string& body_snippet)
        : std::runtime_error("backend protocol error, status " +
                             std::to_string(status_) + ": " + body_snippet),
          status(status_) {}
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Fetch the assistant message for one prompt.  attempts reports how many
    /// tries were used (>= 1).
    virtual std::string complete(const RenderedPrompt& prompt, std::uint64_t seed,
                                 int& attempts) = 0;
    std::size_t calls_made() const { return calls_.load(); }

protected:
    std::atomic<std::size_t> calls_{0};
};

/// One mock behavior rule; unset fields match anything, first match wins.
struct MockRule {
    std::optional<std::string> country;
    std::optional<Gender> gender;
    std::optional<int> year_min;
    std::optional<int> year_max;
    std::optional<std::string> question_id;
    std::optional<TemplateId> template_id;
    std::array<double, 5> distribution{};  // over canonical values 1..5
    double refusal_probability = 0.0;
};

struct MockModelSpec {
    std::vector<MockRule> rules;
    std::array<double, 5> default_distribution{0.2, 0.2, 0.2, 0.2, 0.2};
    double default_refusal_probability = 0.0;
    // true: the reply number follows the template's option order (the sampled
    // meaning is reported at its position in the list).  false: the reply
    // number is the canonical value regardless of the template's order.
    bool echo_order_sensitivity = true;

    static MockModelSpec load(const std::string& path);
    static MockModelSpec from_json_text(const std::string& text);
    void validate() const;  // throws InvalidDistribution
};

/// Deterministic offline stand-in for a chat model.  Sampling depends only on
/// the per-respondent seed, so one respondent keeps one latent draw across
/// questions and templates.
class MockBackend : public Backend {
public:
    MockBackend(MockModelSpec spec, const std::vector<Respondent>& panel);

    std::string complete(const RenderedPrompt& prompt, std::uint64_t seed,
                         int& attempts) override;

private:
    struct Demographics { std::string country; Gender gender; int birth_year; };
    const MockRule* match(const Demographics& demo, const std::string& question_id,
                          TemplateId tmpl) const;

    MockModelSpec spec_;
    MockRule fallback_;
    std::map<std::string, Demographics> demographics_;
};

/// Chat-completion wire client: single POST per prompt, retried with
/// exponential backoff on timeouts, 429 and 5xx.
class RemoteChatBackend : public Backend {
public:
    explicit RemoteChatBackend(BackendConfig config);

    std::string complete(const RenderedPrompt& prompt, std::uint64_t seed,
                         int& attempts) override;

private:
    BackendConfig config_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      const std::vector<Respondent>& panel);

/// Append-only JSONL response cache.  Existing keys are never rewritten;
/// re-reading is idempotent (first line per key wins).
class ResponseCache {
public:
    explicit ResponseCache(std::string path);

    std::optional<SimulationRecord> lookup(const std::string& cache_key) const;
    void append(const SimulationRecord& rec);
    std::size_t size() const;
    std::vector<SimulationRecord> all_records() const;

private:
    std::string path_;
    std::vector<std::string> order_;
    std::map<std::string, SimulationRecord> by_key_;
    mutable std::mutex mutex_;
};

struct CampaignAborted : std::runtime_error {
    std::size_t failures;
    explicit CampaignAborted(std::size_t failures_)
        : std::runtime_error("campaign aborted: " + std::to_string(failures_) +
                             " requests hard-failed (failure budget exceeded)"),
          failures(failures_) {}
};

struct CampaignResult {
    std::vector<SimulationRecord> records;  // sorted by (respondent, question)
    std::size_t cache_hits = 0;
    std::size_t backend_calls = 0;
    std::size_t render_failures = 0;
};

using Clock = std::function<std::int64_t()>;

/// Run every (respondent x question) of one cell against a backend, reusing
/// cached records.  At most config.parallelism requests are in flight; output
/// order is deterministic regardless of completion order.
CampaignResult run_campaign(const std::vector<Respondent>& panel,
                            const std::vector<Question>& questions,
                            const PromptTemplate& tmpl,
                            const BackendConfig& config, Backend& backend,
                            ResponseCache& cache, std::uint64_t run_salt,
                            const CountryNames& countries,
                            const std::vector<std::string>& refusal_cues,
                            Clock clock = {});

}  // namespace surveysim
