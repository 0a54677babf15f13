#include "surveysim/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <tuple>

#include <httplib.h>
#include <json.hpp>

#include "surveysim/hashing.hpp"

namespace surveysim {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) { return fnv1a64_of(bytes); }

std::uint64_t derive_seed(std::string_view respondent_id, std::uint64_t run_salt) {
    return splitmix64(fnv1a64_of(respondent_id) ^ splitmix64(run_salt));
}

namespace {

constexpr std::uint64_t kMockSamplerSalt = 0x6d6f636b73616c74ull;

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string format_param(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json parse_to_json(const ParsedResponse& p) {
    json j;
    switch (p.kind) {
        case ParsedResponse::Kind::Valid:
            j = {{"kind", "valid"}, {"reply", p.reply}, {"evidence", p.evidence}};
            break;
        case ParsedResponse::Kind::Refusal:
            j = {{"kind", "refusal"}, {"evidence", p.evidence}};
            break;
        case ParsedResponse::Kind::Invalid:
            j = {{"kind", "invalid"}, {"reason", p.reason}};
            break;
    }
    return j;
}

ParsedResponse parse_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "valid")
        return ParsedResponse::valid(j.at("reply").get<int>(),
                                     j.at("evidence").get<std::string>());
    if (kind == "refusal")
        return ParsedResponse::refusal(j.at("evidence").get<std::string>());
    return ParsedResponse::invalid(j.at("reason").get<std::string>());
}

}  // namespace

std::string cache_key_for(const BackendConfig& backend, TemplateId tmpl,
                          const std::string& prompt_text, std::uint64_t seed) {
    std::string material = backend.model_name + "|" + format_param(backend.temperature) +
                           "|" + format_param(backend.top_p) + "|" +
                           template_name(tmpl) + "|" +
                           hex64(fnv1a64(prompt_text)) + "|" + hex64(seed);
    return hex64(fnv1a64(material));
}

std::string simulation_record_to_json(const SimulationRecord& rec) {
    json j;
    j["schema_version"] = 1;
    j["respondent_id"] = rec.respondent_id;
    j["question_id"] = rec.question_id;
    j["template"] = template_name(rec.template_id);
    j["model"] = rec.model_name;
    j["temperature"] = rec.temperature;
    j["top_p"] = rec.top_p;
    j["seed"] = rec.seed;
    j["raw_reply"] = rec.raw_reply;
    j["parse"] = parse_to_json(rec.parse_outcome);
    if (rec.canonical_value)
        j["canonical_value"] = *rec.canonical_value;
    else
        j["canonical_value"] = nullptr;
    j["attempt_count"] = rec.attempt_count;
    j["timestamp"] = rec.timestamp;
    j["cache_key"] = rec.cache_key;
    return j.dump();
}

SimulationRecord simulation_record_from_json(const std::string& line) {
    json j = json::parse(line);
    SimulationRecord rec;
    rec.respondent_id = j.at("respondent_id").get<std::string>();
    rec.question_id = j.at("question_id").get<std::string>();
    rec.template_id = template_from_name(j.at("template").get<std::string>());
    rec.model_name = j.at("model").get<std::string>();
    rec.temperature = j.at("temperature").get<double>();
    rec.top_p = j.at("top_p").get<double>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.raw_reply = j.at("raw_reply").get<std::string>();
    rec.parse_outcome = parse_from_json(j.at("parse"));
    if (!j.at("canonical_value").is_null())
        rec.canonical_value = j.at("canonical_value").get<int>();
    rec.attempt_count = j.at("attempt_count").get<int>();
    rec.timestamp = j.at("timestamp").get<std::int64_t>();
    rec.cache_key = j.at("cache_key").get<std::string>();
    return rec;
}

// ---------------------------------------------------------------------------
// Mock backend

MockModelSpec MockModelSpec::from_json_text(const std::string& text) {
    json j = json::parse(text);
    MockModelSpec spec;
    spec.echo_order_sensitivity = j.value("echo_order_sensitivity", true);
    if (j.contains("default")) {
        const json& d = j["default"];
        if (d.contains("distribution"))
            spec.default_distribution = d["distribution"].get<std::array<double, 5>>();
        spec.default_refusal_probability = d.value("refusal_probability", 0.0);
    }
    for (const json& r : j.value("rules", json::array())) {
        MockRule rule;
        if (r.contains("country")) rule.country = r["country"].get<std::string>();
        if (r.contains("gender")) {
            auto g = gender_from_word(r["gender"].get<std::string>());
            if (!g) throw InvalidDistribution("unknown gender in mock rule");
            rule.gender = *g;
        }
        if (r.contains("year_min")) rule.year_min = r["year_min"].get<int>();
        if (r.contains("year_max")) rule.year_max = r["year_max"].get<int>();
        if (r.contains("question")) rule.question_id = r["question"].get<std::string>();
        if (r.contains("template"))
            rule.template_id = template_from_name(r["template"].get<std::string>());
        rule.distribution = r.at("distribution").get<std::array<double, 5>>();
        rule.refusal_probability = r.value("refusal_probability", 0.0);
        spec.rules.push_back(std::move(rule));
    }
    spec.validate();
    return spec;
}

MockModelSpec MockModelSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read mock spec: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void MockModelSpec::validate() const {
    auto check = [](const std::array<double, 5>& dist, double refusal) {
        double sum = 0.0;
        for (double p : dist) {
            if (p < 0.0) throw InvalidDistribution("negative probability in mock spec");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidDistribution("mock distribution sums to " + std::to_string(sum));
        if (refusal < 0.0 || refusal > 1.0)
            throw InvalidDistribution("refusal probability outside [0,1]");
    };
    check(default_distribution, default_refusal_probability);
    for (const auto& rule : rules) check(rule.distribution, rule.refusal_probability);
}

MockBackend::MockBackend(MockModelSpec spec, const std::vector<Respondent>& panel)
    : spec_(std::move(spec)) {
    fallback_.distribution = spec_.default_distribution;
    fallback_.refusal_probability = spec_.default_refusal_probability;
    for (const auto& r : panel)
        demographics_.emplace(r.id, Demographics{r.country, r.gender, r.birth_year});
}

const MockRule* MockBackend::match(const Demographics& demo,
                                   const std::string& question_id,
                                   TemplateId tmpl) const {
    for (const auto& rule : spec_.rules) {
        if (rule.country && *rule.country != demo.country) continue;
        if (rule.gender && *rule.gender != demo.gender) continue;
        if (rule.year_min && demo.birth_year < *rule.year_min) continue;
        if (rule.year_max && demo.birth_year > *rule.year_max) continue;
        if (rule.question_id && *rule.question_id != question_id) continue;
        if (rule.template_id && *rule.template_id != tmpl) continue;
        return &rule;
    }
    return &fallback_;
}

std::string MockBackend::complete(const RenderedPrompt& prompt, std::uint64_t seed,
                                  int& attempts) {
    ++calls_;
    attempts = 1;

    auto demo_it = demographics_.find(prompt.respondent_id);
    Demographics demo = demo_it != demographics_.end()
                            ? demo_it->second
                            : Demographics{"", Gender::Man, 0};
    const MockRule* rule = match(demo, prompt.question_id, prompt.template_id);

    // One latent draw per respondent: the same seed is reused across
    // questions and templates, so one simulated person stays one person.
    SplitMixStream rng(seed ^ kMockSamplerSalt);
    double u_refuse = rng.next_unit();
    double u_value = rng.next_unit();

    if (u_refuse < rule->refusal_probability)
        return "I apologize, but as a responsible AI language model, I cannot "
               "provide an answer to this question.";

    double cumulative = 0.0;
    int value = 5;  // canonical meaning 1..5
    for (int v = 1; v <= 5; ++v) {
        cumulative += rule->distribution[static_cast<std::size_t>(v - 1)];
        if (u_value < cumulative) {
            value = v;
            break;
        }
    }

    PromptTemplate tmpl = PromptTemplate::from_id(prompt.template_id);
    int position = spec_.echo_order_sensitivity ? from_canonical(tmpl, value) : value;
    const std::string& label = canonical_labels()[static_cast<std::size_t>(value - 1)];
    return "(" + std::to_string(position) + ") " + label;
}

// ---------------------------------------------------------------------------
// Remote chat backend

RemoteChatBackend::RemoteChatBackend(BackendConfig config) : config_(std::move(config)) {}

std::string RemoteChatBackend::complete(const RenderedPrompt& prompt,
                                        std::uint64_t seed, int& attempts) {
    std::string host = config_.base_url;
    std::string path_prefix;
    std::size_t scheme = host.find("://");
    std::size_t slash = scheme == std::string::npos ? host.find('/')
                                                    : host.find('/', scheme + 3);
    if (slash != std::string::npos) {
        path_prefix = host.substr(slash);
        host = host.substr(0, slash);
    }
    if (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();

    httplib::Client client(host);
    auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(std::max<long>(1, timeout_s.count()), 0);
    client.set_read_timeout(std::max<long>(1, timeout_s.count()), 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body = {{"model", config_.model_name},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
                 {"temperature", config_.temperature},
                 {"top_p", config_.top_p},
                 {"seed", seed}};
    const std::string payload = body.dump();

    int last_status = 0;
    std::string last_body = "connection failed";
    for (attempts = 1; attempts <= config_.max_retries + 1; ++attempts) {
        ++calls_;
        auto res = client.Post(path_prefix + "/chat/completions", headers, payload,
                               "application/json");
        if (res && res->status == 200) {
            try {
                json reply = json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const std::exception& e) {
                throw ProtocolError(200, std::string("malformed response body: ") + e.what());
            }
        }
        if (res) {
            last_status = res->status;
            last_body = res->body.substr(0, 200);
            bool transient = res->status == 429 || res->status >= 500;
            if (!transient) throw ProtocolError(res->status, last_body);
        } else {
            last_status = 0;
            last_body = "no response (timeout or connection error)";
        }
        if (attempts <= config_.max_retries) {
            auto backoff = std::chrono::milliseconds(
                config_.retry_backoff_ms * (1LL << (attempts - 1)));
            std::this_thread::sleep_for(backoff);
        }
    }
    throw ProtocolError(last_status, last_body);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      const std::vector<Respondent>& panel) {
    if (config.kind == BackendConfig::Kind::Mock) {
        MockModelSpec spec;
        if (!config.mock_spec_file.empty()) spec = MockModelSpec::load(config.mock_spec_file);
        return std::make_unique<MockBackend>(std::move(spec), panel);
    }
    return std::make_unique<RemoteChatBackend>(config);
}

// ---------------------------------------------------------------------------
// Response cache

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        SimulationRecord rec = simulation_record_from_json(line);
        // first occurrence of a key wins; re-reads are idempotent
        if (by_key_.emplace(rec.cache_key, rec).second) order_.push_back(rec.cache_key);
    }
}

std::optional<SimulationRecord> ResponseCache::lookup(const std::string& cache_key) const {
    std::lock_guard lock(mutex_);
    auto it = by_key_.find(cache_key);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::append(const SimulationRecord& rec) {
    std::lock_guard lock(mutex_);
    if (by_key_.contains(rec.cache_key)) return;  // append-only, never overwrite
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to cache: " + path_);
    out << simulation_record_to_json(rec) << '\n';
    by_key_.emplace(rec.cache_key, rec);
    order_.push_back(rec.cache_key);
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return by_key_.size();
}

std::vector<SimulationRecord> ResponseCache::all_records() const {
    std::lock_guard lock(mutex_);
    std::vector<SimulationRecord> out;
    out.reserve(order_.size());
    for (const auto& key : order_) out.push_back(by_key_.at(key));
    return out;
}

// ---------------------------------------------------------------------------
// Campaign runner

CampaignResult run_campaign(const std::vector<Respondent>& panel,
                            const std::vector<Question>& questions,
                            const PromptTemplate& tmpl,
                            const BackendConfig& config, Backend& backend,
                            ResponseCache& cache, std::uint64_t run_salt,
                            const CountryNames& countries,
                            const std::vector<std::string>& refusal_cues,
                            Clock clock) {
    if (!clock)
        clock = [] {
            return static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch()).count());
        };

    struct Task {
        RenderedPrompt prompt;
        std::uint64_t seed = 0;
        std::string cache_key;
        std::string raw_reply;
        int attempts = 1;
        bool done = false;
    };

    CampaignResult result;
    std::vector<Task> tasks;

    for (const auto& respondent : panel) {
        std::uint64_t seed = derive_seed(respondent.id, run_salt);
        for (const auto& question : questions) {
            RenderedPrompt prompt;
            try {
                prompt = render(respondent, question, tmpl, countries);
            } catch (const std::runtime_error&) {
                ++result.render_failures;
                continue;
            }
            std::string key = cache_key_for(config, tmpl.id, prompt.text, seed);
            if (auto cached = cache.lookup(key)) {
                result.records.push_back(std::move(*cached));
                ++result.cache_hits;
                continue;
            }
            tasks.push_back({std::move(prompt), seed, std::move(key), "", 1, false});
        }
    }

    const std::size_t total_requests = tasks.size();
    const std::size_t failure_limit = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(config.failure_budget *
                                              static_cast<double>(total_requests))));

    std::atomic<std::size_t> next_task{0};
    std::atomic<std::size_t> failures{0};
    std::atomic<bool> aborted{false};

    auto worker = [&] {
        while (true) {
            std::size_t i = next_task.fetch_add(1);
            if (i >= tasks.size() || aborted.load()) return;
            Task& task = tasks[i];
            try {
                task.raw_reply = backend.complete(task.prompt, task.seed, task.attempts);
                task.done = true;
            } catch (const std::exception&) {
                if (failures.fetch_add(1) + 1 >= failure_limit) aborted.store(true);
            }
        }
    };

    const int n_threads = std::clamp(config.parallelism, 1,
                                     static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    const auto labels = option_labels(tmpl);
    for (const auto& task : tasks) {
        if (!task.done) continue;
        SimulationRecord rec;
        rec.respondent_id = task.prompt.respondent_id;
        rec.question_id = task.prompt.question_id;
        rec.template_id = tmpl.id;
        rec.model_name = config.model_name;
        rec.temperature = config.temperature;
        rec.top_p = config.top_p;
        rec.seed = task.seed;
        rec.raw_reply = task.raw_reply;
        rec.parse_outcome = parse(task.raw_reply, labels, refusal_cues);
        if (rec.parse_outcome.is_valid())
            rec.canonical_value = to_canonical(tmpl, rec.parse_outcome.reply);
        rec.attempt_count = task.attempts;
        rec.timestamp = clock();
        rec.cache_key = task.cache_key;
        cache.append(rec);
        result.records.push_back(std::move(rec));
        ++result.backend_calls;
    }

    if (aborted.load()) throw CampaignAborted(failures.load());

    std::sort(result.records.begin(), result.records.end(),
              [](const SimulationRecord& a, const SimulationRecord& b) {
                  return std::tie(a.respondent_id, a.question_id) <
                         std::tie(b.respondent_id, b.question_id);
              });
    return result;
}

}  // namespace surveysim
