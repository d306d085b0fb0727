#include "icsu/llm_gateway.hpp"

#include <algorithm>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "icsu/error.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"

namespace icsu {

using nlohmann::json;

const std::string kRelationGateMiss = "SELECT ?x WHERE { ?x <relation_gate:miss> ?y . }";

std::string_view to_string(LlmKind kind) {
    switch (kind) {
        case LlmKind::remote_chat: return "remote_chat";
        case LlmKind::gold_oracle: return "gold_oracle";
        case LlmKind::relation_gate: return "relation_gate";
        case LlmKind::fixed_map: return "fixed_map";
    }
    return "?";
}

LlmKind parse_llm_kind(std::string_view name) {
    std::string n(name);
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "remote_chat" || n == "remote") return LlmKind::remote_chat;
    if (n == "gold_oracle") return LlmKind::gold_oracle;
    if (n == "relation_gate") return LlmKind::relation_gate;
    if (n == "fixed_map") return LlmKind::fixed_map;
    throw ConfigError("unknown llm \"" + std::string(name) +
                      "\" (expected one of: remote-chat, gold-oracle, relation-gate, fixed-map)");
}

void LlmConfig::validate() const {
    if (kind == LlmKind::remote_chat) {
        if (!endpoint || endpoint->empty()) throw ConfigError("remote llm requires an endpoint");
        if (!model_name || model_name->empty()) throw ConfigError("remote llm requires a model name");
    }
    if (kind == LlmKind::fixed_map && !fixed_map_path) throw ConfigError("fixed-map llm requires a map file");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (max_in_flight < 1 || max_in_flight > 1024) throw ConfigError("max_in_flight must be in [1, 1024]");
}

std::optional<std::string> extract_sparql(std::string_view text) {
    std::string_view s = trim(text);
    if (s.substr(0, 6) == "Output") {
        std::size_t i = 6;
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t digits_from = i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
        if (i > digits_from && i < s.size() && s[i] == ':') s = s.substr(i + 1);
    }
    s = trim(s);
    // First blank line: a newline followed by optional spaces and another newline.
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\n') continue;
        std::size_t j = i + 1;
        while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
        if (j < s.size() && s[j] == '\n') {
            s = trim(s.substr(0, i));
            break;
        }
    }
    if (s.empty()) return std::nullopt;
    return std::string(s);
}

bool RequestBudget::try_acquire() {
    if (!limit_) {
        ++used_;
        return true;
    }
    std::size_t cur = used_.load();
    while (cur < *limit_) {
        if (used_.compare_exchange_weak(cur, cur + 1)) return true;
    }
    return false;
}

std::string fixed_map_entry(const Prompt& prompt, std::string_view text) {
    return json{{"digest", prompt.digest()}, {"text", text}}.dump();
}

LlmGateway::LlmGateway(LlmConfig config, std::shared_ptr<RequestBudget> budget)
    : config_(std::move(config)), budget_(std::move(budget)) {
    config_.validate();
    in_flight_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(config_.max_in_flight));
    if (config_.kind == LlmKind::fixed_map) {
        auto lines = split_lines(read_file(*config_.fixed_map_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            try {
                auto j = json::parse(lines[i]);
                fixed_map_.insert_or_assign(j.at("digest").get<std::string>(), j.at("text").get<std::string>());
            } catch (const json::exception& e) {
                throw DataError(config_.fixed_map_path->string() + " line " + std::to_string(i + 1) + ": " + e.what());
            }
        }
    }
}

std::string LlmGateway::relation_gate(const Prompt& prompt, const QuestionRecord* context) const {
    if (!context || !context->gold_sparql) throw DataError("relation_gate needs the question's gold SPARQL");
    std::set<std::string> gold;
    try {
        gold = sparql::extract_relations(sparql::parse_sparql(*context->gold_sparql));
    } catch (const sparql::SparqlError&) {
        return kRelationGateMiss;
    }
    std::set<std::string> covered;
    for (const auto& e : prompt.examples) {
        try {
            auto r = sparql::extract_relations(sparql::parse_sparql(e.sparql));
            covered.insert(r.begin(), r.end());
        } catch (const sparql::SparqlError&) {
        }
    }
    bool all = std::includes(covered.begin(), covered.end(), gold.begin(), gold.end());
    return all ? *context->gold_sparql : kRelationGateMiss;
}

std::string LlmGateway::remote(const Prompt& prompt, std::optional<std::string>& transcript) {
    json request = {{"model", *config_.model_name},
                    {"messages", json::array({{{"role", "user"}, {"content", prompt.rendered}}})},
                    {"temperature", config_.temperature}};
    const std::string body = request.dump();
    detail::HttpHeaders headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }

    struct Guard {
        std::counting_semaphore<1024>& s;
        explicit Guard(std::counting_semaphore<1024>& sem) : s(sem) { s.acquire(); }
        ~Guard() { s.release(); }
    } guard(*in_flight_);

    int attempts = 0;
    auto response = detail::with_retries(config_.max_attempts, config_.backoff, [&] {
        ++attempts;
        auto r = detail::post_json(*config_.endpoint, body, headers, config_.timeout);
        if (r.status == 429 || r.status >= 500) {
            throw TransportError("llm endpoint returned HTTP " + std::to_string(r.status), true);
        }
        if (r.status != 200) {
            throw TransportError("llm endpoint returned HTTP " + std::to_string(r.status) + ": " + r.body.substr(0, 200),
                                 false);
        }
        return r;
    });

    std::string content;
    try {
        auto j = json::parse(response.body);
        content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat completion response: ") + e.what(), false);
    }
    json t = {{"request", request}, {"attempts", attempts}, {"response", json::parse(response.body)}};
    transcript = t.dump(2);
    return content;
}

Completion LlmGateway::complete(const Prompt& prompt, const QuestionRecord* context) {
    if (budget_ && !budget_->try_acquire()) {
        throw BudgetExhausted("llm request budget of " + std::to_string(*budget_->limit()) + " exhausted");
    }
    auto start = std::chrono::steady_clock::now();
    Completion c;
    switch (config_.kind) {
        case LlmKind::remote_chat: c.text = remote(prompt, c.transcript); break;
        case LlmKind::gold_oracle:
            if (!context || !context->gold_sparql) throw DataError("gold_oracle needs the question's gold SPARQL");
            c.text = *context->gold_sparql;
            break;
        case LlmKind::relation_gate: c.text = relation_gate(prompt, context); break;
        case LlmKind::fixed_map: {
            auto d = prompt.digest();
            auto it = fixed_map_.find(d);
            if (it == fixed_map_.end()) throw DataError("fixed map has no entry for prompt digest " + d);
            c.text = it->second;
            break;
        }
    }
    c.extracted_sparql = extract_sparql(c.text);
    c.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return c;
}

}  // namespace icsu
