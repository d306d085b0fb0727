#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>

#include "icsu/dataset.hpp"
#include "icsu/prompting.hpp"

namespace icsu {

enum class LlmKind { remote_chat, gold_oracle, relation_gate, fixed_map };

std::string_view to_string(LlmKind kind);
/// Accepts the enum names with '_' or '-'.
LlmKind parse_llm_kind(std::string_view name);

/// Query returned by relation_gate when the examples miss a gold relation.
extern const std::string kRelationGateMiss;

struct LlmConfig {
    LlmKind kind = LlmKind::gold_oracle;
    std::optional<std::string> endpoint;  // full chat-completions URL
    std::optional<std::string> model_name;
    double temperature = 0.0;
    int max_attempts = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds backoff{500};
    std::string api_key_env = "OPENAI_API_KEY";
    std::optional<std::filesystem::path> fixed_map_path;  // JSONL {"digest", "text"}
    std::size_t max_in_flight = 4;

    /// Throws ConfigError when a kind-specific requirement is missing.
    void validate() const;
};

struct Completion {
    std::string text;
    std::optional<std::string> extracted_sparql;
    std::chrono::microseconds latency{0};
    /// Request and response as JSON text, for remote calls. Never holds the key.
    std::optional<std::string> transcript;
};

/// Strips a leading "Output <n>:" label, trims, keeps everything before the
/// first blank line. Nullopt when nothing is left.
std::optional<std::string> extract_sparql(std::string_view text);

/// Shared request counter; unlimited when constructed without a limit.
class RequestBudget {
public:
    explicit RequestBudget(std::optional<std::size_t> limit = std::nullopt) : limit_(limit) {}

    /// Takes one request; false once the limit is reached.
    bool try_acquire();
    std::size_t used() const { return used_.load(); }
    std::optional<std::size_t> limit() const { return limit_; }

private:
    std::optional<std::size_t> limit_;
    std::atomic<std::size_t> used_{0};
};

class LlmGateway {
public:
    /// Validates the config and loads the fixed map when configured.
    explicit LlmGateway(LlmConfig config, std::shared_ptr<RequestBudget> budget = nullptr);

    const LlmConfig& config() const { return config_; }

    /// `context` is the question's own record; the mocks read its gold SPARQL.
    /// Throws TransportError when remote attempts run out, BudgetExhausted when
    /// the budget is spent, DataError on a fixed-map miss or a mock without gold.
    Completion complete(const Prompt& prompt, const QuestionRecord* context = nullptr);

private:
    std::string remote(const Prompt& prompt, std::optional<std::string>& transcript);
    std::string relation_gate(const Prompt& prompt, const QuestionRecord* context) const;

    LlmConfig config_;
    std::shared_ptr<RequestBudget> budget_;
    std::unordered_map<std::string, std::string> fixed_map_;
    std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

/// One line of the fixed-map file (without newline).
std::string fixed_map_entry(const Prompt& prompt, std::string_view text);

}  // namespace icsu
