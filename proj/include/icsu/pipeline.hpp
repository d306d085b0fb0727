#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsu/anonymizer.hpp"
#include "icsu/dataset.hpp"
#include "icsu/embedding.hpp"
#include "icsu/evaluation.hpp"
#include "icsu/kb_store.hpp"
#include "icsu/llm_gateway.hpp"
#include "icsu/prompting.hpp"
#include "icsu/retrieval.hpp"

namespace icsu {

struct RunConfig {
    StrategyConfig strategy;  // exclude_ids is filled per question when exclude_self is set
    EmbeddingProviderSpec provider;
    LlmConfig llm;
    bool inject_topic_entity = false;
    std::string instruction = kDefaultInstruction;
    std::size_t parallelism = 1;
    std::optional<std::size_t> budget;  // LLM requests per run
    bool exclude_self = false;
    bool dump_prompts = false;
    std::optional<std::filesystem::path> out_dir;
    std::size_t bin_count = 5;

    /// Everything that influences results. Parallelism and the output
    /// directory are left out so reports compare byte for byte across them.
    nlohmann::json snapshot() const;
    /// Digest of the settings that determine the first-pass draft.
    std::string pass1_digest() const;
    /// Throws ConfigError on an invalid combination.
    void validate() const;
};

/// True when the strategy retrieves by draft SPARQL and so needs a first pass.
bool needs_draft(Strategy strategy);
/// Index views a strategy reads, including the first pass.
std::vector<View> views_needed(Strategy strategy);

/// First-pass completions keyed by (question id, pass-1 config digest).
/// File format: JSONL {"id", "config", "draft"}.
class DraftCache {
public:
    std::optional<std::string> get(const std::string& id, const std::string& digest) const;
    void put(const std::string& id, const std::string& digest, std::string draft);
    std::size_t size() const;

    void load(const std::filesystem::path& path);
    /// Entries sorted by (id, digest).
    std::string serialize() const;
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

/// Owns the indexes a run needs.
struct IndexStore {
    std::optional<ExampleIndex> raw;
    std::optional<ExampleIndex> anonymized;
    std::optional<ExampleIndex> sparql;

    std::optional<ExampleIndex>& slot(View view);
    IndexSet set() const;
};

/// Conventional file name of an index inside an index directory.
std::filesystem::path index_file(const std::filesystem::path& dir, View view);

/// Loads each needed view from `index_dir` when present; otherwise builds it
/// when `auto_build` is set or throws ConfigError. Built indexes are written
/// to `index_dir` only when `save_built` is set.
IndexStore prepare_indexes(const Corpus& train, const std::vector<View>& views, Embedder& embedder,
                           const Lexicon* lexicon, const std::optional<std::filesystem::path>& index_dir,
                           bool auto_build, bool save_built = false);

/// Shared, read-only state of a run (the draft cache is internally locked).
struct RunContext {
    const Corpus& train;
    const KnowledgeBase& kb;
    IndexSet indexes;
    Embedder& embedder;
    LlmGateway& llm;
    const Lexicon* lexicon = nullptr;
    DraftCache* drafts = nullptr;
};

struct PassTrace {
    RetrievalResult retrieved;
    Prompt prompt;
    std::optional<Completion> completion;
};

/// Everything run_question saw, for the trace command.
struct QuestionTrace {
    std::optional<std::string> anonymized;
    std::optional<PassTrace> pass1;
    bool draft_from_cache = false;
    std::optional<std::string> draft;
    std::optional<PassTrace> pass2;
    std::optional<std::string> parsed;  // canonical form of the prediction
    std::optional<std::string> parse_error;
    std::optional<std::string> exec_error;
    std::optional<AnswerSet> answers;
};

/// Retrieve, prompt and complete (twice for draft-based strategies), then
/// parse, execute and score. Failures become verdicts; only BudgetExhausted
/// propagates.
QuestionVerdict run_question(const RunConfig& config, const QuestionRecord& question, RunContext& ctx,
                             QuestionTrace* trace = nullptr);

/// LLM requests `question` will make given the draft cache.
std::size_t requests_needed(const RunConfig& config, const QuestionRecord& question, const DraftCache* drafts);

/// Runs every question on a pool of `parallelism` workers. When a budget is
/// set, the longest prefix of questions that fits is run and the report is
/// flagged partial if any were left out. Verdicts keep question order.
EvalReport run_batch(const RunConfig& config, const Corpus& questions, RunContext& ctx);

/// config.json, verdicts.jsonl, report.json, summary.txt, recall_bins.tsv
/// and drafts.jsonl under `dir`.
void write_run_dir(const std::filesystem::path& dir, const RunConfig& config, const EvalReport& report,
                   const DraftCache* drafts);

}  // namespace icsu
