#include "icsu/pipeline.hpp"

#include <atomic>
#include <thread>

#include "icsu/error.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"

namespace icsu {

using nlohmann::json;

namespace {

json provider_json(const EmbeddingProviderSpec& p) {
    json j = {{"kind", to_string(p.kind)}, {"dim", p.dim}, {"normalize", p.normalize}};
    if (p.endpoint) j["endpoint"] = *p.endpoint;
    if (p.cache_path) j["cache_path"] = p.cache_path->string();
    return j;
}

json llm_json(const LlmConfig& c) {
    json j = {{"kind", to_string(c.kind)},
              {"temperature", c.temperature},
              {"max_attempts", c.max_attempts},
              {"timeout_ms", c.timeout.count()}};
    if (c.endpoint) j["endpoint"] = *c.endpoint;
    if (c.model_name) j["model"] = *c.model_name;
    if (c.fixed_map_path) j["fixed_map"] = c.fixed_map_path->string();
    return j;
}

}  // namespace

json RunConfig::snapshot() const {
    json exclude = json::array();
    for (const auto& id : strategy.exclude_ids) exclude.push_back(id);
    return json{{"strategy", to_string(strategy.strategy)},
                {"k", strategy.k},
                {"exclude_ids", exclude},
                {"exclude_self", exclude_self},
                {"provider", provider_json(provider)},
                {"llm", llm_json(llm)},
                {"inject_topic_entity", inject_topic_entity},
                {"instruction", instruction},
                {"budget", budget ? json(*budget) : json(nullptr)},
                {"recall_bins", bin_count}};
}

std::string RunConfig::pass1_digest() const {
    json j = snapshot();
    j.erase("strategy");
    j.erase("budget");
    j.erase("recall_bins");
    return sha256_hex(j.dump());
}

void RunConfig::validate() const {
    provider.validate();
    llm.validate();
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (bin_count < 2) throw ConfigError("recall bin count must be >= 2");
}

bool needs_draft(Strategy strategy) { return strategy == Strategy::sparql || strategy == Strategy::hybrid; }

std::vector<View> views_needed(Strategy strategy) {
    switch (strategy) {
        case Strategy::raw: return {View::raw_question};
        case Strategy::anonymized: return {View::anonymized_question};
        case Strategy::sparql: return {View::anonymized_question, View::gold_sparql};
        case Strategy::hybrid: return {View::anonymized_question, View::gold_sparql, View::raw_question};
    }
    return {};
}

// ---- draft cache -----------------------------------------------------------

std::optional<std::string> DraftCache::get(const std::string& id, const std::string& digest) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find({id, digest});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void DraftCache::put(const std::string& id, const std::string& digest, std::string draft) {
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign({id, digest}, std::move(draft));
}

std::size_t DraftCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void DraftCache::load(const std::filesystem::path& path) {
    auto lines = split_lines(read_file(path));
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            auto j = json::parse(lines[i]);
            entries_.insert_or_assign({j.at("id").get<std::string>(), j.at("config").get<std::string>()},
                                      j.at("draft").get<std::string>());
        } catch (const json::exception& e) {
            throw DataError(path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

std::string DraftCache::serialize() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& [key, draft] : entries_) {
        out += json{{"id", key.first}, {"config", key.second}, {"draft", draft}}.dump() + "\n";
    }
    return out;
}

void DraftCache::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

// ---- indexes ---------------------------------------------------------------

std::optional<ExampleIndex>& IndexStore::slot(View view) {
    switch (view) {
        case View::raw_question: return raw;
        case View::anonymized_question: return anonymized;
        case View::gold_sparql: return sparql;
    }
    return raw;
}

IndexSet IndexStore::set() const {
    return {raw ? &*raw : nullptr, anonymized ? &*anonymized : nullptr, sparql ? &*sparql : nullptr};
}

std::filesystem::path index_file(const std::filesystem::path& dir, View view) {
    return dir / (std::string(to_string(view)) + ".idx");
}

IndexStore prepare_indexes(const Corpus& train, const std::vector<View>& views, Embedder& embedder,
                           const Lexicon* lexicon, const std::optional<std::filesystem::path>& index_dir,
                           bool auto_build, bool save_built) {
    IndexStore store;
    for (View view : views) {
        auto& slot = store.slot(view);
        if (slot) continue;
        if (index_dir && std::filesystem::exists(index_file(*index_dir, view))) {
            auto loaded = load_index(index_file(*index_dir, view), &train);
            if (loaded.view() != view) throw DataError(index_file(*index_dir, view).string() + ": wrong view");
            if (loaded.dim() != embedder.dim()) {
                throw ConfigError(index_file(*index_dir, view).string() + " has dimension " +
                                  std::to_string(loaded.dim()) + " but the embedder produces " +
                                  std::to_string(embedder.dim()));
            }
            slot = std::move(loaded);
            continue;
        }
        if (!auto_build) {
            throw ConfigError("no " + std::string(to_string(view)) + " index found" +
                              (index_dir ? " in " + index_dir->string() : std::string()) +
                              " and auto-build is disabled");
        }
        if (view == View::anonymized_question && !lexicon) {
            for (const auto& r : train) {
                if (!r.entity_annotations) {
                    throw ConfigError("record " + r.id + " has no entity annotations; pass a lexicon");
                }
            }
        }
        slot = build_index(train, view, embedder, lexicon);
        if (index_dir && save_built) save_index(*slot, index_file(*index_dir, view));
    }
    return store;
}

// ---- one question ----------------------------------------------------------

namespace {

std::set<std::string> exclusions(const RunConfig& config, const QuestionRecord& q, const Corpus& train) {
    std::set<std::string> out = config.strategy.exclude_ids;
    if (config.exclude_self) {
        auto self = leakage_exclusions(q, train);
        out.insert(self.begin(), self.end());
    }
    return out;
}

void dump_prompt(const RunConfig& config, const QuestionRecord& q, const Prompt& p, const char* suffix) {
    if (!config.dump_prompts || !config.out_dir) return;
    write_file(*config.out_dir / "prompts" / (safe_file_name(q.id) + suffix + ".txt"), p.rendered);
}

void dump_transcript(const RunConfig& config, const QuestionRecord& q, const Completion& c, const char* suffix) {
    if (!c.transcript || !config.out_dir) return;
    write_file(*config.out_dir / "transcripts" / (safe_file_name(q.id) + suffix + ".json"), *c.transcript);
}

PassTrace run_pass(const RunConfig& config, const StrategyConfig& sc, const QuestionRecord& q, RunContext& ctx,
                   const std::optional<std::string>& draft, const char* suffix) {
    PassTrace pass;
    pass.retrieved = retrieve(sc, q, ctx.indexes, ctx.embedder, draft, ctx.lexicon);
    pass.prompt = build_prompt(pass.retrieved, ctx.train, q, config.instruction, config.inject_topic_entity);
    dump_prompt(config, q, pass.prompt, suffix);
    pass.completion = ctx.llm.complete(pass.prompt, &q);
    dump_transcript(config, q, *pass.completion, suffix);
    return pass;
}

}  // namespace

QuestionVerdict run_question(const RunConfig& config, const QuestionRecord& question, RunContext& ctx,
                             QuestionTrace* trace) {
    QuestionVerdict v;
    v.id = question.id;
    v.gold_answers.insert(question.answers.begin(), question.answers.end());
    v.scorable = !v.gold_answers.empty();
    QuestionTrace local;
    QuestionTrace& t = trace ? *trace : local;

    StrategyConfig sc = config.strategy;
    sc.exclude_ids = exclusions(config, question, ctx.train);

    auto fail = [&](FailureKind kind, std::string detail) {
        v.failure_kind = kind;
        v.failure_detail = std::move(detail);
        v.correct = v.em = false;
        v.f1 = 0.0;
        return v;
    };

    // Retrieval, prompting and completion.
    try {
        if (view_of(config.strategy.strategy) != View::raw_question &&
            (question.entity_annotations || ctx.lexicon)) {
            t.anonymized = anonymize_record(question, ctx.lexicon).text;
        }
        std::optional<std::string> draft;
        if (needs_draft(sc.strategy)) {
            const std::string digest = config.pass1_digest();
            if (ctx.drafts) draft = ctx.drafts->get(question.id, digest);
            if (draft) {
                t.draft_from_cache = true;
            } else {
                StrategyConfig first = sc;
                first.strategy = Strategy::anonymized;
                t.pass1 = run_pass(config, first, question, ctx, std::nullopt, ".pass1");
                const auto& c = *t.pass1->completion;
                draft = c.extracted_sparql ? *c.extracted_sparql : c.text;
                if (ctx.drafts) ctx.drafts->put(question.id, digest, *draft);
            }
            t.draft = draft;
        }
        t.pass2 = run_pass(config, sc, question, ctx, draft, "");
    } catch (const BudgetExhausted&) {
        throw;
    } catch (const std::exception& e) {
        if (t.pass2) v.example_ids = t.pass2->retrieved.ids();
        return fail(FailureKind::llm_error, e.what());
    }

    const PassTrace& final_pass = *t.pass2;
    v.example_ids = final_pass.retrieved.ids();
    if (question.gold_sparql) {
        std::vector<std::string> example_sparql;
        for (const auto& e : final_pass.prompt.examples) example_sparql.push_back(e.sparql);
        v.relation_recall = relation_recall(*question.gold_sparql, example_sparql);
    }

    const auto& completion = *final_pass.completion;
    v.predicted_sparql = completion.extracted_sparql;
    if (!completion.extracted_sparql) return fail(FailureKind::parse_error, "empty completion");

    sparql::SparqlQuery query;
    try {
        query = sparql::parse_sparql(*completion.extracted_sparql);
        t.parsed = sparql::to_string(query);
    } catch (const sparql::SparqlError& e) {
        t.parse_error = e.what();
        return fail(FailureKind::parse_error, e.what());
    }

    AnswerSet answers;
    try {
        answers = execute(ctx.kb, query);
    } catch (const std::exception& e) {
        t.exec_error = e.what();
        return fail(FailureKind::exec_error, e.what());
    }
    t.answers = answers;
    v.predicted_answers = answers.values;

    auto score = score_answers(answers.values, v.gold_answers);
    v.correct = score.correct;
    v.f1 = score.f1;
    v.em = score.em;
    if (!v.correct) v.failure_kind = FailureKind::wrong_answer;
    return v;
}

std::size_t requests_needed(const RunConfig& config, const QuestionRecord& question, const DraftCache* drafts) {
    std::size_t n = 1;
    if (needs_draft(config.strategy.strategy) && !(drafts && drafts->get(question.id, config.pass1_digest()))) ++n;
    return n;
}

EvalReport run_batch(const RunConfig& config, const Corpus& questions, RunContext& ctx) {
    config.validate();
    for (View view : views_needed(config.strategy.strategy)) {
        if (!ctx.indexes.get(view)) throw ConfigError("missing " + std::string(to_string(view)) + " index");
    }

    // Admission is decided up front so the set of answered questions does not
    // depend on scheduling.
    std::size_t admitted = questions.size();
    if (config.budget) {
        std::size_t spent = 0;
        for (std::size_t i = 0; i < questions.size(); ++i) {
            std::size_t need = requests_needed(config, questions[i], ctx.drafts);
            if (spent + need > *config.budget) {
                admitted = i;
                break;
            }
            spent += need;
        }
    }

    std::vector<std::optional<QuestionVerdict>> slots(admitted);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> exhausted{false};
    auto worker = [&] {
        for (std::size_t i = next++; i < admitted; i = next++) {
            try {
                slots[i] = run_question(config, questions[i], ctx);
            } catch (const BudgetExhausted&) {
                exhausted = true;
            }
        }
    };
    {
        std::size_t n = std::min(config.parallelism, std::max<std::size_t>(admitted, 1));
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
        worker();
    }

    std::vector<QuestionVerdict> verdicts;
    verdicts.reserve(admitted);
    for (auto& s : slots) {
        if (s) verdicts.push_back(std::move(*s));
    }
    std::size_t unanswered = questions.size() - verdicts.size();
    EvalReport report = aggregate(std::move(verdicts), config.snapshot(), unanswered > 0 || exhausted, config.bin_count);
    report.unanswered = unanswered;
    return report;
}

void write_run_dir(const std::filesystem::path& dir, const RunConfig& config, const EvalReport& report,
                   const DraftCache* drafts) {
    write_file(dir / "config.json", config.snapshot().dump(2) + "\n");
    write_file(dir / "verdicts.jsonl", verdicts_jsonl(report));
    write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_file(dir / "summary.txt", summary_table(report));
    write_file(dir / "recall_bins.tsv", recall_bins_tsv(report));
    if (drafts && drafts->size()) drafts->save(dir / "drafts.jsonl");
}

}  // namespace icsu
