#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "icsu/anonymizer.hpp"
#include "icsu/dataset.hpp"
#include "icsu/embedding.hpp"
#include "icsu/error.hpp"
#include "icsu/evaluation.hpp"
#include "icsu/kb_store.hpp"
#include "icsu/llm_gateway.hpp"
#include "icsu/pipeline.hpp"
#include "icsu/retrieval.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"

namespace icsu::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string corpus;
    std::string train;
    std::string kb;
    std::string strategy = "raw";
    std::size_t k = 6;
    std::string llm = "gold-oracle";
    std::string embedder = "hash";
    std::size_t dim = 512;
    std::string endpoint;
    std::string embed_endpoint;
    std::string embed_cache;
    std::string model;
    double temperature = 0.0;
    std::size_t parallelism = 1;
    std::optional<std::size_t> budget;
    bool exclude_self = false;
    std::string out_dir;
    bool dump_prompts = false;
    std::string index_dir;
    bool no_auto_build = false;
    std::string lexicon;
    std::string draft_cache;
    std::string fixed_map;
    bool inject_topic_entity = false;
    std::string instruction_file;

    // verb-specific
    std::vector<std::string> views;
    std::string id;
    std::string strategies = "raw,anonymized,sparql,hybrid";
    std::string ks = "0,2,4,6,8";
    std::string run_dir;
};

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fmt_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v + 0.0);  // no "-0.000000"
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& part : split(s, ',')) {
        auto t = std::string(trim(part));
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::size_t parse_k(const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("bad k value \"" + s + "\"");
    return v;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

void require_file(const std::string& path, const char* flag) {
    require(path, flag);
    if (!fs::exists(path)) throw IoError(std::string(flag) + ": no such file " + path);
}

// ---- shared setup ----------------------------------------------------------

EmbeddingProviderSpec provider_from(const Options& o) {
    EmbeddingProviderSpec p;
    p.kind = parse_embedder_kind(o.embedder);
    p.dim = o.dim;
    if (!o.embed_endpoint.empty()) p.endpoint = o.embed_endpoint;
    if (!o.embed_cache.empty()) p.cache_path = o.embed_cache;
    p.validate();
    return p;
}

LlmConfig llm_from(const Options& o) {
    LlmConfig c;
    c.kind = parse_llm_kind(o.llm);
    if (!o.endpoint.empty()) c.endpoint = o.endpoint;
    if (!o.model.empty()) c.model_name = o.model;
    c.temperature = o.temperature;
    if (!o.fixed_map.empty()) c.fixed_map_path = o.fixed_map;
    c.validate();
    return c;
}

RunConfig run_config_from(const Options& o, Strategy strategy, std::size_t k) {
    RunConfig rc;
    rc.strategy.strategy = strategy;
    rc.strategy.k = k;
    rc.provider = provider_from(o);
    rc.llm = llm_from(o);
    rc.inject_topic_entity = o.inject_topic_entity;
    if (!o.instruction_file.empty()) rc.instruction = std::string(trim(read_file(o.instruction_file)));
    rc.parallelism = o.parallelism;
    rc.budget = o.budget;
    rc.exclude_self = o.exclude_self;
    rc.dump_prompts = o.dump_prompts;
    if (!o.out_dir.empty()) rc.out_dir = o.out_dir;
    rc.validate();
    if (o.dump_prompts && o.out_dir.empty()) throw ConfigError("--dump-prompts needs --out-dir");
    return rc;
}

// Inputs every question-answering verb loads.
struct Session {
    Corpus questions;
    Corpus train;
    KnowledgeBase kb;
    std::optional<Lexicon> lexicon;
    std::unique_ptr<Embedder> embedder;
    DraftCache drafts;

    const Lexicon* lex() const { return lexicon ? &*lexicon : nullptr; }
};

void validate_session_flags(const Options& o) {
    require_file(o.corpus, "--corpus");
    require_file(o.kb, "--kb");
    if (!o.train.empty()) require_file(o.train, "--train");
    if (!o.lexicon.empty()) require_file(o.lexicon, "--lexicon");
    if (!o.draft_cache.empty()) require_file(o.draft_cache, "--draft-cache");
    if (!o.instruction_file.empty()) require_file(o.instruction_file, "--instruction-file");
    if (o.parallelism < 1) throw ConfigError("--parallelism must be >= 1");
}

std::unique_ptr<Session> open_session(const Options& o) {
    auto s = std::make_unique<Session>();
    s->questions = load_corpus(o.corpus, "questions");
    s->train = o.train.empty() ? s->questions : load_corpus(o.train, "train");
    s->kb = load_kb(o.kb);
    if (!o.lexicon.empty()) s->lexicon = load_lexicon(o.lexicon);
    s->embedder = make_embedder(provider_from(o));
    if (!o.draft_cache.empty()) s->drafts.load(o.draft_cache);
    if (!o.out_dir.empty() && fs::exists(fs::path(o.out_dir) / "drafts.jsonl")) {
        s->drafts.load(fs::path(o.out_dir) / "drafts.jsonl");
    }
    return s;
}

std::optional<fs::path> index_dir_of(const Options& o) {
    if (o.index_dir.empty()) return std::nullopt;
    return fs::path(o.index_dir);
}

std::shared_ptr<RequestBudget> budget_of(const RunConfig& rc) { return std::make_shared<RequestBudget>(rc.budget); }

// ---- verbs -----------------------------------------------------------------

int cmd_ingest(const Options& o, std::ostream& out) {
    require_file(o.corpus, "--corpus");
    if (!o.lexicon.empty()) require_file(o.lexicon, "--lexicon");
    auto corpus = load_corpus(o.corpus, fs::path(o.corpus).stem().string());
    std::optional<Lexicon> lexicon;
    if (!o.lexicon.empty()) lexicon = load_lexicon(o.lexicon);

    std::size_t with_sparql = 0, annotated = 0, filled = 0, parseable = 0;
    std::vector<QuestionRecord> records;
    for (const auto& r : corpus) {
        QuestionRecord copy = r;
        if (!copy.entity_annotations && lexicon) {
            copy.entity_annotations = gazetteer_annotate(copy.question, *lexicon);
            ++filled;
        }
        if (copy.gold_sparql) {
            ++with_sparql;
            try {
                sparql::parse_sparql(*copy.gold_sparql);
                ++parseable;
            } catch (const sparql::SparqlError&) {
            }
        }
        if (copy.entity_annotations) ++annotated;
        records.push_back(std::move(copy));
    }
    Corpus result(std::move(records), corpus.split_name());
    out << "records            " << result.size() << "\n"
        << "with gold SPARQL   " << with_sparql << "\n"
        << "SPARQL in subset   " << parseable << "\n"
        << "annotated          " << annotated << (filled ? " (" + std::to_string(filled) + " by lexicon)" : "")
        << "\n";
    if (!o.out_dir.empty()) {
        auto path = fs::path(o.out_dir) / (corpus.split_name() + ".jsonl");
        save_corpus(result, path);
        out << "wrote " << path.string() << "\n";
    }
    return kOk;
}

int cmd_build_index(const Options& o, std::ostream& out) {
    require_file(o.corpus, "--corpus");
    require(o.index_dir, "--index-dir");
    if (!o.lexicon.empty()) require_file(o.lexicon, "--lexicon");
    std::vector<View> views;
    for (const auto& v : o.views.empty() ? std::vector<std::string>{"raw", "anonymized", "sparql"} : o.views) {
        views.push_back(parse_view(v));
    }
    auto provider = provider_from(o);

    auto corpus = load_corpus(o.corpus, "train");
    std::optional<Lexicon> lexicon;
    if (!o.lexicon.empty()) lexicon = load_lexicon(o.lexicon);
    auto embedder = make_embedder(provider);
    for (View view : views) {
        BuildReport report;
        auto index = build_index(corpus, view, *embedder, lexicon ? &*lexicon : nullptr, &report, provider.batch_size);
        auto path = index_file(o.index_dir, view);
        save_index(index, path);
        out << to_string(view) << ": " << report.indexed << " indexed, " << report.skipped << " skipped -> "
            << path.string() << "\n";
    }
    return kOk;
}

int finish_run(const EvalReport& report, std::ostream& out) {
    out << summary_table(report);
    return report.partial ? kPartialRun : kOk;
}

int cmd_run(const Options& o, std::ostream& out) {
    validate_session_flags(o);
    auto rc = run_config_from(o, parse_strategy(o.strategy), o.k);
    auto s = open_session(o);
    auto store = prepare_indexes(s->train, views_needed(rc.strategy.strategy), *s->embedder, s->lex(), index_dir_of(o),
                                 !o.no_auto_build);
    LlmGateway llm(rc.llm, budget_of(rc));
    RunContext ctx{s->train, s->kb, store.set(), *s->embedder, llm, s->lex(), &s->drafts};
    auto report = run_batch(rc, s->questions, ctx);
    if (rc.out_dir) write_run_dir(*rc.out_dir, rc, report, &s->drafts);
    return finish_run(report, out);
}

int cmd_sweep_k(const Options& o, std::ostream& out) {
    auto strategy_names = split_list(o.strategies);
    if (strategy_names.empty()) throw ConfigError("--strategies is empty (expected some of: raw, anonymized, sparql, hybrid)");
    std::vector<Strategy> strategies;
    for (const auto& n : strategy_names) strategies.push_back(parse_strategy(n));
    std::vector<std::size_t> ks;
    for (const auto& k : split_list(o.ks)) ks.push_back(parse_k(k));
    if (ks.empty()) throw ConfigError("--ks is empty");
    validate_session_flags(o);
    for (Strategy st : strategies) run_config_from(o, st, ks.front());

    auto s = open_session(o);
    std::vector<View> views;
    for (Strategy st : strategies) {
        for (View v : views_needed(st)) {
            if (std::find(views.begin(), views.end(), v) == views.end()) views.push_back(v);
        }
    }
    auto store = prepare_indexes(s->train, views, *s->embedder, s->lex(), index_dir_of(o), !o.no_auto_build);

    std::string table = "strategy";
    for (auto k : ks) table += "\tk=" + std::to_string(k);
    table += "\n";
    bool partial = false;
    for (Strategy st : strategies) {
        table += std::string(to_string(st));
        for (auto k : ks) {
            auto rc = run_config_from(o, st, k);
            if (rc.out_dir) rc.out_dir = *rc.out_dir / (std::string(to_string(st)) + "-k" + std::to_string(k));
            LlmGateway llm(rc.llm, budget_of(rc));
            RunContext ctx{s->train, s->kb, store.set(), *s->embedder, llm, s->lex(), &s->drafts};
            auto report = run_batch(rc, s->questions, ctx);
            if (rc.out_dir) write_run_dir(*rc.out_dir, rc, report, &s->drafts);
            partial = partial || report.partial;
            table += "\t" + fmt3(report.accuracy) + (report.partial ? "*" : "");
        }
        table += "\n";
    }
    if (!o.out_dir.empty()) write_file(fs::path(o.out_dir) / "sweep.tsv", table);
    out << table;
    if (partial) out << "* partial run (request budget exhausted)\n";
    return partial ? kPartialRun : kOk;
}

void print_retrieval(std::ostream& out, const RetrievalResult& r) {
    if (r.items.empty()) out << "  (no examples)\n";
    std::size_t i = 1;
    for (const auto& item : r.items) {
        out << "  " << i++ << ". " << item.record_id << "  " << fmt_score(item.score) << "  " << to_string(item.strategy)
            << "\n";
    }
}

void print_pass(std::ostream& out, const std::string& title, const PassTrace& p) {
    out << "== " << title << " retrieval\n";
    print_retrieval(out, p.retrieved);
    out << "== " << title << " prompt\n" << p.prompt.rendered << "\n";
    out << "== " << title << " completion\n";
    if (p.completion) {
        out << p.completion->text << "\n";
    } else {
        out << "(none)\n";
    }
}

int cmd_trace(const Options& o, std::ostream& out) {
    require(o.id, "--id");
    validate_session_flags(o);
    auto rc = run_config_from(o, parse_strategy(o.strategy), o.k);
    rc.dump_prompts = false;
    auto s = open_session(o);
    const QuestionRecord* q = s->questions.find(o.id);
    if (!q) throw ConfigError("unknown question id " + o.id);
    auto store = prepare_indexes(s->train, views_needed(rc.strategy.strategy), *s->embedder, s->lex(), index_dir_of(o),
                                 !o.no_auto_build);
    LlmGateway llm(rc.llm, budget_of(rc));
    RunContext ctx{s->train, s->kb, store.set(), *s->embedder, llm, s->lex(), nullptr};
    QuestionTrace t;
    auto v = run_question(rc, *q, ctx, &t);

    out << "== question " << q->id << "\n" << q->question << "\n";
    out << "== anonymized\n" << (t.anonymized ? *t.anonymized : "(not needed)") << "\n";
    if (needs_draft(rc.strategy.strategy)) {
        if (t.pass1) print_pass(out, "pass 1 (anonymized)", *t.pass1);
        out << "== draft\n" << (t.draft ? *t.draft : "(none)") << "\n";
        if (t.pass2) print_pass(out, "pass 2 (" + std::string(to_string(rc.strategy.strategy)) + ")", *t.pass2);
    } else if (t.pass2) {
        print_pass(out, std::string(to_string(rc.strategy.strategy)), *t.pass2);
    }
    out << "== parsed query\n";
    if (t.parsed) {
        out << *t.parsed << "\n";
    } else if (t.parse_error) {
        out << "parse error: " << *t.parse_error << "\n";
    } else {
        out << "(none)\n";
    }
    out << "== answers\n";
    if (t.answers) {
        for (const auto& a : t.answers->values) out << "  " << a << "\n";
        if (t.answers->values.empty()) out << "  (empty)\n";
    } else if (t.exec_error) {
        out << "execution error: " << *t.exec_error << "\n";
    } else {
        out << "(none)\n";
    }
    out << "== gold answers\n";
    for (const auto& a : v.gold_answers) out << "  " << a << "\n";
    out << "== relation recall\n" << (v.relation_recall ? fmt3(*v.relation_recall) : "undefined") << "\n";
    out << "== verdict\n"
        << (v.correct ? "correct" : "incorrect") << "  f1=" << fmt3(v.f1) << "  em=" << (v.em ? "yes" : "no");
    if (v.failure_kind) out << "  failure=" << to_string(*v.failure_kind);
    if (!v.failure_detail.empty()) out << " (" << v.failure_detail << ")";
    out << "\n";
    return kOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    std::string dir = o.run_dir.empty() ? o.out_dir : o.run_dir;
    require(dir, "--run-dir");
    auto path = fs::path(dir) / "report.json";
    if (!fs::exists(path)) throw IoError("no report.json in " + dir);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    auto report = report_from_json(j);
    out << summary_table(report) << "\n" << recall_bins_tsv(report);
    return report.partial ? kPartialRun : kOk;
}

void add_common(CLI::App* c, Options& o) {
    c->add_option("--corpus", o.corpus, "Question corpus (JSONL)");
    c->add_option("--train", o.train, "Training corpus to retrieve examples from (default: --corpus)");
    c->add_option("--kb", o.kb, "Knowledge base (TSV triples)");
    c->add_option("--strategy", o.strategy, "raw | anonymized | sparql | hybrid");
    c->add_option("--k", o.k, "Number of in-context examples");
    c->add_option("--llm", o.llm, "remote-chat | gold-oracle | relation-gate | fixed-map");
    c->add_option("--embedder", o.embedder, "hash | precomputed | remote");
    c->add_option("--dim", o.dim, "Embedding dimension");
    c->add_option("--endpoint", o.endpoint, "Chat-completions URL for --llm remote-chat");
    c->add_option("--embed-endpoint", o.embed_endpoint, "Embedding service URL for --embedder remote");
    c->add_option("--embed-cache", o.embed_cache, "Precomputed vectors / write-through cache file");
    c->add_option("--model", o.model, "Model name for --llm remote-chat");
    c->add_option("--temperature", o.temperature, "Sampling temperature");
    c->add_option("--parallelism", o.parallelism, "Worker threads");
    c->add_option("--budget", o.budget, "Maximum LLM requests per run");
    c->add_flag("--exclude-self", o.exclude_self, "Never retrieve the question itself or identical questions");
    c->add_option("--out-dir", o.out_dir, "Run directory");
    c->add_flag("--dump-prompts", o.dump_prompts, "Write every rendered prompt under <out-dir>/prompts");
    c->add_option("--index-dir", o.index_dir, "Directory holding prebuilt indexes");
    c->add_flag("--no-auto-build", o.no_auto_build, "Fail instead of building missing indexes");
    c->add_option("--lexicon", o.lexicon, "Surface<TAB>TYPE lexicon for unannotated questions");
    c->add_option("--draft-cache", o.draft_cache, "drafts.jsonl from an earlier run");
    c->add_option("--fixed-map", o.fixed_map, "Canned completions for --llm fixed-map");
    c->add_flag("--inject-topic-entity", o.inject_topic_entity, "Append the topic entity id to the question");
    c->add_option("--instruction-file", o.instruction_file, "Replace the default instruction");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"In-context schema understanding: text-to-SPARQL with retrieved examples"};
    app.require_subcommand(1);
    Options o;

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write its canonical form");
    ingest->add_option("--corpus", o.corpus, "Corpus to read");
    ingest->add_option("--lexicon", o.lexicon, "Annotate records lacking entities with this lexicon");
    ingest->add_option("--out-dir", o.out_dir, "Where to write <split>.jsonl");

    auto* build = app.add_subcommand("build-index", "Embed a training corpus into index files");
    build->add_option("--corpus", o.corpus, "Training corpus");
    build->add_option("--view", o.views, "raw | anonymized | sparql (repeatable; default all)");
    build->add_option("--index-dir", o.index_dir, "Output directory");
    build->add_option("--embedder", o.embedder, "hash | precomputed | remote");
    build->add_option("--dim", o.dim, "Embedding dimension");
    build->add_option("--embed-endpoint", o.embed_endpoint, "Embedding service URL");
    build->add_option("--embed-cache", o.embed_cache, "Precomputed vectors / write-through cache file");
    build->add_option("--lexicon", o.lexicon, "Lexicon for unannotated records");

    auto* run = app.add_subcommand("run", "Answer every question and score the predictions");
    add_common(run, o);
    auto* sweep = app.add_subcommand("sweep-k", "Accuracy for each strategy and k");
    add_common(sweep, o);
    sweep->add_option("--strategies", o.strategies, "Comma-separated strategies");
    sweep->add_option("--ks", o.ks, "Comma-separated k values");
    auto* trace = app.add_subcommand("trace", "Show every step for one question");
    add_common(trace, o);
    trace->add_option("--id", o.id, "Question id");
    auto* report = app.add_subcommand("report", "Print the summary of a finished run");
    report->add_option("--run-dir", o.run_dir, "Run directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? kOk : kUsageError;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, out);
        if (build->parsed()) return cmd_build_index(o, out);
        if (run->parsed()) return cmd_run(o, out);
        if (sweep->parsed()) return cmd_sweep_k(o, out);
        if (trace->parsed()) return cmd_trace(o, out);
        if (report->parsed()) return cmd_report(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsageError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return kUsageError;
}

}  // namespace icsu::cli
