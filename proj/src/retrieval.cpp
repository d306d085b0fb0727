#include "icsu/retrieval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <unordered_set>

#include "icsu/error.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"

namespace icsu {

std::string_view to_string(View view) {
    switch (view) {
        case View::raw_question: return "raw_question";
        case View::anonymized_question: return "anonymized_question";
        case View::gold_sparql: return "gold_sparql";
    }
    return "?";
}

View parse_view(std::string_view name) {
    if (name == "raw_question" || name == "raw") return View::raw_question;
    if (name == "anonymized_question" || name == "anonymized") return View::anonymized_question;
    if (name == "gold_sparql" || name == "sparql") return View::gold_sparql;
    throw ConfigError("unknown view \"" + std::string(name) + "\" (expected raw, anonymized or sparql)");
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::raw: return "raw";
        case Strategy::anonymized: return "anonymized";
        case Strategy::sparql: return "sparql";
        case Strategy::hybrid: return "hybrid";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "raw") return Strategy::raw;
    if (name == "anonymized") return Strategy::anonymized;
    if (name == "sparql") return Strategy::sparql;
    if (name == "hybrid") return Strategy::hybrid;
    throw ConfigError("unknown strategy \"" + std::string(name) + "\" (expected one of: raw, anonymized, sparql, hybrid)");
}

std::optional<View> view_of(Strategy strategy) {
    switch (strategy) {
        case Strategy::raw: return View::raw_question;
        case Strategy::anonymized: return View::anonymized_question;
        case Strategy::sparql: return View::gold_sparql;
        case Strategy::hybrid: return std::nullopt;
    }
    return std::nullopt;
}

ExampleIndex::ExampleIndex(View view, std::size_t dim, std::vector<IndexKey> keys)
    : view_(view), dim_(dim), keys_(std::move(keys)) {
    std::unordered_set<std::string> seen;
    for (const auto& k : keys_) {
        if (k.vector.dim() != dim_) {
            throw DataError("index key " + k.record_id + " has dimension " + std::to_string(k.vector.dim()) +
                            ", expected " + std::to_string(dim_));
        }
        if (!seen.insert(k.record_id).second) throw DataError("duplicate index key " + k.record_id);
    }
}

AnonymizedQuestion anonymize_record(const QuestionRecord& record, const Lexicon* lexicon) {
    if (record.entity_annotations) return anonymize(record.question, *record.entity_annotations);
    if (lexicon) return anonymize(record.question, gazetteer_annotate(record.question, *lexicon));
    throw ConfigError("record " + record.id + " has no entity annotations and no lexicon was configured");
}

std::optional<std::string> view_text(const QuestionRecord& record, View view, const Lexicon* lexicon) {
    switch (view) {
        case View::raw_question: return record.question;
        case View::anonymized_question:
            if (!record.entity_annotations && !lexicon) return std::nullopt;
            return anonymize_record(record, lexicon).text;
        case View::gold_sparql:
            if (!record.gold_sparql) return std::nullopt;
            return sparql::normalize_for_embedding(*record.gold_sparql);
    }
    return std::nullopt;
}

ExampleIndex build_index(const Corpus& corpus, View view, Embedder& embedder, const Lexicon* lexicon,
                         BuildReport* report, std::size_t batch_size) {
    if (batch_size == 0) batch_size = 1;
    BuildReport local;
    std::vector<std::size_t> positions;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto text = view_text(corpus[i], view, lexicon);
        if (!text) {
            ++local.skipped;
            local.skipped_ids.push_back(corpus[i].id);
            continue;
        }
        positions.push_back(i);
        texts.push_back(std::move(*text));
    }

    std::vector<IndexKey> keys;
    keys.reserve(texts.size());
    for (std::size_t from = 0; from < texts.size(); from += batch_size) {
        std::size_t n = std::min(batch_size, texts.size() - from);
        std::vector<EmbeddingVector> vectors;
        try {
            vectors = embedder.embed_batch(std::span<const std::string>(texts).subspan(from, n));
        } catch (const TransportError& e) {
            throw TransportError("embedding records " + corpus[positions[from]].id + ".." +
                                     corpus[positions[from + n - 1]].id + ": " + e.what(),
                                 e.retryable());
        } catch (const Error& e) {
            throw Error("embedding records " + corpus[positions[from]].id + ".." +
                        corpus[positions[from + n - 1]].id + ": " + e.what());
        }
        if (vectors.size() != n) throw DataError("embedder returned a short batch");
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t pos = positions[from + j];
            keys.push_back({corpus[pos].id, pos, std::move(vectors[j])});
        }
    }
    local.indexed = keys.size();
    if (report) *report = std::move(local);
    return ExampleIndex(view, embedder.dim(), std::move(keys));
}

// ---- persistence -----------------------------------------------------------

std::string serialize_index(const ExampleIndex& index) {
    std::string out = "icsu-index\t" + std::string(to_string(index.view())) + "\t" + std::to_string(index.dim()) +
                      "\t" + std::to_string(index.size()) + "\n";
    char buf[32];
    for (const auto& k : index.keys()) {
        out += k.record_id;
        out += '\t';
        out += std::to_string(k.position);
        out += '\t';
        for (std::size_t i = 0; i < k.vector.dim(); ++i) {
            if (i) out += ' ';
            std::snprintf(buf, sizeof buf, "%.17g", k.vector[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {
std::size_t parse_size(std::string_view s, const std::string& what) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw DataError("bad " + what + " \"" + std::string(s) + "\"");
    return v;
}
}  // namespace

ExampleIndex parse_index(std::string_view contents, const Corpus* corpus) {
    auto lines = split_lines(contents);
    if (lines.empty()) throw DataError("index file is empty");
    auto header = split(lines[0], '\t');
    if (header.size() != 4 || header[0] != "icsu-index") throw DataError("index header malformed");
    View view = parse_view(header[1]);
    std::size_t dim = parse_size(header[2], "dimension");
    std::size_t count = parse_size(header[3], "count");
    if (dim == 0) throw DataError("index dimension must be positive");

    std::vector<IndexKey> keys;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string where = "index line " + std::to_string(i + 1) + ": ";
        auto fields = split(lines[i], '\t');
        if (fields.size() != 3) throw DataError(where + "expected 3 fields");
        IndexKey key;
        key.record_id = fields[0];
        key.position = parse_size(fields[1], "position");
        std::vector<double> values;
        values.reserve(dim);
        for (const auto& tok : split(fields[2], ' ')) {
            double v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size()) throw DataError(where + "bad number " + tok);
            values.push_back(v);
        }
        if (values.size() != dim) {
            throw DataError(where + "vector has " + std::to_string(values.size()) + " values, header says " +
                            std::to_string(dim));
        }
        key.vector = EmbeddingVector(std::move(values));
        if (corpus) {
            auto pos = corpus->position(key.record_id);
            if (!pos) throw DataError(where + "record " + key.record_id + " is not in the corpus");
            if (*pos != key.position) {
                throw DataError(where + "record " + key.record_id + " is at position " + std::to_string(*pos) +
                                " in the corpus, index says " + std::to_string(key.position));
            }
        }
        keys.push_back(std::move(key));
    }
    if (keys.size() != count) {
        throw DataError("index holds " + std::to_string(keys.size()) + " keys, header says " + std::to_string(count));
    }
    return ExampleIndex(view, dim, std::move(keys));
}

void save_index(const ExampleIndex& index, const std::filesystem::path& path) {
    write_file(path, serialize_index(index));
}

ExampleIndex load_index(const std::filesystem::path& path, const Corpus* corpus) {
    try {
        return parse_index(read_file(path), corpus);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---- search ----------------------------------------------------------------

std::vector<std::string> RetrievalResult::ids() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.record_id);
    return out;
}

RetrievalResult top_k(const ExampleIndex& index, const EmbeddingVector& query, std::size_t k,
                      const std::set<std::string>& exclude_ids, Strategy tag) {
    RetrievalResult result;
    result.k_requested = k;
    if (index.empty()) return result;
    if (query.dim() != index.dim()) {
        throw Error("query dimension " + std::to_string(query.dim()) + " does not match index dimension " +
                    std::to_string(index.dim()));
    }

    struct Scored {
        double score;
        const IndexKey* key;
    };
    std::vector<Scored> scored;
    scored.reserve(index.size());
    for (const auto& key : index.keys()) {
        if (exclude_ids.count(key.record_id)) continue;
        scored.push_back({similarity(query, key.vector), &key});
    }
    std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      [](const Scored& a, const Scored& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.key->position < b.key->position;
                      });
    result.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.items.push_back({scored[i].key->record_id, scored[i].score, tag, scored[i].key->position});
    }
    return result;
}

RetrievalResult merge_hybrid(const RetrievalResult& anonymized, const RetrievalResult& sparql,
                             const RetrievalResult& raw, std::size_t k) {
    RetrievalResult out;
    out.k_requested = k;
    const std::array<const RetrievalResult*, 3> lists = {&anonymized, &sparql, &raw};
    std::array<std::size_t, 3> cursor{};
    std::set<std::string> taken;
    while (out.items.size() < k) {
        bool progressed = false;
        for (std::size_t l = 0; l < lists.size() && out.items.size() < k; ++l) {
            const auto& items = lists[l]->items;
            while (cursor[l] < items.size() && taken.count(items[cursor[l]].record_id)) ++cursor[l];
            if (cursor[l] == items.size()) continue;
            taken.insert(items[cursor[l]].record_id);
            out.items.push_back(items[cursor[l]]);
            ++cursor[l];
            progressed = true;
        }
        if (!progressed) break;
    }
    return out;
}

const ExampleIndex* IndexSet::get(View view) const {
    switch (view) {
        case View::raw_question: return raw;
        case View::anonymized_question: return anonymized;
        case View::gold_sparql: return sparql;
    }
    return nullptr;
}

std::set<std::string> leakage_exclusions(const QuestionRecord& question, const Corpus& train) {
    std::set<std::string> out{question.id};
    for (const auto& r : train) {
        if (r.question == question.question) out.insert(r.id);
    }
    return out;
}

namespace {

RetrievalResult single(Strategy strategy, std::size_t k, const std::set<std::string>& exclude,
                       const QuestionRecord& question, const IndexSet& indexes, Embedder& embedder,
                       const std::optional<std::string>& draft, const Lexicon* lexicon) {
    View view = *view_of(strategy);
    const ExampleIndex* index = indexes.get(view);
    if (!index) throw ConfigError("no " + std::string(to_string(view)) + " index available");
    std::string text;
    switch (strategy) {
        case Strategy::raw: text = question.question; break;
        case Strategy::anonymized: text = anonymize_record(question, lexicon).text; break;
        case Strategy::sparql:
            if (!draft) {
                throw ConfigError("sparql strategy needs a draft query for " + question.id +
                                  "; run the anonymized pass first");
            }
            text = sparql::normalize_for_embedding(*draft);
            break;
        case Strategy::hybrid: break;
    }
    return top_k(*index, embedder.embed(text), k, exclude, strategy);
}

}  // namespace

RetrievalResult retrieve(const StrategyConfig& config, const QuestionRecord& question, const IndexSet& indexes,
                         Embedder& embedder, const std::optional<std::string>& draft, const Lexicon* lexicon) {
    if (config.strategy != Strategy::hybrid) {
        return single(config.strategy, config.k, config.exclude_ids, question, indexes, embedder, draft, lexicon);
    }
    auto a = single(Strategy::anonymized, config.k, config.exclude_ids, question, indexes, embedder, draft, lexicon);
    auto s = single(Strategy::sparql, config.k, config.exclude_ids, question, indexes, embedder, draft, lexicon);
    auto r = single(Strategy::raw, config.k, config.exclude_ids, question, indexes, embedder, draft, lexicon);
    return merge_hybrid(a, s, r, config.k);
}

}  // namespace icsu
