#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icsu/anonymizer.hpp"
#include "icsu/dataset.hpp"
#include "icsu/embedding.hpp"

namespace icsu {

enum class View { raw_question, anonymized_question, gold_sparql };
enum class Strategy { raw, anonymized, sparql, hybrid };

std::string_view to_string(View view);
View parse_view(std::string_view name);
std::string_view to_string(Strategy strategy);
/// Throws ConfigError listing the four names on an unknown strategy.
Strategy parse_strategy(std::string_view name);

/// The view a single strategy searches; hybrid has none.
std::optional<View> view_of(Strategy strategy);

struct IndexKey {
    std::string record_id;
    std::size_t position = 0;  // in the training corpus
    EmbeddingVector vector;

    bool operator==(const IndexKey&) const = default;
};

/// Exact nearest-neighbour index over one view of the training corpus.
/// Immutable after construction.
class ExampleIndex {
public:
    ExampleIndex() = default;
    /// Throws DataError on mixed dimensions or duplicate ids.
    ExampleIndex(View view, std::size_t dim, std::vector<IndexKey> keys);

    View view() const { return view_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }
    const std::vector<IndexKey>& keys() const { return keys_; }

    bool operator==(const ExampleIndex&) const = default;

private:
    View view_ = View::raw_question;
    std::size_t dim_ = 0;
    std::vector<IndexKey> keys_;
};

struct BuildReport {
    std::size_t indexed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> skipped_ids;
};

/// The text a record contributes to `view`, or nullopt when the record lacks
/// it (no SPARQL; no annotations and no lexicon).
std::optional<std::string> view_text(const QuestionRecord& record, View view, const Lexicon* lexicon = nullptr);

/// Anonymizes with the record's own spans, falling back to the lexicon.
/// Throws ConfigError when neither is available.
AnonymizedQuestion anonymize_record(const QuestionRecord& record, const Lexicon* lexicon);

ExampleIndex build_index(const Corpus& corpus, View view, Embedder& embedder, const Lexicon* lexicon = nullptr,
                         BuildReport* report = nullptr, std::size_t batch_size = 64);

/// Text format: "icsu-index<TAB>view<TAB>dim<TAB>count", then one
/// "id<TAB>position<TAB>v1 v2 ..." line per key.
std::string serialize_index(const ExampleIndex& index);
/// Verifies the header against the body and, when `corpus` is given, that
/// every id sits at its recorded position.
ExampleIndex parse_index(std::string_view contents, const Corpus* corpus = nullptr);
void save_index(const ExampleIndex& index, const std::filesystem::path& path);
ExampleIndex load_index(const std::filesystem::path& path, const Corpus* corpus = nullptr);

struct RetrievedItem {
    std::string record_id;
    double score = 0.0;
    Strategy strategy = Strategy::raw;
    std::size_t position = 0;

    bool operator==(const RetrievedItem&) const = default;
};

struct RetrievalResult {
    std::vector<RetrievedItem> items;
    std::size_t k_requested = 0;

    std::vector<std::string> ids() const;
    bool operator==(const RetrievalResult&) const = default;
};

/// Exact top-k by similarity descending, ties by ascending corpus position.
/// Throws Error when the query dimension differs from the index.
RetrievalResult top_k(const ExampleIndex& index, const EmbeddingVector& query, std::size_t k,
                      const std::set<std::string>& exclude_ids, Strategy tag = Strategy::raw);

/// Round-robin over [anonymized, sparql, raw], skipping ids already taken,
/// until k items or all lists are exhausted.
RetrievalResult merge_hybrid(const RetrievalResult& anonymized, const RetrievalResult& sparql,
                             const RetrievalResult& raw, std::size_t k);

struct StrategyConfig {
    Strategy strategy = Strategy::raw;
    std::size_t k = 6;
    std::set<std::string> exclude_ids;
};

struct IndexSet {
    const ExampleIndex* raw = nullptr;
    const ExampleIndex* anonymized = nullptr;
    const ExampleIndex* sparql = nullptr;

    const ExampleIndex* get(View view) const;
};

/// Training ids barred for `question`: its own id and every record whose
/// question text is identical.
std::set<std::string> leakage_exclusions(const QuestionRecord& question, const Corpus& train);

/// Dispatches on the strategy. `draft` is required by sparql and hybrid.
RetrievalResult retrieve(const StrategyConfig& config, const QuestionRecord& question, const IndexSet& indexes,
                         Embedder& embedder, const std::optional<std::string>& draft,
                         const Lexicon* lexicon = nullptr);

}  // namespace icsu
