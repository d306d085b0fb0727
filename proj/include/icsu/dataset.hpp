#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace icsu {

/// The 18 OntoNotes NER labels; the only values EntitySpan::entity_type may take.
std::span<const std::string_view> entity_type_vocabulary();
bool is_entity_type(std::string_view label);

/// A typed mention inside a question. Offsets are UTF-8 byte offsets,
/// `end` exclusive.
struct EntitySpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string entity_type;
    std::string surface;

    bool operator==(const EntitySpan&) const = default;
};

/// Builds a span over `question[start, end)`; throws DataError when out of bounds.
EntitySpan make_span(std::string_view question, std::size_t start, std::size_t end,
                     std::string entity_type);

struct QuestionRecord {
    std::string id;
    std::string question;
    std::optional<std::string> gold_sparql;
    std::vector<std::string> answers;  // verbatim; normalized only when scoring
    std::optional<std::string> topic_entity_id;
    // Absent means "not annotated"; an empty list means "annotated, no entities".
    std::optional<std::vector<EntitySpan>> entity_annotations;

    bool operator==(const QuestionRecord&) const = default;
};

/// Ordered, immutable collection of records with unique ids. Record order is
/// the file order and is used for tie-breaking downstream.
class Corpus {
public:
    Corpus() = default;
    /// Throws DataError on a duplicate id.
    Corpus(std::vector<QuestionRecord> records, std::string split_name);

    const std::vector<QuestionRecord>& records() const { return records_; }
    const std::string& split_name() const { return split_name_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const QuestionRecord& operator[](std::size_t i) const { return records_[i]; }

    const QuestionRecord* find(std::string_view id) const;
    std::optional<std::size_t> position(std::string_view id) const;

    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

    bool operator==(const Corpus& other) const {
        return split_name_ == other.split_name_ && records_ == other.records_;
    }

private:
    std::vector<QuestionRecord> records_;
    std::string split_name_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

nlohmann::json record_to_json(const QuestionRecord& record);

/// Parses the canonical line-delimited format. Blank lines are skipped but
/// still counted for line numbers in error messages.
Corpus parse_corpus(std::string_view contents, std::string split_name);
Corpus load_corpus(const std::filesystem::path& path, std::string split_name);

/// Canonical serialization, one record per line, each line terminated by '\n'.
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Human-readable descriptions of every EntitySpan invariant violation.
std::vector<std::string> validate_annotations(const Corpus& corpus);

}  // namespace icsu
