#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsu/dataset.hpp"
#include "icsu/retrieval.hpp"

namespace icsu {

/// The default task instruction, reproduced verbatim (including its typo).
extern const std::string kDefaultInstruction;

struct PromptExample {
    std::string record_id;
    std::string question;
    std::string sparql;

    bool operator==(const PromptExample&) const = default;
};

struct Prompt {
    std::string instruction;
    std::vector<PromptExample> examples;
    std::string question;  // including any topic-entity suffix
    std::string rendered;

    /// SHA-256 of `rendered`.
    std::string digest() const;
};

/// Layout:
///   <instruction>
///   Input 1: <question>
///   Output 1: <sparql>
///   ...
///   Input n+1: <question>[, Topic Entity Id: <id>]
///   Output n+1: <no newline>
std::string render_prompt(std::string_view instruction, const std::vector<PromptExample>& examples,
                          std::string_view question);

/// Resolves `retrieved` against `train` in retrieval order. Throws DataError
/// naming the record when an example is unknown or lacks gold SPARQL.
Prompt build_prompt(const RetrievalResult& retrieved, const Corpus& train, const QuestionRecord& question,
                    std::string_view instruction = kDefaultInstruction, bool inject_topic_entity = false);

/// Inverse of render_prompt for prompts whose fields contain no newlines.
/// Returns nullopt when the text does not follow the layout exactly.
std::optional<Prompt> parse_prompt(std::string_view rendered);

}  // namespace icsu
