#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsu/kb_store.hpp"

namespace icsu {

enum class FailureKind { parse_error, exec_error, wrong_answer, llm_error };

std::string_view to_string(FailureKind kind);
FailureKind parse_failure_kind(std::string_view name);

struct AnswerScore {
    bool correct = false;
    double f1 = 0.0;
    bool em = false;

    bool operator==(const AnswerScore&) const = default;
};

/// Trim plus ASCII casefold.
std::string normalize_answer(std::string_view answer);

/// Set comparison after normalization; f1 = 2|P∩G| / (|P|+|G|).
AnswerScore score_answers(const std::set<std::string>& predicted, const std::set<std::string>& gold);

/// |R_g ∩ R_e| / |R_g| over predicate names, 1.0 when the gold has none.
/// Nullopt when the gold does not parse. Example queries that do not parse
/// contribute nothing.
std::optional<double> relation_recall(std::string_view gold_sparql, const std::vector<std::string>& example_sparql);

struct QuestionVerdict {
    std::string id;
    std::optional<std::string> predicted_sparql;
    std::optional<std::set<std::string>> predicted_answers;
    std::set<std::string> gold_answers;
    bool correct = false;
    double f1 = 0.0;
    bool em = false;
    std::optional<double> relation_recall;
    std::optional<FailureKind> failure_kind;
    std::string failure_detail;
    bool scorable = true;  // false when the gold answer set is empty
    std::vector<std::string> example_ids;

    bool operator==(const QuestionVerdict&) const = default;
};

struct RecallBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    std::optional<double> mean_accuracy;  // nullopt for an empty bin

    bool operator==(const RecallBin&) const = default;
};

/// Bin index of r in [0,1] for `bin_count` equal-width bins; 1.0 falls in the last.
std::size_t recall_bin_index(double recall, std::size_t bin_count);

/// Equal-width bins over [0,1] of verdicts with a defined recall.
/// Throws ConfigError when bin_count < 2.
std::vector<RecallBin> bin_recall_accuracy(const std::vector<QuestionVerdict>& verdicts, std::size_t bin_count);

/// Sample Pearson correlation; nullopt when either side has zero variance or
/// fewer than two points.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct EvalReport {
    std::vector<QuestionVerdict> verdicts;
    std::size_t scored = 0;  // verdicts entering the aggregates
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double em_rate = 0.0;
    std::optional<double> mean_relation_recall;
    std::optional<double> recall_correct_pearson;
    std::vector<RecallBin> recall_bins;
    nlohmann::json config_snapshot;
    bool partial = false;
    std::size_t unanswered = 0;  // questions skipped because the budget ran out
};

/// Fills the aggregates from `verdicts`; unscorable verdicts are left out.
EvalReport aggregate(std::vector<QuestionVerdict> verdicts, nlohmann::json config_snapshot, bool partial,
                     std::size_t bin_count = 5);

nlohmann::json verdict_to_json(const QuestionVerdict& v);
QuestionVerdict verdict_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// One JSON verdict per line.
std::string verdicts_jsonl(const EvalReport& report);
/// Human-readable summary table.
std::string summary_table(const EvalReport& report);
/// "bin_center<TAB>mean_accuracy" per line; empty bins print "nan".
std::string recall_bins_tsv(const EvalReport& report);

}  // namespace icsu
