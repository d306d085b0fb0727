#include "icsu/prompting.hpp"

#include "icsu/error.hpp"
#include "icsu/util.hpp"

namespace icsu {

const std::string kDefaultInstruction =
    "You are given natural questions that could be answered over some complex reasoning steps on one knowledge "
    "base. Your task is to convert the given natural questions into SPARQL queries which can be excuted to find "
    "out the answer.";

std::string Prompt::digest() const { return sha256_hex(rendered); }

std::string render_prompt(std::string_view instruction, const std::vector<PromptExample>& examples,
                          std::string_view question) {
    std::string out(instruction);
    out += '\n';
    std::size_t j = 1;
    for (const auto& e : examples) {
        out += "Input " + std::to_string(j) + ": " + e.question + "\n";
        out += "Output " + std::to_string(j) + ": " + e.sparql + "\n";
        ++j;
    }
    out += "Input " + std::to_string(j) + ": ";
    out += question;
    out += "\nOutput " + std::to_string(j) + ": ";
    return out;
}

Prompt build_prompt(const RetrievalResult& retrieved, const Corpus& train, const QuestionRecord& question,
                    std::string_view instruction, bool inject_topic_entity) {
    Prompt p;
    p.instruction = instruction;
    for (const auto& item : retrieved.items) {
        const QuestionRecord* rec = train.find(item.record_id);
        if (!rec) throw DataError("retrieved example " + item.record_id + " is not in the training corpus");
        if (!rec->gold_sparql) throw DataError("example " + rec->id + " has no gold SPARQL");
        p.examples.push_back({rec->id, rec->question, *rec->gold_sparql});
    }
    p.question = question.question;
    if (inject_topic_entity && question.topic_entity_id) p.question += ", Topic Entity Id: " + *question.topic_entity_id;
    p.rendered = render_prompt(p.instruction, p.examples, p.question);
    return p;
}

namespace {
// Consumes "<label> <n>: " at the start of `line`.
std::optional<std::string_view> after_label(std::string_view line, std::string_view label, std::size_t n) {
    std::string prefix = std::string(label) + " " + std::to_string(n) + ": ";
    if (line.substr(0, prefix.size()) != prefix) return std::nullopt;
    return line.substr(prefix.size());
}
}  // namespace

std::optional<Prompt> parse_prompt(std::string_view rendered) {
    std::vector<std::string_view> lines;
    std::size_t from = 0;
    while (true) {
        auto nl = rendered.find('\n', from);
        if (nl == std::string_view::npos) {
            lines.push_back(rendered.substr(from));
            break;
        }
        lines.push_back(rendered.substr(from, nl - from));
        from = nl + 1;
    }
    // instruction, 2n example lines, final input, final output
    if (lines.size() < 3 || lines.size() % 2 == 0) return std::nullopt;
    Prompt p;
    p.instruction = lines[0];
    std::size_t n = (lines.size() - 3) / 2;
    for (std::size_t j = 1; j <= n; ++j) {
        auto q = after_label(lines[2 * j - 1], "Input", j);
        auto s = after_label(lines[2 * j], "Output", j);
        if (!q || !s) return std::nullopt;
        p.examples.push_back({"", std::string(*q), std::string(*s)});
    }
    auto q = after_label(lines[lines.size() - 2], "Input", n + 1);
    auto last = after_label(lines.back(), "Output", n + 1);
    if (!q || !last || !last->empty()) return std::nullopt;
    p.question = *q;
    p.rendered = rendered;
    return p;
}

}  // namespace icsu
