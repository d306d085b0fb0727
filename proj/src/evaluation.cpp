#include "icsu/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "icsu/error.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"

namespace icsu {

using nlohmann::json;

std::string_view to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::parse_error: return "parse_error";
        case FailureKind::exec_error: return "exec_error";
        case FailureKind::wrong_answer: return "wrong_answer";
        case FailureKind::llm_error: return "llm_error";
    }
    return "?";
}

FailureKind parse_failure_kind(std::string_view name) {
    if (name == "parse_error") return FailureKind::parse_error;
    if (name == "exec_error") return FailureKind::exec_error;
    if (name == "wrong_answer") return FailureKind::wrong_answer;
    if (name == "llm_error") return FailureKind::llm_error;
    throw DataError("unknown failure kind " + std::string(name));
}

std::string normalize_answer(std::string_view answer) { return ascii_lower(trim(answer)); }

AnswerScore score_answers(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
    std::set<std::string> p, g;
    for (const auto& a : predicted) p.insert(normalize_answer(a));
    for (const auto& a : gold) g.insert(normalize_answer(a));
    std::size_t common = 0;
    for (const auto& a : p) common += g.count(a);
    AnswerScore s;
    s.em = s.correct = p == g;
    s.f1 = p.size() + g.size() == 0 ? 1.0 : 2.0 * static_cast<double>(common) / static_cast<double>(p.size() + g.size());
    return s;
}

std::optional<double> relation_recall(std::string_view gold_sparql, const std::vector<std::string>& example_sparql) {
    std::set<std::string> gold;
    try {
        gold = sparql::extract_relations(sparql::parse_sparql(gold_sparql));
    } catch (const sparql::SparqlError&) {
        return std::nullopt;
    }
    if (gold.empty()) return 1.0;
    std::set<std::string> seen;
    for (const auto& text : example_sparql) {
        try {
            auto r = sparql::extract_relations(sparql::parse_sparql(text));
            seen.insert(r.begin(), r.end());
        } catch (const sparql::SparqlError&) {
        }
    }
    std::size_t hit = 0;
    for (const auto& r : gold) hit += seen.count(r);
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

std::size_t recall_bin_index(double recall, std::size_t bin_count) {
    double x = std::clamp(recall, 0.0, 1.0) * static_cast<double>(bin_count) + 1e-9;
    return std::min(static_cast<std::size_t>(std::floor(x)), bin_count - 1);
}

std::vector<RecallBin> bin_recall_accuracy(const std::vector<QuestionVerdict>& verdicts, std::size_t bin_count) {
    if (bin_count < 2) throw ConfigError("bin count must be at least 2");
    std::vector<RecallBin> bins(bin_count);
    std::vector<std::size_t> correct(bin_count, 0);
    for (std::size_t i = 0; i < bin_count; ++i) {
        bins[i].lower = static_cast<double>(i) / static_cast<double>(bin_count);
        bins[i].upper = static_cast<double>(i + 1) / static_cast<double>(bin_count);
    }
    for (const auto& v : verdicts) {
        if (!v.relation_recall) continue;
        auto b = recall_bin_index(*v.relation_recall, bin_count);
        ++bins[b].count;
        correct[b] += v.correct ? 1 : 0;
    }
    for (std::size_t i = 0; i < bin_count; ++i) {
        if (bins[i].count) bins[i].mean_accuracy = static_cast<double>(correct[i]) / static_cast<double>(bins[i].count);
    }
    return bins;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

EvalReport aggregate(std::vector<QuestionVerdict> verdicts, json config_snapshot, bool partial, std::size_t bin_count) {
    EvalReport r;
    r.verdicts = std::move(verdicts);
    r.config_snapshot = std::move(config_snapshot);
    r.partial = partial;
    double acc = 0, f1 = 0, em = 0, recall = 0;
    std::size_t with_recall = 0;
    std::vector<double> rs, cs;
    std::vector<QuestionVerdict> scorable;
    for (const auto& v : r.verdicts) {
        if (!v.scorable) continue;
        ++r.scored;
        acc += v.correct;
        f1 += v.f1;
        em += v.em;
        if (v.relation_recall) {
            ++with_recall;
            recall += *v.relation_recall;
            rs.push_back(*v.relation_recall);
            cs.push_back(v.correct ? 1.0 : 0.0);
        }
        scorable.push_back(v);
    }
    if (r.scored) {
        auto n = static_cast<double>(r.scored);
        r.accuracy = acc / n;
        r.macro_f1 = f1 / n;
        r.em_rate = em / n;
    }
    if (with_recall) r.mean_relation_recall = recall / static_cast<double>(with_recall);
    r.recall_correct_pearson = pearson(rs, cs);
    r.recall_bins = bin_recall_accuracy(scorable, bin_count);
    return r;
}

// ---- serialization ---------------------------------------------------------

namespace {
template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}
}  // namespace

json verdict_to_json(const QuestionVerdict& v) {
    return json{{"id", v.id},
                {"predicted_sparql", opt(v.predicted_sparql)},
                {"predicted_answers", v.predicted_answers ? json(*v.predicted_answers) : json(nullptr)},
                {"gold_answers", v.gold_answers},
                {"correct", v.correct},
                {"f1", v.f1},
                {"em", v.em},
                {"relation_recall", opt(v.relation_recall)},
                {"failure_kind", v.failure_kind ? json(std::string(to_string(*v.failure_kind))) : json(nullptr)},
                {"failure_detail", v.failure_detail},
                {"scorable", v.scorable},
                {"example_ids", v.example_ids}};
}

QuestionVerdict verdict_from_json(const json& j) {
    QuestionVerdict v;
    v.id = j.at("id").get<std::string>();
    if (!j.at("predicted_sparql").is_null()) v.predicted_sparql = j["predicted_sparql"].get<std::string>();
    if (!j.at("predicted_answers").is_null()) v.predicted_answers = j["predicted_answers"].get<std::set<std::string>>();
    v.gold_answers = j.at("gold_answers").get<std::set<std::string>>();
    v.correct = j.at("correct").get<bool>();
    v.f1 = j.at("f1").get<double>();
    v.em = j.at("em").get<bool>();
    if (!j.at("relation_recall").is_null()) v.relation_recall = j["relation_recall"].get<double>();
    if (!j.at("failure_kind").is_null()) v.failure_kind = parse_failure_kind(j["failure_kind"].get<std::string>());
    v.failure_detail = j.value("failure_detail", "");
    v.scorable = j.value("scorable", true);
    v.example_ids = j.value("example_ids", std::vector<std::string>{});
    return v;
}

json report_to_json(const EvalReport& r) {
    json bins = json::array();
    for (const auto& b : r.recall_bins) {
        bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}, {"mean_accuracy", opt(b.mean_accuracy)}});
    }
    json verdicts = json::array();
    for (const auto& v : r.verdicts) verdicts.push_back(verdict_to_json(v));
    return json{{"accuracy", r.accuracy},
                {"macro_f1", r.macro_f1},
                {"em_rate", r.em_rate},
                {"questions", r.verdicts.size()},
                {"scored", r.scored},
                {"unanswered", r.unanswered},
                {"partial", r.partial},
                {"mean_relation_recall", opt(r.mean_relation_recall)},
                {"recall_correct_pearson", opt(r.recall_correct_pearson)},
                {"relation_recall_definition",
                 "|gold predicates found in the union of example gold queries| / |gold predicates|"},
                {"recall_bins", bins},
                {"config", r.config_snapshot},
                {"verdicts", verdicts}};
}

EvalReport report_from_json(const json& j) {
    std::vector<QuestionVerdict> verdicts;
    for (const auto& v : j.at("verdicts")) verdicts.push_back(verdict_from_json(v));
    auto bins = j.at("recall_bins").size();
    EvalReport r = aggregate(std::move(verdicts), j.at("config"), j.at("partial").get<bool>(), bins < 2 ? 5 : bins);
    r.unanswered = j.value("unanswered", std::size_t{0});
    return r;
}

std::string verdicts_jsonl(const EvalReport& report) {
    std::string out;
    for (const auto& v : report.verdicts) out += verdict_to_json(v).dump() + "\n";
    return out;
}

namespace {
std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}
}  // namespace

std::string summary_table(const EvalReport& r) {
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& v : r.verdicts) {
        if (v.failure_kind) ++counts[static_cast<int>(*v.failure_kind)];
    }
    std::string out;
    out += "questions         " + std::to_string(r.verdicts.size()) + "\n";
    out += "scored            " + std::to_string(r.scored) + "\n";
    if (r.partial) out += "PARTIAL RUN       " + std::to_string(r.unanswered) + " questions not attempted\n";
    out += "accuracy          " + fmt("%.3f", r.accuracy) + "\n";
    out += "macro F1          " + fmt("%.3f", r.macro_f1) + "\n";
    out += "EM                " + fmt("%.3f", r.em_rate) + "\n";
    out += "relation recall   " + (r.mean_relation_recall ? fmt("%.3f", *r.mean_relation_recall) : "undefined") + "\n";
    out += "recall~correct r  " + (r.recall_correct_pearson ? fmt("%.3f", *r.recall_correct_pearson) : "undefined") +
           "\n";
    for (int k = 0; k < 4; ++k) {
        out += std::string(to_string(static_cast<FailureKind>(k))) + std::string(18 - to_string(static_cast<FailureKind>(k)).size(), ' ') +
               std::to_string(counts[k]) + "\n";
    }
    out += "\nrecall bin        count  accuracy\n";
    for (const auto& b : r.recall_bins) {
        out += "[" + fmt("%.2f", b.lower) + ", " + fmt("%.2f", b.upper) + (b.upper >= 1.0 ? "]" : ")") + "      ";
        std::string c = std::to_string(b.count);
        out += std::string(c.size() < 5 ? 5 - c.size() : 0, ' ') + c + "  ";
        out += b.mean_accuracy ? fmt("%.3f", *b.mean_accuracy) : "-";
        out += "\n";
    }
    return out;
}

std::string recall_bins_tsv(const EvalReport& r) {
    std::string out = "# recall_bin_center\tmean_accuracy\n";
    for (const auto& b : r.recall_bins) {
        out += fmt("%.3f", (b.lower + b.upper) / 2) + "\t" + (b.mean_accuracy ? fmt("%.6f", *b.mean_accuracy) : "nan") +
               "\n";
    }
    return out;
}

}  // namespace icsu
