#include "icsu/dataset.hpp"

#include <algorithm>
#include <array>

#include "icsu/error.hpp"
#include "icsu/util.hpp"

namespace icsu {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 18> kEntityTypes = {
    "PERSON", "NORP",     "FAC",  "ORG",     "GPE",   "LOC",     "PRODUCT",  "EVENT",    "WORK_OF_ART",
    "LAW",    "LANGUAGE", "DATE", "TIME",    "PERCENT", "MONEY", "QUANTITY", "ORDINAL", "CARDINAL",
};

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string span_text(const EntitySpan& s) {
    return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(line_prefix(line) + "missing field " + key);
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_string()) throw DataError(line_prefix(line) + "field " + key + " must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw DataError(line_prefix(line) + "field " + key + " must be a string");
    return it->get<std::string>();
}

QuestionRecord parse_record(const json& obj, std::size_t line) {
    if (!obj.is_object()) throw DataError(line_prefix(line) + "record must be an object");
    QuestionRecord rec;
    rec.id = require_string(obj, "id", line);
    rec.question = require_string(obj, "question", line);
    if (rec.id.empty()) throw DataError(line_prefix(line) + "empty id");
    if (trim(rec.question).empty()) throw DataError(line_prefix(line) + "empty question in record " + rec.id);
    rec.gold_sparql = optional_string(obj, "sparql", line);
    rec.topic_entity_id = optional_string(obj, "topic_entity_id", line);

    if (auto it = obj.find("answers"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw DataError(line_prefix(line) + "field answers must be a list");
        for (const auto& a : *it) {
            if (!a.is_string()) throw DataError(line_prefix(line) + "answers must be strings");
            rec.answers.push_back(a.get<std::string>());
        }
    }

    if (auto it = obj.find("entities"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw DataError(line_prefix(line) + "field entities must be a list");
        std::vector<EntitySpan> spans;
        for (const auto& e : *it) {
            if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e.contains("type") ||
                !e["start"].is_number_unsigned() || !e["end"].is_number_unsigned() || !e["type"].is_string()) {
                throw DataError(line_prefix(line) + "malformed entity in record " + rec.id);
            }
            auto start = e["start"].get<std::size_t>();
            auto end = e["end"].get<std::size_t>();
            if (!(start < end && end <= rec.question.size())) {
                throw DataError(line_prefix(line) + "record " + rec.id + ": entity span (" + std::to_string(start) + "," +
                                std::to_string(end) + ") out of bounds for question of length " +
                                std::to_string(rec.question.size()));
            }
            spans.push_back(make_span(rec.question, start, end, e["type"].get<std::string>()));
        }
        rec.entity_annotations = std::move(spans);
    }
    return rec;
}

void check_record_spans(const QuestionRecord& rec, std::vector<std::string>& out) {
    if (!rec.entity_annotations) return;
    const auto& spans = *rec.entity_annotations;
    for (const auto& s : spans) {
        if (!(s.start < s.end && s.end <= rec.question.size())) {
            out.push_back("record " + rec.id + ": span " + span_text(s) + " out of bounds (question length " +
                          std::to_string(rec.question.size()) + ")");
            continue;
        }
        if (rec.question.compare(s.start, s.end - s.start, s.surface) != 0 ||
            s.surface.size() != s.end - s.start) {
            out.push_back("record " + rec.id + ": span " + span_text(s) + " surface \"" + s.surface +
                          "\" does not match question text");
        }
        if (!is_entity_type(s.entity_type)) {
            out.push_back("record " + rec.id + ": span " + span_text(s) + " has unknown entity type " +
                          s.entity_type);
        }
    }
    for (std::size_t i = 0; i < spans.size(); ++i) {
        for (std::size_t j = i + 1; j < spans.size(); ++j) {
            if (spans[i].start < spans[j].end && spans[j].start < spans[i].end) {
                out.push_back("record " + rec.id + ": overlapping spans " + span_text(spans[i]) + " and " +
                              span_text(spans[j]));
            }
        }
    }
}

}  // namespace

std::span<const std::string_view> entity_type_vocabulary() { return kEntityTypes; }

bool is_entity_type(std::string_view label) {
    return std::find(kEntityTypes.begin(), kEntityTypes.end(), label) != kEntityTypes.end();
}

EntitySpan make_span(std::string_view question, std::size_t start, std::size_t end, std::string entity_type) {
    if (!(start < end && end <= question.size())) {
        throw DataError("entity span (" + std::to_string(start) + "," + std::to_string(end) +
                        ") out of bounds for question of length " + std::to_string(question.size()));
    }
    return EntitySpan{start, end, std::move(entity_type), std::string(question.substr(start, end - start))};
}

Corpus::Corpus(std::vector<QuestionRecord> records, std::string split_name)
    : records_(std::move(records)), split_name_(std::move(split_name)) {
    by_id_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        auto [it, inserted] = by_id_.emplace(records_[i].id, i);
        if (!inserted) {
            throw DataError("duplicate id \"" + records_[i].id + "\" at records " + std::to_string(it->second + 1) +
                            " and " + std::to_string(i + 1));
        }
    }
}

const QuestionRecord* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::optional<std::size_t> Corpus::position(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

json record_to_json(const QuestionRecord& rec) {
    json obj = json::object();
    obj["id"] = rec.id;
    obj["question"] = rec.question;
    if (rec.gold_sparql) obj["sparql"] = *rec.gold_sparql;
    obj["answers"] = rec.answers;
    if (rec.topic_entity_id) obj["topic_entity_id"] = *rec.topic_entity_id;
    if (rec.entity_annotations) {
        json ents = json::array();
        for (const auto& s : *rec.entity_annotations) {
            ents.push_back({{"start", s.start}, {"end", s.end}, {"type", s.entity_type}});
        }
        obj["entities"] = std::move(ents);
    }
    return obj;
}

Corpus parse_corpus(std::string_view contents, std::string split_name) {
    std::vector<QuestionRecord> records;
    std::unordered_map<std::string, std::size_t> first_line;
    auto lines = split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        json obj;
        try {
            obj = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw DataError(line_prefix(line_no) + "malformed record: " + e.what());
        }
        QuestionRecord rec = parse_record(obj, line_no);
        auto [it, inserted] = first_line.emplace(rec.id, line_no);
        if (!inserted) {
            throw DataError(line_prefix(line_no) + "duplicate id \"" + rec.id + "\" (first seen on line " +
                            std::to_string(it->second) + ")");
        }
        std::vector<std::string> violations;
        check_record_spans(rec, violations);
        if (!violations.empty()) throw DataError(line_prefix(line_no) + violations.front());
        records.push_back(std::move(rec));
    }
    return Corpus(std::move(records), std::move(split_name));
}

Corpus load_corpus(const std::filesystem::path& path, std::string split_name) {
    return parse_corpus(read_file(path), std::move(split_name));
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& rec : corpus) {
        out += record_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    write_file(path, serialize_corpus(corpus));
}

std::vector<std::string> validate_annotations(const Corpus& corpus) {
    std::vector<std::string> out;
    for (const auto& rec : corpus) check_record_spans(rec, out);
    return out;
}

}  // namespace icsu
