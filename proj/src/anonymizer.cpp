#include "icsu/anonymizer.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "icsu/error.hpp"
#include "icsu/util.hpp"

namespace icsu {

std::string make_placeholder(std::string_view entity_type, std::size_t index) {
    std::string out = "[";
    out += entity_type;
    out += '_';
    out += std::to_string(index);
    out += ']';
    return out;
}

AnonymizedQuestion anonymize(std::string_view question, std::span<const EntitySpan> spans) {
    std::vector<const EntitySpan*> ordered;
    ordered.reserve(spans.size());
    for (const auto& s : spans) {
        if (!(s.start < s.end && s.end <= question.size())) {
            throw DataError("entity span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                            ") out of bounds");
        }
        ordered.push_back(&s);
    }
    std::sort(ordered.begin(), ordered.end(), [](const EntitySpan* a, const EntitySpan* b) {
        return a->start < b->start;
    });

    AnonymizedQuestion out;
    std::unordered_map<std::string, std::size_t> next_index;
    std::size_t cursor = 0;
    for (const EntitySpan* s : ordered) {
        if (s->start < cursor) {
            throw DataError("overlapping entity spans at offset " + std::to_string(s->start));
        }
        out.text.append(question.substr(cursor, s->start - cursor));
        std::size_t index = next_index[s->entity_type]++;
        auto placeholder = make_placeholder(s->entity_type, index);
        out.text += placeholder;
        out.mapping.push_back(
            {std::move(placeholder), std::string(question.substr(s->start, s->end - s->start)), s->entity_type});
        cursor = s->end;
    }
    out.text.append(question.substr(cursor));
    return out;
}

std::string deanonymize(const AnonymizedQuestion& anonymized) {
    std::string out;
    std::size_t cursor = 0;
    for (const auto& binding : anonymized.mapping) {
        auto pos = anonymized.text.find(binding.placeholder, cursor);
        if (pos == std::string::npos) {
            throw DataError("placeholder " + binding.placeholder + " missing from anonymized text");
        }
        out.append(anonymized.text, cursor, pos - cursor);
        out += binding.surface;
        cursor = pos + binding.placeholder.size();
    }
    out.append(anonymized.text, cursor);
    return out;
}

Lexicon parse_lexicon(std::string_view contents) {
    Lexicon lex;
    auto lines = split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (trim(line).empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw DataError("lexicon line " + std::to_string(i + 1) + ": expected surface<TAB>type");
        }
        auto surface = line.substr(0, tab);
        auto type = trim(line.substr(tab + 1));
        if (surface.empty()) throw DataError("lexicon line " + std::to_string(i + 1) + ": empty surface");
        if (!is_entity_type(type)) {
            throw DataError("lexicon line " + std::to_string(i + 1) + ": unknown entity type " + std::string(type));
        }
        lex.insert_or_assign(std::string(surface), std::string(type));
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

namespace {
bool is_word_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80 || c == '_';
}
}  // namespace

std::vector<EntitySpan> gazetteer_annotate(std::string_view question, const Lexicon& lexicon) {
    std::vector<EntitySpan> spans;
    if (lexicon.empty()) return spans;

    // Longest surfaces first so the first hit at a position is the longest.
    std::vector<const std::pair<const std::string, std::string>*> entries;
    for (const auto& e : lexicon) {
        if (!e.first.empty()) entries.push_back(&e);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](auto* a, auto* b) { return a->first.size() > b->first.size(); });

    std::size_t pos = 0;
    while (pos < question.size()) {
        bool at_boundary = pos == 0 || !is_word_byte(question[pos - 1]);
        const std::pair<const std::string, std::string>* match = nullptr;
        if (at_boundary) {
            for (auto* e : entries) {
                const auto& surface = e->first;
                if (question.substr(pos, surface.size()) != surface) continue;
                std::size_t end = pos + surface.size();
                bool closes = end == question.size() || !is_word_byte(question[end]) ||
                              !is_word_byte(surface.back());
                bool opens = !is_word_byte(surface.front()) || at_boundary;
                if (closes && opens) {
                    match = e;
                    break;
                }
            }
        }
        if (match) {
            spans.push_back(make_span(question, pos, pos + match->first.size(), match->second));
            pos += match->first.size();
        } else {
            ++pos;
        }
    }
    return spans;
}

}  // namespace icsu
