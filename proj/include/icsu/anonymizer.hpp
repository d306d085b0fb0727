#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icsu/dataset.hpp"

namespace icsu {

struct PlaceholderBinding {
    std::string placeholder;  // "[WORK_OF_ART_0]"
    std::string surface;
    std::string entity_type;

    bool operator==(const PlaceholderBinding&) const = default;
};

struct AnonymizedQuestion {
    std::string text;
    std::vector<PlaceholderBinding> mapping;  // order of appearance in `text`

    bool operator==(const AnonymizedQuestion&) const = default;
};

/// "[" + type + "_" + index + "]".
std::string make_placeholder(std::string_view entity_type, std::size_t index);

/// Replaces every span with a typed placeholder. Indices count per entity
/// type from 0 in left-to-right span order; repeated surfaces get distinct
/// indices. Text outside the spans is copied byte for byte.
/// Throws DataError on overlapping or out-of-bounds spans.
AnonymizedQuestion anonymize(std::string_view question, std::span<const EntitySpan> spans);

/// Substitutes each placeholder back with its surface.
std::string deanonymize(const AnonymizedQuestion& anonymized);

/// surface -> entity type.
using Lexicon = std::map<std::string, std::string, std::less<>>;

/// Tab-separated "surface<TAB>TYPE" lines; blank and '#' lines skipped.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view contents);

/// Greedy left-to-right, longest-match-first lexicon matching. A match must
/// start and end on word boundaries; returned spans never overlap.
std::vector<EntitySpan> gazetteer_annotate(std::string_view question, const Lexicon& lexicon);

}  // namespace icsu
