#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "icsu/anonymizer.hpp"
#include "icsu/dataset.hpp"
#include "icsu/kb_store.hpp"

namespace icsu {

/// Small fictional film/book/music/geography world: triples, template
/// questions with gold SPARQL, entity spans and answers, and a lexicon of
/// every typed entity name. Answers are computed from the fact tables, not by
/// running the queries.
struct SyntheticBenchmark {
    std::vector<Triple> triples;
    Corpus corpus;
    Lexicon lexicon;
};

inline constexpr std::uint64_t kSyntheticSeed = 20230709;

SyntheticBenchmark make_synthetic_benchmark(std::size_t question_count = 300, std::uint64_t seed = kSyntheticSeed);

std::string serialize_kb(const std::vector<Triple>& triples);
std::string serialize_lexicon(const Lexicon& lexicon);

/// Writes kb.tsv, benchmark.jsonl and lexicon.tsv into `dir`.
void write_synthetic(const SyntheticBenchmark& bench, const std::filesystem::path& dir);

}  // namespace icsu
