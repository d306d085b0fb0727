#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "icsu/retrieval.hpp"
#include "icsu/sparql.hpp"
#include "icsu/util.hpp"
#include "support.hpp"

using namespace icsu;

namespace {

struct KnnFixture {
    ExampleIndex index;
    std::vector<EmbeddingVector> queries;
};

// Integer-valued components make many exact distance ties; duplicated keys
// make identical scores at different positions.
KnnFixture knn_fixture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> small(-1, 1);
    std::normal_distribution<double> normal(0, 1);
    const std::size_t dim = 64;
    auto random_vec = [&](bool integral) {
        std::vector<double> v(dim);
        for (auto& x : v) x = integral ? small(rng) : normal(rng);
        return EmbeddingVector(std::move(v));
    };
    std::vector<IndexKey> keys;
    for (std::size_t i = 0; i < 1000; ++i) {
        EmbeddingVector v;
        if (i >= 100 && i % 4 == 0) {
            v = keys[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)].vector;
        } else {
            v = random_vec(i % 3 != 0);
        }
        keys.push_back({"k" + std::to_string(i), i, std::move(v)});
    }
    KnnFixture f;
    for (std::size_t q = 0; q < 50; ++q) {
        f.queries.push_back(q % 5 == 0 ? keys[q * 7].vector : random_vec(q % 2 == 0));
    }
    // Shuffle storage order so position, not insertion order, breaks ties.
    std::shuffle(keys.begin(), keys.end(), rng);
    f.index = ExampleIndex(View::raw_question, dim, std::move(keys));
    return f;
}

std::vector<std::string> brute_force(const ExampleIndex& index, const EmbeddingVector& q, std::size_t k,
                                     const std::set<std::string>& exclude = {}) {
    std::vector<std::tuple<double, std::size_t, std::string>> all;
    for (const auto& key : index.keys()) {
        if (exclude.count(key.record_id)) continue;
        double d = 0;
        for (std::size_t i = 0; i < q.dim(); ++i) d += (q[i] - key.vector[i]) * (q[i] - key.vector[i]);
        all.emplace_back(-std::sqrt(d), key.position, key.record_id);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ids.push_back(std::get<2>(all[i]));
    return ids;
}

RetrievalResult list_of(std::vector<std::string> ids, Strategy tag) {
    RetrievalResult r;
    for (std::size_t i = 0; i < ids.size(); ++i) r.items.push_back({ids[i], -static_cast<double>(i), tag, i});
    r.k_requested = ids.size();
    return r;
}

}  // namespace

TEST(Retrieval, NamesParse) {
    EXPECT_EQ(parse_strategy("hybrid"), Strategy::hybrid);
    EXPECT_EQ(parse_view("anonymized"), View::anonymized_question);
    try {
        parse_strategy("semantic");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "unknown strategy \"semantic\" (expected one of: raw, anonymized, sparql, hybrid)");
    }
    EXPECT_EQ(view_of(Strategy::sparql), View::gold_sparql);
    EXPECT_FALSE(view_of(Strategy::hybrid));
}

TEST(Retrieval, TopKMatchesBruteForceWithTies) {
    auto f = knn_fixture(99);
    int tie_queries = 0;
    for (const auto& q : f.queries) {
        auto got = top_k(f.index, q, 10, {});
        auto want = brute_force(f.index, q, 10);
        EXPECT_EQ(got.ids(), want);
        for (std::size_t i = 1; i < got.items.size(); ++i) {
            EXPECT_GE(got.items[i - 1].score, got.items[i].score);
            if (got.items[i - 1].score == got.items[i].score) {
                EXPECT_LT(got.items[i - 1].position, got.items[i].position);
                ++tie_queries;
            }
        }
    }
    EXPECT_GT(tie_queries, 0);
}

TEST(Retrieval, TopKHonoursExclusionsAndSmallK) {
    auto f = knn_fixture(5);
    std::set<std::string> exclude{"k0", "k1", "k7", "k14"};
    for (std::size_t k : {0u, 1u, 3u}) {
        auto got = top_k(f.index, f.queries[0], k, exclude);
        EXPECT_EQ(got.ids(), brute_force(f.index, f.queries[0], k, exclude));
        EXPECT_EQ(got.k_requested, k);
    }
    EXPECT_EQ(top_k(f.index, f.queries[1], 5000, {}).items.size(), 1000u);
    EXPECT_THROW(top_k(f.index, EmbeddingVector::zeros(3), 1, {}), Error);
}

TEST(Retrieval, IndexRejectsMixedDimensionsAndDuplicates) {
    std::vector<IndexKey> keys = {{"a", 0, EmbeddingVector::zeros(2)}, {"b", 1, EmbeddingVector::zeros(3)}};
    EXPECT_THROW(ExampleIndex(View::raw_question, 2, keys), DataError);
    keys = {{"a", 0, EmbeddingVector::zeros(2)}, {"a", 1, EmbeddingVector::zeros(2)}};
    EXPECT_THROW(ExampleIndex(View::raw_question, 2, keys), DataError);
}

TEST(Retrieval, MergeHybridRoundRobin) {
    auto a = list_of({"a1", "s1", "a2", "a3"}, Strategy::anonymized);
    auto s = list_of({"s1", "s2", "a2"}, Strategy::sparql);
    auto r = list_of({"r1", "a1", "r2"}, Strategy::raw);
    EXPECT_EQ(merge_hybrid(a, s, r, 6).ids(), (std::vector<std::string>{"a1", "s1", "r1", "a2", "s2", "r2"}));
    EXPECT_EQ(merge_hybrid(a, s, r, 2).ids(), (std::vector<std::string>{"a1", "s1"}));
    EXPECT_EQ(merge_hybrid(a, s, r, 20).ids(),
              (std::vector<std::string>{"a1", "s1", "r1", "a2", "s2", "r2", "a3"}));
    EXPECT_TRUE(merge_hybrid(a, s, r, 0).items.empty());
    auto merged = merge_hybrid(a, s, r, 3);
    EXPECT_EQ(merged.items[1].strategy, Strategy::sparql);
    EXPECT_EQ(merged.items[2].strategy, Strategy::raw);
}

TEST(Retrieval, ViewTextAndAnonymizeRecord) {
    QuestionRecord r{"q", "Who directed Heat?", "SELECT ?x  WHERE {\n ?e <d> ?x }", {}, std::nullopt,
                     std::vector<EntitySpan>{make_span("Who directed Heat?", 13, 17, "WORK_OF_ART")}};
    EXPECT_EQ(view_text(r, View::raw_question), "Who directed Heat?");
    EXPECT_EQ(view_text(r, View::anonymized_question), "Who directed [WORK_OF_ART_0]?");
    EXPECT_EQ(view_text(r, View::gold_sparql), "SELECT ?x WHERE { ?e <d> ?x }");
    r.entity_annotations.reset();
    EXPECT_FALSE(view_text(r, View::anonymized_question));
    Lexicon lex{{"Heat", "WORK_OF_ART"}};
    EXPECT_EQ(view_text(r, View::anonymized_question, &lex), "Who directed [WORK_OF_ART_0]?");
    EXPECT_THROW(anonymize_record(r, nullptr), ConfigError);
    r.gold_sparql.reset();
    EXPECT_FALSE(view_text(r, View::gold_sparql));
}

TEST(Retrieval, BuildReportsSkippedRecords) {
    std::vector<QuestionRecord> recs = {
        {"a", "one", "SELECT ?x WHERE { ?x <p> ?y }", {}, std::nullopt, std::nullopt},
        {"b", "two", std::nullopt, {}, std::nullopt, std::nullopt},
        {"c", "three", "SELECT ?x WHERE { ?x <q> ?y }", {}, std::nullopt, std::nullopt},
    };
    Corpus c(recs, "t");
    HashFeatureEmbedder e(32);
    BuildReport report;
    auto idx = build_index(c, View::gold_sparql, e, nullptr, &report, 1);
    EXPECT_EQ(idx.size(), 2u);
    EXPECT_EQ(report.indexed, 2u);
    EXPECT_EQ(report.skipped_ids, std::vector<std::string>{"b"});
    EXPECT_EQ(idx.keys()[1].position, 2u);
}

TEST(Retrieval, IndexPersistenceRoundTrips) {
    auto corpus = load_corpus(fixtures::synthetic_dir() / "benchmark.jsonl", "s");
    HashFeatureEmbedder e(64);
    auto idx = build_index(corpus, View::anonymized_question, e);
    fixtures::TempDir dir("index");
    save_index(idx, dir.path() / "anon.idx");
    auto loaded = load_index(dir.path() / "anon.idx", &corpus);
    EXPECT_EQ(loaded, idx);
    EXPECT_EQ(serialize_index(loaded), serialize_index(idx));

    auto text = serialize_index(idx);
    auto bad_count = text;
    bad_count.replace(bad_count.find("\t300"), 4, "\t301");
    EXPECT_THROW(parse_index(bad_count), DataError);

    std::vector<QuestionRecord> other(corpus.begin(), corpus.end());
    std::swap(other[0], other[1]);
    Corpus reordered(other, "s");
    EXPECT_THROW(parse_index(text, &reordered), DataError);
    EXPECT_THROW(parse_index(""), DataError);
}

TEST(Retrieval, LeakageExclusionsCoverIdenticalText) {
    std::vector<QuestionRecord> recs = {
        {"a", "Who is X?", std::nullopt, {}, std::nullopt, std::nullopt},
        {"b", "Who is Y?", std::nullopt, {}, std::nullopt, std::nullopt},
        {"c", "Who is X?", std::nullopt, {}, std::nullopt, std::nullopt},
    };
    Corpus train(recs, "t");
    EXPECT_EQ(leakage_exclusions(recs[0], train), (std::set<std::string>{"a", "c"}));
    QuestionRecord outside{"z", "Who is Y?", std::nullopt, {}, std::nullopt, std::nullopt};
    EXPECT_EQ(leakage_exclusions(outside, train), (std::set<std::string>{"b", "z"}));
}

TEST(Retrieval, RetrieveDispatchesByStrategy) {
    auto corpus = load_corpus(fixtures::synthetic_dir() / "benchmark.jsonl", "s");
    HashFeatureEmbedder e(128);
    auto raw = build_index(corpus, View::raw_question, e);
    auto anon = build_index(corpus, View::anonymized_question, e);
    auto sq = build_index(corpus, View::gold_sparql, e);
    IndexSet set{&raw, &anon, &sq};
    const auto& q = corpus[3];
    StrategyConfig cfg{Strategy::raw, 4, {q.id}};
    auto r = retrieve(cfg, q, set, e, std::nullopt);
    EXPECT_EQ(r.ids(), top_k(raw, e.embed(q.question), 4, {q.id}).ids());

    cfg.strategy = Strategy::sparql;
    try {
        retrieve(cfg, q, set, e, std::nullopt);
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_NE(std::string(err.what()).find("run the anonymized pass first"), std::string::npos);
    }
    auto s = retrieve(cfg, q, set, e, *q.gold_sparql);
    EXPECT_EQ(s.items.front().strategy, Strategy::sparql);

    cfg.strategy = Strategy::hybrid;
    auto h = retrieve(cfg, q, set, e, *q.gold_sparql);
    EXPECT_EQ(h.items.size(), 4u);
    EXPECT_EQ(h.items[0].strategy, Strategy::anonymized);

    IndexSet missing{&raw, nullptr, nullptr};
    cfg.strategy = Strategy::anonymized;
    EXPECT_THROW(retrieve(cfg, q, missing, e, std::nullopt), ConfigError);
}

TEST(Retrieval, AnonymizedBeatsRawOnSharedEntitySurfaces) {
    auto corpus = fixtures::adversarial_corpus();
    HashFeatureEmbedder e(512);
    auto raw = build_index(corpus, View::raw_question, e);
    auto anon = build_index(corpus, View::anonymized_question, e);
    auto relations_of = [&](const std::string& id) {
        return sparql::extract_relations(sparql::parse_sparql(*corpus.find(id)->gold_sparql));
    };
    auto recall = [&](const QuestionRecord& q, const std::vector<std::string>& ids) {
        auto gold = relations_of(q.id);
        std::set<std::string> seen;
        for (const auto& id : ids) {
            auto rel = relations_of(id);
            seen.insert(rel.begin(), rel.end());
        }
        std::size_t hit = 0;
        for (const auto& g : gold) hit += seen.count(g);
        return static_cast<double>(hit) / static_cast<double>(gold.size());
    };
    double raw_sum = 0, anon_sum = 0;
    for (const auto& q : corpus) {
        auto ex = leakage_exclusions(q, corpus);
        auto raw_ids = brute_force(raw, e.embed(q.question), 4, ex);
        auto anon_ids = brute_force(anon, e.embed(*view_text(q, View::anonymized_question)), 4, ex);
        EXPECT_EQ(top_k(raw, e.embed(q.question), 4, ex).ids(), raw_ids);
        raw_sum += recall(q, raw_ids);
        anon_sum += recall(q, anon_ids);
    }
    double n = static_cast<double>(corpus.size());
    EXPECT_GE(anon_sum / n - raw_sum / n, 0.05) << "raw " << raw_sum / n << " anonymized " << anon_sum / n;
}
