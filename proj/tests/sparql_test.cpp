#include <gtest/gtest.h>

#include "icsu/sparql.hpp"
#include "support.hpp"

using namespace icsu::sparql;

namespace {

SparqlError error_of(std::string_view text) {
    try {
        parse_sparql(text);
    } catch (const SparqlError& e) {
        return e;
    }
    ADD_FAILURE() << "parsed: " << text;
    return SparqlError(SparqlError::Kind::syntax, 0, "none");
}

}  // namespace

TEST(Sparql, TokenizerKinds) {
    auto toks = tokenize("SELECT ?x WHERE { <a_b> xsd:date \"q\\\"t\" 12.5 } @en");
    std::vector<TokenKind> kinds;
    for (const auto& t : toks) kinds.push_back(t.kind);
    EXPECT_EQ(kinds, (std::vector<TokenKind>{TokenKind::word, TokenKind::variable, TokenKind::word, TokenKind::punct,
                                             TokenKind::iri, TokenKind::prefixed_name, TokenKind::string,
                                             TokenKind::number, TokenKind::punct, TokenKind::lang_tag,
                                             TokenKind::end}));
    EXPECT_EQ(toks[4].text, "a_b");
    EXPECT_EQ(toks[6].text, "q\"t");
    EXPECT_EQ(toks[1].offset, 7u);
}

TEST(Sparql, LexicalErrors) {
    EXPECT_EQ(error_of("SELECT ?x WHERE { ?x <p> \"open }").kind(), SparqlError::Kind::lexical);
    auto e = error_of("SELECT ?x WHERE { ?x <p> ?y } ~");
    EXPECT_EQ(e.kind(), SparqlError::Kind::lexical);
    EXPECT_EQ(e.position(), 30u);
}

TEST(Sparql, SelectWithShorthand) {
    auto q = parse_sparql("SELECT DISTINCT ?x ?y WHERE { ?e <pred:name> \"Heat\" ; <directed_by> ?x , ?y . }");
    EXPECT_EQ(q.form, QueryForm::select);
    EXPECT_TRUE(q.distinct);
    EXPECT_EQ(q.projection, (std::vector<std::string>{"?x", "?y"}));
    ASSERT_EQ(q.patterns.size(), 3u);
    EXPECT_EQ(q.patterns[0].object, Term::string_literal("Heat"));
    EXPECT_EQ(q.patterns[1].predicate, Term::iri("directed_by"));
    EXPECT_EQ(q.patterns[2].object, Term::variable("?y"));
    EXPECT_EQ(q.patterns[2].subject, Term::variable("?e"));
}

TEST(Sparql, CountAskAndFilters) {
    auto c = parse_sparql("SELECT (COUNT(DISTINCT ?y) AS ?n) WHERE { ?e <award> ?y . }");
    EXPECT_EQ(c.form, QueryForm::count_select);
    EXPECT_TRUE(c.count_distinct);
    EXPECT_EQ(c.count_alias, "?n");
    EXPECT_EQ(c.projection, std::vector<std::string>{"?y"});

    auto a = parse_sparql(
        "PREFIX xsd: <http://www.w3.org/2001/XMLSchema#> ASK { ?f <runtime> ?r . ?f <released> ?d . "
        "FILTER(?r >= 90) FILTER(?d < \"2000-01-01\"^^xsd:date) FILTER(?f != <e:x>) }");
    EXPECT_EQ(a.form, QueryForm::ask);
    ASSERT_EQ(a.prefixes.size(), 1u);
    ASSERT_EQ(a.filters.size(), 3u);
    EXPECT_EQ(a.filters[0].op, CompareOp::ge);
    EXPECT_EQ(a.filters[0].rhs.kind, TermKind::numeric_literal);
    EXPECT_EQ(a.filters[1].rhs.kind, TermKind::date_literal);
    EXPECT_EQ(a.filters[1].rhs.lexical, "2000-01-01");
    EXPECT_EQ(a.filters[2].rhs, Term::iri("e:x"));
}

TEST(Sparql, UnsupportedConstructsAreNamed) {
    const std::pair<const char*, const char*> cases[] = {
        {"SELECT ?x WHERE { ?x <p> ?y . OPTIONAL { ?y <q> ?z } }", "OPTIONAL"},
        {"SELECT ?x WHERE { { ?x <p> ?y } UNION { ?x <q> ?y } }", "nested group pattern"},
        {"SELECT ?x WHERE { ?x <p>/<q> ?y }", "property path"},
        {"SELECT ?x WHERE { ?x ^<p> ?y }", "property path"},
        {"SELECT ?x WHERE { ?x <p> ?y } ORDER BY ?x", "ORDER BY"},
        {"SELECT ?x WHERE { ?x <p> ?y } LIMIT 5", "LIMIT"},
        {"SELECT * WHERE { ?x <p> ?y }", "SELECT *"},
        {"SELECT ?x WHERE { ?x a <Film> }", "'a' (rdf:type shorthand)"},
        {"SELECT ?x WHERE { ?x <p> \"chat\"@fr }", "language tag"},
        {"SELECT ?x WHERE { ?x <p> ?y FILTER(?y > 1 && ?y < 3) }", "'&&' in FILTER"},
        {"SELECT (COUNT(*) AS ?n) WHERE { ?x <p> ?y }", "COUNT(*)"},
        {"CONSTRUCT { ?x <p> ?y } WHERE { ?x <p> ?y }", "CONSTRUCT"},
    };
    for (const auto& [text, construct] : cases) {
        auto e = error_of(text);
        EXPECT_EQ(e.kind(), SparqlError::Kind::unsupported) << text;
        EXPECT_EQ(e.construct(), construct) << text;
    }
}

TEST(Sparql, SyntaxErrors) {
    for (const char* text : {"SELECT WHERE { ?x <p> ?y }", "SELECT ?x WHERE { ?x <p> }", "SELECT ?x WHERE { ?x <p> ?y",
                             "SELECT ?x { ?x <p> ?y } extra", "", "SELECT ?z WHERE { ?x <p> ?y }"}) {
        EXPECT_EQ(error_of(text).kind(), SparqlError::Kind::syntax) << text;
    }
}

TEST(Sparql, CanonicalFormRoundTrips) {
    auto corpus = icsu::load_corpus(icsu::fixtures::synthetic_dir() / "benchmark.jsonl", "s");
    for (const auto& r : corpus) {
        auto q = parse_sparql(*r.gold_sparql);
        auto again = parse_sparql(to_string(q));
        EXPECT_TRUE(again.structurally_equal(q)) << r.id;
        EXPECT_EQ(to_string(again), to_string(q)) << r.id;
    }
}

TEST(Sparql, RandomQueriesRoundTrip) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        auto c = icsu::fixtures::random_case(rng);
        auto q = parse_sparql(c.query.text);
        EXPECT_TRUE(parse_sparql(to_string(q)).structurally_equal(q)) << c.query.text;
    }
}

TEST(Sparql, ExtractRelationsSkipsVariables) {
    auto q = parse_sparql("SELECT ?x WHERE { ?e <pred:name> \"A\" . ?e ?p ?x . ?x <born_in> ?c . }");
    EXPECT_EQ(extract_relations(q), (std::set<std::string>{"born_in", "pred:name"}));
}

TEST(Sparql, NormalizeForEmbeddingOnlyCollapsesWhitespace) {
    EXPECT_EQ(normalize_for_embedding("  SELECT ?x\n\tWHERE {  ?x <P> ?y }  "), "SELECT ?x WHERE { ?x <P> ?y }");
}
