#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icsu/error.hpp"

namespace icsu::sparql {

enum class TermKind { variable, iri_or_name, string_literal, numeric_literal, date_literal };

struct Term {
    TermKind kind = TermKind::variable;
    /// Variables keep their leading '?'. IRIs drop the angle brackets;
    /// literals drop the quotes and escapes.
    std::string lexical;
    /// Datatype exactly as written after "^^" (e.g. "xsd:date"), empty if none.
    std::string datatype;
    /// For iri_or_name: written as <...> (true) or as a prefixed name (false).
    bool bracketed = true;

    bool is_variable() const { return kind == TermKind::variable; }
    bool is_literal() const {
        return kind == TermKind::string_literal || kind == TermKind::numeric_literal ||
               kind == TermKind::date_literal;
    }

    static Term variable(std::string name);
    static Term iri(std::string name);
    static Term string_literal(std::string value);
    static Term number(std::string value);
    static Term date(std::string value);

    bool operator==(const Term&) const = default;
};

struct TriplePattern {
    Term subject;
    Term predicate;
    Term object;

    bool operator==(const TriplePattern&) const = default;
};

enum class CompareOp { eq, ne, lt, le, gt, ge };
std::string_view to_string(CompareOp op);

struct FilterExpr {
    CompareOp op = CompareOp::eq;
    Term lhs;
    Term rhs;

    bool operator==(const FilterExpr&) const = default;
};

struct PrefixDecl {
    std::string name;  // without the trailing ':'
    std::string iri;

    bool operator==(const PrefixDecl&) const = default;
};

enum class QueryForm { select, ask, count_select };

struct SparqlQuery {
    QueryForm form = QueryForm::select;
    bool distinct = false;                // SELECT DISTINCT
    std::vector<std::string> projection;  // for count_select: the counted variable
    bool count_distinct = false;          // COUNT(DISTINCT ?v)
    std::string count_alias;              // ?v in "AS ?v"
    std::vector<PrefixDecl> prefixes;
    std::vector<TriplePattern> patterns;
    std::vector<FilterExpr> filters;
    std::string raw;

    /// Equality of everything except `raw`.
    bool structurally_equal(const SparqlQuery& other) const;
};

class SparqlError : public Error {
public:
    enum class Kind { lexical, syntax, unsupported };

    SparqlError(Kind kind, std::size_t position, const std::string& message, std::string construct = {});

    Kind kind() const { return kind_; }
    /// Byte offset of the offending token in the input.
    std::size_t position() const { return position_; }
    /// For Kind::unsupported: the construct's name ("OPTIONAL", "property path", ...).
    const std::string& construct() const { return construct_; }

private:
    Kind kind_;
    std::size_t position_;
    std::string construct_;
};

enum class TokenKind { word, variable, iri, prefixed_name, string, number, lang_tag, punct, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;  // decoded content for strings and IRIs
    std::size_t offset = 0;

    bool operator==(const Token&) const = default;
};

/// Splits `text` into tokens, terminated by a TokenKind::end token.
/// Throws SparqlError(lexical) on an unrecognised character or unterminated literal.
std::vector<Token> tokenize(std::string_view text);

/// Parses the supported subset: optional PREFIX declarations, SELECT [DISTINCT]
/// with variables or one COUNT([DISTINCT] ?v) AS ?alias, or ASK; one basic
/// graph pattern of triples (with ';' and ',' shorthand) and
/// FILTER(term op term) comparisons.
/// Throws SparqlError naming the construct for OPTIONAL, UNION, property paths,
/// solution modifiers and other constructs outside the subset.
SparqlQuery parse_sparql(std::string_view text);

/// Canonical single-line form; parse(to_string(q)) is structurally equal to q.
std::string to_string(const SparqlQuery& query);
std::string to_string(const Term& term);
std::string to_string(const FilterExpr& filter);

/// Non-variable predicate names across all patterns.
std::set<std::string> extract_relations(const SparqlQuery& query);

/// Collapses whitespace runs to single spaces and trims; nothing else.
std::string normalize_for_embedding(std::string_view text);

}  // namespace icsu::sparql
