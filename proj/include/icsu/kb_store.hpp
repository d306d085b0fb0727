#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icsu/error.hpp"
#include "icsu/sparql.hpp"

namespace icsu {

enum class NodeKind : std::uint8_t { entity, string, number, date };

std::string_view to_string(NodeKind kind);

/// ISO-8601 calendar date ("1996-01-11", optional leading '-', optional
/// "THH:MM:SS" time part).
bool is_iso_date(std::string_view s);
/// Decimal number with optional sign, fraction and exponent.
bool is_number(std::string_view s);
/// Literal typing by shape: date, then number, else string.
NodeKind literal_kind_by_shape(std::string_view lexical);

struct Node {
    NodeKind kind = NodeKind::entity;
    std::string lexical;

    bool is_literal() const { return kind != NodeKind::entity; }
    bool operator==(const Node&) const = default;
    auto operator<=>(const Node&) const = default;
};

struct Triple {
    std::string subject;
    std::string predicate;
    Node object;

    bool operator==(const Triple&) const = default;
    auto operator<=>(const Triple&) const = default;
};

/// In-memory set of triples with subject, predicate and object indexes.
/// Subjects and predicates are entity nodes; literal nodes are keyed by
/// lexical form alone since their kind follows from the shape.
class KnowledgeBase {
public:
    using NodeId = std::uint32_t;
    using TripleIds = std::array<NodeId, 3>;

    /// Returns false when the triple was already present. Throws DataError on
    /// an empty field or a literal object whose kind disagrees with its shape.
    bool add(std::string_view subject, std::string_view predicate, const Node& object);
    bool add(const Triple& t) { return add(t.subject, t.predicate, t.object); }

    std::size_t size() const { return triples_.size(); }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id]; }
    const std::vector<TripleIds>& triples() const { return triples_; }

    std::optional<NodeId> find_entity(std::string_view lexical) const;
    std::optional<NodeId> find_literal(std::string_view lexical) const;

    /// Indexes of triples (into triples()) with the given node in that position.
    std::span<const std::uint32_t> by_subject(NodeId id) const;
    std::span<const std::uint32_t> by_predicate(NodeId id) const;
    std::span<const std::uint32_t> by_object(NodeId id) const;

    bool contains(const Triple& t) const;
    std::vector<Triple> materialize() const;

    /// Every indexed triple exists and every triple is indexed exactly once
    /// per position.
    bool indexes_consistent() const;

private:
    NodeId intern(const Node& n);
    static std::string key_of(const Node& n);

    std::vector<Node> nodes_;
    std::unordered_map<std::string, NodeId> node_ids_;
    std::vector<TripleIds> triples_;
    std::set<TripleIds> triple_set_;
    std::unordered_map<NodeId, std::vector<std::uint32_t>> by_subject_;
    std::unordered_map<NodeId, std::vector<std::uint32_t>> by_predicate_;
    std::unordered_map<NodeId, std::vector<std::uint32_t>> by_object_;
};

/// TSV: subject TAB predicate TAB object per line; '#' lines and blank lines
/// skipped. A double-quoted object is a literal typed by shape; anything else
/// is an entity id.
KnowledgeBase parse_kb(std::string_view contents);
KnowledgeBase load_kb(const std::filesystem::path& path);

/// Inverse of the object column convention.
std::string format_object(const Node& object);

struct AnswerSet {
    std::set<std::string> values;
    bool is_boolean = false;

    static AnswerSet boolean(bool value) { return AnswerSet{{value ? "true" : "false"}, true}; }
    static AnswerSet from(std::span<const std::string> values);

    bool operator==(const AnswerSet&) const = default;
};

class ExecutionError : public Error {
public:
    using Error::Error;
};

/// Conjunctive evaluation of every pattern, then every filter, over complete
/// bindings. SELECT projects lexical forms (tab-joined for several
/// variables); COUNT yields one decimal string; ASK yields "true"/"false".
/// Throws ExecutionError for an unbound projection variable or a filter
/// comparing values of different kinds.
AnswerSet execute(const KnowledgeBase& kb, const sparql::SparqlQuery& query);

/// Comparison semantics shared by the executor: same-kind values only;
/// numbers numerically, everything else lexicographically. Returns nullopt on
/// a kind mismatch.
std::optional<bool> compare_nodes(const Node& a, sparql::CompareOp op, const Node& b);

/// The value a constant filter operand denotes: literal kind from the
/// datatype when one is written, otherwise from the shape.
Node constant_node(const sparql::Term& term);

}  // namespace icsu
