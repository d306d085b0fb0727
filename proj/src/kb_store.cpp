#include "icsu/kb_store.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "icsu/util.hpp"

namespace icsu {

using sparql::CompareOp;
using sparql::QueryForm;
using sparql::SparqlQuery;
using sparql::Term;
using sparql::TermKind;

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::entity: return "entity";
        case NodeKind::string: return "string";
        case NodeKind::number: return "number";
        case NodeKind::date: return "date";
    }
    return "?";
}

namespace {
bool digits(std::string_view s, std::size_t from, std::size_t n) {
    if (from + n > s.size()) return false;
    for (std::size_t i = from; i < from + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}
}  // namespace

bool is_iso_date(std::string_view s) {
    if (!s.empty() && s.front() == '-') s.remove_prefix(1);
    if (s.size() < 10 || !digits(s, 0, 4) || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' || !digits(s, 8, 2)) {
        return false;
    }
    if (s.size() == 10) return true;
    // THH:MM:SS with optional fraction / zone suffix
    return s.size() >= 19 && s[10] == 'T' && digits(s, 11, 2) && s[13] == ':' && digits(s, 14, 2) && s[16] == ':' &&
           digits(s, 17, 2);
}

bool is_number(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t int_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++int_digits;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++frac_digits;
    }
    if (int_digits + frac_digits == 0) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++exp_digits;
        if (exp_digits == 0) return false;
    }
    return i == s.size();
}

NodeKind literal_kind_by_shape(std::string_view lexical) {
    if (is_iso_date(lexical)) return NodeKind::date;
    if (is_number(lexical)) return NodeKind::number;
    return NodeKind::string;
}

// ---- storage ---------------------------------------------------------------

std::string KnowledgeBase::key_of(const Node& n) {
    return (n.kind == NodeKind::entity ? "E|" : "L|") + n.lexical;
}

KnowledgeBase::NodeId KnowledgeBase::intern(const Node& n) {
    auto [it, inserted] = node_ids_.emplace(key_of(n), static_cast<NodeId>(nodes_.size()));
    if (inserted) nodes_.push_back(n);
    return it->second;
}

bool KnowledgeBase::add(std::string_view subject, std::string_view predicate, const Node& object) {
    if (subject.empty() || predicate.empty() || object.lexical.empty()) {
        throw DataError("triple field must not be empty");
    }
    if (object.is_literal() && object.kind != literal_kind_by_shape(object.lexical)) {
        throw DataError("literal \"" + object.lexical + "\" typed " + std::string(to_string(object.kind)) +
                        " but its shape says " + std::string(to_string(literal_kind_by_shape(object.lexical))));
    }
    TripleIds ids{intern({NodeKind::entity, std::string(subject)}), intern({NodeKind::entity, std::string(predicate)}),
                  intern(object)};
    if (!triple_set_.insert(ids).second) return false;
    auto index = static_cast<std::uint32_t>(triples_.size());
    triples_.push_back(ids);
    by_subject_[ids[0]].push_back(index);
    by_predicate_[ids[1]].push_back(index);
    by_object_[ids[2]].push_back(index);
    return true;
}

std::optional<KnowledgeBase::NodeId> KnowledgeBase::find_entity(std::string_view lexical) const {
    auto it = node_ids_.find("E|" + std::string(lexical));
    if (it == node_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<KnowledgeBase::NodeId> KnowledgeBase::find_literal(std::string_view lexical) const {
    auto it = node_ids_.find("L|" + std::string(lexical));
    if (it == node_ids_.end()) return std::nullopt;
    return it->second;
}

namespace {
std::span<const std::uint32_t> lookup(const std::unordered_map<KnowledgeBase::NodeId, std::vector<std::uint32_t>>& m,
                                      KnowledgeBase::NodeId id) {
    auto it = m.find(id);
    if (it == m.end()) return {};
    return it->second;
}
}  // namespace

std::span<const std::uint32_t> KnowledgeBase::by_subject(NodeId id) const { return lookup(by_subject_, id); }
std::span<const std::uint32_t> KnowledgeBase::by_predicate(NodeId id) const { return lookup(by_predicate_, id); }
std::span<const std::uint32_t> KnowledgeBase::by_object(NodeId id) const { return lookup(by_object_, id); }

bool KnowledgeBase::contains(const Triple& t) const {
    auto s = find_entity(t.subject);
    auto p = find_entity(t.predicate);
    auto o = t.object.is_literal() ? find_literal(t.object.lexical) : find_entity(t.object.lexical);
    return s && p && o && triple_set_.count({*s, *p, *o}) > 0;
}

std::vector<Triple> KnowledgeBase::materialize() const {
    std::vector<Triple> out;
    out.reserve(triples_.size());
    for (const auto& t : triples_) out.push_back({nodes_[t[0]].lexical, nodes_[t[1]].lexical, nodes_[t[2]]});
    return out;
}

bool KnowledgeBase::indexes_consistent() const {
    if (triple_set_.size() != triples_.size()) return false;
    const std::array<const std::unordered_map<NodeId, std::vector<std::uint32_t>>*, 3> indexes = {
        &by_subject_, &by_predicate_, &by_object_};
    for (std::size_t pos = 0; pos < 3; ++pos) {
        std::size_t total = 0;
        for (const auto& [node, list] : *indexes[pos]) {
            for (auto idx : list) {
                if (idx >= triples_.size() || triples_[idx][pos] != node) return false;
            }
            total += list.size();
        }
        if (total != triples_.size()) return false;
    }
    for (const auto& t : triples_) {
        if (!triple_set_.count(t)) return false;
    }
    return true;
}

// ---- file format -----------------------------------------------------------

std::string format_object(const Node& object) {
    return object.is_literal() ? "\"" + object.lexical + "\"" : object.lexical;
}

KnowledgeBase parse_kb(std::string_view contents) {
    KnowledgeBase kb;
    auto lines = split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty() || line.front() == '#') continue;
        const std::string where = "line " + std::to_string(i + 1) + ": ";
        auto fields = split(line, '\t');
        if (fields.size() != 3) throw DataError(where + "expected 3 fields");
        for (const auto& f : fields) {
            if (f.empty()) throw DataError(where + "empty field");
        }
        if (fields[0].front() == '"') throw DataError(where + "literal in subject position");
        Node object;
        const auto& o = fields[2];
        if (o.size() >= 2 && o.front() == '"' && o.back() == '"') {
            object.lexical = o.substr(1, o.size() - 2);
            if (object.lexical.empty()) throw DataError(where + "empty literal");
            object.kind = literal_kind_by_shape(object.lexical);
        } else {
            object = Node{NodeKind::entity, o};
        }
        kb.add(fields[0], fields[1], object);
    }
    return kb;
}

KnowledgeBase load_kb(const std::filesystem::path& path) { return parse_kb(read_file(path)); }

AnswerSet AnswerSet::from(std::span<const std::string> values) {
    AnswerSet a;
    a.values.insert(values.begin(), values.end());
    a.is_boolean = a.values.size() == 1 && (*a.values.begin() == "true" || *a.values.begin() == "false");
    return a;
}

// ---- execution -------------------------------------------------------------

Node constant_node(const Term& term) {
    switch (term.kind) {
        case TermKind::iri_or_name:
        case TermKind::variable: return {NodeKind::entity, term.lexical};
        case TermKind::numeric_literal: return {NodeKind::number, term.lexical};
        case TermKind::date_literal: return {NodeKind::date, term.lexical};
        case TermKind::string_literal:
            return {term.datatype.empty() ? literal_kind_by_shape(term.lexical) : NodeKind::string, term.lexical};
    }
    return {NodeKind::string, term.lexical};
}

std::optional<bool> compare_nodes(const Node& a, CompareOp op, const Node& b) {
    if (a.kind != b.kind) return std::nullopt;
    int cmp = 0;
    if (a.kind == NodeKind::number) {
        double x = 0, y = 0;
        auto rx = std::from_chars(a.lexical.data() + (a.lexical.front() == '+'), a.lexical.data() + a.lexical.size(), x);
        auto ry = std::from_chars(b.lexical.data() + (b.lexical.front() == '+'), b.lexical.data() + b.lexical.size(), y);
        if (rx.ec != std::errc() || ry.ec != std::errc()) return std::nullopt;
        cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else {
        int c = a.lexical.compare(b.lexical);
        cmp = c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    switch (op) {
        case CompareOp::eq: return cmp == 0;
        case CompareOp::ne: return cmp != 0;
        case CompareOp::lt: return cmp < 0;
        case CompareOp::le: return cmp <= 0;
        case CompareOp::gt: return cmp > 0;
        case CompareOp::ge: return cmp >= 0;
    }
    return std::nullopt;
}

namespace {

using NodeId = KnowledgeBase::NodeId;
constexpr NodeId kUnbound = std::numeric_limits<NodeId>::max();
constexpr NodeId kNoMatch = kUnbound - 1;

struct Slot {
    bool is_var = false;
    std::size_t var = 0;  // when is_var
    NodeId constant = kNoMatch;
};

class Executor {
public:
    Executor(const KnowledgeBase& kb, const SparqlQuery& q) : kb_(kb), q_(q) {
        for (const auto& p : q.patterns) {
            patterns_.push_back({slot(p.subject, false), slot(p.predicate, false), slot(p.object, true)});
        }
        for (const auto& f : q.filters) {
            filters_.push_back({filter_slot(f.lhs), filter_slot(f.rhs)});
        }
        for (const auto& v : q.projection) {
            auto it = std::find(vars_.begin(), vars_.end(), v);
            if (it == vars_.end()) throw ExecutionError("unbound projection variable " + v);
            projection_.push_back(static_cast<std::size_t>(it - vars_.begin()));
        }
    }

    std::vector<std::vector<NodeId>> solve() {
        std::vector<NodeId> binding(vars_.size(), kUnbound);
        std::vector<bool> done(patterns_.size(), false);
        bool impossible = std::any_of(patterns_.begin(), patterns_.end(), [](const auto& p) {
            return std::any_of(p.begin(), p.end(), [](const Slot& s) { return !s.is_var && s.constant == kNoMatch; });
        });
        if (!impossible) search(binding, done, 0);
        return std::move(solutions_);
    }

    const std::vector<std::size_t>& projection() const { return projection_; }

private:
    Slot slot(const Term& t, bool literal_ok) {
        Slot s;
        if (t.is_variable()) {
            s.is_var = true;
            s.var = var_index(t.lexical);
            return s;
        }
        std::optional<NodeId> id;
        if (t.is_literal()) {
            if (literal_ok) id = kb_.find_literal(t.lexical);
        } else {
            id = kb_.find_entity(t.lexical);
        }
        s.constant = id.value_or(kNoMatch);
        return s;
    }

    struct FilterSide {
        bool is_var = false;
        std::size_t var = 0;  // index into vars_, or kUnbound-sized sentinel when never bound
        bool bound_anywhere = false;
        Node constant;
    };

    FilterSide filter_slot(const Term& t) {
        FilterSide s;
        if (t.is_variable()) {
            s.is_var = true;
            auto it = std::find(vars_.begin(), vars_.end(), t.lexical);
            s.bound_anywhere = it != vars_.end();
            s.var = s.bound_anywhere ? static_cast<std::size_t>(it - vars_.begin()) : 0;
        } else {
            s.constant = constant_node(t);
        }
        return s;
    }

    std::size_t var_index(const std::string& name) {
        auto it = std::find(vars_.begin(), vars_.end(), name);
        if (it != vars_.end()) return static_cast<std::size_t>(it - vars_.begin());
        vars_.push_back(name);
        return vars_.size() - 1;
    }

    NodeId resolve(const Slot& s, const std::vector<NodeId>& binding) const {
        return s.is_var ? binding[s.var] : s.constant;
    }

    // Candidate triples for a pattern under the current binding: the smallest
    // applicable index list.
    std::span<const std::uint32_t> candidates(const std::array<Slot, 3>& p, const std::vector<NodeId>& binding,
                                              bool& all) const {
        std::span<const std::uint32_t> best;
        all = true;
        auto consider = [&](std::span<const std::uint32_t> list) {
            if (all || list.size() < best.size()) best = list;
            all = false;
        };
        if (NodeId s = resolve(p[0], binding); s != kUnbound) consider(kb_.by_subject(s));
        if (NodeId pr = resolve(p[1], binding); pr != kUnbound) consider(kb_.by_predicate(pr));
        if (NodeId o = resolve(p[2], binding); o != kUnbound) consider(kb_.by_object(o));
        return best;
    }

    void search(std::vector<NodeId>& binding, std::vector<bool>& done, std::size_t depth) {
        if (depth == patterns_.size()) {
            if (passes_filters(binding)) solutions_.push_back(binding);
            return;
        }
        // Most selective remaining pattern first.
        std::size_t pick = patterns_.size();
        std::size_t pick_size = std::numeric_limits<std::size_t>::max();
        std::span<const std::uint32_t> pick_list;
        bool pick_all = false;
        for (std::size_t i = 0; i < patterns_.size(); ++i) {
            if (done[i]) continue;
            bool all = false;
            auto list = candidates(patterns_[i], binding, all);
            std::size_t size = all ? kb_.size() : list.size();
            if (size < pick_size) {
                pick = i;
                pick_size = size;
                pick_list = list;
                pick_all = all;
            }
        }
        if (pick_size == 0) return;

        const auto& p = patterns_[pick];
        done[pick] = true;
        auto visit = [&](std::uint32_t triple_index) {
            const auto& t = kb_.triples()[triple_index];
            std::array<std::size_t, 3> newly{};
            std::size_t n_new = 0;
            bool ok = true;
            for (std::size_t pos = 0; pos < 3 && ok; ++pos) {
                const Slot& s = p[pos];
                if (!s.is_var) {
                    ok = s.constant == t[pos];
                } else if (binding[s.var] == kUnbound) {
                    binding[s.var] = t[pos];
                    newly[n_new++] = s.var;
                } else {
                    ok = binding[s.var] == t[pos];
                }
            }
            if (ok) search(binding, done, depth + 1);
            for (std::size_t j = 0; j < n_new; ++j) binding[newly[j]] = kUnbound;
        };
        if (pick_all) {
            for (std::uint32_t i = 0; i < kb_.size(); ++i) visit(i);
        } else {
            for (auto i : pick_list) visit(i);
        }
        done[pick] = false;
    }

    const Node* side_value(const FilterSide& s, const std::vector<NodeId>& binding) const {
        if (!s.is_var) return &s.constant;
        if (!s.bound_anywhere || binding[s.var] == kUnbound) return nullptr;
        return &kb_.node(binding[s.var]);
    }

    bool passes_filters(const std::vector<NodeId>& binding) const {
        for (std::size_t i = 0; i < filters_.size(); ++i) {
            const Node* a = side_value(filters_[i].first, binding);
            const Node* b = side_value(filters_[i].second, binding);
            if (!a || !b) return false;  // unbound operand: the filter does not hold
            auto r = compare_nodes(*a, q_.filters[i].op, *b);
            if (!r) {
                throw ExecutionError("type mismatch in " + sparql::to_string(q_.filters[i]) + ": " +
                                     std::string(to_string(a->kind)) + " vs " + std::string(to_string(b->kind)));
            }
            if (!*r) return false;
        }
        return true;
    }

    const KnowledgeBase& kb_;
    const SparqlQuery& q_;
    std::vector<std::string> vars_;
    std::vector<std::array<Slot, 3>> patterns_;
    std::vector<std::pair<FilterSide, FilterSide>> filters_;
    std::vector<std::size_t> projection_;
    std::vector<std::vector<NodeId>> solutions_;
};

}  // namespace

AnswerSet execute(const KnowledgeBase& kb, const SparqlQuery& query) {
    Executor ex(kb, query);
    auto solutions = ex.solve();
    switch (query.form) {
        case QueryForm::ask:
            return AnswerSet::boolean(!solutions.empty());
        case QueryForm::count_select: {
            std::size_t n = solutions.size();
            if (query.count_distinct) {
                std::set<NodeId> seen;
                for (const auto& s : solutions) seen.insert(s[ex.projection().front()]);
                n = seen.size();
            }
            return AnswerSet{{std::to_string(n)}, false};
        }
        case QueryForm::select: {
            AnswerSet out;
            for (const auto& s : solutions) {
                std::string value;
                for (std::size_t i = 0; i < ex.projection().size(); ++i) {
                    if (i) value += '\t';
                    value += kb.node(s[ex.projection()[i]]).lexical;
                }
                out.values.insert(std::move(value));
            }
            return out;
        }
    }
    return {};
}

}  // namespace icsu
