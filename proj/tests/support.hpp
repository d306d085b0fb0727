#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <httplib.h>

#include "icsu/dataset.hpp"
#include "icsu/kb_store.hpp"
#include "icsu/sparql.hpp"

namespace icsu::fixtures {

inline std::filesystem::path source_dir() { return ICSU_SOURCE_DIR; }
inline std::filesystem::path synthetic_dir() { return source_dir() / "data" / "synthetic"; }

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("icsu-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// httplib server on an ephemeral loopback port, stopped on destruction.
class LocalServer {
public:
    httplib::Server server;

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    int port_ = 0;
    std::thread thread_;
};

// Random KB/query pairs and the naive all-assignments enumerator.

struct GenTerm {
    std::variant<std::string, Node> value;  // variable name (with '?') or constant node

    bool is_var() const { return std::holds_alternative<std::string>(value); }
    const std::string& var() const { return std::get<std::string>(value); }
    const Node& node() const { return std::get<Node>(value); }
};

struct GenFilter {
    sparql::CompareOp op;
    GenTerm lhs;
    GenTerm rhs;
};

struct GenQuery {
    sparql::QueryForm form = sparql::QueryForm::select;
    bool count_distinct = false;
    std::vector<std::string> projection;
    std::vector<std::array<GenTerm, 3>> patterns;
    std::vector<GenFilter> filters;
    std::string text;
};

struct GenCase {
    std::vector<Triple> triples;
    GenQuery query;
};

inline std::string term_text(const GenTerm& t) {
    if (t.is_var()) return t.var();
    const Node& n = t.node();
    switch (n.kind) {
        case NodeKind::entity: return "<" + n.lexical + ">";
        case NodeKind::number: return n.lexical;
        case NodeKind::date: return "\"" + n.lexical + "\"^^xsd:date";
        case NodeKind::string: return "\"" + n.lexical + "\"";
    }
    return {};
}

inline GenCase random_case(std::mt19937_64& rng) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    const std::size_t n_entities = 3 + pick(8);
    const std::size_t n_preds = 1 + pick(4);
    std::vector<Node> literals;
    for (int i = 0; i < 4; ++i) literals.push_back({NodeKind::number, std::to_string(static_cast<int>(pick(7)) - 2)});
    literals.push_back({NodeKind::number, "2.5"});
    for (int i = 0; i < 3; ++i) literals.push_back({NodeKind::date, "19" + std::to_string(80 + pick(20)) + "-0" + std::to_string(1 + pick(9)) + "-1" + std::to_string(pick(10))});
    for (int i = 0; i < 3; ++i) literals.push_back({NodeKind::string, std::string(1, static_cast<char>('a' + pick(5))) + "x"});
    auto entity = [&](std::size_t i) { return "e" + std::to_string(i); };
    auto pred = [&](std::size_t i) { return "p" + std::to_string(i); };

    GenCase c;
    std::set<Triple> seen;
    const std::size_t n_triples = 1 + pick(std::min<std::size_t>(200, 6 * n_entities));
    for (std::size_t i = 0; i < n_triples; ++i) {
        Triple t{entity(pick(n_entities)), pred(pick(n_preds)),
                 coin(0.6) ? Node{NodeKind::entity, entity(pick(n_entities))} : literals[pick(literals.size())]};
        if (seen.insert(t).second) c.triples.push_back(t);
    }

    // Constants are drawn mostly from the KB so queries are not trivially empty.
    auto kb_node = [&](int position) -> Node {
        const Triple& t = c.triples[pick(c.triples.size())];
        if (position == 0) return {NodeKind::entity, t.subject};
        if (position == 1) return {NodeKind::entity, t.predicate};
        return t.object;
    };
    const std::vector<std::string> vars = {"?a", "?b", "?c", "?d"};
    const std::size_t n_vars = 1 + pick(vars.size());
    auto random_term = [&](int position) -> GenTerm {
        double p_var = position == 1 ? 0.25 : 0.7;
        if (coin(p_var)) return {vars[pick(n_vars)]};
        if (coin(0.1)) return {Node{NodeKind::entity, position == 1 ? "p_missing" : "e_missing"}};
        return {kb_node(position)};
    };

    GenQuery& q = c.query;
    const std::size_t n_patterns = 1 + pick(3);
    std::set<std::string> used;
    for (std::size_t i = 0; i < n_patterns; ++i) {
        std::array<GenTerm, 3> p{random_term(0), random_term(1), random_term(2)};
        for (const auto& t : p) {
            if (t.is_var()) used.insert(t.var());
        }
        q.patterns.push_back(p);
    }
    if (used.empty()) {
        q.patterns[0][0] = {vars[0]};
        used.insert(vars[0]);
    }
    std::vector<std::string> used_list(used.begin(), used.end());

    const std::size_t n_filters = pick(3);
    for (std::size_t i = 0; i < n_filters; ++i) {
        GenFilter f;
        f.op = static_cast<sparql::CompareOp>(pick(6));
        f.lhs = {coin(0.9) ? used_list[pick(used_list.size())] : std::string("?z")};
        if (coin(0.4)) {
            f.rhs = {used_list[pick(used_list.size())]};
        } else if (coin(0.7)) {
            f.rhs = {literals[pick(literals.size())]};
        } else {
            f.rhs = {kb_node(static_cast<int>(pick(3)))};
        }
        q.filters.push_back(std::move(f));
    }

    switch (pick(4)) {
        case 0: q.form = sparql::QueryForm::ask; break;
        case 1:
            q.form = sparql::QueryForm::count_select;
            q.count_distinct = coin(0.5);
            q.projection = {used_list[pick(used_list.size())]};
            break;
        default: {
            q.form = sparql::QueryForm::select;
            std::vector<std::string> proj = used_list;
            std::shuffle(proj.begin(), proj.end(), rng);
            proj.resize(1 + pick(std::min<std::size_t>(2, proj.size())));
            q.projection = proj;
        }
    }

    std::string body;
    for (const auto& p : q.patterns) body += term_text(p[0]) + " " + term_text(p[1]) + " " + term_text(p[2]) + " . ";
    for (const auto& f : q.filters) {
        body += "FILTER(" + term_text(f.lhs) + " " + std::string(sparql::to_string(f.op)) + " " + term_text(f.rhs) + ") ";
    }
    if (q.form == sparql::QueryForm::ask) {
        q.text = "ASK { " + body + "}";
    } else if (q.form == sparql::QueryForm::count_select) {
        q.text = "SELECT (COUNT(" + std::string(q.count_distinct ? "DISTINCT " : "") + q.projection[0] +
                 ") AS ?n) WHERE { " + body + "}";
    } else {
        q.text = "SELECT";
        for (const auto& v : q.projection) q.text += " " + v;
        q.text += " WHERE { " + body + "}";
    }
    return c;
}

inline std::optional<bool> naive_compare(const Node& a, sparql::CompareOp op, const Node& b) {
    if (a.kind != b.kind) return std::nullopt;
    int cmp;
    if (a.kind == NodeKind::number) {
        double x = std::stod(a.lexical), y = std::stod(b.lexical);
        cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else {
        cmp = a.lexical.compare(b.lexical);
        cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    }
    switch (op) {
        case sparql::CompareOp::eq: return cmp == 0;
        case sparql::CompareOp::ne: return cmp != 0;
        case sparql::CompareOp::lt: return cmp < 0;
        case sparql::CompareOp::le: return cmp <= 0;
        case sparql::CompareOp::gt: return cmp > 0;
        case sparql::CompareOp::ge: return cmp >= 0;
    }
    return std::nullopt;
}

/// Answer set, or nullopt when some solution hits a kind mismatch before a
/// failing filter.
inline std::optional<std::set<std::string>> naive_execute(const GenCase& c) {
    std::set<Node> domain;
    std::set<std::tuple<std::string, std::string, Node>> facts;
    for (const auto& t : c.triples) {
        domain.insert({NodeKind::entity, t.subject});
        domain.insert({NodeKind::entity, t.predicate});
        domain.insert(t.object);
        facts.insert({t.subject, t.predicate, t.object});
    }
    const GenQuery& q = c.query;
    std::vector<std::string> vars;
    for (const auto& p : q.patterns) {
        for (const auto& t : p) {
            if (t.is_var() && std::find(vars.begin(), vars.end(), t.var()) == vars.end()) vars.push_back(t.var());
        }
    }
    std::vector<Node> dom(domain.begin(), domain.end());
    std::vector<std::size_t> choice(vars.size(), 0);
    std::map<std::string, Node> env;
    auto value = [&](const GenTerm& t) -> std::optional<Node> {
        if (!t.is_var()) return t.node();
        auto it = env.find(t.var());
        if (it == env.end()) return std::nullopt;
        return it->second;
    };

    std::set<std::map<std::string, Node>> solutions;
    bool error = false;
    while (true) {
        env.clear();
        for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = dom[choice[i]];
        bool match = true;
        for (const auto& p : q.patterns) {
            Node s = *value(p[0]), pr = *value(p[1]), o = *value(p[2]);
            if (s.kind != NodeKind::entity || pr.kind != NodeKind::entity ||
                !facts.count({s.lexical, pr.lexical, o})) {
                match = false;
                break;
            }
        }
        if (match) {
            bool keep = true;
            for (const auto& f : q.filters) {
                auto a = value(f.lhs), b = value(f.rhs);
                if (!a || !b) {
                    keep = false;
                    break;
                }
                auto r = naive_compare(*a, f.op, *b);
                if (!r) {
                    error = true;
                    break;
                }
                if (!*r) {
                    keep = false;
                    break;
                }
            }
            if (error) return std::nullopt;
            if (keep) solutions.insert(env);
        }
        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == dom.size()) choice[i++] = 0;
        if (i == choice.size()) break;
    }

    std::set<std::string> out;
    if (q.form == sparql::QueryForm::ask) {
        out.insert(solutions.empty() ? "false" : "true");
    } else if (q.form == sparql::QueryForm::count_select) {
        std::set<std::string> distinct;
        for (const auto& s : solutions) distinct.insert(s.at(q.projection[0]).lexical);
        out.insert(std::to_string(q.count_distinct ? distinct.size() : solutions.size()));
    } else {
        for (const auto& s : solutions) {
            std::string row;
            for (std::size_t i = 0; i < q.projection.size(); ++i) {
                if (i) row += '\t';
                row += s.at(q.projection[i]).lexical;
            }
            out.insert(row);
        }
    }
    return out;
}

// Adversarial corpus: long entity names shared across schema-unrelated
// templates, so surface overlap and relation overlap disagree.

struct AdversarialTemplate {
    const char* prefix;
    const char* suffix;
    const char* relation;
};

inline Corpus adversarial_corpus() {
    static const char* kNames[] = {
        "The Extraordinary Chronicle of the Silver Lighthouse Keeper",
        "Midnight Parade Beneath the Crimson Glass Mountains",
        "Whispers From the Forgotten Orchard of Seven Winters",
        "A Long Voyage Across the Hollow Copper Ocean",
        "Lanterns Over the Drowned Cathedral of Marrowvale",
        "Songs for the Last Cartographer of the Northern Reach",
        "The Clockmaker and the Porcelain Fox of Amberley",
        "Seasons of Ash Upon the Quiet Basalt Harbour",
    };
    static const AdversarialTemplate kTemplates[] = {
        {"Who directed ", "?", "directed_by"},
        {"When was ", " released?", "release_date"},
        {"Which language is ", " in?", "original_language"},
        {"Which company produced ", "?", "produced_by"},
        {"How long is ", "?", "runtime_minutes"},
        {"Which award did ", " receive?", "award_won"},
        {"Who composed the score of ", "?", "music_by"},
        {"Where was ", " filmed?", "filming_location"},
    };
    std::vector<QuestionRecord> records;
    std::size_t n = 0;
    for (std::size_t e = 0; e < std::size(kNames); ++e) {
        for (const auto& t : kTemplates) {
            QuestionRecord r;
            char id[16];
            std::snprintf(id, sizeof id, "adv-%03zu", ++n);
            r.id = id;
            std::string name = kNames[e];
            std::string prefix = t.prefix;
            r.question = prefix + name + t.suffix;
            r.gold_sparql = "SELECT ?x WHERE { <e:w" + std::to_string(e) + "> <" + t.relation + "> ?x . }";
            r.answers = {"a" + std::to_string(n)};
            r.topic_entity_id = "e:w" + std::to_string(e);
            r.entity_annotations = std::vector<EntitySpan>{
                make_span(r.question, prefix.size(), prefix.size() + name.size(), "WORK_OF_ART")};
            records.push_back(std::move(r));
        }
    }
    return Corpus(std::move(records), "adversarial");
}

}  // namespace icsu::fixtures
