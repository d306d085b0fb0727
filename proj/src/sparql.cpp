#include "icsu/sparql.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "icsu/util.hpp"

namespace icsu::sparql {

Term Term::variable(std::string name) {
    if (name.empty() || name.front() != '?') name.insert(name.begin(), '?');
    return Term{TermKind::variable, std::move(name), {}, true};
}
Term Term::iri(std::string name) { return Term{TermKind::iri_or_name, std::move(name), {}, true}; }
Term Term::string_literal(std::string value) { return Term{TermKind::string_literal, std::move(value), {}, true}; }
Term Term::number(std::string value) { return Term{TermKind::numeric_literal, std::move(value), {}, true}; }
Term Term::date(std::string value) { return Term{TermKind::date_literal, std::move(value), "xsd:date", true}; }

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "=";
        case CompareOp::ne: return "!=";
        case CompareOp::lt: return "<";
        case CompareOp::le: return "<=";
        case CompareOp::gt: return ">";
        case CompareOp::ge: return ">=";
    }
    return "?";
}

bool SparqlQuery::structurally_equal(const SparqlQuery& o) const {
    return form == o.form && distinct == o.distinct && projection == o.projection &&
           count_distinct == o.count_distinct && count_alias == o.count_alias && prefixes == o.prefixes &&
           patterns == o.patterns && filters == o.filters;
}

namespace {

std::string kind_label(SparqlError::Kind kind) {
    switch (kind) {
        case SparqlError::Kind::lexical: return "lexical error";
        case SparqlError::Kind::syntax: return "syntax error";
        case SparqlError::Kind::unsupported: return "unsupported construct";
    }
    return "error";
}

}  // namespace

SparqlError::SparqlError(Kind kind, std::size_t position, const std::string& message, std::string construct)
    : Error(kind_label(kind) + " at offset " + std::to_string(position) + ": " + message),
      kind_(kind),
      position_(position),
      construct_(std::move(construct)) {}

// ---- lexer -----------------------------------------------------------------

namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-' || c == '.' || u >= 0x80;
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool iri_char_ok(char c) {
    return !is_ws(c) && c != '<' && c != '"' && c != '{' && c != '}' && c != '|' && c != '^' && c != '`' &&
           c != '\\';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= src_.size()) {
                out.push_back({TokenKind::end, "", pos_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (is_ws(c)) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                return;
            }
        }
    }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    Token punct(std::size_t len) {
        Token t{TokenKind::punct, std::string(src_.substr(pos_, len)), pos_};
        pos_ += len;
        return t;
    }

    Token next() {
        const std::size_t start = pos_;
        const char c = src_[pos_];

        if ((c == '?' || c == '$') && is_name_start_or_digit(peek(1))) {
            std::size_t end = pos_ + 1;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
                ++end;
            }
            Token t{TokenKind::variable, "?" + std::string(src_.substr(pos_ + 1, end - pos_ - 1)), start};
            pos_ = end;
            return t;
        }
        if (c == '<') {
            std::size_t end = pos_ + 1;
            while (end < src_.size() && iri_char_ok(src_[end]) && src_[end] != '>') ++end;
            if (end < src_.size() && src_[end] == '>' && end > pos_ + 1) {
                Token t{TokenKind::iri, std::string(src_.substr(pos_ + 1, end - pos_ - 1)), start};
                pos_ = end + 1;
                return t;
            }
            return punct(peek(1) == '=' ? 2 : 1);
        }
        if (c == '>') return punct(peek(1) == '=' ? 2 : 1);
        if (c == '!') return punct(peek(1) == '=' ? 2 : 1);
        if (c == '&' && peek(1) == '&') return punct(2);
        if (c == '|') return punct(peek(1) == '|' ? 2 : 1);
        if (c == '^') return punct(peek(1) == '^' ? 2 : 1);
        if (c == '"' || c == '\'') return string_literal();
        if (c == '@' && std::isalpha(static_cast<unsigned char>(peek(1)))) {
            std::size_t end = pos_ + 1;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '-')) {
                ++end;
            }
            Token t{TokenKind::lang_tag, std::string(src_.substr(pos_ + 1, end - pos_ - 1)), start};
            pos_ = end;
            return t;
        }
        if (is_digit(c) || ((c == '-' || c == '+') && (is_digit(peek(1)) || (peek(1) == '.' && is_digit(peek(2))))) ||
            (c == '.' && is_digit(peek(1)))) {
            return number();
        }
        if (is_name_start(c) || c == ':') return word();
        if (std::string_view("{}().,;*/+-[]?=").find(c) != std::string_view::npos) return punct(1);
        throw SparqlError(SparqlError::Kind::lexical, start, std::string("unexpected character '") + c + "'");
    }

    static bool is_name_start_or_digit(char c) { return is_name_start(c) || is_digit(c); }

    Token number() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        if (src_[end] == '-' || src_[end] == '+') ++end;
        while (end < src_.size() && is_digit(src_[end])) ++end;
        if (end + 1 < src_.size() && src_[end] == '.' && is_digit(src_[end + 1])) {
            ++end;
            while (end < src_.size() && is_digit(src_[end])) ++end;
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && is_digit(src_[e])) {
                while (e < src_.size() && is_digit(src_[e])) ++e;
                end = e;
            }
        }
        Token t{TokenKind::number, std::string(src_.substr(start, end - start)), start};
        pos_ = end;
        return t;
    }

    Token word() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        bool has_colon = false;
        while (end < src_.size() && (is_name_char(src_[end]) || src_[end] == ':')) {
            has_colon = has_colon || src_[end] == ':';
            ++end;
        }
        // A trailing '.' terminates the triple rather than belonging to the name.
        while (end > start + 1 && src_[end - 1] == '.') --end;
        Token t{has_colon ? TokenKind::prefixed_name : TokenKind::word, std::string(src_.substr(start, end - start)),
                start};
        pos_ = end;
        return t;
    }

    Token string_literal() {
        const std::size_t start = pos_;
        const char quote = src_[pos_++];
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') {
                throw SparqlError(SparqlError::Kind::lexical, start, "unterminated string literal");
            }
            char c = src_[pos_++];
            if (c == quote) break;
            if (c == '\\') {
                if (pos_ >= src_.size()) throw SparqlError(SparqlError::Kind::lexical, start, "dangling escape");
                char e = src_[pos_++];
                switch (e) {
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    case '"': value.push_back('"'); break;
                    case '\'': value.push_back('\''); break;
                    case '\\': value.push_back('\\'); break;
                    default:
                        throw SparqlError(SparqlError::Kind::lexical, pos_ - 2,
                                          std::string("unknown escape \\") + e);
                }
                continue;
            }
            value.push_back(c);
        }
        return Token{TokenKind::string, std::move(value), start};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

// ---- parser ----------------------------------------------------------------

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

// Keywords that start constructs outside the subset.
constexpr std::array<std::string_view, 22> kUnsupportedKeywords = {
    "OPTIONAL", "UNION",    "MINUS",  "GRAPH", "SERVICE", "BIND",   "VALUES", "ORDER",
    "GROUP",    "LIMIT",    "OFFSET", "HAVING", "CONSTRUCT", "DESCRIBE", "INSERT", "DELETE",
    "NOT",      "EXISTS",   "FROM",   "BASE",  "REDUCED", "LOAD",
};

bool is_unsupported_keyword(const std::string& up) {
    return std::find(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), up) != kUnsupportedKeywords.end();
}

TermKind datatype_kind(std::string_view datatype) {
    auto cut = datatype.find_last_of("#:/");
    auto local = cut == std::string_view::npos ? datatype : datatype.substr(cut + 1);
    if (!local.empty() && local.back() == '>') local.remove_suffix(1);
    static constexpr std::array<std::string_view, 3> kDate = {"date", "dateTime", "gYear"};
    static constexpr std::array<std::string_view, 12> kNumeric = {
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "unsignedInt"};
    if (std::find(kDate.begin(), kDate.end(), local) != kDate.end()) return TermKind::date_literal;
    if (std::find(kNumeric.begin(), kNumeric.end(), local) != kNumeric.end()) return TermKind::numeric_literal;
    return TermKind::string_literal;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text), toks_(tokenize(text)) {}

    SparqlQuery parse() {
        SparqlQuery q;
        q.raw = std::string(text_);
        while (is_word("PREFIX")) parse_prefix(q);
        if (is_word("SELECT")) {
            advance();
            parse_select_head(q);
        } else if (is_word("ASK")) {
            advance();
            q.form = QueryForm::ask;
        } else {
            reject_unsupported_word();
            syntax("expected SELECT or ASK");
        }
        if (is_word("FROM")) unsupported("FROM");
        if (is_word("WHERE")) advance();
        const std::size_t group_offset = cur().offset;
        parse_group(q);
        if (cur().kind != TokenKind::end) {
            reject_unsupported_word();
            syntax("unexpected trailing token '" + cur().text + "'");
        }
        if (q.patterns.empty()) {
            throw SparqlError(SparqlError::Kind::syntax, group_offset, "empty graph pattern");
        }
        check_projection(q);
        return q;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(i_ + n, toks_.size() - 1)]; }
    void advance() {
        if (i_ + 1 < toks_.size()) ++i_;
    }

    bool is_word(std::string_view kw) const { return cur().kind == TokenKind::word && upper(cur().text) == kw; }
    bool is_punct(std::string_view p) const { return cur().kind == TokenKind::punct && cur().text == p; }

    [[noreturn]] void syntax(const std::string& msg) const {
        throw SparqlError(SparqlError::Kind::syntax, cur().offset, msg);
    }
    [[noreturn]] void unsupported(const std::string& construct) const {
        throw SparqlError(SparqlError::Kind::unsupported, cur().offset, construct + " is not supported", construct);
    }

    void reject_unsupported_word() const {
        if (cur().kind == TokenKind::word) {
            auto up = upper(cur().text);
            if (is_unsupported_keyword(up)) unsupported(up == "ORDER" || up == "GROUP" ? up + " BY" : up);
        }
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p)) syntax("expected '" + std::string(p) + "'" + found());
        advance();
    }

    std::string found() const {
        if (cur().kind == TokenKind::end) return " but reached end of query";
        return " but found '" + cur().text + "'";
    }

    std::string expect_variable() {
        if (cur().kind != TokenKind::variable) syntax("expected a variable" + found());
        std::string v = cur().text;
        advance();
        return v;
    }

    void parse_prefix(SparqlQuery& q) {
        advance();
        if (cur().kind != TokenKind::prefixed_name || cur().text.back() != ':' ||
            std::count(cur().text.begin(), cur().text.end(), ':') != 1) {
            syntax("expected a prefix name like 'ns:'" + found());
        }
        std::string name = cur().text.substr(0, cur().text.size() - 1);
        advance();
        if (cur().kind != TokenKind::iri) syntax("expected <iri> in PREFIX declaration" + found());
        q.prefixes.push_back({std::move(name), cur().text});
        advance();
    }

    void parse_select_head(SparqlQuery& q) {
        if (is_word("DISTINCT")) {
            q.distinct = true;
            advance();
        }
        if (is_word("REDUCED")) unsupported("REDUCED");
        if (is_punct("*")) unsupported("SELECT *");
        if (is_punct("(")) {
            advance();
            if (!is_word("COUNT")) {
                if (cur().kind == TokenKind::word) unsupported(upper(cur().text));
                syntax("expected COUNT aggregate" + found());
            }
            advance();
            expect_punct("(");
            if (is_word("DISTINCT")) {
                q.count_distinct = true;
                advance();
            }
            if (is_punct("*")) unsupported("COUNT(*)");
            q.projection.push_back(expect_variable());
            expect_punct(")");
            if (!is_word("AS")) syntax("expected AS" + found());
            advance();
            q.count_alias = expect_variable();
            expect_punct(")");
            q.form = QueryForm::count_select;
            if (cur().kind == TokenKind::variable || is_punct("(")) unsupported("mixed aggregate projection");
            return;
        }
        q.form = QueryForm::select;
        while (cur().kind == TokenKind::variable) {
            q.projection.push_back(cur().text);
            advance();
        }
        if (q.projection.empty()) syntax("expected projection variables" + found());
    }

    void parse_group(SparqlQuery& q) {
        expect_punct("{");
        while (true) {
            if (is_punct("}")) {
                advance();
                return;
            }
            if (cur().kind == TokenKind::end) syntax("unterminated graph pattern");
            if (is_punct(".")) {
                advance();
                continue;
            }
            if (is_word("FILTER")) {
                advance();
                parse_filter(q);
                continue;
            }
            reject_unsupported_word();
            if (is_punct("{")) unsupported("nested group pattern");
            parse_triples(q);
            if (is_punct(".")) {
                advance();
            } else if (!is_punct("}")) {
                reject_unsupported_word();
                if (is_word("FILTER")) continue;
                syntax("expected '.' or '}' after triple pattern" + found());
            }
        }
    }

    void parse_triples(SparqlQuery& q) {
        Term subject = parse_subject();
        while (true) {
            Term predicate = parse_verb();
            while (true) {
                Term object = parse_object();
                q.patterns.push_back({subject, predicate, object});
                if (!is_punct(",")) break;
                advance();
            }
            if (!is_punct(";")) break;
            advance();
            // A dangling ';' before '.' or '}' is legal.
            if (is_punct(".") || is_punct("}")) break;
        }
    }

    void reject_node_forms() {
        if (is_punct("[")) unsupported("blank node");
        if (is_punct("(")) unsupported("collection");
        if (cur().kind == TokenKind::prefixed_name && cur().text.rfind("_:", 0) == 0) unsupported("blank node");
        if (is_punct("<") && ahead(1).kind == TokenKind::punct && ahead(1).text == "<") {
            unsupported("quoted triple");
        }
    }

    Term parse_name_or_var() {
        if (cur().kind == TokenKind::variable) {
            Term t = Term::variable(cur().text);
            advance();
            return t;
        }
        if (cur().kind == TokenKind::iri) {
            Term t = Term::iri(cur().text);
            advance();
            return t;
        }
        if (cur().kind == TokenKind::prefixed_name) {
            Term t = Term::iri(cur().text);
            t.bracketed = false;
            advance();
            return t;
        }
        syntax("expected a variable or a name" + found());
    }

    Term parse_subject() {
        reject_node_forms();
        if (cur().kind == TokenKind::string || cur().kind == TokenKind::number) syntax("literal in subject position");
        return parse_name_or_var();
    }

    Term parse_verb() {
        if (is_punct("^") || is_punct("!") || is_punct("(")) unsupported("property path");
        if (cur().kind == TokenKind::word && cur().text == "a") unsupported("'a' (rdf:type shorthand)");
        reject_node_forms();
        Term t = parse_name_or_var();
        if (cur().kind == TokenKind::punct &&
            (cur().text == "/" || cur().text == "|" || cur().text == "*" || cur().text == "+" || cur().text == "?" ||
             cur().text == "^")) {
            unsupported("property path");
        }
        return t;
    }

    Term parse_literal() {
        if (cur().kind == TokenKind::number) {
            Term t = Term::number(cur().text);
            advance();
            return t;
        }
        // cur() is a string token
        Term t = Term::string_literal(cur().text);
        advance();
        if (cur().kind == TokenKind::lang_tag) unsupported("language tag");
        if (is_punct("^^")) {
            advance();
            if (cur().kind == TokenKind::iri) {
                t.datatype = "<" + cur().text + ">";
            } else if (cur().kind == TokenKind::prefixed_name) {
                t.datatype = cur().text;
            } else {
                syntax("expected a datatype after ^^" + found());
            }
            advance();
            t.kind = datatype_kind(t.datatype);
        }
        return t;
    }

    Term parse_object() {
        reject_node_forms();
        if (cur().kind == TokenKind::string || cur().kind == TokenKind::number) return parse_literal();
        if (cur().kind == TokenKind::word) {
            auto up = upper(cur().text);
            if (up == "TRUE" || up == "FALSE") unsupported("boolean literal");
        }
        return parse_name_or_var();
    }

    Term parse_filter_operand() {
        if (cur().kind == TokenKind::word) {
            auto up = upper(cur().text);
            if (up == "NOT" || up == "EXISTS") unsupported(up == "NOT" ? "NOT EXISTS" : "EXISTS");
            if (ahead(1).kind == TokenKind::punct && ahead(1).text == "(") unsupported(up + "()");
            if (up == "TRUE" || up == "FALSE") unsupported("boolean literal");
        }
        if (is_punct("!")) unsupported("'!' in FILTER");
        if (is_punct("(")) unsupported("nested FILTER expression");
        if (cur().kind == TokenKind::string || cur().kind == TokenKind::number) return parse_literal();
        return parse_name_or_var();
    }

    void parse_filter(SparqlQuery& q) {
        if (cur().kind == TokenKind::word) {
            auto up = upper(cur().text);
            if (up == "NOT" || up == "EXISTS") unsupported(up == "NOT" ? "NOT EXISTS" : "EXISTS");
            unsupported(up + "()");
        }
        const std::size_t filter_offset = cur().offset;
        expect_punct("(");
        FilterExpr f;
        f.lhs = parse_filter_operand();
        if (cur().kind != TokenKind::punct) syntax("expected a comparison operator" + found());
        const std::string& op = cur().text;
        if (op == "=") f.op = CompareOp::eq;
        else if (op == "!=") f.op = CompareOp::ne;
        else if (op == "<") f.op = CompareOp::lt;
        else if (op == "<=") f.op = CompareOp::le;
        else if (op == ">") f.op = CompareOp::gt;
        else if (op == ">=") f.op = CompareOp::ge;
        else if (op == "&&" || op == "||") unsupported("'" + op + "' in FILTER");
        else if (op == "+" || op == "-" || op == "*" || op == "/") unsupported("arithmetic in FILTER");
        else syntax("expected a comparison operator" + found());
        advance();
        f.rhs = parse_filter_operand();
        if (is_punct("&&") || is_punct("||")) unsupported("'" + cur().text + "' in FILTER");
        if (is_punct("+") || is_punct("-") || is_punct("*") || is_punct("/")) unsupported("arithmetic in FILTER");
        expect_punct(")");
        if (!f.lhs.is_variable() && !f.rhs.is_variable()) {
            throw SparqlError(SparqlError::Kind::syntax, filter_offset, "FILTER must compare at least one variable");
        }
        q.filters.push_back(std::move(f));
    }

    void check_projection(const SparqlQuery& q) const {
        auto used = [&](const std::string& v) {
            for (const auto& p : q.patterns) {
                if (p.subject.lexical == v && p.subject.is_variable()) return true;
                if (p.predicate.lexical == v && p.predicate.is_variable()) return true;
                if (p.object.lexical == v && p.object.is_variable()) return true;
            }
            for (const auto& f : q.filters) {
                if ((f.lhs.is_variable() && f.lhs.lexical == v) || (f.rhs.is_variable() && f.rhs.lexical == v)) {
                    return true;
                }
            }
            return false;
        };
        for (const auto& v : q.projection) {
            if (!used(v)) {
                throw SparqlError(SparqlError::Kind::syntax, 0,
                                  "projection variable " + v + " does not occur in the graph pattern");
            }
        }
    }

    std::string_view text_;
    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

std::string escape_string(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

SparqlQuery parse_sparql(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Term& t) {
    switch (t.kind) {
        case TermKind::variable: return t.lexical;
        case TermKind::iri_or_name: return t.bracketed ? "<" + t.lexical + ">" : t.lexical;
        case TermKind::numeric_literal:
            if (t.datatype.empty()) return t.lexical;
            [[fallthrough]];
        case TermKind::string_literal:
        case TermKind::date_literal: {
            std::string out = "\"" + escape_string(t.lexical) + "\"";
            if (!t.datatype.empty()) out += "^^" + t.datatype;
            return out;
        }
    }
    return t.lexical;
}

std::string to_string(const FilterExpr& f) {
    return "FILTER ( " + to_string(f.lhs) + " " + std::string(to_string(f.op)) + " " + to_string(f.rhs) + " )";
}

std::string to_string(const SparqlQuery& q) {
    std::string out;
    for (const auto& p : q.prefixes) out += "PREFIX " + p.name + ": <" + p.iri + "> ";
    switch (q.form) {
        case QueryForm::select:
            out += q.distinct ? "SELECT DISTINCT" : "SELECT";
            for (const auto& v : q.projection) out += " " + v;
            out += " WHERE";
            break;
        case QueryForm::count_select:
            out += q.distinct ? "SELECT DISTINCT" : "SELECT";
            out += " (COUNT(";
            out += q.count_distinct ? "DISTINCT " : "";
            out += q.projection.empty() ? std::string("?") : q.projection.front();
            out += ") AS " + q.count_alias + ") WHERE";
            break;
        case QueryForm::ask:
            out += "ASK";
            break;
    }
    out += " {";
    for (const auto& p : q.patterns) {
        out += " " + to_string(p.subject) + " " + to_string(p.predicate) + " " + to_string(p.object) + " .";
    }
    for (const auto& f : q.filters) out += " " + to_string(f);
    out += " }";
    return out;
}

std::set<std::string> extract_relations(const SparqlQuery& q) {
    std::set<std::string> out;
    for (const auto& p : q.patterns) {
        if (!p.predicate.is_variable()) out.insert(p.predicate.lexical);
    }
    return out;
}

std::string normalize_for_embedding(std::string_view text) { return collapse_whitespace(text); }

}  // namespace icsu::sparql
