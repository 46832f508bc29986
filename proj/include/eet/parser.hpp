#pragma once

// Textual surface syntax. Line-oriented with explicit blocks:
//
//   domain Name = { v1, v2 }
//   component A, B, C
//   msg name(param: Domain, ...)
//   eet Name {
//     A -> B : name(term, ...)
//     choice { body | body }
//     loop 0..* { body }
//     par { body | body }
//     ref Name
//     where term == term and term != term
//   }
//
// '#' starts a comment to end of line. Identifiers and domain values share
// the class [A-Za-z_][A-Za-z0-9_]*. Keywords are reserved. parse() reports
// every detected error with a 1-based position and never returns a partial
// document.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"

namespace eet {

enum class ParseErrorKind {
    Syntax,
    UnknownName,
    DuplicateName,
    ArityMismatch,
    DomainMismatch,
    CyclicRef,
    EmptyChoice,
    BadLoopBounds,
};

inline const char* to_string(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::Syntax: return "Syntax";
        case ParseErrorKind::UnknownName: return "UnknownName";
        case ParseErrorKind::DuplicateName: return "DuplicateName";
        case ParseErrorKind::ArityMismatch: return "ArityMismatch";
        case ParseErrorKind::DomainMismatch: return "DomainMismatch";
        case ParseErrorKind::CyclicRef: return "CyclicRef";
        case ParseErrorKind::EmptyChoice: return "EmptyChoice";
        case ParseErrorKind::BadLoopBounds: return "BadLoopBounds";
    }
    return "?";
}

struct ParseError {
    int line = 1;
    int column = 1;
    ParseErrorKind kind = ParseErrorKind::Syntax;
    std::string detail;
};

inline std::string to_string(const ParseError& e) {
    return std::to_string(e.line) + ":" + std::to_string(e.column) + ": " +
           to_string(e.kind) + ": " + e.detail;
}

struct ParseResult {
    std::optional<Document> document;
    std::vector<ParseError> errors;

    bool ok() const { return document.has_value(); }
};

namespace parser_detail {

enum class TokKind { Ident, Number, Sym, Newline, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    int line = 1;
    int column = 1;
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {"domain", "component", "msg",   "eet", "choice",
                                             "loop",   "par",       "ref",   "where", "and"};
    return kw;
}

inline std::vector<Token> lex(const std::string& src, std::vector<ParseError>& errors) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto push = [&](TokKind k, std::string text, int l, int c) {
        out.push_back({k, std::move(text), l, c});
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        if (c == '\n') {
            push(TokKind::Newline, "\n", line, col);
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
            continue;
        }
        int tl = line, tc = col;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            push(TokKind::Ident, src.substr(i, j - i), tl, tc);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(TokKind::Number, src.substr(i, j - i), tl, tc);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
        if (two('-', '>') || two('.', '.') || two('=', '=') || two('!', '=')) {
            push(TokKind::Sym, src.substr(i, 2), tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',' || c == ':' || c == '|' ||
            c == '*' || c == '=') {
            push(TokKind::Sym, std::string(1, c), tl, tc);
            ++i;
            ++col;
            continue;
        }
        errors.push_back({tl, tc, ParseErrorKind::Syntax,
                          std::string("unexpected character '") + c + "'"});
        ++i;
        ++col;
    }
    out.push_back({TokKind::End, "", line, col});
    return out;
}

// Structure-level tree; semantic resolution happens in a second phase once
// every declaration is known, so declaration order in the file is free.
struct RawTerm {
    std::string text;
    int line = 1, column = 1;
};

struct RawAtom {
    RawTerm lhs;
    bool equal = true;
    RawTerm rhs;
};

struct RawWhere {
    std::vector<RawAtom> atoms;
};

struct PNode {
    enum Kind { Msg, Choice, Loop, Par, Ref, Body } kind = Body;
    int line = 1, column = 1;
    std::string sender, receiver, message;  // Msg
    std::vector<RawTerm> terms;             // Msg
    std::string name;                       // Ref
    unsigned long min = 0;                  // Loop
    std::optional<unsigned long> max;       // Loop
    std::vector<PNode> children;            // Body: steps; Choice/Par: bodies; Loop: one body
    std::vector<RawWhere> wheres;           // Body
};

struct PEet {
    std::string name;
    int line = 1, column = 1;
    PNode body;
};

struct StepSyntaxError {};  // thrown to unwind to the nearest recovery point

class Parser {
public:
    explicit Parser(const std::string& src) { tokens_ = lex(src, errors_); }

    ParseResult run() {
        parse_top();
        build_document();
        std::stable_sort(errors_.begin(), errors_.end(), [](const ParseError& a, const ParseError& b) {
            return a.line != b.line ? a.line < b.line : a.column < b.column;
        });
        ParseResult result;
        result.errors = errors_;
        if (errors_.empty()) result.document = std::move(doc_);
        return result;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<ParseError> errors_;

    Document doc_;
    std::vector<PEet> eets_;

    // --- token helpers -----------------------------------------------------

    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
    bool at_end() const { return peek().kind == TokKind::End; }

    bool peek_sym(const std::string& s) const {
        return peek().kind == TokKind::Sym && peek().text == s;
    }
    bool peek_kw(const std::string& s) const {
        return peek().kind == TokKind::Ident && peek().text == s;
    }

    void skip_newlines() {
        while (peek().kind == TokKind::Newline) ++pos_;
    }

    [[noreturn]] void fail(const Token& at, const std::string& detail) {
        errors_.push_back({at.line, at.column, ParseErrorKind::Syntax, detail});
        throw StepSyntaxError{};
    }

    void error(const Token& at, ParseErrorKind kind, const std::string& detail) {
        errors_.push_back({at.line, at.column, kind, detail});
    }

    std::string describe(const Token& t) const {
        switch (t.kind) {
            case TokKind::End: return "end of input";
            case TokKind::Newline: return "end of line";
            default: return "'" + t.text + "'";
        }
    }

    Token expect_sym(const std::string& s) {
        if (!peek_sym(s)) fail(peek(), "expected '" + s + "', found " + describe(peek()));
        return take();
    }

    Token expect_name(const std::string& what) {
        if (peek().kind != TokKind::Ident)
            fail(peek(), "expected " + what + ", found " + describe(peek()));
        if (keywords().count(peek().text))
            fail(peek(), "'" + peek().text + "' is a reserved word");
        return take();
    }

    // --- recovery ----------------------------------------------------------

    // Skip to the next top-level statement boundary: a newline outside braces.
    void sync_top() {
        int depth = 0;
        while (!at_end()) {
            const Token& t = take();
            if (t.kind == TokKind::Sym && t.text == "{") ++depth;
            else if (t.kind == TokKind::Sym && t.text == "}" && depth > 0) --depth;
            else if (t.kind == TokKind::Newline && depth == 0) return;
        }
    }

    // Skip to the end of the current step: consume through the newline, stop
    // before '}' or '|' so the enclosing block can continue.
    void sync_step() {
        while (!at_end()) {
            if (peek_sym("}") || peek_sym("|")) return;
            const Token& t = take();
            if (t.kind == TokKind::Newline) return;
            if (t.kind == TokKind::Sym && t.text == "{") {  // skip a nested block wholesale
                int depth = 1;
                while (!at_end() && depth > 0) {
                    const Token& u = take();
                    if (u.kind == TokKind::Sym && u.text == "{") ++depth;
                    if (u.kind == TokKind::Sym && u.text == "}") --depth;
                }
            }
        }
    }

    // --- phase 1: declarations ---------------------------------------------

    void parse_top() {
        while (true) {
            skip_newlines();
            if (at_end()) return;
            try {
                if (peek_kw("domain")) parse_domain();
                else if (peek_kw("component")) parse_component();
                else if (peek_kw("msg")) parse_msg();
                else if (peek_kw("eet")) parse_eet();
                else fail(peek(), "expected a declaration, found " + describe(peek()));
            } catch (const StepSyntaxError&) {
                sync_top();
            }
        }
    }

    void parse_domain() {
        take();  // domain
        Token name = expect_name("domain name");
        expect_sym("=");
        expect_sym("{");
        std::vector<std::string> values;
        skip_newlines();
        if (!peek_sym("}")) {
            while (true) {
                Token v = expect_name("domain value");
                values.push_back(v.text);
                skip_newlines();
                if (peek_sym(",")) {
                    take();
                    skip_newlines();
                    continue;
                }
                break;
            }
        }
        expect_sym("}");
        if (values.empty())
            error(name, ParseErrorKind::DomainMismatch,
                  "domain '" + name.text + "' must have at least one value");
        std::set<std::string> distinct;
        for (const auto& v : values)
            if (!distinct.insert(v).second)
                error(name, ParseErrorKind::DuplicateName,
                      "value '" + v + "' repeated in domain '" + name.text + "'");
        if (doc_.find_domain(name.text))
            error(name, ParseErrorKind::DuplicateName, "domain '" + name.text + "' redeclared");
        else
            doc_.domains.emplace_back(name.text, std::move(values));
    }

    void parse_component() {
        take();  // component
        while (true) {
            Token name = expect_name("component name");
            if (doc_.has_component(name.text))
                error(name, ParseErrorKind::DuplicateName,
                      "component '" + name.text + "' redeclared");
            else
                doc_.components.push_back(name.text);
            if (peek_sym(",")) {
                take();
                continue;
            }
            break;
        }
    }

    void parse_msg() {
        take();  // msg
        Token name = expect_name("message name");
        expect_sym("(");
        MessageSig sig;
        if (!peek_sym(")")) {
            while (true) {
                Token p = expect_name("parameter name");
                expect_sym(":");
                Token d = expect_name("domain name");
                sig.push_back({p.text, d.text});
                if (peek_sym(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        expect_sym(")");
        if (doc_.find_message(name.text))
            error(name, ParseErrorKind::DuplicateName, "message '" + name.text + "' redeclared");
        else
            doc_.messages.emplace_back(name.text, std::move(sig));
    }

    void parse_eet() {
        take();  // eet
        Token name = expect_name("eet name");
        expect_sym("{");
        PNode body = parse_body();
        expect_sym("}");
        bool duplicate = false;
        for (const auto& e : eets_)
            if (e.name == name.text) duplicate = true;
        if (duplicate)
            error(name, ParseErrorKind::DuplicateName, "eet '" + name.text + "' redeclared");
        else
            eets_.push_back({name.text, name.line, name.column, std::move(body)});
    }

    // --- phase 1: eet bodies -------------------------------------------------

    PNode parse_body() {
        PNode body;
        body.kind = PNode::Body;
        body.line = peek().line;
        body.column = peek().column;
        skip_newlines();
        while (!at_end() && !peek_sym("}") && !peek_sym("|")) {
            try {
                parse_step(body);
            } catch (const StepSyntaxError&) {
                sync_step();
            }
            skip_newlines();
        }
        return body;
    }

    void parse_step(PNode& body) {
        const Token& t = peek();
        if (t.kind != TokKind::Ident) fail(t, "expected a step, found " + describe(t));

        if (t.text == "choice") {
            PNode node;
            node.kind = PNode::Choice;
            node.line = t.line;
            node.column = t.column;
            take();
            expect_sym("{");
            skip_newlines();
            if (peek_sym("}")) {
                take();
                error({TokKind::Ident, "", node.line, node.column}, ParseErrorKind::EmptyChoice,
                      "choice must offer at least one alternative");
            } else {
                while (true) {
                    node.children.push_back(parse_body());
                    if (peek_sym("|")) {
                        take();
                        continue;
                    }
                    break;
                }
                expect_sym("}");
            }
            body.children.push_back(std::move(node));
            return;
        }

        if (t.text == "loop") {
            PNode node;
            node.kind = PNode::Loop;
            node.line = t.line;
            node.column = t.column;
            take();
            if (peek().kind != TokKind::Number)
                fail(peek(), "expected loop lower bound, found " + describe(peek()));
            node.min = std::stoul(take().text);
            expect_sym("..");
            if (peek().kind == TokKind::Number) {
                node.max = std::stoul(take().text);
            } else if (peek_sym("*")) {
                take();
                node.max = std::nullopt;
            } else {
                fail(peek(), "expected loop upper bound or '*', found " + describe(peek()));
            }
            if (node.max && *node.max < node.min) {
                error({TokKind::Ident, "", node.line, node.column}, ParseErrorKind::BadLoopBounds,
                      "loop bounds " + std::to_string(node.min) + ".." + std::to_string(*node.max) +
                          " are decreasing");
                node.max = node.min;
            }
            expect_sym("{");
            node.children.push_back(parse_body());
            expect_sym("}");
            body.children.push_back(std::move(node));
            return;
        }

        if (t.text == "par") {
            PNode node;
            node.kind = PNode::Par;
            node.line = t.line;
            node.column = t.column;
            take();
            expect_sym("{");
            while (true) {
                node.children.push_back(parse_body());
                if (peek_sym("|")) {
                    take();
                    continue;
                }
                break;
            }
            expect_sym("}");
            if (node.children.size() < 2)
                fail({TokKind::Ident, "", node.line, node.column},
                     "par requires at least two '|'-separated bodies");
            body.children.push_back(std::move(node));
            return;
        }

        if (t.text == "ref") {
            PNode node;
            node.kind = PNode::Ref;
            node.line = t.line;
            node.column = t.column;
            take();
            node.name = expect_name("eet name").text;
            body.children.push_back(std::move(node));
            return;
        }

        if (t.text == "where") {
            take();
            RawWhere where;
            while (true) {
                RawAtom atom;
                Token l = expect_name("predicate term");
                atom.lhs = {l.text, l.line, l.column};
                if (peek_sym("==")) atom.equal = true;
                else if (peek_sym("!=")) atom.equal = false;
                else fail(peek(), "expected '==' or '!=', found " + describe(peek()));
                take();
                Token r = expect_name("predicate term");
                atom.rhs = {r.text, r.line, r.column};
                where.atoms.push_back(std::move(atom));
                if (peek_kw("and")) {
                    take();
                    continue;
                }
                break;
            }
            body.wheres.push_back(std::move(where));
            return;
        }

        if (keywords().count(t.text)) fail(t, "'" + t.text + "' cannot start a step");

        // A -> B : name(term, ...)
        PNode node;
        node.kind = PNode::Msg;
        node.line = t.line;
        node.column = t.column;
        node.sender = take().text;
        expect_sym("->");
        node.receiver = expect_name("component name").text;
        expect_sym(":");
        node.message = expect_name("message name").text;
        expect_sym("(");
        if (!peek_sym(")")) {
            while (true) {
                Token term = expect_name("argument");
                node.terms.push_back({term.text, term.line, term.column});
                if (peek_sym(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        expect_sym(")");
        body.children.push_back(std::move(node));
    }

    // --- phase 2: semantic build ---------------------------------------------

    struct Built {
        ExprPtr expr;
        std::set<std::string> params;  // parameter names of the subtree, refs excluded
    };

    struct EetCtx {
        std::map<std::string, std::string> param_domains;
        std::vector<std::pair<RawTerm, std::string>> refs;  // position, target
    };

    bool value_of_some_domain(const std::string& text) const {
        for (const auto& [_, values] : doc_.domains)
            if (std::find(values.begin(), values.end(), text) != values.end()) return true;
        return false;
    }

    Built build_node(const PNode& node, EetCtx& ctx) {
        switch (node.kind) {
            case PNode::Msg: return build_msg(node, ctx);
            case PNode::Ref:
                ctx.refs.push_back({{node.name, node.line, node.column}, node.name});
                return {Expr::ref(node.name), {}};
            case PNode::Loop: {
                Built body = build_node(node.children[0], ctx);
                unsigned min = static_cast<unsigned>(node.min);
                std::optional<unsigned> max;
                if (node.max) max = static_cast<unsigned>(*node.max);
                return {Expr::loop(body.expr, min, max), std::move(body.params)};
            }
            case PNode::Choice: {
                if (node.children.empty()) return {Expr::empty(), {}};  // reported in phase 1
                std::vector<ExprPtr> alternatives;
                std::set<std::string> params;
                for (const auto& child : node.children) {
                    Built b = build_node(child, ctx);
                    alternatives.push_back(b.expr);
                    params.insert(b.params.begin(), b.params.end());
                }
                return {Expr::choice(std::move(alternatives)), std::move(params)};
            }
            case PNode::Par: {
                Built acc = build_node(node.children[0], ctx);
                for (std::size_t i = 1; i < node.children.size(); ++i) {
                    Built b = build_node(node.children[i], ctx);
                    acc.expr = Expr::interleave(acc.expr, b.expr);
                    acc.params.insert(b.params.begin(), b.params.end());
                }
                return acc;
            }
            case PNode::Body: {
                std::vector<Built> steps;
                for (const auto& child : node.children) steps.push_back(build_node(child, ctx));
                ExprPtr expr;
                std::set<std::string> params;
                if (steps.empty()) {
                    expr = Expr::empty();
                } else {
                    expr = steps.back().expr;
                    for (std::size_t i = steps.size() - 1; i-- > 0;)
                        expr = Expr::seq(steps[i].expr, expr);
                    for (const auto& s : steps) params.insert(s.params.begin(), s.params.end());
                }
                Predicate predicate;
                for (const auto& where : node.wheres)
                    for (const auto& atom : where.atoms)
                        if (auto built = build_atom(atom, params, ctx))
                            predicate.atoms.push_back(*built);
                if (!predicate.atoms.empty()) expr = Expr::guarded(expr, std::move(predicate));
                return {expr, std::move(params)};
            }
        }
        return {Expr::empty(), {}};
    }

    Built build_msg(const PNode& node, EetCtx& ctx) {
        Token at{TokKind::Ident, node.message, node.line, node.column};
        if (!doc_.has_component(node.sender))
            error(at, ParseErrorKind::UnknownName, "unknown component '" + node.sender + "'");
        if (!doc_.has_component(node.receiver))
            error(at, ParseErrorKind::UnknownName, "unknown component '" + node.receiver + "'");
        const MessageSig* sig = doc_.find_message(node.message);
        if (!sig) {
            error(at, ParseErrorKind::UnknownName, "unknown message '" + node.message + "'");
            return {Expr::empty(), {}};
        }
        if (sig->size() != node.terms.size()) {
            error(at, ParseErrorKind::ArityMismatch,
                  "message '" + node.message + "' expects " + std::to_string(sig->size()) +
                      " argument(s), got " + std::to_string(node.terms.size()));
            return {Expr::empty(), {}};
        }
        std::vector<Term> args;
        std::set<std::string> params;
        for (std::size_t i = 0; i < node.terms.size(); ++i) {
            const RawTerm& raw = node.terms[i];
            const std::string& domain = (*sig)[i].domain;
            Token term_at{TokKind::Ident, raw.text, raw.line, raw.column};
            if (!doc_.find_domain(domain)) {
                // The signature itself is broken; reported where it was declared.
                args.push_back(Term::constant(raw.text));
                continue;
            }
            if (doc_.domain_has_value(domain, raw.text)) {
                args.push_back(Term::constant(raw.text));
                continue;
            }
            auto [it, inserted] = ctx.param_domains.emplace(raw.text, domain);
            if (!inserted && it->second != domain)
                error(term_at, ParseErrorKind::DomainMismatch,
                      "parameter '" + raw.text + "' already has domain '" + it->second +
                          "', used here with '" + domain + "'");
            args.push_back(Term::param(raw.text));
            params.insert(raw.text);
        }
        return {Expr::msg(node.sender, node.receiver, node.message, std::move(args)), params};
    }

    std::optional<Atom> build_atom(const RawAtom& raw, const std::set<std::string>& body_params,
                                   EetCtx& ctx) {
        auto resolve_term = [&](const RawTerm& rt) -> std::optional<Term> {
            // A body parameter shadows any equally named domain value.
            if (body_params.count(rt.text)) return Term::param(rt.text);
            if (value_of_some_domain(rt.text)) return Term::constant(rt.text);
            error({TokKind::Ident, rt.text, rt.line, rt.column}, ParseErrorKind::UnknownName,
                  "'" + rt.text + "' is neither a parameter of this block nor a domain value");
            return std::nullopt;
        };
        auto lhs = resolve_term(raw.lhs);
        auto rhs = resolve_term(raw.rhs);
        if (!lhs || !rhs) return std::nullopt;

        Token at{TokKind::Ident, raw.lhs.text, raw.lhs.line, raw.lhs.column};
        auto domain_of = [&](const Term& t) -> std::string {
            auto it = ctx.param_domains.find(t.text);
            return it == ctx.param_domains.end() ? std::string() : it->second;
        };
        if (lhs->is_param && rhs->is_param) {
            if (domain_of(*lhs) != domain_of(*rhs))
                error(at, ParseErrorKind::DomainMismatch,
                      "'" + lhs->text + "' and '" + rhs->text + "' have different domains");
        } else if (lhs->is_param || rhs->is_param) {
            const Term& p = lhs->is_param ? *lhs : *rhs;
            const Term& c = lhs->is_param ? *rhs : *lhs;
            if (!doc_.domain_has_value(domain_of(p), c.text))
                error(at, ParseErrorKind::DomainMismatch,
                      "'" + c.text + "' is not a value of domain '" + domain_of(p) + "'");
        } else {
            bool share = false;
            for (const auto& [_, values] : doc_.domains) {
                bool l = std::find(values.begin(), values.end(), lhs->text) != values.end();
                bool r = std::find(values.begin(), values.end(), rhs->text) != values.end();
                if (l && r) share = true;
            }
            if (!share)
                error(at, ParseErrorKind::DomainMismatch,
                      "constants '" + lhs->text + "' and '" + rhs->text + "' share no domain");
        }
        return Atom{*lhs, raw.equal, *rhs};
    }

    void build_document() {
        std::vector<std::pair<std::string, std::vector<std::string>>> ref_graph;
        std::map<std::string, std::pair<int, int>> eet_pos;
        for (const auto& pe : eets_) {
            EetCtx ctx;
            Built built = build_node(pe.body, ctx);
            doc_.eets.emplace_back(pe.name, built.expr);
            eet_pos[pe.name] = {pe.line, pe.column};
            std::vector<std::string> targets;
            for (const auto& [at, target] : ctx.refs) {
                if (!eet_exists(target))
                    error({TokKind::Ident, target, at.line, at.column}, ParseErrorKind::UnknownName,
                          "reference to undefined eet '" + target + "'");
                targets.push_back(target);
            }
            ref_graph.emplace_back(pe.name, std::move(targets));
        }

        // Ref acyclicity on the name graph. A back edge closes a cycle at some
        // node; only the stack segment from there upward is on the cycle.
        std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
        std::map<std::string, const std::vector<std::string>*> adj;
        for (const auto& [name, targets] : ref_graph) adj[name] = &targets;
        std::set<std::string> cyclic;

        auto visit = [&](auto&& self, const std::string& name) -> std::optional<std::string> {
            auto it = adj.find(name);
            if (it == adj.end()) return std::nullopt;
            int& s = state[name];
            if (s == 1) return name;
            if (s == 2) return std::nullopt;
            s = 1;
            std::optional<std::string> root;
            for (const auto& t : *it->second)
                if (auto r = self(self, t)) {
                    root = r;
                    break;
                }
            s = 2;
            if (root) {
                cyclic.insert(name);
                if (*root == name) root.reset();  // cycle fully unwound
            }
            return root;
        };
        for (const auto& [name, _] : ref_graph) visit(visit, name);
        for (const auto& name : cyclic) {
            auto [line, column] = eet_pos[name];
            error({TokKind::Ident, name, line, column}, ParseErrorKind::CyclicRef,
                  "eet '" + name + "' is part of a reference cycle");
        }
    }

    bool eet_exists(const std::string& name) const {
        for (const auto& pe : eets_)
            if (pe.name == name) return true;
        return false;
    }
};

}  // namespace parser_detail

// Parses and validates a document. On failure every detected error is
// reported (recovery happens at statement boundaries) and no document is
// returned.
inline ParseResult parse(const std::string& source) {
    return parser_detail::Parser(source).run();
}

namespace parser_detail {

inline bool has_ref(const ExprPtr& e) {
    if (e->kind == ExprKind::Ref) return true;
    for (const auto& child : e->children)
        if (has_ref(child)) return true;
    return false;
}

inline ExprPtr rename_params(const ExprPtr& e, const std::map<std::string, std::string>& renaming) {
    auto rename_term = [&](const Term& t) {
        if (!t.is_param) return t;
        auto it = renaming.find(t.text);
        return it == renaming.end() ? t : Term::param(it->second);
    };
    switch (e->kind) {
        case ExprKind::Empty:
        case ExprKind::Dead:
        case ExprKind::Ref:
            return e;
        case ExprKind::Message: {
            std::vector<Term> args;
            args.reserve(e->args.size());
            for (const Term& t : e->args) args.push_back(rename_term(t));
            return Expr::msg(e->sender, e->receiver, e->message, std::move(args));
        }
        case ExprKind::Guarded: {
            Predicate guard;
            for (const Atom& a : e->guard.atoms)
                guard.atoms.push_back({rename_term(a.lhs), a.equal, rename_term(a.rhs)});
            return Expr::guarded(rename_params(e->children[0], renaming), std::move(guard));
        }
        case ExprKind::Seq:
            return Expr::seq(rename_params(e->children[0], renaming),
                             rename_params(e->children[1], renaming));
        case ExprKind::Interleave:
            return Expr::interleave(rename_params(e->children[0], renaming),
                                    rename_params(e->children[1], renaming));
        case ExprKind::Choice: {
            std::vector<ExprPtr> alternatives;
            for (const auto& child : e->children)
                alternatives.push_back(rename_params(child, renaming));
            return Expr::choice(std::move(alternatives));
        }
        case ExprKind::Loop:
            return Expr::loop(rename_params(e->children[0], renaming), e->loop_min, e->loop_max);
    }
    throw Error(ErrorKind::InvalidExpr, "unreachable expression kind");
}

// Inlines references depth-first. Each inlined copy gets its parameters
// renamed apart from every name seen so far, because a reference is closed at
// its own definition: its parameters never unify with the host's.
inline ExprPtr inline_refs(const Document& doc, const ExprPtr& e, std::set<std::string>& used,
                           std::set<std::string>& stack) {
    switch (e->kind) {
        case ExprKind::Ref: {
            ExprPtr target = doc.find_eet(e->ref_name);
            if (!target)
                throw Error(ErrorKind::UnknownName, "eet '" + e->ref_name + "' is not defined");
            if (stack.count(e->ref_name))
                throw Error(ErrorKind::InvalidExpr,
                            "cyclic reference through eet '" + e->ref_name + "'");
            stack.insert(e->ref_name);
            std::set<std::string> target_used;
            collect_param_names(target, target_used);
            ExprPtr closed = inline_refs(doc, target, target_used, stack);
            stack.erase(e->ref_name);

            std::set<std::string> params;
            collect_param_names(closed, params);
            std::map<std::string, std::string> renaming;
            for (const auto& p : params) {  // sorted, hence deterministic
                std::string fresh = p;
                for (unsigned k = 2; used.count(fresh); ++k)
                    fresh = p + "_" + std::to_string(k);
                used.insert(fresh);
                if (fresh != p) renaming[p] = fresh;
            }
            return renaming.empty() ? closed : rename_params(closed, renaming);
        }
        case ExprKind::Seq:
            return Expr::seq(inline_refs(doc, e->children[0], used, stack),
                             inline_refs(doc, e->children[1], used, stack));
        case ExprKind::Interleave:
            return Expr::interleave(inline_refs(doc, e->children[0], used, stack),
                                    inline_refs(doc, e->children[1], used, stack));
        case ExprKind::Choice: {
            std::vector<ExprPtr> alternatives;
            for (const auto& child : e->children)
                alternatives.push_back(inline_refs(doc, child, used, stack));
            return Expr::choice(std::move(alternatives));
        }
        case ExprKind::Loop:
            return Expr::loop(inline_refs(doc, e->children[0], used, stack), e->loop_min,
                              e->loop_max);
        case ExprKind::Guarded:
            return Expr::guarded(inline_refs(doc, e->children[0], used, stack), e->guard);
        default:
            return e;
    }
}

}  // namespace parser_detail

// Returns the named expression with all references recursively inlined; the
// result contains no Ref node.
inline ExprPtr resolve(const Document& doc, const std::string& name) {
    ExprPtr def = doc.find_eet(name);
    if (!def) throw Error(ErrorKind::UnknownName, "eet '" + name + "' is not defined");
    if (!parser_detail::has_ref(def)) return def;
    std::set<std::string> used;
    collect_param_names(def, used);
    std::set<std::string> stack{name};
    return parser_detail::inline_refs(doc, def, used, stack);
}

namespace parser_detail {

inline void print_steps(std::ostream& os, const ExprPtr& e, int indent);

inline void print_step_line(std::ostream& os, int indent, const std::string& text) {
    for (int i = 0; i < indent; ++i) os << "  ";
    os << text << "\n";
}

inline std::string term_list(const std::vector<Term>& terms) {
    std::string s = "(";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) s += ", ";
        s += terms[i].text;
    }
    return s + ")";
}

inline void print_steps(std::ostream& os, const ExprPtr& e, int indent) {
    switch (e->kind) {
        case ExprKind::Empty:
            return;  // an empty body prints as nothing
        case ExprKind::Dead:
            print_step_line(os, indent, "<dead>");  // debug only, not parseable
            return;
        case ExprKind::Seq:
            print_steps(os, e->children[0], indent);
            print_steps(os, e->children[1], indent);
            return;
        case ExprKind::Message:
            print_step_line(os, indent,
                            e->sender + " -> " + e->receiver + " : " + e->message +
                                term_list(e->args));
            return;
        case ExprKind::Ref:
            print_step_line(os, indent, "ref " + e->ref_name);
            return;
        case ExprKind::Choice: {
            print_step_line(os, indent, "choice {");
            for (std::size_t i = 0; i < e->children.size(); ++i) {
                if (i) print_step_line(os, indent, "|");
                print_steps(os, e->children[i], indent + 1);
            }
            print_step_line(os, indent, "}");
            return;
        }
        case ExprKind::Loop: {
            std::string bounds = std::to_string(e->loop_min) + ".." +
                                 (e->loop_max ? std::to_string(*e->loop_max) : std::string("*"));
            print_step_line(os, indent, "loop " + bounds + " {");
            print_steps(os, e->children[0], indent + 1);
            print_step_line(os, indent, "}");
            return;
        }
        case ExprKind::Interleave: {
            print_step_line(os, indent, "par {");
            print_steps(os, e->children[0], indent + 1);
            print_step_line(os, indent, "|");
            print_steps(os, e->children[1], indent + 1);
            print_step_line(os, indent, "}");
            return;
        }
        case ExprKind::Guarded: {
            print_steps(os, e->children[0], indent);
            print_step_line(os, indent, "where " + [&] {
                std::string s;
                for (std::size_t i = 0; i < e->guard.atoms.size(); ++i) {
                    const Atom& a = e->guard.atoms[i];
                    if (i) s += " and ";
                    s += a.lhs.text + (a.equal ? " == " : " != ") + a.rhs.text;
                }
                return s;
            }());
            return;
        }
    }
}

}  // namespace parser_detail

// Canonical text form; parse(pretty_print(parse(x))) reproduces parse(x).
inline std::string pretty_print(const Document& doc) {
    std::ostringstream os;
    for (const auto& [name, values] : doc.domains) {
        os << "domain " << name << " = { ";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) os << ", ";
            os << values[i];
        }
        os << " }\n";
    }
    if (!doc.components.empty()) {
        os << "component ";
        for (std::size_t i = 0; i < doc.components.size(); ++i) {
            if (i) os << ", ";
            os << doc.components[i];
        }
        os << "\n";
    }
    for (const auto& [name, sig] : doc.messages) {
        os << "msg " << name << "(";
        for (std::size_t i = 0; i < sig.size(); ++i) {
            if (i) os << ", ";
            os << sig[i].name << ": " << sig[i].domain;
        }
        os << ")\n";
    }
    for (const auto& [name, expr] : doc.eets) {
        os << "\neet " << name << " {\n";
        parser_detail::print_steps(os, expr, 1);
        os << "}\n";
    }
    return os.str();
}

}  // namespace eet
