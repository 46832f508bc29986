#pragma once

// Core domain types for extended event traces: declarations, interactions,
// traces, and the expression tree, plus parameter handling (free_params,
// substitute) shared by every other header.

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eet {

enum class ErrorKind {
    UnknownMessage,
    UnknownName,
    UnknownInteraction,
    UnknownComponent,
    ArityMismatch,
    DomainMismatch,
    IncompleteBinding,
    UnresolvedRef,
    BoundTooLarge,
    InvalidExpr,
    LogSyntax,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnknownMessage: return "UnknownMessage";
        case ErrorKind::UnknownName: return "UnknownName";
        case ErrorKind::UnknownInteraction: return "UnknownInteraction";
        case ErrorKind::UnknownComponent: return "UnknownComponent";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::DomainMismatch: return "DomainMismatch";
        case ErrorKind::IncompleteBinding: return "IncompleteBinding";
        case ErrorKind::UnresolvedRef: return "UnresolvedRef";
        case ErrorKind::BoundTooLarge: return "BoundTooLarge";
        case ErrorKind::InvalidExpr: return "InvalidExpr";
        case ErrorKind::LogSyntax: return "LogSyntax";
    }
    return "?";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// One atomic synchronous event: send and receive are a single occurrence.
struct Interaction {
    std::string sender;
    std::string receiver;
    std::string message;
    std::vector<std::string> args;

    friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

// A finite interaction sequence.
using Trace = std::vector<Interaction>;

// "A -> B : m(v1, v2)"; the same shape the trace-log format uses.
inline std::string to_string(const Interaction& ev) {
    std::string s = ev.sender + " -> " + ev.receiver + " : " + ev.message + "(";
    for (std::size_t i = 0; i < ev.args.size(); ++i) {
        if (i) s += ", ";
        s += ev.args[i];
    }
    s += ")";
    return s;
}

// A message argument or predicate operand: either a formal parameter name or
// a concrete domain value.
struct Term {
    bool is_param = false;
    std::string text;

    static Term param(std::string name) { return {true, std::move(name)}; }
    static Term constant(std::string value) { return {false, std::move(value)}; }

    friend auto operator<=>(const Term&, const Term&) = default;
};

struct Atom {
    Term lhs;
    bool equal = true;  // false means !=
    Term rhs;

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

// Conjunction of (in)equality atoms.
struct Predicate {
    std::vector<Atom> atoms;

    friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

inline std::string to_string(const Term& t) { return t.text; }

inline std::string to_string(const Predicate& p) {
    std::string s;
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
        if (i) s += " and ";
        s += p.atoms[i].lhs.text;
        s += p.atoms[i].equal ? " == " : " != ";
        s += p.atoms[i].rhs.text;
    }
    return s;
}

enum class ExprKind {
    Empty,       // the language {epsilon}
    Dead,        // the empty language; produced only by failed guards
    Message,     // one message exchange, possibly with formal parameters
    Seq,         // concatenation
    Choice,      // union over a non-empty list of alternatives
    Loop,        // bounded or unbounded iteration
    Interleave,  // shuffle of two operands
    Ref,         // reference to a named definition, closed at that definition
    Guarded,     // body constrained by a predicate over its parameters
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. Construct through the factory functions; share
// freely, nodes are never mutated after construction.
class Expr {
public:
    ExprKind kind = ExprKind::Empty;

    // Message
    std::string sender;
    std::string receiver;
    std::string message;
    std::vector<Term> args;

    // Seq/Interleave: exactly two children; Loop/Guarded: one; Choice: >= 1.
    std::vector<ExprPtr> children;

    // Loop bounds; no value for max means unbounded.
    unsigned loop_min = 0;
    std::optional<unsigned> loop_max = 0;

    // Ref
    std::string ref_name;

    // Guarded
    Predicate guard;

    static ExprPtr empty() {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Empty;
        return e;
    }

    static ExprPtr dead() {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Dead;
        return e;
    }

    static ExprPtr msg(std::string sender, std::string receiver, std::string message,
                       std::vector<Term> args = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Message;
        e->sender = std::move(sender);
        e->receiver = std::move(receiver);
        e->message = std::move(message);
        e->args = std::move(args);
        return e;
    }

    static ExprPtr seq(ExprPtr left, ExprPtr right) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Seq;
        e->children = {std::move(left), std::move(right)};
        return e;
    }

    static ExprPtr choice(std::vector<ExprPtr> alternatives) {
        if (alternatives.empty())
            throw Error(ErrorKind::InvalidExpr, "choice requires at least one alternative");
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Choice;
        e->children = std::move(alternatives);
        return e;
    }

    static ExprPtr loop(ExprPtr body, unsigned min, std::optional<unsigned> max) {
        if (max && *max < min)
            throw Error(ErrorKind::InvalidExpr, "loop max below min");
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Loop;
        e->children = {std::move(body)};
        e->loop_min = min;
        e->loop_max = max;
        return e;
    }

    static ExprPtr interleave(ExprPtr left, ExprPtr right) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Interleave;
        e->children = {std::move(left), std::move(right)};
        return e;
    }

    static ExprPtr ref(std::string name) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Ref;
        e->ref_name = std::move(name);
        return e;
    }

    static ExprPtr guarded(ExprPtr body, Predicate guard) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Guarded;
        e->children = {std::move(body)};
        e->guard = std::move(guard);
        return e;
    }
};

// Structural equality.
inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::Empty:
        case ExprKind::Dead:
            return true;
        case ExprKind::Message:
            return a->sender == b->sender && a->receiver == b->receiver &&
                   a->message == b->message && a->args == b->args;
        case ExprKind::Ref:
            return a->ref_name == b->ref_name;
        case ExprKind::Loop:
            if (a->loop_min != b->loop_min || a->loop_max != b->loop_max) return false;
            break;
        case ExprKind::Guarded:
            if (a->guard != b->guard) return false;
            break;
        default:
            break;
    }
    if (a->children.size() != b->children.size()) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!equal(a->children[i], b->children[i])) return false;
    return true;
}

struct Param {
    std::string name;
    std::string domain;

    friend auto operator<=>(const Param&, const Param&) = default;
};

using MessageSig = std::vector<Param>;

// A parsed specification: finite domains, component names, message
// signatures, and named definitions, all in declaration order.
struct Document {
    std::vector<std::pair<std::string, std::vector<std::string>>> domains;
    std::vector<std::string> components;
    std::vector<std::pair<std::string, MessageSig>> messages;
    std::vector<std::pair<std::string, ExprPtr>> eets;

    const std::vector<std::string>* find_domain(const std::string& name) const {
        for (const auto& [n, values] : domains)
            if (n == name) return &values;
        return nullptr;
    }

    const MessageSig* find_message(const std::string& name) const {
        for (const auto& [n, sig] : messages)
            if (n == name) return &sig;
        return nullptr;
    }

    ExprPtr find_eet(const std::string& name) const {
        for (const auto& [n, e] : eets)
            if (n == name) return e;
        return nullptr;
    }

    bool has_component(const std::string& name) const {
        return std::find(components.begin(), components.end(), name) != components.end();
    }

    bool domain_has_value(const std::string& domain, const std::string& value) const {
        const auto* values = find_domain(domain);
        return values && std::find(values->begin(), values->end(), value) != values->end();
    }
};

inline bool operator==(const Document& a, const Document& b) {
    if (a.domains != b.domains || a.components != b.components || a.messages != b.messages)
        return false;
    if (a.eets.size() != b.eets.size()) return false;
    for (std::size_t i = 0; i < a.eets.size(); ++i)
        if (a.eets[i].first != b.eets[i].first || !equal(a.eets[i].second, b.eets[i].second))
            return false;
    return true;
}

// Assignment of concrete values to formal parameter names.
using Binding = std::map<std::string, std::string>;

namespace detail {

// Collects name -> domain for parameters in message argument positions.
// Guard operands are resolved afterwards against the collected set, since a
// guard may only mention parameters of its own body.
inline void free_params_rec(const ExprPtr& e, const Document& doc,
                            std::map<std::string, std::string>& out) {
    switch (e->kind) {
        case ExprKind::Empty:
        case ExprKind::Dead:
        case ExprKind::Ref:  // closed at its own definition
            return;
        case ExprKind::Message: {
            const MessageSig* sig = doc.find_message(e->message);
            if (!sig)
                throw Error(ErrorKind::UnknownMessage, "message '" + e->message + "' not declared");
            if (sig->size() != e->args.size())
                throw Error(ErrorKind::ArityMismatch,
                            "message '" + e->message + "' expects " + std::to_string(sig->size()) +
                                " argument(s), got " + std::to_string(e->args.size()));
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                const Term& t = e->args[i];
                const std::string& domain = (*sig)[i].domain;
                if (t.is_param) {
                    auto [it, inserted] = out.emplace(t.text, domain);
                    if (!inserted && it->second != domain)
                        throw Error(ErrorKind::DomainMismatch,
                                    "parameter '" + t.text + "' used with domains '" + it->second +
                                        "' and '" + domain + "'");
                } else if (!doc.domain_has_value(domain, t.text)) {
                    throw Error(ErrorKind::DomainMismatch,
                                "'" + t.text + "' is not a value of domain '" + domain + "'");
                }
            }
            return;
        }
        case ExprKind::Guarded: {
            free_params_rec(e->children[0], doc, out);
            for (const Atom& atom : e->guard.atoms)
                for (const Term* t : {&atom.lhs, &atom.rhs})
                    if (t->is_param && !out.count(t->text))
                        throw Error(ErrorKind::UnknownName,
                                    "guard parameter '" + t->text +
                                        "' does not occur in the guarded body");
            return;
        }
        default:
            for (const auto& child : e->children) free_params_rec(child, doc, out);
            return;
    }
}

}  // namespace detail

// Every formal parameter occurring in message argument positions or
// predicates of e, with its domain. References contribute nothing.
inline std::map<std::string, std::string> free_params(const ExprPtr& e, const Document& doc) {
    std::map<std::string, std::string> out;
    detail::free_params_rec(e, doc, out);
    return out;
}

// Parameter names appearing syntactically in e (messages and guards), without
// domain resolution. Refs are skipped here too.
inline void collect_param_names(const ExprPtr& e, std::set<std::string>& out) {
    switch (e->kind) {
        case ExprKind::Message:
            for (const Term& t : e->args)
                if (t.is_param) out.insert(t.text);
            return;
        case ExprKind::Guarded:
            for (const Atom& atom : e->guard.atoms) {
                if (atom.lhs.is_param) out.insert(atom.lhs.text);
                if (atom.rhs.is_param) out.insert(atom.rhs.text);
            }
            collect_param_names(e->children[0], out);
            return;
        case ExprKind::Ref:
            return;
        default:
            for (const auto& child : e->children) collect_param_names(child, out);
            return;
    }
}

namespace detail {

inline Term subst_term(const Term& t, const Binding& binding) {
    if (!t.is_param) return t;
    auto it = binding.find(t.text);
    return it == binding.end() ? t : Term::constant(it->second);
}

// Three-valued atom evaluation: no value while either side is still formal.
inline std::optional<bool> eval_atom(const Atom& a) {
    if (a.lhs.is_param || a.rhs.is_param) return std::nullopt;
    bool eq = a.lhs.text == a.rhs.text;
    return a.equal ? eq : !eq;
}

}  // namespace detail

// Replaces bound parameters by constants; parameters missing from the binding
// stay formal. Guards are evaluated as far as they become ground: a failed
// guard collapses the node to Dead, a satisfied one drops.
inline ExprPtr substitute_partial(const ExprPtr& e, const Binding& binding) {
    switch (e->kind) {
        case ExprKind::Empty:
        case ExprKind::Dead:
        case ExprKind::Ref:
            return e;
        case ExprKind::Message: {
            std::vector<Term> args;
            args.reserve(e->args.size());
            for (const Term& t : e->args) args.push_back(detail::subst_term(t, binding));
            if (args == e->args) return e;
            return Expr::msg(e->sender, e->receiver, e->message, std::move(args));
        }
        case ExprKind::Guarded: {
            ExprPtr body = substitute_partial(e->children[0], binding);
            Predicate remaining;
            for (const Atom& atom : e->guard.atoms) {
                Atom sub{detail::subst_term(atom.lhs, binding), atom.equal,
                         detail::subst_term(atom.rhs, binding)};
                if (auto value = detail::eval_atom(sub)) {
                    if (!*value) return Expr::dead();
                } else {
                    remaining.atoms.push_back(std::move(sub));
                }
            }
            if (remaining.atoms.empty()) return body;
            return Expr::guarded(std::move(body), std::move(remaining));
        }
        case ExprKind::Seq:
            return Expr::seq(substitute_partial(e->children[0], binding),
                             substitute_partial(e->children[1], binding));
        case ExprKind::Interleave:
            return Expr::interleave(substitute_partial(e->children[0], binding),
                                    substitute_partial(e->children[1], binding));
        case ExprKind::Choice: {
            std::vector<ExprPtr> alternatives;
            alternatives.reserve(e->children.size());
            for (const auto& child : e->children)
                alternatives.push_back(substitute_partial(child, binding));
            return Expr::choice(std::move(alternatives));
        }
        case ExprKind::Loop:
            return Expr::loop(substitute_partial(e->children[0], binding), e->loop_min,
                              e->loop_max);
    }
    throw Error(ErrorKind::InvalidExpr, "unreachable expression kind");
}

// Full instantiation: binding must cover every free parameter of e with a
// value from the parameter's domain. The result has no free parameters.
inline ExprPtr substitute(const ExprPtr& e, const Document& doc, const Binding& binding) {
    auto params = free_params(e, doc);
    for (const auto& [name, domain] : params) {
        auto it = binding.find(name);
        if (it == binding.end())
            throw Error(ErrorKind::IncompleteBinding, "no value for parameter '" + name + "'");
        if (!doc.domain_has_value(domain, it->second))
            throw Error(ErrorKind::DomainMismatch, "'" + it->second + "' is not a value of domain '" +
                                                       domain + "' (parameter '" + name + "')");
    }
    return substitute_partial(e, binding);
}

// Every assignment of domain values to the given parameters, in a fixed
// order: parameter names ascending, values in declaration order.
inline std::vector<Binding> enumerate_bindings(const std::map<std::string, std::string>& params,
                                               const Document& doc) {
    std::vector<Binding> out{{}};
    for (const auto& [name, domain] : params) {
        const auto* values = doc.find_domain(domain);
        if (!values) throw Error(ErrorKind::UnknownName, "domain '" + domain + "' is not declared");
        std::vector<Binding> grown;
        grown.reserve(out.size() * values->size());
        for (const auto& binding : out)
            for (const auto& v : *values) {
                Binding next = binding;
                next[name] = v;
                grown.push_back(std::move(next));
            }
        out = std::move(grown);
    }
    return out;
}

// Parameters free in both operands; these must be bound jointly when the
// operands contribute to the same trace.
inline std::map<std::string, std::string> shared_free_params(const ExprPtr& left,
                                                             const ExprPtr& right,
                                                             const Document& doc) {
    auto l = free_params(left, doc);
    auto r = free_params(right, doc);
    std::map<std::string, std::string> shared;
    for (const auto& [name, domain] : l)
        if (r.count(name)) shared.emplace(name, domain);
    return shared;
}

inline std::set<std::string> predicate_param_names(const Predicate& p) {
    std::set<std::string> names;
    for (const Atom& atom : p.atoms) {
        if (atom.lhs.is_param) names.insert(atom.lhs.text);
        if (atom.rhs.is_param) names.insert(atom.rhs.text);
    }
    return names;
}

// The expression whose language is exactly {t}: a chain of fully
// instantiated messages.
inline ExprPtr trace_to_expr(const Trace& t) {
    if (t.empty()) return Expr::empty();
    ExprPtr out;
    for (std::size_t i = t.size(); i-- > 0;) {
        std::vector<Term> args;
        args.reserve(t[i].args.size());
        for (const auto& v : t[i].args) args.push_back(Term::constant(v));
        ExprPtr node = Expr::msg(t[i].sender, t[i].receiver, t[i].message, std::move(args));
        out = out ? Expr::seq(node, out) : node;
    }
    return out;
}

// Checks that an interaction is declared: known components, known message,
// matching arity, every argument a value of its parameter's domain.
inline void check_declared(const Document& doc, const Interaction& ev) {
    auto reject = [&](const std::string& why) {
        throw Error(ErrorKind::UnknownInteraction, to_string(ev) + ": " + why);
    };
    if (!doc.has_component(ev.sender)) reject("unknown component '" + ev.sender + "'");
    if (!doc.has_component(ev.receiver)) reject("unknown component '" + ev.receiver + "'");
    const MessageSig* sig = doc.find_message(ev.message);
    if (!sig) reject("unknown message '" + ev.message + "'");
    if (sig->size() != ev.args.size())
        reject("expected " + std::to_string(sig->size()) + " argument(s), got " +
               std::to_string(ev.args.size()));
    for (std::size_t i = 0; i < ev.args.size(); ++i)
        if (!doc.domain_has_value((*sig)[i].domain, ev.args[i]))
            reject("'" + ev.args[i] + "' is not a value of domain '" + (*sig)[i].domain + "'");
}

// Re-checks every structural invariant of a Document; returns one line per
// violation. parse() output must always come back clean.
inline std::vector<std::string> validate(const Document& doc) {
    std::vector<std::string> problems;
    auto report = [&](const std::string& s) { problems.push_back(s); };

    std::set<std::string> seen;
    for (const auto& [name, values] : doc.domains) {
        if (!seen.insert(name).second) report("duplicate domain '" + name + "'");
        if (values.empty()) report("domain '" + name + "' has no values");
        std::set<std::string> distinct(values.begin(), values.end());
        if (distinct.size() != values.size())
            report("domain '" + name + "' repeats a value");
    }

    seen.clear();
    for (const auto& c : doc.components)
        if (!seen.insert(c).second) report("duplicate component '" + c + "'");

    seen.clear();
    for (const auto& [name, sig] : doc.messages) {
        if (!seen.insert(name).second) report("duplicate message '" + name + "'");
        for (const Param& p : sig)
            if (!doc.find_domain(p.domain))
                report("message '" + name + "' references unknown domain '" + p.domain + "'");
    }

    seen.clear();
    for (const auto& [name, expr] : doc.eets) {
        if (!seen.insert(name).second) report("duplicate eet '" + name + "'");
        (void)expr;
    }

    // Structural checks per definition; free_params performs the signature,
    // arity and domain checks along the way.
    struct Walker {
        const Document& doc;
        std::vector<std::string>& problems;
        const std::string& eet_name;

        void walk(const ExprPtr& e) {
            switch (e->kind) {
                case ExprKind::Choice:
                    if (e->children.empty())
                        problems.push_back("eet '" + eet_name + "': empty choice");
                    break;
                case ExprKind::Loop:
                    if (e->loop_max && *e->loop_max < e->loop_min)
                        problems.push_back("eet '" + eet_name + "': loop max below min");
                    break;
                case ExprKind::Ref:
                    if (!doc.find_eet(e->ref_name))
                        problems.push_back("eet '" + eet_name + "': unknown reference '" +
                                           e->ref_name + "'");
                    break;
                case ExprKind::Message:
                    if (!doc.has_component(e->sender))
                        problems.push_back("eet '" + eet_name + "': unknown component '" +
                                           e->sender + "'");
                    if (!doc.has_component(e->receiver))
                        problems.push_back("eet '" + eet_name + "': unknown component '" +
                                           e->receiver + "'");
                    break;
                default:
                    break;
            }
            for (const auto& child : e->children) walk(child);
        }
    };
    for (const auto& [name, expr] : doc.eets) {
        Walker{doc, problems, name}.walk(expr);
        try {
            free_params(expr, doc);
        } catch (const Error& err) {
            report("eet '" + name + "': " + err.what());
        }
    }

    // Ref acyclicity over the name graph.
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> mark;
    for (const auto& [name, _] : doc.eets) mark[name] = Mark::White;

    struct CycleCheck {
        const Document& doc;
        std::map<std::string, Mark>& mark;
        std::vector<std::string>& problems;

        void refs_of(const ExprPtr& e, std::vector<std::string>& out) {
            if (e->kind == ExprKind::Ref) out.push_back(e->ref_name);
            for (const auto& child : e->children) refs_of(child, out);
        }

        bool visit(const std::string& name) {  // true when a cycle goes through name
            auto it = mark.find(name);
            if (it == mark.end()) return false;  // unknown ref, reported above
            if (it->second == Mark::Grey) return true;
            if (it->second == Mark::Black) return false;
            it->second = Mark::Grey;
            std::vector<std::string> targets;
            refs_of(doc.find_eet(name), targets);
            bool cyclic = false;
            for (const auto& t : targets)
                if (visit(t)) {
                    cyclic = true;
                    break;
                }
            mark[name] = Mark::Black;
            if (cyclic) problems.push_back("eet '" + name + "' is part of a reference cycle");
            return cyclic;
        }
    };
    CycleCheck check{doc, mark, problems};
    for (const auto& [name, _] : doc.eets)
        if (mark[name] == Mark::White) check.visit(name);

    return problems;
}

}  // namespace eet
