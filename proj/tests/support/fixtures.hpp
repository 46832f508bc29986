#pragma once

// Shared test scaffolding: fixture loading, a small document for generated
// expressions, a seeded random expression/trace generator, and language
// helpers built on the public automaton operations.

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eet/automaton.hpp"
#include "eet/model.hpp"
#include "eet/parser.hpp"

namespace testsupport {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

inline eet::Document load_car_rental() {
    auto result = eet::parse(read_file(fixture_path("car_rental.eet")));
    if (!result.ok()) throw std::runtime_error("car_rental.eet failed to parse");
    return *result.document;
}

inline eet::Trace fig2_trace() {
    return {
        {"Customer", "ReservationBranch", "request", {"p1", "p2", "compact"}},
        {"ReservationBranch", "PickupBranch", "check_availability", {"p1", "p2", "compact"}},
        {"PickupBranch", "ReservationBranch", "available", {}},
        {"ReservationBranch", "Customer", "offer", {"q1"}},
        {"Customer", "ReservationBranch", "confirmation", {}},
    };
}

// Document the generators draw from: two components, one two-valued domain,
// two plain messages and two parameterized ones.
inline eet::Document generator_doc() {
    eet::Document doc;
    doc.domains.emplace_back("V", std::vector<std::string>{"v1", "v2"});
    doc.components = {"A", "B"};
    doc.messages.emplace_back("m0", eet::MessageSig{});
    doc.messages.emplace_back("m1", eet::MessageSig{});
    doc.messages.emplace_back("m2", eet::MessageSig{{"x", "V"}});
    doc.messages.emplace_back("m3", eet::MessageSig{{"x", "V"}});
    return doc;
}

using Rng = std::mt19937;

inline unsigned pick(Rng& rng, unsigned n) {
    return std::uniform_int_distribution<unsigned>(0, n - 1)(rng);
}

// Random message leaf. Sender/receiver are fixed per message name, keeping
// the reachable alphabet at five interactions: m0, m1, m2(v1), m2(v2), m3(v1).
inline eet::ExprPtr random_message(Rng& rng) {
    switch (pick(rng, 6)) {
        case 0: return eet::Expr::msg("A", "B", "m0");
        case 1: return eet::Expr::msg("B", "A", "m1");
        case 2: return eet::Expr::msg("A", "B", "m2", {eet::Term::param("x")});
        case 3: return eet::Expr::msg("A", "B", "m2", {eet::Term::constant("v1")});
        case 4: return eet::Expr::msg("A", "B", "m2", {eet::Term::param("y")});
        default: return eet::Expr::msg("B", "B", "m3", {eet::Term::constant("v1")});
    }
}

// Random expression of the acceptance shape: depth <= 4, loop bounds from
// {0..1, 0..2, 0..*}, occasional guards over parameters of the body.
inline eet::ExprPtr random_expr(Rng& rng, const eet::Document& doc, unsigned depth = 4) {
    if (depth == 0) return pick(rng, 10) == 0 ? eet::Expr::empty() : random_message(rng);
    switch (pick(rng, 20)) {
        case 0:
            return eet::Expr::empty();
        case 1: case 2: case 3: case 4: case 5:
            return random_message(rng);
        case 6: case 7: case 8: case 9:
            return eet::Expr::seq(random_expr(rng, doc, depth - 1),
                                  random_expr(rng, doc, depth - 1));
        case 10: case 11: case 12: {
            std::vector<eet::ExprPtr> alternatives;
            unsigned n = 2 + pick(rng, 2);
            for (unsigned i = 0; i < n; ++i)
                alternatives.push_back(random_expr(rng, doc, depth - 1));
            return eet::Expr::choice(std::move(alternatives));
        }
        case 13: case 14: case 15: {
            static const std::pair<unsigned, std::optional<unsigned>> bounds[] = {
                {0, 1}, {0, 2}, {0, std::nullopt}};
            auto [min, max] = bounds[pick(rng, 3)];
            return eet::Expr::loop(random_expr(rng, doc, depth - 1), min, max);
        }
        case 16: case 17: {
            return eet::Expr::interleave(random_expr(rng, doc, depth - 1),
                                         random_expr(rng, doc, depth - 1));
        }
        default: {
            eet::ExprPtr body = random_expr(rng, doc, depth - 1);
            auto params = eet::free_params(body, doc);
            if (params.empty()) return body;
            std::vector<std::string> names;
            for (const auto& [name, _] : params) names.push_back(name);
            const std::string& p = names[pick(rng, names.size())];
            const std::string& domain = params.at(p);
            eet::Term lhs = eet::Term::param(p);
            eet::Term rhs;
            if (names.size() > 1 && pick(rng, 2) == 0) {
                std::string q = names[pick(rng, names.size())];
                if (params.at(q) == domain && q != p) rhs = eet::Term::param(q);
            }
            if (rhs.text.empty()) {
                const auto& values = *doc.find_domain(domain);
                rhs = eet::Term::constant(values[pick(rng, values.size())]);
            }
            eet::Predicate guard;
            guard.atoms.push_back({lhs, pick(rng, 2) == 0, rhs});
            return eet::Expr::guarded(body, std::move(guard));
        }
    }
}

// Random expression whose compiled alphabet stays within the limit.
inline eet::ExprPtr random_bounded_expr(Rng& rng, const eet::Document& doc,
                                        std::size_t max_alphabet = 5) {
    for (;;) {
        eet::ExprPtr e = random_expr(rng, doc);
        eet::InteractionAutomaton a = eet::compile(e, doc);
        if (a.alphabet.size() <= max_alphabet) return e;
    }
}

inline eet::Trace random_trace(Rng& rng, const std::vector<eet::Interaction>& alphabet,
                               std::size_t max_len) {
    eet::Trace t;
    if (alphabet.empty()) return t;
    std::size_t len = pick(rng, static_cast<unsigned>(max_len + 1));
    for (std::size_t i = 0; i < len; ++i) t.push_back(alphabet[pick(rng, alphabet.size())]);
    return t;
}

// A near-miss or near-hit: mutate an existing word by one edit.
inline eet::Trace mutate_trace(Rng& rng, eet::Trace t,
                               const std::vector<eet::Interaction>& alphabet,
                               std::size_t max_len) {
    if (alphabet.empty()) return t;
    switch (pick(rng, 3)) {
        case 0:  // insert
            if (t.size() < max_len)
                t.insert(t.begin() + pick(rng, static_cast<unsigned>(t.size() + 1)),
                         alphabet[pick(rng, alphabet.size())]);
            break;
        case 1:  // delete
            if (!t.empty()) t.erase(t.begin() + pick(rng, static_cast<unsigned>(t.size())));
            break;
        default:  // replace
            if (!t.empty())
                t[pick(rng, static_cast<unsigned>(t.size()))] =
                    alphabet[pick(rng, alphabet.size())];
            break;
    }
    return t;
}

// All accepted words up to a length, straight off the automaton. Test-side
// counterpart to the oracle's set; kept tiny and independent of both.
inline std::set<eet::Trace> words_up_to(const eet::InteractionAutomaton& a, std::size_t max_len) {
    std::set<eet::Trace> out;
    struct Item {
        std::set<eet::State> states;
        eet::Trace word;
    };
    std::vector<Item> frontier{{a.initial, {}}};
    for (std::size_t len = 0; len <= max_len; ++len) {
        std::vector<Item> next;
        for (const auto& item : frontier) {
            for (eet::State s : item.states)
                if (a.accepting.count(s)) {
                    out.insert(item.word);
                    break;
                }
            if (len == max_len) continue;
            for (std::size_t sym = 0; sym < a.alphabet.size(); ++sym) {
                std::set<eet::State> move;
                for (eet::State s : item.states) {
                    auto it = a.delta[s].find(sym);
                    if (it != a.delta[s].end()) move.insert(it->second.begin(), it->second.end());
                }
                if (move.empty()) continue;
                eet::Trace word = item.word;
                word.push_back(a.alphabet[sym]);
                next.push_back({std::move(move), std::move(word)});
            }
        }
        frontier = std::move(next);
    }
    return out;
}

// Language equality through the public inclusion machinery.
inline bool language_equal(const eet::InteractionAutomaton& a, const eet::InteractionAutomaton& b) {
    std::vector<std::size_t> ra, rb;
    auto alphabet = eet::automaton_detail::merge_alphabets(a.alphabet, b.alphabet, ra, rb);
    auto ea = eet::with_alphabet(a, alphabet);
    auto eb = eet::with_alphabet(b, alphabet);
    return eet::is_empty(eet::intersect(ea, eet::complement(eb))) &&
           eet::is_empty(eet::intersect(eb, eet::complement(ea)));
}

}  // namespace testsupport
