#pragma once

// Conformance questions over compiled expressions: trace membership, loose
// scenario consistency (shared segment or embedding), refinement as language
// inclusion, conjunction emptiness, and language equivalence. Witnesses are
// shortest, ties broken lexicographically, and always replayable.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "automaton.hpp"
#include "enumerate.hpp"
#include "model.hpp"

namespace eet {

enum class Question {
    Member,
    LooseSegment,
    LooseEmbed,
    Refines,
    ConjoinNonEmpty,
    Equivalent,
};

inline const char* to_string(Question q) {
    switch (q) {
        case Question::Member: return "member";
        case Question::LooseSegment: return "loose-segment";
        case Question::LooseEmbed: return "loose-embed";
        case Question::Refines: return "refines";
        case Question::ConjoinNonEmpty: return "conjoin-nonempty";
        case Question::Equivalent: return "equivalent";
    }
    return "?";
}

struct AutomatonStats {
    std::string role;
    std::size_t states = 0;
    std::size_t transitions = 0;
};

struct CheckReport {
    Question question = Question::Member;
    bool holds = false;
    std::optional<Trace> witness;
    std::vector<AutomatonStats> stats;
};

inline nlohmann::ordered_json to_json(const CheckReport& report) {
    nlohmann::ordered_json j;
    j["question"] = to_string(report.question);
    j["holds"] = report.holds;
    if (report.witness) {
        auto events = nlohmann::ordered_json::array();
        for (const Interaction& ev : *report.witness) events.push_back(to_string(ev));
        j["witness"] = std::move(events);
    } else {
        j["witness"] = nullptr;
    }
    auto automata = nlohmann::ordered_json::array();
    for (const AutomatonStats& s : report.stats) {
        nlohmann::ordered_json entry;
        entry["role"] = s.role;
        entry["states"] = s.states;
        entry["transitions"] = s.transitions;
        automata.push_back(std::move(entry));
    }
    j["stats"] = nlohmann::ordered_json{{"automata", std::move(automata)}};
    return j;
}

namespace analysis_detail {

inline AutomatonStats stats_of(const std::string& role, const InteractionAutomaton& a) {
    return {role, a.num_states, a.transition_count()};
}

// Self-loops on every alphabet symbol at every state: the closure accepts
// all words containing an accepted word as a (not necessarily contiguous)
// subsequence.
inline InteractionAutomaton embedding_closure(const InteractionAutomaton& a) {
    InteractionAutomaton out = a;
    for (State s = 0; s < out.num_states; ++s)
        for (std::size_t sym = 0; sym < out.alphabet.size(); ++sym) out.delta[s][sym].insert(s);
    out.deterministic = false;
    return out;
}

}  // namespace analysis_detail

// Complete-description reading: the trace must lie in the language.
inline CheckReport member(const Trace& t, const ExprPtr& e, const Document& doc) {
    for (const Interaction& ev : t) check_declared(doc, ev);
    InteractionAutomaton a = compile(e, doc);
    CheckReport report;
    report.question = Question::Member;
    report.holds = accepts(a, t);
    report.stats = {analysis_detail::stats_of("expression", a)};
    return report;
}

enum class LooseMode { Segment, Embed };

// Scenario consistency. Segment: the scenario and the behavior share a word.
// Embed: some behavior word contains a scenario word as a subsequence, i.e.
// other messages may come in between.
inline CheckReport loose_consistent(const ExprPtr& scenario, const ExprPtr& behavior,
                                    LooseMode mode, const Document& doc) {
    InteractionAutomaton sa = compile(scenario, doc);
    InteractionAutomaton ba = compile(behavior, doc);
    CheckReport report;
    report.question = mode == LooseMode::Segment ? Question::LooseSegment : Question::LooseEmbed;
    report.stats.push_back(analysis_detail::stats_of("scenario", sa));
    report.stats.push_back(analysis_detail::stats_of("behavior", ba));

    InteractionAutomaton lhs = sa;
    if (mode == LooseMode::Embed)
        lhs = analysis_detail::embedding_closure(with_alphabet(sa, ba.alphabet));
    InteractionAutomaton product = intersect(lhs, ba);
    report.stats.push_back(analysis_detail::stats_of("product", product));
    report.witness = shortest_word(product);
    report.holds = report.witness.has_value();
    return report;
}

// Refinement is language inclusion, decided via the complement of the
// abstract side over the union alphabet. A false answer carries a shortest
// trace of the concrete language outside the abstract one.
inline CheckReport refines(const ExprPtr& concrete, const ExprPtr& abstract, const Document& doc) {
    InteractionAutomaton ca = compile(concrete, doc);
    InteractionAutomaton aa = compile(abstract, doc);
    CheckReport report;
    report.question = Question::Refines;
    report.stats.push_back(analysis_detail::stats_of("concrete", ca));
    report.stats.push_back(analysis_detail::stats_of("abstract", aa));

    std::vector<std::size_t> ra, rb;
    auto union_alphabet = automaton_detail::merge_alphabets(ca.alphabet, aa.alphabet, ra, rb);
    InteractionAutomaton comp = complement(with_alphabet(aa, union_alphabet));
    report.stats.push_back(analysis_detail::stats_of("abstract-complement", comp));
    InteractionAutomaton product = intersect(with_alphabet(ca, union_alphabet), comp);
    report.stats.push_back(analysis_detail::stats_of("product", product));

    auto counterexample = shortest_word(product);
    report.holds = !counterexample.has_value();
    if (counterexample) report.witness = std::move(counterexample);
    return report;
}

// Non-emptiness of the conjunction (intersection) of the given languages;
// holds comes with a shortest common trace.
inline CheckReport conjoin_nonempty(const std::vector<ExprPtr>& es, const Document& doc) {
    if (es.empty())
        throw Error(ErrorKind::InvalidExpr, "conjunction requires at least one expression");
    CheckReport report;
    report.question = Question::ConjoinNonEmpty;
    std::optional<InteractionAutomaton> product;
    for (std::size_t i = 0; i < es.size(); ++i) {
        InteractionAutomaton a = compile(es[i], doc);
        report.stats.push_back(
            analysis_detail::stats_of("operand-" + std::to_string(i + 1), a));
        product = product ? intersect(*product, a) : std::move(a);
    }
    if (es.size() > 1) report.stats.push_back(analysis_detail::stats_of("product", *product));
    report.witness = shortest_word(*product);
    report.holds = report.witness.has_value();
    return report;
}

// Language equality via inclusion both ways; a false answer carries a
// distinguishing trace accepted by exactly one side.
inline CheckReport equivalent(const ExprPtr& a, const ExprPtr& b, const Document& doc) {
    CheckReport forward = refines(a, b, doc);
    CheckReport report;
    report.question = Question::Equivalent;
    report.stats = forward.stats;
    if (!forward.holds) {
        report.holds = false;
        report.witness = forward.witness;
        return report;
    }
    CheckReport backward = refines(b, a, doc);
    report.stats.insert(report.stats.end(), backward.stats.begin(), backward.stats.end());
    report.holds = backward.holds;
    report.witness = backward.witness;
    return report;
}

}  // namespace eet
