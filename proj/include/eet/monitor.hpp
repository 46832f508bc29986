#pragma once

// Online conformance against a complete description: events are fed one at a
// time into the determinized, completed automaton, and every step yields a
// verdict pair (in_language, extensible). Extensibility means some strictly
// longer accepted word is still reachable; once lost it never comes back.

#include <memory>
#include <vector>

#include "automaton.hpp"
#include "model.hpp"

namespace eet {

enum class VerdictToken {
    AcceptedLive,   // in the language, and longer accepted words remain
    AcceptedFinal,  // in the language, nothing accepted extends the word
    Pending,        // not (yet) in the language, completion still possible
    Violated,       // permanently outside the language
};

inline const char* to_string(VerdictToken v) {
    switch (v) {
        case VerdictToken::AcceptedLive: return "ACCEPTED-LIVE";
        case VerdictToken::AcceptedFinal: return "ACCEPTED-FINAL";
        case VerdictToken::Pending: return "PENDING";
        case VerdictToken::Violated: return "VIOLATED";
    }
    return "?";
}

inline VerdictToken verdict_token(bool in_language, bool extensible) {
    if (in_language) return extensible ? VerdictToken::AcceptedLive : VerdictToken::AcceptedFinal;
    return extensible ? VerdictToken::Pending : VerdictToken::Violated;
}

namespace monitor_detail {

// Immutable compiled form shared by all monitor states of one description.
struct CompiledDescription {
    InteractionAutomaton dfa;  // deterministic and complete; last state is the sink
    State sink = 0;
    std::vector<bool> coreachable;  // can reach an accepting state in >= 0 steps
};

inline std::shared_ptr<const CompiledDescription> build(const ExprPtr& e, const Document& doc) {
    auto compiled = std::make_shared<CompiledDescription>();
    compiled->dfa = complete(determinize(compile(e, doc)));
    compiled->sink = compiled->dfa.num_states - 1;  // complete() appends the sink

    std::vector<std::vector<State>> reverse(compiled->dfa.num_states);
    for (State s = 0; s < compiled->dfa.num_states; ++s)
        for (const auto& [_, succ] : compiled->dfa.delta[s])
            for (State t : succ) reverse[t].push_back(s);
    compiled->coreachable.assign(compiled->dfa.num_states, false);
    std::vector<State> stack(compiled->dfa.accepting.begin(), compiled->dfa.accepting.end());
    for (State s : stack) compiled->coreachable[s] = true;
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        for (State p : reverse[s])
            if (!compiled->coreachable[p]) {
                compiled->coreachable[p] = true;
                stack.push_back(p);
            }
    }
    return compiled;
}

inline bool extensible_from(const CompiledDescription& c, State s) {
    for (const auto& [_, succ] : c.dfa.delta[s])
        for (State t : succ)
            if (c.coreachable[t]) return true;
    return false;
}

}  // namespace monitor_detail

struct MonitorState {
    std::shared_ptr<const monitor_detail::CompiledDescription> automaton;
    State current = 0;
    std::size_t consumed = 0;
    bool in_language = false;
    bool extensible = false;

    VerdictToken verdict() const { return verdict_token(in_language, extensible); }
};

inline MonitorState start(const ExprPtr& e, const Document& doc) {
    MonitorState s;
    s.automaton = monitor_detail::build(e, doc);
    s.current = *s.automaton->dfa.initial.begin();
    s.consumed = 0;
    s.in_language = s.automaton->dfa.accepting.count(s.current) > 0;
    s.extensible = monitor_detail::extensible_from(*s.automaton, s.current);
    return s;
}

// Advances by one event. An undeclared interaction is a configuration error,
// not a protocol violation; a declared interaction outside the description's
// alphabet moves to the sink.
inline MonitorState step(const MonitorState& s, const Interaction& ev, const Document& doc) {
    check_declared(doc, ev);
    const auto& c = *s.automaton;
    State next = c.sink;
    if (auto sym = c.dfa.symbol_index(ev)) {
        auto it = c.dfa.delta[s.current].find(*sym);
        next = *it->second.begin();  // complete DFA: always a unique successor
    }
    MonitorState out;
    out.automaton = s.automaton;
    out.current = next;
    out.consumed = s.consumed + 1;
    out.in_language = c.dfa.accepting.count(next) > 0;
    out.extensible = monitor_detail::extensible_from(c, next);
    return out;
}

struct StepVerdict {
    std::size_t index = 0;  // 1-based position in the log
    Interaction event;
    bool in_language = false;
    bool extensible = false;
    VerdictToken verdict = VerdictToken::Pending;
};

struct RunResult {
    MonitorState final_state;
    std::vector<StepVerdict> verdicts;
};

// Folds step over a log, one verdict record per event. The first undeclared
// interaction aborts with its 1-based position in the message.
inline RunResult run_log(const ExprPtr& e, const Document& doc, const Trace& log) {
    RunResult result;
    result.final_state = start(e, doc);
    result.verdicts.reserve(log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        try {
            result.final_state = step(result.final_state, log[i], doc);
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::UnknownInteraction)
                throw Error(ErrorKind::UnknownInteraction,
                            "event " + std::to_string(i + 1) + ": " + err.what());
            throw;
        }
        result.verdicts.push_back({i + 1, log[i], result.final_state.in_language,
                                   result.final_state.extensible,
                                   result.final_state.verdict()});
    }
    return result;
}

}  // namespace eet
