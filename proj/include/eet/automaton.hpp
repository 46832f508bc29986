#pragma once

// Finite automata over the interaction alphabet, and the translation from
// expressions to automata. The accepted language of compile(e, doc) is the
// denotation of e: parameters expand to finite unions over their domains,
// loops become bounded unrolling or a star construction, interleaving is the
// shuffle product. All constructions stay epsilon-free.

#include <cassert>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"

namespace eet {

using State = std::size_t;

struct InteractionAutomaton {
    std::vector<Interaction> alphabet;  // sorted, no duplicates
    std::size_t num_states = 0;
    std::set<State> initial;
    std::set<State> accepting;
    // delta[state][symbol index] = successor set
    std::vector<std::map<std::size_t, std::set<State>>> delta;
    bool deterministic = false;

    std::size_t transition_count() const {
        std::size_t n = 0;
        for (const auto& post : delta)
            for (const auto& [_, succ] : post) n += succ.size();
        return n;
    }

    std::optional<std::size_t> symbol_index(const Interaction& ev) const {
        auto it = std::lower_bound(alphabet.begin(), alphabet.end(), ev);
        if (it == alphabet.end() || *it != ev) return std::nullopt;
        return static_cast<std::size_t>(it - alphabet.begin());
    }

    void add_transition(State from, std::size_t symbol, State to) {
        delta[from][symbol].insert(to);
    }

    bool accepts_epsilon() const {
        for (State s : initial)
            if (accepting.count(s)) return true;
        return false;
    }
};

// --- elementary automata ----------------------------------------------------

inline InteractionAutomaton automaton_epsilon() {
    InteractionAutomaton a;
    a.num_states = 1;
    a.delta.resize(1);
    a.initial = {0};
    a.accepting = {0};
    a.deterministic = true;
    return a;
}

inline InteractionAutomaton automaton_none() {
    InteractionAutomaton a;
    a.num_states = 1;
    a.delta.resize(1);
    a.initial = {0};
    a.deterministic = true;
    return a;
}

// Accepts exactly the given one-event words.
inline InteractionAutomaton automaton_symbols(const std::set<Interaction>& events) {
    InteractionAutomaton a;
    a.alphabet.assign(events.begin(), events.end());
    a.num_states = 2;
    a.delta.resize(2);
    a.initial = {0};
    a.accepting = {1};
    for (std::size_t i = 0; i < a.alphabet.size(); ++i) a.add_transition(0, i, 1);
    a.deterministic = true;
    return a;
}

namespace automaton_detail {

// Union of two sorted alphabets plus index remaps into the union.
inline std::vector<Interaction> merge_alphabets(const std::vector<Interaction>& a,
                                                const std::vector<Interaction>& b,
                                                std::vector<std::size_t>& remap_a,
                                                std::vector<std::size_t>& remap_b) {
    std::vector<Interaction> merged;
    merged.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    remap_a.assign(a.size(), 0);
    remap_b.assign(b.size(), 0);
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            remap_a[i++] = merged.size();
            merged.push_back(a[i - 1]);
        } else if (i == a.size() || b[j] < a[i]) {
            remap_b[j++] = merged.size();
            merged.push_back(b[j - 1]);
        } else {
            remap_a[i++] = merged.size();
            remap_b[j++] = merged.size();
            merged.push_back(a[i - 1]);
        }
    }
    return merged;
}

}  // namespace automaton_detail

// Same language over a larger alphabet (no new transitions).
inline InteractionAutomaton with_alphabet(const InteractionAutomaton& a,
                                          const std::vector<Interaction>& alphabet) {
    std::vector<std::size_t> remap_a, remap_b;
    auto merged = automaton_detail::merge_alphabets(a.alphabet, alphabet, remap_a, remap_b);
    InteractionAutomaton out;
    out.alphabet = std::move(merged);
    out.num_states = a.num_states;
    out.initial = a.initial;
    out.accepting = a.accepting;
    out.deterministic = a.deterministic;
    out.delta.resize(a.num_states);
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [sym, succ] : a.delta[s]) out.delta[s][remap_a[sym]] = succ;
    return out;
}

// Drops states unreachable from the initial set; ids are renumbered in
// discovery order, keeping results deterministic.
inline InteractionAutomaton trim(const InteractionAutomaton& a) {
    std::vector<State> order;
    std::map<State, State> id;
    std::deque<State> queue(a.initial.begin(), a.initial.end());
    for (State s : a.initial) {
        if (!id.count(s)) {
            id[s] = order.size();
            order.push_back(s);
        }
    }
    queue.assign(order.begin(), order.end());
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        for (const auto& [_, succ] : a.delta[s])
            for (State t : succ)
                if (!id.count(t)) {
                    id[t] = order.size();
                    order.push_back(t);
                    queue.push_back(t);
                }
    }
    InteractionAutomaton out;
    out.alphabet = a.alphabet;
    out.num_states = order.size();
    out.delta.resize(out.num_states);
    out.deterministic = a.deterministic;
    for (State s : a.initial) out.initial.insert(id[s]);
    for (std::size_t n = 0; n < order.size(); ++n) {
        State s = order[n];
        if (a.accepting.count(s)) out.accepting.insert(n);
        for (const auto& [sym, succ] : a.delta[s])
            for (State t : succ)
                if (id.count(t)) out.add_transition(n, sym, id[t]);
    }
    return out;
}

// L(a) ∪ L(b): disjoint union of the state graphs.
inline InteractionAutomaton unite(const InteractionAutomaton& a, const InteractionAutomaton& b) {
    std::vector<std::size_t> ra, rb;
    InteractionAutomaton out;
    out.alphabet = automaton_detail::merge_alphabets(a.alphabet, b.alphabet, ra, rb);
    out.num_states = a.num_states + b.num_states;
    out.delta.resize(out.num_states);
    const State off = a.num_states;
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [sym, succ] : a.delta[s])
            for (State t : succ) out.add_transition(s, ra[sym], t);
    for (State s = 0; s < b.num_states; ++s)
        for (const auto& [sym, succ] : b.delta[s])
            for (State t : succ) out.add_transition(s + off, rb[sym], t + off);
    out.initial = a.initial;
    for (State s : b.initial) out.initial.insert(s + off);
    out.accepting = a.accepting;
    for (State s : b.accepting) out.accepting.insert(s + off);
    out.deterministic = false;
    return out;
}

// L(a) · L(b), epsilon-free: accepting states of a additionally copy the
// initial transitions of b.
inline InteractionAutomaton concatenate(const InteractionAutomaton& a,
                                        const InteractionAutomaton& b) {
    std::vector<std::size_t> ra, rb;
    InteractionAutomaton out;
    out.alphabet = automaton_detail::merge_alphabets(a.alphabet, b.alphabet, ra, rb);
    out.num_states = a.num_states + b.num_states;
    out.delta.resize(out.num_states);
    const State off = a.num_states;
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [sym, succ] : a.delta[s])
            for (State t : succ) out.add_transition(s, ra[sym], t);
    for (State s = 0; s < b.num_states; ++s)
        for (const auto& [sym, succ] : b.delta[s])
            for (State t : succ) out.add_transition(s + off, rb[sym], t + off);
    for (State f : a.accepting)
        for (State i : b.initial)
            for (const auto& [sym, succ] : b.delta[i])
                for (State t : succ) out.add_transition(f, rb[sym], t + off);
    out.initial = a.initial;
    if (a.accepts_epsilon())
        for (State s : b.initial) out.initial.insert(s + off);
    for (State s : b.accepting) out.accepting.insert(s + off);
    if (b.accepts_epsilon()) out.accepting.insert(a.accepting.begin(), a.accepting.end());
    out.deterministic = false;
    return out;
}

// L(a)*: fresh initial-accepting state plus back edges from accepting states
// onto the initial transitions.
inline InteractionAutomaton star(const InteractionAutomaton& a) {
    InteractionAutomaton out;
    out.alphabet = a.alphabet;
    out.num_states = a.num_states + 1;
    out.delta.resize(out.num_states);
    const State fresh = a.num_states;
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [sym, succ] : a.delta[s])
            for (State t : succ) out.add_transition(s, sym, t);
    for (State i : a.initial)
        for (const auto& [sym, succ] : a.delta[i])
            for (State t : succ) {
                out.add_transition(fresh, sym, t);
                for (State f : a.accepting) out.add_transition(f, sym, t);
            }
    out.initial = {fresh};
    out.accepting = a.accepting;
    out.accepting.insert(fresh);
    out.deterministic = false;
    return out;
}

inline InteractionAutomaton optionally(const InteractionAutomaton& a) {
    return unite(a, automaton_epsilon());
}

// Concatenations of k body words for k in [min, max]; no max means unbounded.
inline InteractionAutomaton loop_automaton(const InteractionAutomaton& body, unsigned min,
                                           std::optional<unsigned> max) {
    if (max && *max < min) throw Error(ErrorKind::InvalidExpr, "loop max below min");
    InteractionAutomaton out = automaton_epsilon();
    out.alphabet = body.alphabet;  // keep the alphabet even when min == max == 0
    for (unsigned k = 0; k < min; ++k) out = trim(concatenate(out, body));
    if (!max) {
        out = trim(concatenate(out, star(body)));
    } else {
        for (unsigned k = min; k < *max; ++k) out = trim(concatenate(out, optionally(body)));
    }
    return out;
}

// All interleavings: product where either side moves independently.
inline InteractionAutomaton shuffle(const InteractionAutomaton& a, const InteractionAutomaton& b) {
    std::vector<std::size_t> ra, rb;
    InteractionAutomaton out;
    out.alphabet = automaton_detail::merge_alphabets(a.alphabet, b.alphabet, ra, rb);
    out.num_states = a.num_states * b.num_states;
    out.delta.resize(out.num_states);
    auto pair_id = [&](State p, State q) { return p * b.num_states + q; };
    for (State p = 0; p < a.num_states; ++p)
        for (State q = 0; q < b.num_states; ++q) {
            for (const auto& [sym, succ] : a.delta[p])
                for (State t : succ) out.add_transition(pair_id(p, q), ra[sym], pair_id(t, q));
            for (const auto& [sym, succ] : b.delta[q])
                for (State t : succ) out.add_transition(pair_id(p, q), rb[sym], pair_id(p, t));
        }
    for (State p : a.initial)
        for (State q : b.initial) out.initial.insert(pair_id(p, q));
    for (State p : a.accepting)
        for (State q : b.accepting) out.accepting.insert(pair_id(p, q));
    out.deterministic = false;
    return trim(out);
}

// Subset construction; only reachable subsets are materialized, so the result
// may be a partial DFA.
inline InteractionAutomaton determinize(const InteractionAutomaton& a) {
    if (a.deterministic && a.initial.size() == 1) return a;
    InteractionAutomaton out;
    out.alphabet = a.alphabet;
    out.deterministic = true;

    std::map<std::set<State>, State> ids;
    std::vector<std::set<State>> subsets;
    auto intern = [&](const std::set<State>& s) {
        auto [it, inserted] = ids.emplace(s, subsets.size());
        if (inserted) subsets.push_back(s);
        return it->second;
    };
    intern(a.initial);
    out.initial = {0};
    for (State n = 0; n < subsets.size(); ++n) {
        std::set<State> current = subsets[n];  // copy: subsets grows below
        std::map<std::size_t, std::set<State>> move;
        for (State s : current)
            for (const auto& [sym, succ] : a.delta[s]) move[sym].insert(succ.begin(), succ.end());
        for (const auto& [sym, target] : move) {
            State t = intern(target);
            if (out.delta.size() < subsets.size()) out.delta.resize(subsets.size());
            out.delta[n][sym] = {t};
        }
        if (out.delta.size() < subsets.size()) out.delta.resize(subsets.size());
        for (State s : current)
            if (a.accepting.count(s)) {
                out.accepting.insert(n);
                break;
            }
    }
    out.num_states = subsets.size();
    out.delta.resize(out.num_states);
    return out;
}

// Totalizes a deterministic automaton; a fresh sink state is always appended
// as the last state so callers can route unknown symbols to it.
inline InteractionAutomaton complete(const InteractionAutomaton& a) {
    if (!a.deterministic)
        throw Error(ErrorKind::InvalidExpr, "complete() requires a deterministic automaton");
    InteractionAutomaton out = a;
    const State sink = out.num_states++;
    out.delta.resize(out.num_states);
    for (State s = 0; s < out.num_states; ++s)
        for (std::size_t sym = 0; sym < out.alphabet.size(); ++sym)
            if (!out.delta[s].count(sym)) out.delta[s][sym] = {sink};
    return out;
}

// Σ* \ L(a) over a's own alphabet. Use with_alphabet first to complement over
// a larger universe.
inline InteractionAutomaton complement(const InteractionAutomaton& a) {
    InteractionAutomaton d = complete(determinize(a));
    std::set<State> flipped;
    for (State s = 0; s < d.num_states; ++s)
        if (!d.accepting.count(s)) flipped.insert(s);
    d.accepting = std::move(flipped);
    return d;
}

// L(a) ∩ L(b) over the union alphabet; labels absent from one side simply
// have no transitions there.
inline InteractionAutomaton intersect(const InteractionAutomaton& a,
                                      const InteractionAutomaton& b) {
    std::vector<std::size_t> ra, rb;
    InteractionAutomaton out;
    out.alphabet = automaton_detail::merge_alphabets(a.alphabet, b.alphabet, ra, rb);
    out.deterministic = a.deterministic && b.deterministic;

    // inverse remaps: union symbol -> local symbol
    std::map<std::size_t, std::size_t> inv_a, inv_b;
    for (std::size_t i = 0; i < ra.size(); ++i) inv_a[ra[i]] = i;
    for (std::size_t i = 0; i < rb.size(); ++i) inv_b[rb[i]] = i;

    std::map<std::pair<State, State>, State> ids;
    std::vector<std::pair<State, State>> pairs;
    auto intern = [&](State p, State q) {
        auto [it, inserted] = ids.emplace(std::make_pair(p, q), pairs.size());
        if (inserted) pairs.push_back({p, q});
        return it->second;
    };
    for (State p : a.initial)
        for (State q : b.initial) out.initial.insert(intern(p, q));
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        auto [p, q] = pairs[n];
        out.delta.resize(std::max(out.delta.size(), pairs.size()));
        for (const auto& [sym_a, succ_a] : a.delta[p]) {
            std::size_t sym = ra[sym_a];
            auto it = inv_b.find(sym);
            if (it == inv_b.end()) continue;
            auto jt = b.delta[q].find(it->second);
            if (jt == b.delta[q].end()) continue;
            for (State ta : succ_a)
                for (State tb : jt->second) {
                    State t = intern(ta, tb);
                    out.delta.resize(std::max(out.delta.size(), pairs.size()));
                    out.delta[n][sym].insert(t);
                }
        }
        if (a.accepting.count(p) && b.accepting.count(q)) out.accepting.insert(n);
    }
    out.num_states = pairs.size();
    out.delta.resize(out.num_states);
    return out;
}

// Membership by subset simulation.
inline bool accepts(const InteractionAutomaton& a, const Trace& t) {
    std::set<State> current = a.initial;
    for (const Interaction& ev : t) {
        auto sym = a.symbol_index(ev);
        if (!sym) return false;
        std::set<State> next;
        for (State s : current) {
            auto it = a.delta[s].find(*sym);
            if (it != a.delta[s].end()) next.insert(it->second.begin(), it->second.end());
        }
        if (next.empty()) return false;
        current = std::move(next);
    }
    for (State s : current)
        if (a.accepting.count(s)) return true;
    return false;
}

// Shortest accepted word, ties broken lexicographically on the sorted
// alphabet; no value when the language is empty.
inline std::optional<Trace> shortest_word(const InteractionAutomaton& a) {
    const std::size_t INF = static_cast<std::size_t>(-1);
    // distance from each state to an accepting state
    std::vector<std::vector<State>> reverse(a.num_states);
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [_, succ] : a.delta[s])
            for (State t : succ) reverse[t].push_back(s);
    std::vector<std::size_t> dist(a.num_states, INF);
    std::deque<State> queue;
    for (State s : a.accepting) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        for (State p : reverse[s])
            if (dist[p] == INF) {
                dist[p] = dist[s] + 1;
                queue.push_back(p);
            }
    }
    std::size_t best = INF;
    for (State s : a.initial) best = std::min(best, dist[s]);
    if (best == INF) return std::nullopt;

    // Greedy on subsets: one step on a symbol reduces the minimal distance by
    // at most one, so the first symbol keeping it on track is lexicographically
    // least among shortest witnesses.
    Trace word;
    std::set<State> current = a.initial;
    for (std::size_t remaining = best; remaining > 0; --remaining) {
        bool advanced = false;
        for (std::size_t sym = 0; sym < a.alphabet.size() && !advanced; ++sym) {
            std::set<State> next;
            for (State s : current) {
                auto it = a.delta[s].find(sym);
                if (it != a.delta[s].end()) next.insert(it->second.begin(), it->second.end());
            }
            if (next.empty()) continue;
            std::size_t d = INF;
            for (State s : next) d = std::min(d, dist[s]);
            if (d <= remaining - 1) {
                word.push_back(a.alphabet[sym]);
                current = std::move(next);
                advanced = true;
            }
        }
        if (!advanced) throw Error(ErrorKind::InvalidExpr, "witness search lost its path");
    }
    return word;
}

inline bool is_empty(const InteractionAutomaton& a) { return !shortest_word(a).has_value(); }

// Number of distinct accepted words of exactly the given length.
inline unsigned long long count_words(const InteractionAutomaton& a, std::size_t length) {
    InteractionAutomaton d = determinize(a);
    std::vector<unsigned long long> count(d.num_states, 0);
    for (State s : d.initial) count[s] = 1;
    for (std::size_t step = 0; step < length; ++step) {
        std::vector<unsigned long long> next(d.num_states, 0);
        for (State s = 0; s < d.num_states; ++s) {
            if (!count[s]) continue;
            for (const auto& [_, succ] : d.delta[s])
                for (State t : succ) next[t] += count[s];
        }
        count = std::move(next);
    }
    unsigned long long total = 0;
    for (State s : d.accepting) total += count[s];
    return total;
}

// Deterministic debug dump; stable across runs, suitable for golden tests.
inline std::string dump(const InteractionAutomaton& a) {
    std::ostringstream os;
    os << "states: " << a.num_states << "\n";
    os << "initial:";
    for (State s : a.initial) os << " " << s;
    os << "\naccepting:";
    for (State s : a.accepting) os << " " << s;
    os << "\n";
    for (State s = 0; s < a.num_states; ++s)
        for (const auto& [sym, succ] : a.delta[s])
            for (State t : succ)
                os << s << "\t->\t" << t << " : " << to_string(a.alphabet[sym]) << "\n";
    return os.str();
}

// --- compilation -------------------------------------------------------------

// Compiles a Ref-free expression to an automaton accepting exactly its
// denotation. Parameters shared between the operands of a sequence or an
// interleaving are bound jointly (same name, same value); parameters local to
// a loop body are expanded inside the body and thus rebound per iteration.
inline InteractionAutomaton compile(const ExprPtr& e, const Document& doc) {
    switch (e->kind) {
        case ExprKind::Empty:
            return automaton_epsilon();
        case ExprKind::Dead:
            return automaton_none();
        case ExprKind::Ref:
            throw Error(ErrorKind::UnresolvedRef,
                        "cannot compile unresolved reference '" + e->ref_name + "'");
        case ExprKind::Message: {
            auto params = free_params(e, doc);
            std::set<Interaction> events;
            for (const Binding& binding : enumerate_bindings(params, doc)) {
                ExprPtr inst = substitute_partial(e, binding);
                std::vector<std::string> args;
                args.reserve(inst->args.size());
                for (const Term& t : inst->args) args.push_back(t.text);
                events.insert({inst->sender, inst->receiver, inst->message, std::move(args)});
            }
            return automaton_symbols(events);
        }
        case ExprKind::Choice: {
            std::optional<InteractionAutomaton> acc;
            for (const auto& child : e->children) {
                InteractionAutomaton sub = compile(child, doc);
                acc = acc ? unite(*acc, sub) : std::move(sub);
            }
            return trim(*acc);
        }
        case ExprKind::Loop:
            return loop_automaton(compile(e->children[0], doc), e->loop_min, e->loop_max);
        case ExprKind::Seq:
        case ExprKind::Interleave: {
            auto shared = shared_free_params(e->children[0], e->children[1], doc);
            std::optional<InteractionAutomaton> acc;
            for (const Binding& binding : enumerate_bindings(shared, doc)) {
                ExprPtr left = substitute_partial(e->children[0], binding);
                ExprPtr right = substitute_partial(e->children[1], binding);
                InteractionAutomaton sub =
                    e->kind == ExprKind::Seq ? concatenate(compile(left, doc), compile(right, doc))
                                             : shuffle(compile(left, doc), compile(right, doc));
                acc = acc ? unite(*acc, sub) : std::move(sub);
            }
            if (!acc) return automaton_none();  // a shared parameter over an empty domain
            return trim(*acc);
        }
        case ExprKind::Guarded: {
            auto all = free_params(e, doc);
            auto names = predicate_param_names(e->guard);
            std::map<std::string, std::string> guard_params;
            for (const auto& name : names) guard_params.emplace(name, all.at(name));
            std::optional<InteractionAutomaton> acc;
            for (const Binding& binding : enumerate_bindings(guard_params, doc)) {
                ExprPtr sub = substitute_partial(e, binding);  // evaluates the guard
                if (sub->kind == ExprKind::Dead) continue;
                InteractionAutomaton compiled = compile(sub, doc);
                acc = acc ? unite(*acc, compiled) : std::move(compiled);
            }
            if (!acc) return automaton_none();
            return trim(*acc);
        }
    }
    throw Error(ErrorKind::InvalidExpr, "unreachable expression kind");
}

}  // namespace eet
