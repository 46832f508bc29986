#pragma once

// Ground-truth oracle: computes an expression's denotation up to a length
// bound by direct structural recursion on trace sets. Deliberately shares
// nothing with the automaton path beyond the core model, so the two can
// cross-check each other.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"

namespace eet {

inline constexpr std::size_t kMaxEnumerationBound = 12;

struct BoundedDenotation {
    std::size_t bound = 0;
    std::set<Trace> traces;  // ordered lexicographically by construction
    bool exhaustive_to_bound = true;

    bool contains(const Trace& t) const { return traces.count(t) > 0; }
};

namespace enumerate_detail {

inline std::set<Trace> concat_capped(const std::set<Trace>& xs, const std::set<Trace>& ys,
                                     std::size_t bound) {
    std::set<Trace> out;
    for (const Trace& x : xs) {
        if (x.size() > bound) continue;
        for (const Trace& y : ys) {
            if (x.size() + y.size() > bound) continue;
            Trace joined = x;
            joined.insert(joined.end(), y.begin(), y.end());
            out.insert(std::move(joined));
        }
    }
    return out;
}

inline void merges_of(const Trace& x, std::size_t i, const Trace& y, std::size_t j, Trace& acc,
                      std::set<Trace>& out) {
    if (i == x.size() && j == y.size()) {
        out.insert(acc);
        return;
    }
    if (i < x.size()) {
        acc.push_back(x[i]);
        merges_of(x, i + 1, y, j, acc, out);
        acc.pop_back();
    }
    if (j < y.size()) {
        acc.push_back(y[j]);
        merges_of(x, i, y, j + 1, acc, out);
        acc.pop_back();
    }
}

// All order-preserving merges of pairs that fit the bound.
inline std::set<Trace> shuffle_capped(const std::set<Trace>& xs, const std::set<Trace>& ys,
                                      std::size_t bound) {
    std::set<Trace> out;
    for (const Trace& x : xs)
        for (const Trace& y : ys) {
            if (x.size() + y.size() > bound) continue;
            Trace acc;
            acc.reserve(x.size() + y.size());
            merges_of(x, 0, y, 0, acc, out);
        }
    return out;
}

inline std::set<Trace> denote_rec(const ExprPtr& e, const Document& doc, std::size_t bound) {
    switch (e->kind) {
        case ExprKind::Empty:
            return {Trace{}};
        case ExprKind::Dead:
            return {};
        case ExprKind::Ref:
            throw Error(ErrorKind::UnresolvedRef,
                        "cannot enumerate unresolved reference '" + e->ref_name + "'");
        case ExprKind::Message: {
            std::set<Trace> out;
            if (bound == 0) return out;
            auto params = free_params(e, doc);
            for (const Binding& binding : enumerate_bindings(params, doc)) {
                ExprPtr inst = substitute_partial(e, binding);
                std::vector<std::string> args;
                args.reserve(inst->args.size());
                for (const Term& t : inst->args) args.push_back(t.text);
                out.insert(Trace{{inst->sender, inst->receiver, inst->message, std::move(args)}});
            }
            return out;
        }
        case ExprKind::Choice: {
            std::set<Trace> out;
            for (const auto& child : e->children) {
                auto sub = denote_rec(child, doc, bound);
                out.insert(sub.begin(), sub.end());
            }
            return out;
        }
        case ExprKind::Seq:
        case ExprKind::Interleave: {
            auto shared = shared_free_params(e->children[0], e->children[1], doc);
            std::set<Trace> out;
            for (const Binding& binding : enumerate_bindings(shared, doc)) {
                auto left = denote_rec(substitute_partial(e->children[0], binding), doc, bound);
                auto right = denote_rec(substitute_partial(e->children[1], binding), doc, bound);
                auto sub = e->kind == ExprKind::Seq ? concat_capped(left, right, bound)
                                                    : shuffle_capped(left, right, bound);
                out.insert(sub.begin(), sub.end());
            }
            return out;
        }
        case ExprKind::Loop: {
            auto body = denote_rec(e->children[0], doc, bound);
            std::set<Trace> result;
            std::set<Trace> current{Trace{}};  // concatenations of exactly k body words
            const unsigned long min = e->loop_min;
            // Without an upper bound the iteration reaches a fixpoint within
            // bound+1 rounds: a word of length <= bound never needs more than
            // bound non-empty factors, plus empty padding to reach min.
            const unsigned long hard_stop =
                e->loop_max ? *e->loop_max : bound + min + 2;
            for (unsigned long k = 0;; ++k) {
                if (k >= min) result.insert(current.begin(), current.end());
                if (k >= hard_stop || current.empty()) break;
                auto next = concat_capped(current, body, bound);
                if (next == current && k >= min) break;
                current = std::move(next);
            }
            return result;
        }
        case ExprKind::Guarded: {
            auto all = free_params(e, doc);
            auto names = predicate_param_names(e->guard);
            std::map<std::string, std::string> guard_params;
            for (const auto& name : names) guard_params.emplace(name, all.at(name));
            std::set<Trace> out;
            for (const Binding& binding : enumerate_bindings(guard_params, doc)) {
                ExprPtr sub = substitute_partial(e, binding);  // evaluates the guard
                if (sub->kind == ExprKind::Dead) continue;
                auto traces = denote_rec(sub, doc, bound);
                out.insert(traces.begin(), traces.end());
            }
            return out;
        }
    }
    throw Error(ErrorKind::InvalidExpr, "unreachable expression kind");
}

}  // namespace enumerate_detail

// Every trace of the denotation with length <= bound.
inline BoundedDenotation denote(const ExprPtr& e, const Document& doc, std::size_t bound) {
    if (bound > kMaxEnumerationBound)
        throw Error(ErrorKind::BoundTooLarge,
                    "enumeration bound " + std::to_string(bound) + " exceeds " +
                        std::to_string(kMaxEnumerationBound));
    BoundedDenotation out;
    out.bound = bound;
    out.traces = enumerate_detail::denote_rec(e, doc, bound);
    out.exhaustive_to_bound = true;
    return out;
}

}  // namespace eet
