#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "nufab/errors.hpp"

namespace nufab::sat {

// Literals: variable v (0-based) positive = 2v, negative = 2v+1.
using Lit = int;

inline Lit mk_lit(int var, bool neg = false) { return 2 * var + (neg ? 1 : 0); }
inline int lit_var(Lit l) { return l >> 1; }
inline bool lit_neg(Lit l) { return l & 1; }
inline Lit lit_not(Lit l) { return l ^ 1; }

enum class Result { Sat, Unsat, Budget };

struct SolveBudget {
    double seconds = 0;          // 0 = unlimited
    long max_conflicts = 0;      // 0 = unlimited
    size_t max_literals = 0;     // clause database size cap, 0 = unlimited
    std::function<bool()> interrupt; // return true to stop
};


// Conflict-driven clause learning solver with two-watched-literal
// propagation, VSIDS-style activity, phase saving and Luby restarts.
// Clauses may be added between solve() calls; solving under assumptions is
// supported for removable constraints.
class Solver {
  public:
    int new_var()
    {
        int v = n_vars_++;
        assign_.push_back(-1);
        phase_.push_back(0);
        level_.push_back(0);
        reason_.push_back(-1);
        activity_.push_back(0.0);
        watches_.push_back({});
        watches_.push_back({});
        heap_pos_.push_back(-1);
        seen_.push_back(0);
        heap_insert(v);
        return v;
    }

    int num_vars() const { return n_vars_; }
    long num_clauses() const { return n_problem_clauses_; }

    void add_clause(std::vector<Lit> lits)
    {
        if (unsat_)
            return;
        backtrack(0); // simplification below is only sound against root-level facts
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (size_t i = 0; i + 1 < lits.size(); i++)
            if (lits[i] == lit_not(lits[i + 1]))
                return; // tautology
        // strip literals already false at level 0; drop clause if satisfied
        std::vector<Lit> kept;
        for (Lit l : lits) {
            int v = value(l);
            if (v == 1 && level_[lit_var(l)] == 0)
                return;
            if (v == 0 && level_[lit_var(l)] == 0)
                continue;
            kept.push_back(l);
        }
        n_problem_clauses_++;
        if (kept.empty()) {
            added_empty_ = true;
            unsat_ = true;
            return;
        }
        if (kept.size() == 1) {
            unit_clauses_.push_back(kept[0]);
            if (!enqueue(kept[0], -1))
                unsat_ = true;
            else if (propagate() >= 0)
                unsat_ = true;
            return;
        }
        attach(std::move(kept), false);
    }

    Result solve(const std::vector<Lit> &assumptions = {}, const SolveBudget &budget = SolveBudget())
    {
        if (unsat_)
            return Result::Unsat;
        auto t0 = std::chrono::steady_clock::now();
        long conflicts_here = 0;
        int restart_seq = 1;
        long restart_limit = luby(restart_seq) * 64;
        long conflicts_since_restart = 0;

        backtrack(0);
        if (propagate() >= 0)
            return Result::Unsat;

        for (;;) {
            int confl = propagate();
            if (confl >= 0) {
                n_conflicts_++;
                conflicts_here++;
                conflicts_since_restart++;
                if (current_level() == 0)
                    return Result::Unsat;
                std::vector<Lit> learnt;
                int back_level = analyze(confl, learnt);
                backtrack(back_level);
                if (learnt.size() == 1 && back_level == 0) {
                    if (!enqueue(learnt[0], -1))
                        return Result::Unsat;
                } else {
                    int ci = attach(std::move(learnt), true);
                    enqueue(clauses_[ci].lits[0], ci);
                }
                decay_activity();
                cla_inc_ *= 1.001;
                if (n_learnt_ > max_learnts_) {
                    reduce_db();
                    max_learnts_ = long(max_learnts_ * 1.3);
                }
                if (budget.max_conflicts && conflicts_here >= budget.max_conflicts)
                    return Result::Budget;
                if (budget.max_literals && total_literals_ > budget.max_literals)
                    return Result::Budget;
                if ((n_conflicts_ & 127) == 0) {
                    if (budget.seconds > 0) {
                        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                        if (el > budget.seconds)
                            return Result::Budget;
                    }
                    if (budget.interrupt && budget.interrupt())
                        return Result::Budget;
                }
                if (conflicts_since_restart >= restart_limit) {
                    conflicts_since_restart = 0;
                    restart_limit = luby(++restart_seq) * 64;
                    backtrack(0);
                }
            } else {
                // replay any assumptions not yet reflected as decision levels
                if (current_level() < int(assumptions.size())) {
                    Lit a = assumptions[current_level()];
                    int v = value(a);
                    if (v == 0)
                        return Result::Unsat; // conflicting assumption
                    new_level();
                    if (v == -1)
                        enqueue(a, -1);
                    continue;
                }
                int var = pick_branch();
                if (var < 0)
                    return Result::Sat;
                new_level();
                enqueue(mk_lit(var, phase_[var] == 0), -1);
            }
        }
    }

    // valid after Result::Sat
    bool model_value(int var) const { return assign_[var] == 1; }

    long conflicts() const { return n_conflicts_; }
    size_t clause_literals() const { return total_literals_; }

    void to_dimacs(std::ostream &os) const
    {
        os << "p cnf " << n_vars_ << " " << n_problem_clauses_ << "\n";
        for (Lit l : unit_clauses_)
            os << (lit_neg(l) ? -(lit_var(l) + 1) : lit_var(l) + 1) << " 0\n";
        if (added_empty_)
            os << "0\n";
        for (const auto &c : clauses_) {
            if (c.learnt)
                continue;
            for (Lit l : c.lits)
                os << (lit_neg(l) ? -(lit_var(l) + 1) : lit_var(l) + 1) << " ";
            os << "0\n";
        }
    }

  private:
    struct Clause {
        std::vector<Lit> lits;
        bool learnt = false;
        bool deleted = false;
        double activity = 0;
    };

    // -1 unknown, 0 false, 1 true
    int value(Lit l) const
    {
        int a = assign_[lit_var(l)];
        if (a < 0)
            return -1;
        return lit_neg(l) ? 1 - a : a;
    }

    int attach(std::vector<Lit> lits, bool learnt)
    {
        int ci = int(clauses_.size());
        total_literals_ += lits.size();
        clauses_.push_back({std::move(lits), learnt, false, cla_inc_});
        if (learnt)
            n_learnt_++;
        Clause &c = clauses_[ci];
        if (learnt) {
            // put an asserting literal first and the highest-level other second
            int hi = 1;
            for (size_t i = 2; i < c.lits.size(); i++)
                if (level_[lit_var(c.lits[i])] > level_[lit_var(c.lits[hi])])
                    hi = int(i);
            if (c.lits.size() > 1)
                std::swap(c.lits[1], c.lits[hi]);
        }
        watches_[lit_not(c.lits[0])].push_back(ci);
        if (c.lits.size() > 1)
            watches_[lit_not(c.lits[1])].push_back(ci);
        return ci;
    }

    bool enqueue(Lit l, int reason)
    {
        int v = value(l);
        if (v == 0)
            return false;
        if (v == 1)
            return true;
        assign_[lit_var(l)] = lit_neg(l) ? 0 : 1;
        level_[lit_var(l)] = current_level();
        reason_[lit_var(l)] = reason;
        trail_.push_back(l);
        return true;
    }

    // returns conflicting clause index or -1
    int propagate()
    {
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            std::vector<int> ws;
            ws.swap(watches_[p]);
            size_t i = 0;
            for (; i < ws.size(); i++) {
                int ci = ws[i];
                Clause &c = clauses_[ci];
                if (c.deleted)
                    continue; // dropped from this watch list
                // ensure the false literal is in position 1
                if (c.lits.size() > 1 && lit_not(c.lits[0]) == p)
                    std::swap(c.lits[0], c.lits[1]);
                if (c.lits.size() == 1) {
                    watches_[p].push_back(ci);
                    if (!enqueue(c.lits[0], ci)) {
                        for (i++; i < ws.size(); i++)
                            watches_[p].push_back(ws[i]);
                        return ci;
                    }
                    continue;
                }
                if (value(c.lits[0]) == 1) {
                    watches_[p].push_back(ci);
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < c.lits.size(); k++)
                    if (value(c.lits[k]) != 0) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[lit_not(c.lits[1])].push_back(ci);
                        moved = true;
                        break;
                    }
                if (moved)
                    continue;
                watches_[p].push_back(ci);
                if (!enqueue(c.lits[0], ci)) {
                    for (i++; i < ws.size(); i++)
                        watches_[p].push_back(ws[i]);
                    return ci;
                }
            }
        }
        return -1;
    }

    int current_level() const { return int(level_marks_.size()); }

    void new_level() { level_marks_.push_back(trail_.size()); }

    void backtrack(int lvl)
    {
        if (current_level() <= lvl)
            return;
        size_t until = level_marks_[lvl];
        for (size_t i = trail_.size(); i > until; i--) {
            int v = lit_var(trail_[i - 1]);
            phase_[v] = assign_[v];
            assign_[v] = -1;
            reason_[v] = -1;
            heap_insert(v);
        }
        trail_.resize(until);
        level_marks_.resize(lvl);
        qhead_ = trail_.size();
    }

    // first-UIP learning; returns backtrack level, learnt[0] is asserting
    int analyze(int confl, std::vector<Lit> &learnt)
    {
        int counter = 0;
        Lit asserting = -1;
        size_t idx = trail_.size();
        int ci = confl;
        bool first = true;
        std::vector<int> toclear;
        do {
            Clause &c = clauses_[ci];
            if (c.learnt)
                bump_clause(c);
            // reason clauses keep the implied literal at position 0; skip it
            // when resolving so it is not re-counted after being consumed
            for (size_t li = first ? 0 : 1; li < c.lits.size(); li++) {
                Lit l = c.lits[li];
                int v = lit_var(l);
                if (seen_[v] || assign_[v] < 0 || level_[v] == 0)
                    continue;
                seen_[v] = 1;
                toclear.push_back(v);
                bump_activity(v);
                if (level_[v] == current_level())
                    counter++;
                else
                    learnt.push_back(l);
            }
            first = false;
            // find next literal on trail to resolve
            while (idx > 0 && !seen_[lit_var(trail_[idx - 1])])
                idx--;
            if (idx == 0)
                break;
            Lit p = trail_[--idx];
            counter--;
            if (counter == 0) {
                asserting = lit_not(p);
                break;
            }
            ci = reason_[lit_var(p)];
            if (ci < 0)
                break; // decision reached unexpectedly; treat as UIP
        } while (true);

        if (asserting == -1 && idx > 0)
            asserting = lit_not(trail_[idx - 1]);

        // drop literals whose reasons resolve away against the clause itself
        size_t j = 0;
        for (size_t i = 0; i < learnt.size(); i++) {
            int budget = 1000;
            if (!lit_redundant(lit_var(learnt[i]), toclear, budget))
                learnt[j++] = learnt[i];
        }
        learnt.resize(j);
        learnt.insert(learnt.begin(), asserting);
        for (int v : toclear)
            seen_[v] = 0;

        int back = 0;
        for (size_t i = 1; i < learnt.size(); i++)
            back = std::max(back, level_[lit_var(learnt[i])]);
        return back;
    }

    // true when every antecedent of v's reason is itself implied by the
    // learnt clause (directly seen, level 0, or recursively redundant);
    // proven vars are marked seen so later checks reuse the result
    bool lit_redundant(int v, std::vector<int> &toclear, int &budget)
    {
        int r = reason_[v];
        if (r < 0 || --budget <= 0)
            return false;
        const Clause &c = clauses_[r];
        for (size_t li = 1; li < c.lits.size(); li++) {
            int u = lit_var(c.lits[li]);
            if (seen_[u] || level_[u] == 0)
                continue;
            if (!lit_redundant(u, toclear, budget))
                return false;
            seen_[u] = 1;
            toclear.push_back(u);
        }
        return true;
    }

    void bump_clause(Clause &c)
    {
        c.activity += cla_inc_;
        if (c.activity > 1e20) {
            for (auto &cl : clauses_)
                if (cl.learnt)
                    cl.activity *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    // throw away the less active half of the non-reason learnt clauses
    void reduce_db()
    {
        std::vector<int> cand;
        for (size_t ci = 0; ci < clauses_.size(); ci++) {
            const Clause &c = clauses_[ci];
            if (!c.learnt || c.deleted || c.lits.size() <= 2)
                continue;
            int head = lit_var(c.lits[0]);
            bool locked = assign_[head] >= 0 && reason_[head] == int(ci);
            if (!locked)
                cand.push_back(int(ci));
        }
        std::sort(cand.begin(), cand.end(),
                  [&](int a, int b) { return clauses_[a].activity < clauses_[b].activity; });
        for (size_t i = 0; i < cand.size() / 2; i++) {
            Clause &c = clauses_[cand[i]];
            c.deleted = true;
            total_literals_ -= c.lits.size();
            n_learnt_--;
            std::vector<Lit>().swap(c.lits);
        }
    }

    void bump_activity(int v)
    {
        activity_[v] += act_inc_;
        if (activity_[v] > 1e100) {
            for (auto &a : activity_)
                a *= 1e-100;
            act_inc_ *= 1e-100;
        }
        if (heap_pos_[v] >= 0)
            heap_up(heap_pos_[v]);
    }

    void decay_activity() { act_inc_ *= 1.052; }

    int pick_branch()
    {
        while (!heap_.empty()) {
            int v = heap_pop();
            if (assign_[v] < 0)
                return v;
        }
        for (int v = 0; v < n_vars_; v++)
            if (assign_[v] < 0)
                return v;
        return -1;
    }

    void heap_insert(int v)
    {
        if (heap_pos_[v] >= 0)
            return;
        heap_pos_[v] = int(heap_.size());
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }

    int heap_pop()
    {
        int v = heap_[0];
        heap_pos_[v] = -1;
        int last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            heap_pos_[last] = 0;
            heap_down(0);
        }
        return v;
    }

    void heap_up(int i)
    {
        int v = heap_[i];
        while (i > 0) {
            int p = (i - 1) / 2;
            if (activity_[heap_[p]] >= activity_[v])
                break;
            heap_[i] = heap_[p];
            heap_pos_[heap_[i]] = i;
            i = p;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    void heap_down(int i)
    {
        int v = heap_[i];
        int n = int(heap_.size());
        for (;;) {
            int c = 2 * i + 1;
            if (c >= n)
                break;
            if (c + 1 < n && activity_[heap_[c + 1]] > activity_[heap_[c]])
                c++;
            if (activity_[heap_[c]] <= activity_[v])
                break;
            heap_[i] = heap_[c];
            heap_pos_[heap_[i]] = i;
            i = c;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    static long luby(int i)
    {
        // Luby sequence 1,1,2,1,1,2,4,...
        for (long k = 1; k < 64; k++) {
            if (i == (1 << k) - 1)
                return 1L << (k - 1);
            if (i < (1 << k) - 1)
                return luby(i - (1 << (k - 1)) + 1);
        }
        return 1;
    }

    int n_vars_ = 0;
    bool unsat_ = false;
    std::vector<Lit> unit_clauses_; // problem units simplified straight onto the trail
    bool added_empty_ = false;
    std::vector<Clause> clauses_;
    std::vector<std::vector<int>> watches_; // per literal
    std::vector<int> assign_;
    std::vector<uint8_t> phase_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<double> activity_;
    std::vector<Lit> trail_;
    std::vector<size_t> level_marks_;
    size_t qhead_ = 0;
    double act_inc_ = 1.0;
    long n_conflicts_ = 0;
    long n_problem_clauses_ = 0;
    size_t total_literals_ = 0;
    std::vector<int> heap_;     // max-heap of variables by activity
    std::vector<int> heap_pos_; // -1 when a variable is not queued
    std::vector<char> seen_;    // scratch for conflict analysis
    double cla_inc_ = 1.0;
    long n_learnt_ = 0;
    long max_learnts_ = 8000;
};

} // namespace nufab::sat
