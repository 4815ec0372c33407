#ifndef EVSCHED_BRANCH_AND_BOUND_HPP
#define EVSCHED_BRANCH_AND_BOUND_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "evsched/milp.hpp"
#include "evsched/simplex.hpp"

namespace evsched {

namespace detail {

struct BnbNode {
    double bound;
    std::uint64_t seq;
    std::vector<double> lb, ub;
};

struct BnbNodeOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound; // min-heap on bound
        return a.seq < b.seq; // equal bounds: newest first, so the search dives
    }
};

} // namespace detail

/// Best-first branch-and-bound over LP relaxations. Branching picks the
/// most-fractional integral variable (ties to the lowest variable id); nodes
/// are ordered by their parent relaxation bound with creation order breaking
/// ties, so repeated solves of the same model are identical. Fractional
/// integral variables with a zero objective coefficient are first snapped to
/// a feasible integer when the rows allow it, which settles the direction
/// indicators that the optimum leaves free.
inline MilpSolution solve(const MilpModel& model, const SolveOptions& options = {}) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(clock::now() - start).count();
    };
    options.validate();
    const int n = model.var_count();
    for (int j = 0; j < n; ++j) {
        const MilpVariable& v = model.vars()[j];
        if (v.integral && !(std::isfinite(v.lower) && std::isfinite(v.upper))) {
            throw ValidationError("integral variable '" + v.name + "' must have finite bounds");
        }
    }

    // column -> rows index for the snap pass
    std::vector<std::vector<int>> var_rows(n);
    for (int i = 0; i < model.row_count(); ++i) {
        for (const LinearTerm& term : model.rows()[i].terms) var_rows[term.var].push_back(i);
    }

    const double int_tol = options.integrality_tol;
    const auto is_fractional = [&](double x) { return std::abs(x - std::round(x)) > int_tol; };

    MilpSolution solution;
    solution.node_count = 0;

    std::vector<double> root_lb(n), root_ub(n);
    for (int j = 0; j < n; ++j) {
        root_lb[j] = model.vars()[j].lower;
        root_ub[j] = model.vars()[j].upper;
    }

    std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::BnbNodeOrder> open;
    std::uint64_t seq = 0;
    open.push({-std::numeric_limits<double>::infinity(), seq++, std::move(root_lb),
               std::move(root_ub)});

    double incumbent_obj = std::numeric_limits<double>::infinity();
    std::vector<double> incumbent;
    if (!options.initial_solution.empty()) {
        if (static_cast<int>(options.initial_solution.size()) != n) {
            throw ValidationError("initial solution does not match the variable count");
        }
        std::vector<double> warm = options.initial_solution;
        for (int j = 0; j < n; ++j) {
            if (model.vars()[j].integral) warm[j] = std::round(warm[j]);
        }
        if (!scan_violations(model, warm, options.feasibility_tol).empty()) {
            throw ValidationError("initial solution is not feasible for the model");
        }
        incumbent_obj = model.objective_value(warm);
        incumbent = std::move(warm);
    }
    const auto cutoff = [&] {
        if (!std::isfinite(incumbent_obj)) return std::numeric_limits<double>::infinity();
        return incumbent_obj - options.relative_gap * std::max(1.0, std::abs(incumbent_obj));
    };

    bool limit_hit = false;
    double final_bound = -std::numeric_limits<double>::infinity();
    bool root_unbounded = false;

    // Rounding dive: re-solve the LP with every integral variable pinned to
    // its rounded relaxation value. When that LP is feasible its optimum is
    // integer feasible and usually an excellent incumbent.
    const auto try_rounding_dive = [&](const std::vector<double>& x,
                                       const detail::BnbNode& node) {
        std::vector<double> lo = node.lb, hi = node.ub;
        for (int j = 0; j < n; ++j) {
            if (!model.vars()[j].integral) continue;
            const double v =
                std::min(std::max(std::round(x[j]), node.lb[j]), node.ub[j]);
            lo[j] = v;
            hi[j] = v;
        }
        const LpResult dive = solve_lp(model, lo, hi);
        if (dive.status != SolveStatus::Optimal || dive.objective >= incumbent_obj) return;
        std::vector<double> candidate = dive.values;
        for (int j = 0; j < n; ++j) {
            if (model.vars()[j].integral) candidate[j] = std::round(candidate[j]);
        }
        if (!scan_violations(model, candidate, options.feasibility_tol).empty()) return;
        incumbent_obj = dive.objective;
        incumbent = std::move(candidate);
    };

    while (!open.empty()) {
        if (solution.node_count >= options.node_limit ||
            (options.time_limit_seconds > 0.0 && elapsed() > options.time_limit_seconds)) {
            limit_hit = true;
            final_bound = open.top().bound;
            break;
        }
        detail::BnbNode node = open.top();
        open.pop();
        if (node.bound >= cutoff()) {
            // best-first: every remaining node is at least as bad
            final_bound = node.bound;
            break;
        }
        const LpResult lp = solve_lp(model, node.lb, node.ub);
        ++solution.node_count;
        if (lp.status == SolveStatus::Infeasible) continue;
        if (lp.status == SolveStatus::Unbounded) {
            if (solution.node_count == 1) {
                root_unbounded = true;
                break;
            }
            continue; // cannot happen with tightened bounds; be safe
        }
        if (lp.objective >= cutoff()) continue;

        std::vector<double> x = lp.values;
        std::vector<int> fractional;
        for (int j = 0; j < n; ++j) {
            if (model.vars()[j].integral && is_fractional(x[j])) fractional.push_back(j);
        }
        if (!fractional.empty()) {
            // Snap pass: zero-cost integrals may sit anywhere in their LP
            // range; move them to an integer when every touched row stays
            // feasible. The objective value is unchanged by construction.
            std::vector<double> activity(model.row_count(), 0.0);
            for (int i = 0; i < model.row_count(); ++i) {
                for (const LinearTerm& term : model.rows()[i].terms) {
                    activity[i] += term.coeff * x[term.var];
                }
            }
            const double snap_tol = 0.5 * options.feasibility_tol;
            const auto row_ok = [&](int i, double act) {
                const MilpRow& row = model.rows()[i];
                const double scale = std::max(1.0, std::abs(row.rhs));
                switch (row.sense) {
                    case RowSense::LessEqual: return act - row.rhs <= snap_tol * scale;
                    case RowSense::GreaterEqual: return row.rhs - act <= snap_tol * scale;
                    case RowSense::Equal: return std::abs(act - row.rhs) <= snap_tol * scale;
                }
                return false;
            };
            for (int j : fractional) {
                if (model.objective()[j] != 0.0) continue;
                const double lo = std::floor(x[j]);
                for (double v : {std::floor(x[j] + 0.5), x[j] - lo < 0.5 ? lo + 1.0 : lo}) {
                    if (v < node.lb[j] - 1e-9 || v > node.ub[j] + 1e-9) continue;
                    bool ok = true;
                    for (int i : var_rows[j]) {
                        double coeff = 0.0;
                        for (const LinearTerm& term : model.rows()[i].terms) {
                            if (term.var == j) coeff += term.coeff;
                        }
                        if (!row_ok(i, activity[i] + coeff * (v - x[j]))) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) continue;
                    for (int i : var_rows[j]) {
                        double coeff = 0.0;
                        for (const LinearTerm& term : model.rows()[i].terms) {
                            if (term.var == j) coeff += term.coeff;
                        }
                        activity[i] += coeff * (v - x[j]);
                    }
                    x[j] = v;
                    break;
                }
            }
            fractional.clear();
            for (int j = 0; j < n; ++j) {
                if (model.vars()[j].integral && is_fractional(x[j])) fractional.push_back(j);
            }
        }

        if (fractional.empty()) {
            if (lp.objective < incumbent_obj) {
                incumbent_obj = lp.objective;
                incumbent = x;
                for (int j = 0; j < n; ++j) {
                    if (model.vars()[j].integral) incumbent[j] = std::round(incumbent[j]);
                }
            }
            continue;
        }
        if (solution.node_count == 1 || solution.node_count % 32 == 0) {
            try_rounding_dive(x, node);
        }
        int branch_var = fractional.front();
        double most = 0.0;
        for (int j : fractional) {
            const double f = x[j] - std::floor(x[j]);
            const double dist = std::min(f, 1.0 - f);
            if (dist > most + 1e-12) {
                most = dist;
                branch_var = j;
            }
        }
        detail::BnbNode down{lp.objective, seq++, node.lb, node.ub};
        down.ub[branch_var] = std::floor(x[branch_var]);
        detail::BnbNode up{lp.objective, seq++, std::move(node.lb), std::move(node.ub)};
        up.lb[branch_var] = std::floor(x[branch_var]) + 1.0;
        open.push(std::move(down));
        open.push(std::move(up));
    }

    solution.solve_seconds = elapsed();
    if (root_unbounded) {
        solution.status = SolveStatus::Unbounded;
        return solution;
    }
    if (limit_hit) {
        solution.status = SolveStatus::LimitReached;
        if (std::isfinite(incumbent_obj)) {
            solution.values = std::move(incumbent);
            solution.objective = incumbent_obj;
            solution.bound_gap = std::max(0.0, incumbent_obj - final_bound);
        }
        return solution;
    }
    if (!std::isfinite(incumbent_obj)) {
        solution.status = SolveStatus::Infeasible;
        return solution;
    }
    solution.status = SolveStatus::Optimal;
    solution.values = std::move(incumbent);
    solution.objective = incumbent_obj;
    solution.bound_gap =
        std::isfinite(final_bound) ? std::max(0.0, incumbent_obj - final_bound) : 0.0;
    const auto violations = scan_violations(model, solution.values, options.feasibility_tol);
    if (!violations.empty()) {
        throw std::logic_error("branch and bound returned an optimum that fails the "
                               "independent feasibility scan");
    }
    return solution;
}

} // namespace evsched

#endif // EVSCHED_BRANCH_AND_BOUND_HPP
