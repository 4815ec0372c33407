#ifndef EVSCHED_SIMPLEX_HPP
#define EVSCHED_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "evsched/milp.hpp"

namespace evsched {

struct LpResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> values;
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
};

namespace detail {

// Bounded-variable primal simplex on a dense tableau.
//
// Every row is turned into an equality with one slack column whose bounds
// encode the sense (<= : [0,inf), >= : (-inf,0], = : [0,0]). Nonbasic
// columns rest at a bound (or at 0 when free); a phase-1 pass with
// artificial columns finds a feasible basis when the slack basis is not.
// Entering columns are picked by largest reduced-cost violation, switching
// to Bland's rule after a streak of degenerate pivots so the method always
// terminates. A ratio-test step capped by the entering column's own span
// becomes a bound flip instead of a pivot. Variables pinned by equal bounds
// can never move, so they stay out of the tableau and enter rows as
// constants.
class SimplexSolver {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static constexpr double kDualTol = 1e-9;
    static constexpr double kRatioTol = 1e-11;
    static constexpr double kDegenerateStep = 1e-12;
    static constexpr int kBlandTrigger = 40;
    static constexpr int kRefreshInterval = 256;

    enum class State : unsigned char { Basic, AtLower, AtUpper, Free };

public:
    SimplexSolver(const MilpModel& model, std::span<const double> lower,
                  std::span<const double> upper)
        : model_(model), n_(model.var_count()) {
        var_lb_.assign(lower.begin(), lower.end());
        var_ub_.assign(upper.begin(), upper.end());
    }

    LpResult run() {
        LpResult result;
        for (int j = 0; j < n_; ++j) {
            if (var_lb_[j] > var_ub_[j]) {
                result.status = SolveStatus::Infeasible;
                return result;
            }
        }
        // Empty rows cannot be represented in the tableau; check and drop.
        rows_.clear();
        for (int i = 0; i < model_.row_count(); ++i) {
            const MilpRow& row = model_.rows()[i];
            if (!row.terms.empty()) {
                rows_.push_back(i);
                continue;
            }
            const bool ok = (row.sense == RowSense::LessEqual && 0.0 <= row.rhs + 1e-12) ||
                            (row.sense == RowSense::GreaterEqual && 0.0 >= row.rhs - 1e-12) ||
                            (row.sense == RowSense::Equal && std::abs(row.rhs) <= 1e-12);
            if (!ok) {
                result.status = SolveStatus::Infeasible;
                return result;
            }
        }
        m_ = static_cast<int>(rows_.size());
        build_tableau();
        if (n_art_ > 0) {
            const bool feasible = iterate(/*phase1=*/true);
            if (!feasible) {
                result.status = SolveStatus::Infeasible;
                result.iterations = iterations_;
                return result;
            }
            // Artificial columns are locked at zero for phase 2.
            for (int c = n_active_ + m_; c < width_; ++c) {
                lb_[c] = 0.0;
                ub_[c] = 0.0;
            }
        }
        phase1_ = false;
        refresh_reduced_costs();
        if (!iterate(/*phase1=*/false)) {
            result.status = SolveStatus::Unbounded;
            result.iterations = iterations_;
            return result;
        }
        refresh_basic_values();
        result.status = SolveStatus::Optimal;
        result.values = extract();
        result.objective = model_.objective_value(result.values);
        result.iterations = iterations_;
        return result;
    }

private:
    double column_value(int c) const {
        switch (state_[c]) {
            case State::AtLower: return lb_[c];
            case State::AtUpper: return ub_[c];
            case State::Free: return 0.0;
            case State::Basic: break;
        }
        return 0.0; // unused; basics live in beta_
    }

    void build_tableau() {
        // Active structural columns: everything not pinned by equal bounds.
        col_of_var_.assign(n_, -1);
        active_.clear();
        for (int j = 0; j < n_; ++j) {
            if (var_lb_[j] < var_ub_[j]) {
                col_of_var_[j] = static_cast<int>(active_.size());
                active_.push_back(j);
            }
        }
        n_active_ = static_cast<int>(active_.size());
        lb_.assign(n_active_, 0.0);
        ub_.assign(n_active_, 0.0);
        state_.assign(n_active_, State::AtLower);
        for (int c = 0; c < n_active_; ++c) {
            lb_[c] = var_lb_[active_[c]];
            ub_[c] = var_ub_[active_[c]];
            if (lb_[c] > -kInf) {
                state_[c] = State::AtLower;
            } else if (ub_[c] < kInf) {
                state_[c] = State::AtUpper;
            } else {
                state_[c] = State::Free;
            }
        }
        // Effective right-hand sides with pinned variables folded in, and
        // row residuals at the starting point.
        std::vector<double> rhs_eff(m_), residual(m_);
        std::vector<double> slack_lb(m_), slack_ub(m_);
        std::vector<int> art_of_row(m_, -1);
        n_art_ = 0;
        for (int k = 0; k < m_; ++k) {
            const MilpRow& row = model_.rows()[rows_[k]];
            double rhs = row.rhs;
            double activity = 0.0;
            for (const LinearTerm& term : row.terms) {
                const int c = col_of_var_[term.var];
                if (c < 0) {
                    rhs -= term.coeff * var_lb_[term.var];
                } else {
                    activity += term.coeff * column_value(c);
                }
            }
            rhs_eff[k] = rhs;
            residual[k] = rhs - activity;
            switch (row.sense) {
                case RowSense::LessEqual: slack_lb[k] = 0.0; slack_ub[k] = kInf; break;
                case RowSense::GreaterEqual: slack_lb[k] = -kInf; slack_ub[k] = 0.0; break;
                case RowSense::Equal: slack_lb[k] = 0.0; slack_ub[k] = 0.0; break;
            }
            if (residual[k] < slack_lb[k] - 1e-12 || residual[k] > slack_ub[k] + 1e-12) {
                art_of_row[k] = n_art_++;
            }
        }
        width_ = n_active_ + m_ + n_art_;
        lb_.resize(width_);
        ub_.resize(width_);
        state_.resize(width_, State::AtLower);
        for (int k = 0; k < m_; ++k) {
            lb_[n_active_ + k] = slack_lb[k];
            ub_[n_active_ + k] = slack_ub[k];
        }
        for (int a = 0; a < n_art_; ++a) {
            lb_[n_active_ + m_ + a] = 0.0;
            ub_[n_active_ + m_ + a] = kInf;
        }
        // Dense working matrix, one extra column for the transformed rhs.
        tab_.assign(static_cast<std::size_t>(m_) * (width_ + 1), 0.0);
        basis_.assign(m_, -1);
        beta_.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            double* w = row_ptr(k);
            const MilpRow& row = model_.rows()[rows_[k]];
            for (const LinearTerm& term : row.terms) {
                const int c = col_of_var_[term.var];
                if (c >= 0) w[c] += term.coeff;
            }
            w[n_active_ + k] = 1.0;
            w[width_] = rhs_eff[k];
            if (art_of_row[k] < 0) {
                basis_[k] = n_active_ + k;
                state_[n_active_ + k] = State::Basic;
                beta_[k] = residual[k];
            } else {
                // Slack parks at the bound nearest the residual; the
                // artificial absorbs the rest and starts basic.
                const double parked = residual[k] > slack_ub[k] ? slack_ub[k] : slack_lb[k];
                state_[n_active_ + k] =
                    residual[k] > slack_ub[k] ? State::AtUpper : State::AtLower;
                const double shortfall = residual[k] - parked;
                const int art_col = n_active_ + m_ + art_of_row[k];
                const double sign = shortfall >= 0.0 ? 1.0 : -1.0;
                w[art_col] = sign;
                if (sign < 0.0) {
                    for (int c = 0; c <= width_; ++c) w[c] = -w[c];
                }
                basis_[k] = art_col;
                state_[art_col] = State::Basic;
                beta_[k] = std::abs(shortfall);
            }
        }
        phase1_ = n_art_ > 0;
        refresh_reduced_costs();
    }

    double cost_of(int c) const {
        if (phase1_) return c >= n_active_ + m_ ? 1.0 : 0.0;
        return c < n_active_ ? model_.objective()[active_[c]] : 0.0;
    }

    void refresh_reduced_costs() {
        d_.assign(width_, 0.0);
        for (int c = 0; c < width_; ++c) d_[c] = cost_of(c);
        for (int k = 0; k < m_; ++k) {
            const double cb = cost_of(basis_[k]);
            if (cb == 0.0) continue;
            const double* w = row_ptr(k);
            for (int c = 0; c < width_; ++c) d_[c] -= cb * w[c];
        }
    }

    void refresh_basic_values() {
        for (int k = 0; k < m_; ++k) beta_[k] = row_ptr(k)[width_];
        for (int c = 0; c < width_; ++c) {
            if (state_[c] == State::Basic) continue;
            const double xc = column_value(c);
            if (xc == 0.0) continue;
            for (int k = 0; k < m_; ++k) beta_[k] -= row_ptr(k)[c] * xc;
        }
    }

    double infeasibility() const {
        double sum = 0.0;
        for (int k = 0; k < m_; ++k) {
            if (basis_[k] >= n_active_ + m_) sum += std::max(0.0, beta_[k]);
        }
        return sum;
    }

    // Runs one simplex phase. Returns false when phase 1 ends infeasible or
    // phase 2 detects an unbounded ray.
    bool iterate(bool phase1) {
        const long hard_cap = 10000L + 40L * (m_ + width_);
        int degenerate_streak = 0;
        bool bland = false;
        int since_refresh = 0;
        for (;;) {
            if (phase1 && infeasibility() <= 1e-9) return true;
            if (++iterations_ > hard_cap) {
                throw std::runtime_error("simplex: iteration cap exceeded");
            }
            if (++since_refresh >= kRefreshInterval) {
                refresh_basic_values();
                refresh_reduced_costs();
                since_refresh = 0;
            }
            // Pricing. Artificial columns never re-enter.
            int enter = -1;
            double best_viol = kDualTol;
            for (int c = 0; c < n_active_ + m_; ++c) {
                const State st = state_[c];
                if (st == State::Basic) continue;
                if (lb_[c] == ub_[c]) continue;
                const double dc = d_[c];
                double viol = 0.0;
                if ((st == State::AtLower || st == State::Free) && dc < -kDualTol) viol = -dc;
                if ((st == State::AtUpper || st == State::Free) && dc > kDualTol) {
                    viol = std::max(viol, dc);
                }
                if (viol <= 0.0) continue;
                if (bland) {
                    enter = c;
                    break;
                }
                if (viol > best_viol) {
                    best_viol = viol;
                    enter = c;
                }
            }
            if (enter < 0) {
                if (phase1) return infeasibility() <= 1e-7;
                return true;
            }
            const int dir = state_[enter] == State::AtUpper ? -1
                            : state_[enter] == State::AtLower
                                ? 1
                                : (d_[enter] < 0.0 ? 1 : -1);
            // Ratio test over basic bounds, capped by the entering span.
            const double span = (lb_[enter] > -kInf && ub_[enter] < kInf)
                                    ? ub_[enter] - lb_[enter]
                                    : kInf;
            double best_t = kInf;
            int leave_row = -1;
            bool leave_at_upper = false;
            double leave_alpha = 0.0;
            for (int k = 0; k < m_; ++k) {
                const double alpha = row_ptr(k)[enter];
                if (std::abs(alpha) <= kRatioTol) continue;
                const double delta = -dir * alpha;
                const int bvar = basis_[k];
                double t_k;
                bool at_upper;
                if (delta < 0.0) {
                    if (lb_[bvar] == -kInf) continue;
                    t_k = (beta_[k] - lb_[bvar]) / (-delta);
                    at_upper = false;
                } else {
                    if (ub_[bvar] == kInf) continue;
                    t_k = (ub_[bvar] - beta_[k]) / delta;
                    at_upper = true;
                }
                if (t_k < 0.0) t_k = 0.0;
                bool take = false;
                if (leave_row < 0 || t_k < best_t - 1e-12) {
                    take = true;
                } else if (t_k <= best_t + 1e-12) {
                    take = bland ? bvar < basis_[leave_row]
                                 : (std::abs(alpha) > std::abs(leave_alpha) + 1e-12 ||
                                    (std::abs(alpha) >= std::abs(leave_alpha) - 1e-12 &&
                                     bvar < basis_[leave_row]));
                }
                if (take) {
                    best_t = t_k;
                    leave_row = k;
                    leave_at_upper = at_upper;
                    leave_alpha = alpha;
                }
            }
            if (leave_row < 0 && span == kInf) {
                if (phase1) throw std::runtime_error("simplex: phase-1 ray");
                return false; // unbounded
            }
            if (span <= best_t) {
                // Bound flip: the entering column jumps to its other bound.
                for (int k = 0; k < m_; ++k) {
                    const double alpha = row_ptr(k)[enter];
                    if (alpha != 0.0) beta_[k] -= dir * span * alpha;
                }
                state_[enter] = state_[enter] == State::AtLower ? State::AtUpper : State::AtLower;
                degenerate_streak = 0;
                bland = false;
                continue;
            }
            pivot(leave_row, enter, dir, best_t, leave_at_upper);
            if (best_t <= kDegenerateStep) {
                if (++degenerate_streak > kBlandTrigger) bland = true;
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
    }

    void pivot(int leave_row, int enter, int dir, double step, bool leave_at_upper) {
        const double enter_value = column_value(enter) + dir * step;
        for (int k = 0; k < m_; ++k) {
            const double alpha = row_ptr(k)[enter];
            if (alpha != 0.0) beta_[k] -= dir * step * alpha;
        }
        const int leaving = basis_[leave_row];
        state_[leaving] = leave_at_upper ? State::AtUpper : State::AtLower;
        beta_[leave_row] = enter_value;

        double* wr = row_ptr(leave_row);
        const double pv = wr[enter];
        const double inv = 1.0 / pv;
        for (int c = 0; c <= width_; ++c) wr[c] *= inv;
        wr[enter] = 1.0;
        for (int k = 0; k < m_; ++k) {
            if (k == leave_row) continue;
            double* w = row_ptr(k);
            const double f = w[enter];
            if (f == 0.0) continue;
            for (int c = 0; c <= width_; ++c) w[c] -= f * wr[c];
            w[enter] = 0.0;
        }
        const double f = d_[enter];
        if (f != 0.0) {
            for (int c = 0; c < width_; ++c) d_[c] -= f * wr[c];
            d_[enter] = 0.0;
        }
        basis_[leave_row] = enter;
        state_[enter] = State::Basic;
    }

    std::vector<double> extract() const {
        std::vector<double> x(n_, 0.0);
        std::vector<int> row_of(width_, -1);
        for (int k = 0; k < m_; ++k) row_of[basis_[k]] = k;
        for (int j = 0; j < n_; ++j) {
            const int c = col_of_var_[j];
            if (c < 0) {
                x[j] = var_lb_[j]; // pinned
                continue;
            }
            double v;
            if (state_[c] == State::Basic) {
                v = beta_[row_of[c]];
                // snap values resting numerically on a bound
                if (lb_[c] > -kInf && std::abs(v - lb_[c]) <= 1e-7) v = lb_[c];
                if (ub_[c] < kInf && std::abs(v - ub_[c]) <= 1e-7) v = ub_[c];
            } else {
                v = column_value(c);
            }
            x[j] = v;
        }
        return x;
    }

    double* row_ptr(int k) { return tab_.data() + static_cast<std::size_t>(k) * (width_ + 1); }
    const double* row_ptr(int k) const {
        return tab_.data() + static_cast<std::size_t>(k) * (width_ + 1);
    }

    const MilpModel& model_;
    int n_ = 0;
    int m_ = 0;
    int n_active_ = 0;
    int n_art_ = 0;
    int width_ = 0;
    bool phase1_ = false;
    std::vector<int> rows_;        // retained (non-empty) model row indices
    std::vector<int> active_;      // tableau column -> structural variable
    std::vector<int> col_of_var_;  // structural variable -> tableau column or -1
    std::vector<double> var_lb_, var_ub_; // per structural variable
    std::vector<double> lb_, ub_;         // per tableau column
    std::vector<double> tab_;
    std::vector<double> beta_;
    std::vector<double> d_;
    std::vector<int> basis_;
    std::vector<State> state_;
    int iterations_ = 0;
};

} // namespace detail

/// Solves the LP relaxation (integrality marks ignored) with the variable
/// bounds taken from the model.
inline LpResult solve_lp(const MilpModel& model) {
    std::vector<double> lower, upper;
    lower.reserve(model.var_count());
    upper.reserve(model.var_count());
    for (const MilpVariable& v : model.vars()) {
        lower.push_back(v.lower);
        upper.push_back(v.upper);
    }
    detail::SimplexSolver solver(model, lower, upper);
    return solver.run();
}

/// Solves the LP relaxation under overridden variable bounds (used by the
/// branch-and-bound tree).
inline LpResult solve_lp(const MilpModel& model, std::span<const double> lower,
                         std::span<const double> upper) {
    detail::SimplexSolver solver(model, lower, upper);
    return solver.run();
}

} // namespace evsched

#endif // EVSCHED_SIMPLEX_HPP
