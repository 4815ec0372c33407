#ifndef EVSCHED_MILP_HPP
#define EVSCHED_MILP_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evsched/common.hpp"

namespace evsched {

enum class SolveStatus { Optimal, Infeasible, Unbounded, LimitReached };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::LimitReached: return "limit_reached";
    }
    return "?";
}

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LinearTerm {
    int var;
    double coeff;
};

struct MilpVariable {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    bool integral = false;
    std::string name;
};

struct MilpRow {
    std::vector<LinearTerm> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    std::string name;
};

/// A linear model with integrality marks. The objective sense is always
/// minimize; a constant offset is carried into reported objective values.
class MilpModel {
public:
    int add_variable(double lower, double upper, bool integral, std::string name = "") {
        if (!(lower <= upper)) {
            throw ValidationError("variable '" + name + "': lower bound " + std::to_string(lower) +
                                  " exceeds upper bound " + std::to_string(upper));
        }
        vars_.push_back({lower, upper, integral, std::move(name)});
        objective_.push_back(0.0);
        return static_cast<int>(vars_.size()) - 1;
    }

    int add_constraint(std::vector<LinearTerm> terms, RowSense sense, double rhs,
                       std::string name = "") {
        for (const LinearTerm& term : terms) {
            if (term.var < 0 || term.var >= static_cast<int>(vars_.size())) {
                throw ValidationError("constraint '" + name + "' references unknown variable " +
                                      std::to_string(term.var));
            }
        }
        rows_.push_back({std::move(terms), sense, rhs, std::move(name)});
        return static_cast<int>(rows_.size()) - 1;
    }

    void set_objective_coeff(int var, double coeff) {
        if (var < 0 || var >= static_cast<int>(vars_.size())) {
            throw ValidationError("objective references unknown variable " + std::to_string(var));
        }
        objective_[var] = coeff;
    }

    void add_objective_coeff(int var, double coeff) {
        if (var < 0 || var >= static_cast<int>(vars_.size())) {
            throw ValidationError("objective references unknown variable " + std::to_string(var));
        }
        objective_[var] += coeff;
    }

    void set_objective_offset(double offset) { offset_ = offset; }
    double objective_offset() const { return offset_; }

    void remove_row(int row) { rows_.erase(rows_.begin() + row); }
    int find_row(const std::string& name) const {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i].name == name) return static_cast<int>(i);
        }
        return -1;
    }

    const std::vector<MilpVariable>& vars() const { return vars_; }
    const std::vector<MilpRow>& rows() const { return rows_; }
    const std::vector<double>& objective() const { return objective_; }
    int var_count() const { return static_cast<int>(vars_.size()); }
    int row_count() const { return static_cast<int>(rows_.size()); }

    double objective_value(std::span<const double> x) const {
        double value = offset_;
        for (std::size_t j = 0; j < objective_.size(); ++j) value += objective_[j] * x[j];
        return value;
    }

private:
    std::vector<MilpVariable> vars_;
    std::vector<MilpRow> rows_;
    std::vector<double> objective_;
    double offset_ = 0.0;
};

struct MilpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> values;      // empty when no incumbent exists
    double objective = std::numeric_limits<double>::quiet_NaN();
    double bound_gap = std::numeric_limits<double>::infinity();
    long node_count = 0;
    double solve_seconds = 0.0;
};

struct SolveOptions {
    double feasibility_tol = 1e-6;
    double integrality_tol = 1e-6;
    double relative_gap = 1e-6;
    long node_limit = 500000;
    double time_limit_seconds = 0.0; // 0 = no limit
    // Optional warm incumbent; must be integer feasible for the model. The
    // tree only keeps solutions that beat it.
    std::vector<double> initial_solution;
    // Total node allowance for warm-start improvement heuristics layered on
    // top of the tree search (0 disables them). Node-based, so runs stay
    // byte-reproducible.
    long heuristic_node_budget = 1600;

    void validate() const {
        if (!(feasibility_tol > 0.0) || !(integrality_tol > 0.0) || !(relative_gap > 0.0)) {
            throw ValidationError("SolveOptions tolerances must be > 0");
        }
    }
};

struct RowViolation {
    int row;
    double amount; // scaled violation magnitude
};

/// Independent feasibility scan: every row is re-evaluated from the raw
/// point, with the violation scaled by max(1, |rhs|). Shares nothing with
/// the solver's internal bookkeeping.
inline std::vector<RowViolation> scan_violations(const MilpModel& model,
                                                 std::span<const double> x, double tol) {
    std::vector<RowViolation> out;
    const auto& rows = model.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double activity = 0.0;
        for (const LinearTerm& term : rows[i].terms) activity += term.coeff * x[term.var];
        double violation = 0.0;
        switch (rows[i].sense) {
            case RowSense::LessEqual: violation = activity - rows[i].rhs; break;
            case RowSense::GreaterEqual: violation = rows[i].rhs - activity; break;
            case RowSense::Equal: violation = std::abs(activity - rows[i].rhs); break;
        }
        const double scale = std::max(1.0, std::abs(rows[i].rhs));
        if (violation > tol * scale) {
            out.push_back({static_cast<int>(i), violation / scale});
        }
    }
    const auto& vars = model.vars();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double below = vars[j].lower - x[j];
        const double above = x[j] - vars[j].upper;
        const double scale = std::max({1.0, std::abs(vars[j].lower), std::abs(vars[j].upper)});
        if (below > tol * scale || above > tol * scale) {
            out.push_back({-1 - static_cast<int>(j), std::max(below, above) / scale});
        }
    }
    return out;
}

/// Plain-text model dump for debugging. Grammar:
///   Minimize / obj: <coeff> <var> ... [+ <offset>]
///   Subject To / <row>: <terms> {<=,>=,=} <rhs>
///   Bounds / <lo> <= <var> <= <hi>
///   Binaries | Generals / <var> ...
///   End
inline void write_lp(const MilpModel& model, std::ostream& os) {
    const auto var_name = [&](int j) {
        const std::string& n = model.vars()[j].name;
        return n.empty() ? "v" + std::to_string(j) : n;
    };
    os << "Minimize\n obj:";
    bool first = true;
    for (int j = 0; j < model.var_count(); ++j) {
        const double c = model.objective()[j];
        if (c == 0.0) continue;
        os << (first ? " " : (c < 0 ? " - " : " + ")) << (first && c < 0 ? "-" : "")
           << std::abs(c) << " " << var_name(j);
        first = false;
    }
    if (model.objective_offset() != 0.0) {
        const double k = model.objective_offset();
        os << (first ? " " : (k < 0 ? " - " : " + ")) << (first && k < 0 ? "-" : "")
           << std::abs(k);
        first = false;
    }
    if (first) os << " 0";
    os << "\nSubject To\n";
    for (int i = 0; i < model.row_count(); ++i) {
        const MilpRow& row = model.rows()[i];
        os << " " << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ":";
        bool row_first = true;
        for (const LinearTerm& term : row.terms) {
            os << (row_first ? " " : (term.coeff < 0 ? " - " : " + "))
               << (row_first && term.coeff < 0 ? "-" : "") << std::abs(term.coeff) << " "
               << var_name(term.var);
            row_first = false;
        }
        if (row_first) os << " 0";
        switch (row.sense) {
            case RowSense::LessEqual: os << " <= "; break;
            case RowSense::GreaterEqual: os << " >= "; break;
            case RowSense::Equal: os << " = "; break;
        }
        os << row.rhs << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < model.var_count(); ++j) {
        os << " " << model.vars()[j].lower << " <= " << var_name(j) << " <= "
           << model.vars()[j].upper << "\n";
    }
    bool has_binary = false, has_general = false;
    for (const MilpVariable& v : model.vars()) {
        if (!v.integral) continue;
        (v.lower >= 0.0 && v.upper <= 1.0 ? has_binary : has_general) = true;
    }
    if (has_binary) {
        os << "Binaries\n";
        for (int j = 0; j < model.var_count(); ++j) {
            const MilpVariable& v = model.vars()[j];
            if (v.integral && v.lower >= 0.0 && v.upper <= 1.0) os << " " << var_name(j) << "\n";
        }
    }
    if (has_general) {
        os << "Generals\n";
        for (int j = 0; j < model.var_count(); ++j) {
            const MilpVariable& v = model.vars()[j];
            if (v.integral && !(v.lower >= 0.0 && v.upper <= 1.0)) os << " " << var_name(j) << "\n";
        }
    }
    os << "End\n";
}

} // namespace evsched

#endif // EVSCHED_MILP_HPP
