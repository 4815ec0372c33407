#include <catch2/catch.hpp>

#include <limits>
#include <sstream>

#include "evsched/branch_and_bound.hpp"
#include "evsched/milp.hpp"
#include "evsched/rng.hpp"
#include "evsched/simplex.hpp"

using namespace evsched;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exhaustive oracle: minimum of solve_lp over every assignment of the
// integral variables (binaries here), entirely independent of the tree
// search being checked.
double enumeration_oracle(const MilpModel& model, bool* feasible = nullptr) {
    std::vector<int> binaries;
    for (int j = 0; j < model.var_count(); ++j) {
        if (model.vars()[j].integral) binaries.push_back(j);
    }
    REQUIRE(binaries.size() <= 16);
    std::vector<double> lo(model.var_count()), hi(model.var_count());
    for (int j = 0; j < model.var_count(); ++j) {
        lo[j] = model.vars()[j].lower;
        hi[j] = model.vars()[j].upper;
    }
    double best = kInf;
    for (std::uint32_t bits = 0; bits < (1u << binaries.size()); ++bits) {
        auto l = lo, h = hi;
        bool in_bounds = true;
        for (std::size_t k = 0; k < binaries.size(); ++k) {
            const double v = (bits >> k) & 1u;
            if (v < lo[binaries[k]] - 0.5 || v > hi[binaries[k]] + 0.5) {
                in_bounds = false;
                break;
            }
            l[binaries[k]] = h[binaries[k]] = v;
        }
        if (!in_bounds) continue;
        const LpResult r = solve_lp(model, l, h);
        if (r.status == SolveStatus::Optimal) best = std::min(best, r.objective);
    }
    if (feasible) *feasible = best < kInf;
    return best;
}

MilpModel random_model(Rng& rng, int max_binaries, int max_continuous) {
    MilpModel model;
    const int nb = rng.uniform_int(1, max_binaries);
    const int nc = rng.uniform_int(0, max_continuous);
    for (int j = 0; j < nb; ++j) {
        const int v = model.add_variable(0.0, 1.0, true, "b" + std::to_string(j));
        model.set_objective_coeff(v, rng.uniform_int(-10, 10));
    }
    for (int j = 0; j < nc; ++j) {
        const int v = model.add_variable(0.0, rng.uniform(0.5, 10.0), false,
                                         "c" + std::to_string(j));
        model.set_objective_coeff(v, rng.uniform_int(-10, 10));
    }
    const int rows = rng.uniform_int(1, 3 + (nb + nc) / 2);
    for (int i = 0; i < rows; ++i) {
        std::vector<LinearTerm> terms;
        for (int j = 0; j < model.var_count(); ++j) {
            if (rng.uniform01() < 0.5) continue;
            const int coeff = rng.uniform_int(-5, 5);
            if (coeff != 0) terms.push_back({j, static_cast<double>(coeff)});
        }
        if (terms.empty()) continue;
        const int sense = rng.uniform_int(0, 2);
        const double rhs = rng.uniform_int(-8, 12);
        model.add_constraint(std::move(terms),
                             sense == 0   ? RowSense::LessEqual
                             : sense == 1 ? RowSense::GreaterEqual
                                          : RowSense::Equal,
                             rhs);
    }
    return model;
}

} // namespace

TEST_CASE("variable and constraint construction") {
    MilpModel model;
    const int x = model.add_variable(0.0, 5.0, false, "x");
    CHECK(x == 0);
    const int b = model.add_variable(0.0, 1.0, true, "b");
    CHECK(b == 1);
    CHECK_THROWS_AS(model.add_variable(3.0, 2.0, false, "bad"), ValidationError);
    CHECK_THROWS_AS(model.add_constraint({{7, 1.0}}, RowSense::LessEqual, 1.0), ValidationError);
    CHECK_THROWS_AS(model.set_objective_coeff(9, 1.0), ValidationError);
}

TEST_CASE("lp relaxation basics") {
    SECTION("facet optimum") {
        MilpModel m;
        const int x = m.add_variable(0.0, 1.0, false, "x");
        const int y = m.add_variable(0.0, 1.0, false, "y");
        m.set_objective_coeff(x, -1.0);
        m.set_objective_coeff(y, -1.0);
        m.add_constraint({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0);
        const LpResult r = solve_lp(m);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.objective == Approx(-1.0));
        CHECK(r.values[x] + r.values[y] == Approx(1.0));
    }
    SECTION("conflicting rows are infeasible") {
        MilpModel m;
        const int x = m.add_variable(0.0, kInf, false, "x");
        m.set_objective_coeff(x, 1.0);
        m.add_constraint({{x, 1.0}}, RowSense::GreaterEqual, 2.0);
        m.add_constraint({{x, 1.0}}, RowSense::LessEqual, 1.0);
        CHECK(solve_lp(m).status == SolveStatus::Infeasible);
    }
    SECTION("free improving ray is unbounded") {
        MilpModel m;
        const int x = m.add_variable(0.0, kInf, false, "x");
        m.set_objective_coeff(x, -1.0);
        CHECK(solve_lp(m).status == SolveStatus::Unbounded);
    }
    SECTION("pure bound flip") {
        MilpModel m;
        const int x = m.add_variable(1.0, 3.0, false, "x");
        m.set_objective_coeff(x, -2.0);
        const LpResult r = solve_lp(m);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.values[x] == Approx(3.0));
        CHECK(r.objective == Approx(-6.0));
    }
    SECTION("equality rows and negative bounds") {
        MilpModel m;
        const int x = m.add_variable(-5.0, 5.0, false, "x");
        const int y = m.add_variable(-5.0, 5.0, false, "y");
        m.set_objective_coeff(x, 1.0);
        m.set_objective_coeff(y, 2.0);
        m.add_constraint({{x, 1.0}, {y, 1.0}}, RowSense::Equal, 1.0);
        const LpResult r = solve_lp(m);
        REQUIRE(r.status == SolveStatus::Optimal);
        // y heads for its floor until x hits its cap: x = 5, y = -4
        CHECK(r.values[x] == Approx(5.0));
        CHECK(r.values[y] == Approx(-4.0));
        CHECK(r.objective == Approx(-3.0));
    }
    SECTION("empty rows are checked, not crashed") {
        MilpModel m;
        const int x = m.add_variable(0.0, 1.0, false, "x");
        m.set_objective_coeff(x, 1.0);
        m.add_constraint({}, RowSense::LessEqual, 1.0);
        CHECK(solve_lp(m).status == SolveStatus::Optimal);
        m.add_constraint({}, RowSense::GreaterEqual, 2.0);
        CHECK(solve_lp(m).status == SolveStatus::Infeasible);
    }
}

TEST_CASE("branch and bound on hand-checked instances") {
    SECTION("all-continuous model matches solve_lp") {
        MilpModel m;
        const int x = m.add_variable(0.0, 2.0, false, "x");
        const int y = m.add_variable(0.0, 2.0, false, "y");
        m.set_objective_coeff(x, -3.0);
        m.set_objective_coeff(y, -1.0);
        m.add_constraint({{x, 1.0}, {y, 2.0}}, RowSense::LessEqual, 3.0);
        const LpResult lp = solve_lp(m);
        const MilpSolution s = solve(m);
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.objective == Approx(lp.objective));
        CHECK(s.node_count == 1);
    }
    SECTION("two binaries with a fractional relaxation") {
        MilpModel m;
        const int x = m.add_variable(0.0, 1.0, true, "x");
        const int y = m.add_variable(0.0, 1.0, true, "y");
        m.set_objective_coeff(x, -1.0);
        m.set_objective_coeff(y, -1.0);
        m.add_constraint({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.5);
        const MilpSolution s = solve(m);
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.objective == Approx(-1.0));
        CHECK(s.values[x] + s.values[y] == Approx(1.0));
    }
    SECTION("small knapsack") {
        MilpModel m;
        const int a = m.add_variable(0.0, 1.0, true, "a");
        const int b = m.add_variable(0.0, 1.0, true, "b");
        const int c = m.add_variable(0.0, 1.0, true, "c");
        m.set_objective_coeff(a, -3.0);
        m.set_objective_coeff(b, -4.0);
        m.set_objective_coeff(c, -5.0);
        m.add_constraint({{a, 2.0}, {b, 3.0}, {c, 4.0}}, RowSense::LessEqual, 5.0);
        const MilpSolution s = solve(m);
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.objective == Approx(-7.0));
        CHECK(enumeration_oracle(m) == Approx(-7.0));
    }
    SECTION("infeasible integer model") {
        MilpModel m;
        const int x = m.add_variable(0.0, 1.0, true, "x");
        m.set_objective_coeff(x, 1.0);
        m.add_constraint({{x, 2.0}}, RowSense::GreaterEqual, 3.0);
        CHECK(solve(m).status == SolveStatus::Infeasible);
    }
    SECTION("objective offset is carried through") {
        MilpModel m;
        const int x = m.add_variable(0.0, 1.0, true, "x");
        m.set_objective_coeff(x, -2.0);
        m.set_objective_offset(10.0);
        const MilpSolution s = solve(m);
        CHECK(s.objective == Approx(8.0));
    }
    SECTION("unbounded integral variables are rejected") {
        MilpModel m;
        m.add_variable(0.0, kInf, true, "x");
        CHECK_THROWS_AS(solve(m), ValidationError);
    }
}

TEST_CASE("tree search equals exhaustive enumeration on random models") {
    Rng rng(101);
    int feasible_seen = 0, infeasible_seen = 0;
    for (int i = 0; i < 60; ++i) {
        const MilpModel model = random_model(rng, 8, 6);
        bool feasible = false;
        const double oracle = enumeration_oracle(model, &feasible);
        const MilpSolution s = solve(model);
        if (feasible) {
            ++feasible_seen;
            REQUIRE(s.status == SolveStatus::Optimal);
            CHECK(s.objective == Approx(oracle).margin(1e-6));
        } else {
            ++infeasible_seen;
            CHECK(s.status == SolveStatus::Infeasible);
        }
    }
    // the generator must exercise both outcomes
    CHECK(feasible_seen > 10);
    CHECK(infeasible_seen > 0);
}

TEST_CASE("relaxation bounds the integer optimum from below") {
    Rng rng(103);
    for (int i = 0; i < 40; ++i) {
        const MilpModel model = random_model(rng, 6, 5);
        const LpResult lp = solve_lp(model);
        const MilpSolution s = solve(model);
        if (s.status != SolveStatus::Optimal) continue;
        REQUIRE(lp.status == SolveStatus::Optimal);
        CHECK(lp.objective <= s.objective + 1e-6);
        const auto violations = scan_violations(model, s.values, 1e-6);
        CHECK(violations.empty());
        for (int j = 0; j < model.var_count(); ++j) {
            if (model.vars()[j].integral) {
                CHECK(std::abs(s.values[j] - std::round(s.values[j])) < 1e-6);
            }
        }
    }
}

TEST_CASE("solves are deterministic") {
    Rng rng(107);
    const MilpModel model = random_model(rng, 8, 8);
    const MilpSolution a = solve(model);
    const MilpSolution b = solve(model);
    CHECK(a.status == b.status);
    CHECK(a.node_count == b.node_count);
    if (a.status == SolveStatus::Optimal) {
        CHECK(a.objective == b.objective);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("warm incumbents must be feasible and are used for pruning") {
    MilpModel m;
    const int x = m.add_variable(0.0, 1.0, true, "x");
    m.set_objective_coeff(x, -1.0);
    SolveOptions options;
    options.initial_solution = {1.0};
    const MilpSolution s = solve(m, options);
    CHECK(s.objective == Approx(-1.0));

    m.add_constraint({{x, 1.0}}, RowSense::LessEqual, 0.0);
    CHECK_THROWS_AS(solve(m, options), ValidationError); // x=1 violates the new row
}

TEST_CASE("lp dump contains the documented sections") {
    MilpModel m;
    const int x = m.add_variable(0.0, 1.0, true, "x");
    const int y = m.add_variable(-1.0, 4.0, false, "y");
    m.set_objective_coeff(x, 2.0);
    m.set_objective_coeff(y, -1.5);
    m.set_objective_offset(3.0);
    m.add_constraint({{x, 1.0}, {y, -2.0}}, RowSense::GreaterEqual, -1.0, "row_a");
    std::ostringstream os;
    write_lp(m, os);
    const std::string dump = os.str();
    CHECK(dump.find("Minimize") != std::string::npos);
    CHECK(dump.find("Subject To") != std::string::npos);
    CHECK(dump.find("row_a:") != std::string::npos);
    CHECK(dump.find("Bounds") != std::string::npos);
    CHECK(dump.find("Binaries") != std::string::npos);
    CHECK(dump.find("End") != std::string::npos);
    std::ostringstream os2;
    write_lp(m, os2);
    CHECK(dump == os2.str());
}
