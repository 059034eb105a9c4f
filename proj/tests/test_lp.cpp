#include <doctest.h>

#include "elsaa/error.hpp"
#include "elsaa/lp.hpp"
#include "elsaa/random.hpp"
#include "oracles.hpp"
#include "testing.hpp"

#include <stdexcept>

using namespace elsaa;

namespace {

// Random instance of min c'x s.t. A x <= b, x >= 0 with a bounding row.
struct Instance {
    std::vector<double> c;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
};

Instance random_instance(RandomSource& src, std::size_t vars, std::size_t rows) {
    Instance in;
    in.c.resize(vars);
    for (double& v : in.c) v = 2.0 * src.uniform() - 1.0;
    for (std::size_t r = 0; r + 1 < rows; ++r) {
        std::vector<double> row(vars);
        for (double& v : row) v = 2.0 * src.uniform() - 1.0;
        in.A.push_back(row);
        // Some right-hand sides are negative so phase one has work to do.
        in.b.push_back(2.0 * src.uniform() - 0.5);
    }
    in.A.push_back(std::vector<double>(vars, 1.0));
    in.b.push_back(5.0);
    return in;
}

} // namespace

TEST_SUITE("lp") {

TEST_CASE("textbook instances") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.inequality_rows = {{-1.0}};
    lp.inequality_rhs = {-3.0};
    auto r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(near(r.x[0], 3.0, 1e-12));
    CHECK(near(r.value, 3.0, 1e-12));

    LinearProgram lp2;
    lp2.objective = {-1.0, -1.0};
    lp2.inequality_rows = {{1.0, 1.0}};
    lp2.inequality_rhs = {1.0};
    r = solve_lp(lp2);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(near(r.value, -1.0, 1e-12));
}

TEST_CASE("infeasible and unbounded") {
    LinearProgram lp;
    lp.objective = {1.0, 1.0};
    lp.inequality_rows = {{1.0, 1.0}, {-1.0, -1.0}};
    lp.inequality_rhs = {1.0, -2.0};
    CHECK(solve_lp(lp).status == LpStatus::infeasible);

    LinearProgram un;
    un.objective = {-1.0, 0.0};
    un.inequality_rows = {{-1.0, 1.0}};
    un.inequality_rhs = {1.0};
    CHECK(solve_lp(un).status == LpStatus::unbounded);
}

TEST_CASE("free, shifted and boxed variables with equalities") {
    // min x - 2y + z, x free, 1 <= y <= 4, z <= 2 (lower -inf),
    // x + y + z = 3, x - z >= -1.
    LinearProgram lp;
    lp.objective = {1.0, -2.0, 1.0};
    lp.equality_rows = {{1.0, 1.0, 1.0}};
    lp.equality_rhs = {3.0};
    lp.inequality_rows = {{-1.0, 0.0, 1.0}};
    lp.inequality_rhs = {1.0};
    lp.lower = {-kInf, 1.0, -kInf};
    lp.upper = {kInf, 4.0, 2.0};
    const auto r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    // y = 4 at its cap; x + z = -1 and z <= x + 1 leave the objective x + z = -1.
    CHECK(near(r.value, -9.0, 1e-10));
    CHECK(r.primal_residual <= 1e-9);
    CHECK(near(r.x[1], 4.0, 1e-10));
}

TEST_CASE("matches vertex enumeration on 100 random instances") {
    RandomSource src(2024);
    int optimal = 0;
    int infeasible = 0;
    for (int k = 0; k < 100; ++k) {
        const Instance in = random_instance(src, 4, 6);
        LinearProgram lp;
        lp.objective = in.c;
        lp.inequality_rows = in.A;
        lp.inequality_rhs = in.b;
        const auto r = solve_lp(lp);
        const auto ref = oracle::enumerate_vertices(in.c, in.A, in.b);
        if (ref.feasible) {
            ++optimal;
            REQUIRE(r.status == LpStatus::optimal);
            CHECK(near(r.value, ref.value, 1e-6));
            CHECK(r.primal_residual <= 1e-8);
            CHECK(near(r.dual_value, r.value, 1e-7));
            CHECK(r.dual_infeasibility <= 1e-9);
        } else {
            ++infeasible;
            CHECK(r.status == LpStatus::infeasible);
        }
    }
    CHECK(optimal > 50);
    MESSAGE("optimal " << optimal << ", infeasible " << infeasible);
}

TEST_CASE("degenerate instance terminates") {
    // Many constraints active at the origin.
    LinearProgram lp;
    lp.objective = {-1.0, -1.0, -1.0};
    lp.inequality_rows = {{1.0, -1.0, 0.0}, {-1.0, 1.0, 0.0}, {0.0, 1.0, -1.0}, {0.0, -1.0, 1.0}, {1.0, 1.0, 1.0}};
    lp.inequality_rhs = {0.0, 0.0, 0.0, 0.0, 3.0};
    const auto r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(near(r.value, -3.0, 1e-10));
}

TEST_CASE("input validation and pivot cap") {
    LinearProgram bad;
    bad.objective = {1.0, 2.0};
    bad.inequality_rows = {{1.0}};
    bad.inequality_rhs = {1.0};
    CHECK_THROWS_AS(solve_lp(bad), std::invalid_argument);
    LinearProgram lp;
    lp.objective = {-1.0, -1.0};
    lp.inequality_rows = {{1.0, 2.0}, {2.0, 1.0}};
    lp.inequality_rhs = {4.0, 4.0};
    CHECK_THROWS_AS(solve_lp(lp, 1), SolverError);
}

}
