#include "fsde/experiment.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fsde/brownian.hpp"
#include "fsde/homogenize.hpp"

using fsde::ConvergenceTable;
using fsde::dt_study;
using fsde::em_solve;
using fsde::eps_study;
using fsde::FractionalOrder;
using fsde::FsdeProblem;
using fsde::generate;
using fsde::mean_square_error;
using fsde::PathEnsemble;

namespace {

PathEnsemble solved_example1(std::uint64_t seed, std::size_t paths,
                             std::size_t steps, double T, double eps = 1.0) {
    auto p = fsde::make_example1(FractionalOrder(0.9), eps, T);
    auto lattice = generate(seed, paths, steps, T / static_cast<double>(steps), 1);
    return em_solve(p, lattice);
}

}  // namespace

TEST_CASE("mean_square_error: identical ensembles give zero") {
    auto a = solved_example1(3, 8, 16, 0.1);
    CHECK(mean_square_error(a, a) == 0.0);
}

TEST_CASE("mean_square_error: constant offset is recovered exactly") {
    auto a = solved_example1(3, 8, 16, 0.1);
    auto b = a;
    const double c = -0.73;
    for (double& v : b.states) v += c;
    CHECK(mean_square_error(a, b) == doctest::Approx(std::fabs(c)).epsilon(1e-14));
}

TEST_CASE("mean_square_error: symmetry and triangle inequality") {
    auto a = solved_example1(3, 16, 8, 0.1);
    auto b = a;
    auto c = a;
    for (std::size_t i = 0; i < b.states.size(); ++i) {
        b.states[i] += 0.01 * std::sin(static_cast<double>(i));
        c.states[i] -= 0.02 * std::cos(static_cast<double>(i));
    }
    CHECK(mean_square_error(a, b) == mean_square_error(b, a));
    double ab = mean_square_error(a, b);
    double bc = mean_square_error(b, c);
    double ac = mean_square_error(a, c);
    CHECK(ac <= ab + bc + 8e-15 * (ab + bc));
}

TEST_CASE("mean_square_error: nested grids compare on the coarse one") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 0.1);
    auto fine = generate(5, 8, 32, 0.1 / 32, 1);
    auto a = em_solve(p, fine);
    auto b = em_solve(p, coarsen(fine, 4));
    double e = mean_square_error(a, b);
    CHECK(e > 0.0);
    CHECK(e == mean_square_error(b, a));
}

TEST_CASE("mean_square_error: guards") {
    auto a = solved_example1(3, 8, 16, 0.1);
    auto other_seed = solved_example1(4, 8, 16, 0.1);
    CHECK_THROWS_AS(mean_square_error(a, other_seed), std::domain_error);
    auto fewer_paths = solved_example1(3, 4, 16, 0.1);
    CHECK_THROWS_AS(mean_square_error(a, fewer_paths), std::domain_error);
    auto non_nested = solved_example1(3, 8, 24, 0.1);
    CHECK_THROWS_AS(mean_square_error(a, non_nested), std::domain_error);
}

TEST_CASE("dt_study: deterministic problem converges at order >= alpha - 0.1") {
    auto zero = [](double, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    auto decay = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = -0.5 * x[0];
    };
    auto p = fsde::make_problem(FractionalOrder(0.9), 1.0, 1.0, {0.1}, 1,
                                decay, zero, "linear-det");
    auto table = dt_study(p, {1.0 / 128, 1.0 / 256, 1.0 / 512}, 1, 7);
    REQUIRE(table.rows.size() == 3);
    CHECK_FALSE(table.rows[0].order.has_value());
    for (std::size_t k = 1; k < 3; ++k) {
        REQUIRE(table.rows[k].order.has_value());
        CHECK(*table.rows[k].order >= 0.9 - 0.1);
    }
    for (const auto& row : table.rows) CHECK(row.error > 0.0);
}

TEST_CASE("dt_study: orders are invariant under state rescaling") {
    auto make_scaled = [](double x0) {
        return fsde::make_problem(
            FractionalOrder(0.9), 1.0, 0.1, {x0}, 1,
            [](double tau, std::span<const double> x, std::span<double> out) {
                out[0] = tau * x[0];
            },
            [](double, std::span<const double> x, std::span<double> out) {
                out[0] = x[0];
            },
            "scaled");
    };
    std::vector<double> dts{1.0 / 80, 1.0 / 160, 1.0 / 320};
    auto small = dt_study(make_scaled(0.1), dts, 200, 99);
    auto large = dt_study(make_scaled(10.0), dts, 200, 99);
    for (std::size_t k = 1; k < dts.size(); ++k) {
        CHECK(std::fabs(*small.rows[k].order - *large.rows[k].order) < 1e-9);
        // errors scale by ~100, orders do not
        CHECK(large.rows[k].error / small.rows[k].error ==
              doctest::Approx(100.0).epsilon(1e-9));
    }
}

TEST_CASE("dt_study: common random numbers beat independent lattices") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 0.1);
    auto fine = generate(21, 500, 32, 0.1 / 32, 1);
    auto crn_coarse = em_solve(p, coarsen(fine, 2));
    auto crn_fine = em_solve(p, fine);
    double e_crn = mean_square_error(crn_coarse, crn_fine);

    auto indep = generate(22, 500, 16, 0.1 / 16, 1);
    auto indep_coarse = em_solve(p, indep);
    PathEnsemble hacked = indep_coarse;
    hacked.fingerprint = crn_fine.fingerprint;  // bypass the CRN guard
    double e_indep = mean_square_error(hacked, crn_fine);
    CHECK(e_crn < e_indep);
}

TEST_CASE("dt_study: list validation") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 0.1);
    CHECK_THROWS_AS(dt_study(p, {1.0 / 80}, 4, 1), std::domain_error);
    CHECK_THROWS_AS(dt_study(p, {1.0 / 80, 1.0 / 300}, 4, 1),
                    std::domain_error);
    CHECK_THROWS_AS(dt_study(p, {1.0 / 75, 1.0 / 150}, 4, 1),
                    std::domain_error);  // T/dt = 7.5 not integral
}

TEST_CASE("eps_study: negligible fast-time dependence gives a tiny error") {
    // eps >= 1e6 * T: drift difference |t/eps - t/(2 eps)| |x| <= T/(2 eps) |x|
    auto factory = [](double eps) {
        return fsde::make_example1(FractionalOrder(0.9), eps, 1e-6);
    };
    auto table = eps_study(factory, {1.0}, 1e-8, 64, 5);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].error < 1e-3 * 0.1);
}

TEST_CASE("eps_study: doubling validation") {
    auto factory = [](double eps) {
        return fsde::make_example1(FractionalOrder(0.9), eps, 1e-6);
    };
    CHECK_THROWS_AS(eps_study(factory, {1e-8, 3e-8}, 1e-8, 4, 1),
                    std::domain_error);
}

TEST_CASE("homogenization_comparison: identical problems give Ex == Ey") {
    auto p = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    auto curves = fsde::homogenization_comparison(p, p, 1.0 / 16, 1.0 / 64, 32, 9);
    REQUIRE(curves.t.size() == 17);
    CHECK(curves.ex[0] == 0.0);
    for (std::size_t i = 0; i < curves.t.size(); ++i)
        CHECK(curves.ex[i] == curves.ey[i]);
}

TEST_CASE("homogenization_comparison: validation") {
    auto a = fsde::make_example2(FractionalOrder(0.9), 0.1, 1.0);
    auto b = fsde::make_example2_homogenized(FractionalOrder(0.9), 2.0);
    CHECK_THROWS_AS(fsde::homogenization_comparison(a, b, 1.0 / 16, 1.0 / 64, 8, 1),
                    std::domain_error);  // horizons differ
    auto c = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    CHECK_THROWS_AS(fsde::homogenization_comparison(a, c, 1.0 / 64, 1.0 / 48, 8, 1),
                    std::domain_error);  // non-nested steps
}

TEST_CASE("mu_study: eps-independent problem against itself") {
    auto hom = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    auto factory = [&](double) { return hom; };
    auto table = fsde::mu_study(factory, hom, {1e-1, 5e-2, 2.5e-2}, 1.0 / 64,
                                16, 3);
    for (const auto& row : table.rows) {
        CHECK(row.error == 0.0);
        CHECK_FALSE(row.order.has_value());  // mu undefined, reported as such
    }
    CHECK(table.meta.disc_check_warning);  // zero gap cannot dominate dt error
}

TEST_CASE("mu_study: example2 gap shrinks with eps") {
    auto hom = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    auto factory = [](double eps) {
        return fsde::make_example2(FractionalOrder(0.9), eps, 1.0);
    };
    auto table = fsde::mu_study(factory, hom, {1e-1, 5e-2, 2.5e-2}, 1.0 / 256,
                                400, 12);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].error > table.rows[1].error);
    CHECK(table.rows[1].error > table.rows[2].error);
    for (std::size_t k = 1; k < 3; ++k) {
        REQUIRE(table.rows[k].order.has_value());
        CHECK(*table.rows[k].order > 0.0);  // decay in eps
    }

    // far end of the scale-separation range: the gap at eps = 1e-4 sits well
    // below the gap at eps = 1e-1 on the same lattice
    auto lattice = fsde::generate(12, 400, 256, 1.0 / 256, 1);
    auto hom_sol = em_solve(hom, lattice);
    double gap_wide = mean_square_error(em_solve(factory(1e-1), lattice), hom_sol);
    double gap_tight = mean_square_error(em_solve(factory(1e-4), lattice), hom_sol);
    CHECK(gap_tight < gap_wide);
}

TEST_CASE("table CSV carries metadata and blank orders") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 0.1);
    auto table = dt_study(p, {1.0 / 80, 1.0 / 160}, 16, 31);
    table.meta.config_hash = "deadbeef";
    std::ostringstream os;
    fsde::write_table_csv(os, table);
    std::string text = os.str();
    CHECK(text.starts_with("# metadata: study=dt model=example1"));
    CHECK(text.find("seed=31") != std::string::npos);
    CHECK(text.find("generator=") != std::string::npos);
    CHECK(text.find("config=deadbeef") != std::string::npos);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // metadata
    std::getline(is, line);
    CHECK(line == "param,error,order");
    std::getline(is, line);
    CHECK(line.ends_with(","));  // first row has no order
    std::getline(is, line);
    CHECK_FALSE(line.ends_with(","));
}

TEST_CASE("curves CSV layout") {
    auto p = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    auto curves = fsde::homogenization_comparison(p, p, 1.0 / 8, 1.0 / 16, 8, 9);
    std::ostringstream os;
    fsde::write_curves_csv(os, curves);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line.starts_with("# metadata: study=compare"));
    std::getline(is, line);
    CHECK(line == "t,Ex,Ey");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 9);
}
