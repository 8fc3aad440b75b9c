#include "fsde/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fsde/errors.hpp"

using fsde::FractionalOrder;
using fsde::FsdeProblem;
using fsde::ProbeBox;

namespace {

double eval1(const fsde::CoefficientFn& fn, double tau, double x) {
    double out = 0.0;
    std::vector<double> state{x};
    fn(tau, state, {&out, 1});
    return out;
}

}  // namespace

TEST_CASE("example1 coefficients") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 0.1);
    CHECK(p.x0 == std::vector<double>{0.1});
    CHECK(eval1(p.drift, 2.0, 0.1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(eval1(p.diffusion, 123.0, 0.3) == 0.3);
    CHECK(p.label == "example1");
    CHECK_FALSE(p.autonomous());
    CHECK(p.fast_time(0.05) == doctest::Approx(0.05).epsilon(1e-15));
    auto q = fsde::make_example1(FractionalOrder(0.9), 1e-4, 0.1);
    CHECK(q.fast_time(0.05) == doctest::Approx(500.0).epsilon(1e-15));
}

TEST_CASE("example2 coefficients") {
    auto p = fsde::make_example2(FractionalOrder(0.9), 0.1, 1.0);
    CHECK(p.x0 == std::vector<double>{0.5});
    CHECK(eval1(p.drift, 0.0, 0.0) == 0.0);
    CHECK(eval1(p.diffusion, 0.0, 1.0) == 2.0);
    // lambda = 1/2: at tau = pi/2, cos = 0, drift = -x/2
    CHECK(eval1(p.drift, std::numbers::pi / 2, 0.8) ==
          doctest::Approx(-0.4).epsilon(1e-12));
    // large tau must not overflow (exp underflows to 0)
    CHECK(eval1(p.diffusion, 1e6, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("example2-homogenized coefficients ignore fast time") {
    auto p = fsde::make_example2_homogenized(FractionalOrder(0.9), 1.0);
    CHECK(p.autonomous());
    CHECK(eval1(p.drift, 0.0, 0.0) == 0.0);
    CHECK(eval1(p.drift, 0.0, std::numbers::pi / 2) ==
          doctest::Approx(1.0 - std::numbers::pi / 4).epsilon(1e-15));
    CHECK(eval1(p.diffusion, 0.0, 0.7) == 0.7);
    // bit-identical under varying tau
    for (double tau : {0.0, 0.5, 3.7, 1e8}) {
        CHECK(eval1(p.drift, tau, 1.234) == eval1(p.drift, 0.0, 1.234));
        CHECK(eval1(p.diffusion, tau, 1.234) == eval1(p.diffusion, 0.0, 1.234));
    }
}

TEST_CASE("example42 keeps the oscillatory pair without the reaction term") {
    auto p = fsde::make_example42(FractionalOrder(0.9), 0.1, 1.0);
    CHECK(eval1(p.drift, 0.0, 1.0) == doctest::Approx(2.0 * std::sin(1.0)));
    auto h = fsde::make_example42_homogenized(FractionalOrder(0.9), 1.0);
    CHECK(eval1(h.drift, 9.0, 1.0) == doctest::Approx(std::sin(1.0)));
    CHECK(eval1(h.diffusion, 9.0, 0.25) == 0.25);
}

TEST_CASE("registry resolves every label and rejects unknown ones") {
    for (const auto& label : fsde::registry_labels()) {
        auto p = fsde::make_from_registry(label, FractionalOrder(0.9), 0.5, 1.0);
        CHECK(p.label == label);
    }
    try {
        fsde::make_from_registry("nope", FractionalOrder(0.9), 0.5, 1.0);
        FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
        std::string msg = e.what();
        for (const auto& label : fsde::registry_labels())
            CHECK(msg.find(label) != std::string::npos);
    }
}

TEST_CASE("problem invariants") {
    auto drift = [](double, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    CHECK_THROWS_AS(fsde::make_problem(FractionalOrder(0.9), -1.0, 1.0, {0.1},
                                       1, drift, drift, "bad"),
                    std::domain_error);
    CHECK_THROWS_AS(fsde::make_problem(FractionalOrder(0.9), 1.0, 0.0, {0.1},
                                       1, drift, drift, "bad"),
                    std::domain_error);
    CHECK_THROWS_AS(fsde::make_problem(FractionalOrder(0.9), 1.0, 1.0, {}, 1,
                                       drift, drift, "bad"),
                    std::domain_error);
    CHECK_THROWS_AS(fsde::make_problem(FractionalOrder(0.9), 1.0, 1.0, {0.1},
                                       0, drift, drift, "bad"),
                    std::domain_error);
}

TEST_CASE("probe: zero coefficients give zero estimates") {
    auto zero = [](double, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    auto p = fsde::make_problem(FractionalOrder(0.9), 1.0, 1.0, {0.0}, 1, zero,
                                zero, "null");
    ProbeBox box{{-1.0}, {1.0}, 0.0, 1.0};
    auto report = fsde::probe_assumptions(p, box, 256, 4);
    CHECK(report.est_state_lipschitz == 0.0);
    CHECK(report.est_time_lipschitz == 0.0);
    CHECK(report.est_growth_bound == 0.0);
    CHECK(report.n_samples == 256);
}

TEST_CASE("probe: example1 state slope reaches 1 on tau in [0,1]") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 1.0);
    ProbeBox box{{-1.0}, {1.0}, 0.0, 1.0};
    auto report = fsde::probe_assumptions(p, box, 4096, 11);
    // diffusion g = x contributes ratio exactly 1 at every sample
    CHECK(report.est_state_lipschitz >= 1.0);
    CHECK(report.est_state_lipschitz <= 1.0 + 1e-12);
    // drift time-slope |t-s||x| <= 1 on the box
    CHECK(report.est_time_lipschitz <= 1.0 + 1e-12);
    CHECK(report.est_time_lipschitz >= 0.5);
}

TEST_CASE("probe: example2 diffusion slope approaches 2 near tau = 0") {
    auto p = fsde::make_example2(FractionalOrder(0.9), 1.0, 1.0);
    ProbeBox box{{-1.0}, {1.0}, 0.0, 1.0};
    auto report = fsde::probe_assumptions(p, box, 8192, 5);
    CHECK(report.est_state_lipschitz >= 2.0 - 0.05);
    CHECK(report.est_state_lipschitz <= 2.0 + 1e-12);
}

TEST_CASE("probe: estimates are monotone in n_samples under seed extension") {
    auto p = fsde::make_example2(FractionalOrder(0.9), 1.0, 1.0);
    ProbeBox box{{-2.0}, {2.0}, 0.0, 4.0};
    double prev_state = 0.0, prev_time = 0.0, prev_growth = 0.0;
    for (std::size_t n : {16, 64, 256, 1024, 4096}) {
        auto r = fsde::probe_assumptions(p, box, n, 33);
        CHECK(r.est_state_lipschitz >= prev_state);
        CHECK(r.est_time_lipschitz >= prev_time);
        CHECK(r.est_growth_bound >= prev_growth);
        prev_state = r.est_state_lipschitz;
        prev_time = r.est_time_lipschitz;
        prev_growth = r.est_growth_bound;
    }
}

TEST_CASE("probe: non-finite coefficient names the offending point") {
    auto bad = [](double tau, std::span<const double> x, std::span<double> out) {
        out[0] = tau > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
    };
    auto ok = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = x[0];
    };
    auto p = fsde::make_problem(FractionalOrder(0.9), 1.0, 1.0, {0.1}, 1, bad,
                                ok, "nan-drift");
    ProbeBox box{{-1.0}, {1.0}, 0.0, 1.0};
    CHECK_THROWS_AS(fsde::probe_assumptions(p, box, 64, 1),
                    fsde::EvaluationError);
}

TEST_CASE("probe: degenerate boxes rejected") {
    auto p = fsde::make_example1(FractionalOrder(0.9), 1.0, 1.0);
    CHECK_THROWS_AS(
        fsde::probe_assumptions(p, ProbeBox{{1.0}, {1.0}, 0.0, 1.0}, 16, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        fsde::probe_assumptions(p, ProbeBox{{-1.0}, {1.0}, 1.0, 1.0}, 16, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        fsde::probe_assumptions(p, ProbeBox{{-1.0}, {1.0}, 0.0, 1.0}, 1, 1),
        std::domain_error);
}
