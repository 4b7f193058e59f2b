#include <cmath>

#include "doctest.h"
#include "npns/error.hpp"
#include "npns/pb.hpp"
#include "npns/pb1d.hpp"
#include "test_oracles.hpp"

using namespace npns;

TEST_CASE("small boundary value gives a vanishing profile") {
    PB1DProblem p{1.0, 1.0, 1e-8, {{1.0, 1.0}, {-1.0, 1.0}}};
    for (auto [y, phi] : solve_pb_1d(p, 101)) CHECK(std::abs(phi) <= 1e-7);
}

TEST_CASE("profile matches RK4 shooting") {
    PB1DProblem p{1.0, 1.0, 1.0, {{1.0, 1.0}, {-1.0, 1.0}}};
    const auto samples = solve_pb_1d(p, 201);
    const auto oracle = oracle::shoot_pb1d(p, 20000);
    double err = 0.0;
    for (auto [y, phi] : samples) err = std::max(err, std::abs(phi - oracle(y)));
    CHECK(err <= 1e-6);
    CHECK(samples.front()[1] == 0.0);
    CHECK(samples.back()[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profile with asymmetric valences matches shooting") {
    // z = (2, -1), Z = (2, 1): sum z/Z = 0.
    PB1DProblem p{0.2, 1.5, 2.0, {{2.0, 2.0}, {-1.0, 1.0}}};
    const PB1DProfile prof(p);
    const auto oracle = oracle::shoot_pb1d(p, 40000);
    double err = 0.0;
    for (int k = 0; k <= 150; ++k) {
        const double y = 1.5 * k / 150;
        err = std::max(err, std::abs(prof(y) - oracle(y)));
    }
    CHECK(err <= 1e-6);
    CHECK(prof.p_of(2.0) == doctest::Approx(std::sqrt(2.0 / 0.2) * 1.5).epsilon(1e-9));
}

TEST_CASE("profile is strictly increasing") {
    PB1DProblem p{0.05, 1.0, 3.0, {{1.0, 1.0}, {-1.0, 1.0}}};
    const auto s = solve_pb_1d(p, 400);
    for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k][1] > s[k - 1][1]);
}

TEST_CASE("1D problem validation and bracket failure") {
    CHECK_THROWS_AS(PB1DProfile({1.0, 1.0, 1.0, {{1.0, 1.0}, {-1.0, 2.0}}}), ConfigError);
    CHECK_THROWS_AS(PB1DProfile({1.0, 1.0, -1.0, {{1.0, 1.0}, {-1.0, 1.0}}}), ConfigError);
    try {
        PB1DProfile({1.0, 1e-9, 50.0, {{1.0, 1.0}, {-1.0, 1.0}}});
        FAIL("expected bracket failure");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("bracket") != std::string::npos);
    }
}

TEST_CASE("2D solver on a y-graded strip reproduces the 1D profile") {
    PB1DProblem p{0.1, 1.0, 2.0, {{1.0, 1.0}, {-1.0, 1.0}}};
    const PB1DProfile prof(p);
    std::vector<double> errs;
    for (int ny : {128, 256, 512}) {
        const auto e = oracle::strip_error(prof, p, ny);
        errs.push_back(e);
    }
    CHECK(errs[0] / errs[1] >= 3.5);
    CHECK(errs[0] / errs[1] <= 4.5);
    CHECK(errs[1] / errs[2] >= 3.5);
    CHECK(errs[1] / errs[2] <= 4.5);
}
