#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "predkit/errors.hpp"
#include "predkit/integrate.hpp"
#include "predkit/model.hpp"

using namespace predkit;

TEST_CASE("linear decay matches the analytic exponential") {
    auto model = make_model("linear", {{"a", -1.0}});
    const auto traj = integrate_trajectory(*model, {1.0}, 0.0, 1.0, 1e-3);
    CHECK(std::fabs(traj.final_state()[0] - std::exp(-1.0)) < 1e-9);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 1.0);
}

TEST_CASE("zero duration returns the initial state only") {
    auto model = make_model("lorenz63", {});
    const auto traj = integrate_trajectory(*model, {1.0, 2.0, 3.0}, 5.0, 0.0, 0.01);
    CHECK(traj.size() == 1);
    CHECK(traj.states[0] == State{1.0, 2.0, 3.0});
    CHECK(traj.times[0] == 5.0);
}

TEST_CASE("toy trajectory on the diagonal settles onto the stable node") {
    auto model = make_model("toy", {{"lambda", 1.0}});
    const auto traj = integrate_trajectory(*model, {0.1, 0.1}, 0.0, 50.0, 0.01);
    CHECK(std::fabs(traj.final_state()[0] - 1.0) < 1e-4);
    CHECK(std::fabs(traj.final_state()[1] - 1.0) < 1e-4);
}

TEST_CASE("rk4 halving the step cuts the endpoint error ~16x") {
    auto model = make_model("linear", {{"a", -1.0}});
    const double exact = std::exp(-1.0);
    double prev_err = 0.0;
    int k = 0;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const auto traj = integrate_trajectory(*model, {1.0}, 0.0, 1.0, h);
        const double err = std::fabs(traj.final_state()[0] - exact);
        if (k > 0) {
            const double ratio = prev_err / err;
            CHECK(ratio >= 12.0);
            CHECK(ratio <= 20.0);
        }
        prev_err = err;
        ++k;
    }
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    auto model = make_model("lorenz63", {});
    const auto a = integrate_trajectory(*model, {1.0, 1.0, 1.0}, 0.0, 10.0, 0.01);
    const auto b = integrate_trajectory(*model, {1.0, 1.0, 1.0}, 0.0, 10.0, 0.01);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.times[i] == b.times[i]);
        CHECK(a.states[i] == b.states[i]);
    }
}

TEST_CASE("time grid lands exactly on t0 + duration with a partial final step") {
    auto model = make_model("linear", {{"a", -0.3}});
    const double duration = 0.105;  // 10 whole steps of 0.01 plus 0.005
    const auto traj = integrate_trajectory(*model, {1.0}, 2.0, duration, 0.01);
    CHECK(traj.size() == 12);
    CHECK(traj.times.back() == 2.0 + duration);
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        CHECK(traj.times[i] < traj.times[i + 1]);
    }
    CHECK(std::fabs(traj.final_state()[0] - std::exp(-0.3 * duration)) < 1e-12);
}

TEST_CASE("runaway growth aborts with a trajectory escape naming the time") {
    auto model = make_model("linear", {{"a", 5.0}});
    // |x| = exp(5t) crosses 1e8 near t = ln(1e8)/5 ~ 3.68
    try {
        integrate_trajectory(*model, {1.0}, 0.0, 10.0, 0.01);
        FAIL("expected TrajectoryEscape");
    } catch (const TrajectoryEscape& e) {
        CHECK(e.time() > 3.5);
        CHECK(e.time() < 3.9);
        CHECK(std::string(e.what()).find("escape") != std::string::npos);
    }
}

TEST_CASE("precondition violations are rejected") {
    auto model = make_model("linear", {{"a", -1.0}});
    CHECK_THROWS_AS(integrate_trajectory(*model, {1.0}, 0.0, -1.0, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_trajectory(*model, {1.0}, 0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_trajectory(*model, {1.0}, 0.0, 0.5, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_trajectory(*model, {1.0, 2.0}, 0.0, 1.0, 0.01),
                    std::invalid_argument);
}

TEST_CASE("lorenz63 attractor sample stays inside the known bounding box") {
    auto model = make_model("lorenz63", {});
    const auto sample =
        sample_attractor(*model, model->default_initial_state(), 100.0, 1000, 0.5, 0.01, 42);
    REQUIRE(sample.points.size() == 1000);
    for (const auto& p : sample.points) {
        CHECK(std::fabs(p[2] - 25.0) < 25.0);
        CHECK(norm2(p) < 100.0);
    }
}

TEST_CASE("globally stable linear sampling collapses toward the origin") {
    auto model = make_model("linear", {{"a", -1.0}});
    const auto sample = sample_attractor(*model, {1.0}, 50.0, 5, 0.5, 0.01);
    for (const auto& p : sample.points) CHECK(std::fabs(p[0]) < 1e-8);
}

TEST_CASE("count=1 returns exactly the spin-up endpoint") {
    auto model = make_model("lorenz63", {});
    const auto sample = sample_attractor(*model, {1.0, 1.0, 1.0}, 10.0, 1, 0.5, 0.01);
    REQUIRE(sample.points.size() == 1);
    const auto traj = integrate_trajectory(*model, {1.0, 1.0, 1.0}, 0.0, 10.0, 0.01);
    CHECK(sample.points[0] == traj.final_state());
}

TEST_CASE("sampling a collapsed fixed-point orbit is reported") {
    // At lambda=1 every orbit reaches a node exactly in double precision, so a
    // long sample repeats one point.
    auto model = make_model("toy", {{"lambda", 1.0}});
    CHECK_THROWS_AS(sample_attractor(*model, {0.3, 0.4}, 200.0, 10, 1.0, 0.01),
                    std::runtime_error);
}
