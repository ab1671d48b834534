#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "predkit/integrate.hpp"
#include "predkit/linear_lyap.hpp"
#include "predkit/model.hpp"
#include "predkit/nlle.hpp"
#include "predkit/rng.hpp"
#include "support/oracles.hpp"

using namespace predkit;

TEST_CASE("tangent propagation of a linear system is the system itself") {
    auto model = make_model("linear", {{"a", -0.7}});
    const auto base = integrate_trajectory(*model, {1.0}, 0.0, 1.0, 1e-3);
    const auto delta = tangent_propagate(*model, base, {1.0});
    CHECK(std::fabs(delta[0] - std::exp(-0.7)) < 1e-9);
}

TEST_CASE("tangent contraction at the toy node") {
    auto model = make_model("toy", {{"lambda", 1.0}});
    const auto base = integrate_trajectory(*model, {1.0, 1.0}, 0.0, 1.0, 0.01);
    const auto delta = tangent_propagate(*model, base, {1.0, 0.0});
    CHECK(std::fabs(delta[0] - std::exp(-2.0)) < 1e-6);
    CHECK(delta[1] == 0.0);
}

TEST_CASE("TLM matches the rescaled nonlinear difference on lorenz63") {
    auto model = make_model("lorenz63", {});
    const auto sample =
        sample_attractor(*model, model->default_initial_state(), 60.0, 5, 1.0, 0.01);
    Rng rng(11);
    for (const auto& x0 : sample.points) {
        State dir(3);
        rng.unit_sphere(dir);
        const auto base = integrate_trajectory(*model, x0, 0.0, 1.0, 0.01);
        const auto tlm = tangent_propagate(*model, base, dir);

        State tiny = dir;
        for (auto& v : tiny) v *= 1e-9;
        const auto diff = nonlinear_propagate(*model, x0, tiny, 1.0, 0.01);
        double err = 0.0;
        for (int c = 0; c < 3; ++c) err = std::max(err, std::fabs(diff[c] / 1e-9 - tlm[c]));
        CHECK(err <= 1e-4 * norm2(tlm));
    }
}

TEST_CASE("finite-time LLE of a linear system is the rate, exactly") {
    auto model = make_model("linear", {{"a", 0.5}});
    CHECK(std::fabs(finite_time_lle(*model, {1.0}, {1.0}, 2.0, 0.01) - 0.5) < 1e-10);
}

TEST_CASE("finite-time LLE at the toy node is the uniform contraction rate") {
    auto model = make_model("toy", {{"lambda", 1.0}});
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        State dir(2);
        rng.unit_sphere(dir);
        CHECK(std::fabs(finite_time_lle(*model, {1.0, 1.0}, dir, 1.0, 0.01) + 2.0) < 1e-6);
    }
}

TEST_CASE("finite-time LLE is exactly invariant under power-of-two direction scaling") {
    auto model = make_model("lorenz63", {});
    const State x0 = {3.1, -2.2, 21.0};
    const State dir = {0.3, -0.5, 0.81};
    State scaled = dir;
    for (auto& v : scaled) v *= 4.0;
    CHECK(finite_time_lle(*model, x0, dir, 0.5, 0.01) ==
          finite_time_lle(*model, x0, scaled, 0.5, 0.01));
}

TEST_CASE("benettin on a diagonal linear model recovers the rates") {
    auto model = make_model("lineardiag", {{"a1", 1.0}, {"a2", -2.0}});
    // Base orbit at the origin equilibrium; the tangent frame carries the rates.
    const auto spec = benettin_spectrum(*model, {0.0, 0.0}, 20.0, 0.5, 2, 0.01);
    REQUIRE(spec.exponents.size() == 2);
    CHECK(std::fabs(spec.exponents[0] - 1.0) < 1e-8);
    CHECK(std::fabs(spec.exponents[1] + 2.0) < 1e-8);
}

TEST_CASE("benettin at a toy node converges to double contraction") {
    auto model = make_model("toy", {{"lambda", 1.0}});
    const auto spec = benettin_spectrum(*model, {0.8, 1.2}, 4000.0, 0.5, 2, 0.01);
    CHECK(std::fabs(spec.exponents[0] + 2.0) < 1e-3);
    CHECK(std::fabs(spec.exponents[1] + 2.0) < 1e-3);
}

TEST_CASE("benettin exponent sum equals the constant lorenz divergence") {
    auto model = make_model("lorenz63", {});
    const State x0 =
        integrate_trajectory(*model, model->default_initial_state(), 0.0, 50.0, 0.01)
            .final_state();
    const auto spec = benettin_spectrum(*model, x0, 100.0, 0.5, 3, 0.01);
    const double sum = spec.exponents[0] + spec.exponents[1] + spec.exponents[2];
    CHECK(std::fabs(sum + (10.0 + 1.0 + 8.0 / 3.0)) < 0.01);
}

TEST_CASE("lorenz spectrum is stable across renormalization intervals") {
    auto model = make_model("lorenz63", {});
    const State x0 =
        integrate_trajectory(*model, model->default_initial_state(), 0.0, 50.0, 0.01)
            .final_state();
    double lambda1[3];
    int k = 0;
    for (double renorm : {0.1, 0.5, 1.0}) {
        lambda1[k++] = benettin_spectrum(*model, x0, 500.0, renorm, 3, 0.01).exponents[0];
    }
    CHECK(std::fabs(lambda1[0] - lambda1[1]) < 0.05);
    CHECK(std::fabs(lambda1[1] - lambda1[2]) < 0.05);
    CHECK(std::fabs(lambda1[0] - lambda1[2]) < 0.05);
}

TEST_CASE("tangent preconditions") {
    auto model = make_model("lorenz63", {});
    const auto base = integrate_trajectory(*model, {1.0, 1.0, 1.0}, 0.0, 1.0, 0.01);
    CHECK_THROWS_AS(tangent_propagate(*model, base, {0.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(tangent_propagate(*model, base, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(finite_time_lle(*model, {1.0, 1.0, 1.0}, {1.0, 0.0, 0.0}, -1.0, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(benettin_spectrum(*model, {1.0, 1.0, 1.0}, 10.0, 0.5, 4, 0.01),
                    std::invalid_argument);
}
