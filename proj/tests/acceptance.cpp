// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the full-scale configurations, so it is slower than the unit
// tests (minutes, not seconds).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "predkit/bifurcation.hpp"
#include "predkit/config.hpp"
#include "predkit/errors.hpp"
#include "predkit/gsr.hpp"
#include "predkit/integrate.hpp"
#include "predkit/io.hpp"
#include "predkit/linear_lyap.hpp"
#include "predkit/model.hpp"
#include "predkit/nlle.hpp"
#include "predkit/rng.hpp"
#include "predkit/runner.hpp"
#include "support/oracles.hpp"

using namespace predkit;
namespace fs = std::filesystem;

namespace {

int g_workers = 2;

struct Checker {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            detail << (detail.tellp() > 0 ? "; " : "") << what;
        }
    }
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "predkit_acceptance";
    fs::create_directories(dir);
    return dir;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

bool criterion_toy_bifurcation(Checker& c) {
    const double horizons[] = {240.0, 120.0, 80.0, 50.0};
    const double lambdas[] = {0.25, 0.5, 1.0, 2.0};
    for (int i = 0; i < 4; ++i) {
        const double lambda = lambdas[i];
        const auto report = verify_toy_attractor(lambda, 1000, horizons[i], 7, g_workers);
        const double s = std::sqrt(lambda);

        c.require(report.node_count == 4,
                  "lambda=" + fmt(lambda) + ": node_count=" + std::to_string(report.node_count));
        c.require(report.saddle_count == 4,
                  "lambda=" + fmt(lambda) +
                      ": saddle_count=" + std::to_string(report.saddle_count));

        // Nodes at (+-sqrt(l), +-sqrt(l)), saddles on the axes, within 1e-8.
        int nodes_located = 0, saddles_located = 0;
        for (const auto& fp : report.fixed_points) {
            if (fp.classification == StabilityClass::StableNode) {
                const State expect = {fp.location[0] > 0 ? s : -s, fp.location[1] > 0 ? s : -s};
                if (dist2(fp.location, expect) <= 1e-8) ++nodes_located;
            }
            if (fp.classification == StabilityClass::Saddle) {
                State expect(2, 0.0);
                if (std::fabs(fp.location[0]) > std::fabs(fp.location[1])) {
                    expect[0] = fp.location[0] > 0 ? s : -s;
                } else {
                    expect[1] = fp.location[1] > 0 ? s : -s;
                }
                if (dist2(fp.location, expect) <= 1e-8) ++saddles_located;
            }
        }
        c.require(nodes_located == 4, "lambda=" + fmt(lambda) + ": nodes off analytic spots");
        c.require(saddles_located == 4, "lambda=" + fmt(lambda) + ": saddles off analytic spots");

        c.require(report.basin_converged_fraction >= 0.999,
                  "lambda=" + fmt(lambda) +
                      ": converged=" + fmt(report.basin_converged_fraction));
        c.require(report.attractor_radius_min >= s - 1e-3,
                  "lambda=" + fmt(lambda) + ": r_min=" + fmt(report.attractor_radius_min));
        c.require(report.attractor_radius_max <= std::sqrt(2.0 * lambda) + 1e-3,
                  "lambda=" + fmt(lambda) + ": r_max=" + fmt(report.attractor_radius_max));
    }
    return c.ok;
}

bool criterion_prebifurcation(Checker& c) {
    auto model = make_model("toy", {{"lambda", -0.5}});
    const auto records = find_fixed_points(*model, {-2.0, -2.0}, {2.0, 2.0}, 21, 1e-8);
    c.require(records.size() == 1, "expected a single fixed point, got " +
                                       std::to_string(records.size()));
    if (!records.empty()) {
        c.require(records[0].classification == StabilityClass::StableNode,
                  "origin not a stable node");
        c.require(norm2(records[0].location) <= 1e-8, "fixed point away from origin");
    }

    const double horizon = 50.0 / 0.5;
    int reached = 0;
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const State x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const auto traj = integrate_trajectory(*model, x, 0.0, horizon, 0.01);
        if (norm2(traj.final_state()) <= 1e-6) ++reached;
    }
    c.require(reached == 1000, "only " + std::to_string(reached) + "/1000 reached the origin");
    return c.ok;
}

bool criterion_pes(Checker& c) {
    ModelFamily toy;
    toy.model_name = "toy";
    toy.parameter = "lambda";
    const auto toy_result = pes_scan(toy, {0.0, 0.0}, {-1.0, -0.5, 0.0, 0.5, 1.0});
    c.require(toy_result.lambda0.has_value() && std::fabs(*toy_result.lambda0) <= 1e-9,
              "toy crossing missed");
    c.require(toy_result.crossing_count == 2,
              "toy m=" + std::to_string(toy_result.crossing_count));

    ModelFamily lorenz;
    lorenz.model_name = "lorenz63";
    lorenz.parameter = "r";
    const auto lz = pes_scan(lorenz, {0.0, 0.0, 0.0}, {0.5, 1.5});
    c.require(lz.lambda0.has_value(), "lorenz crossing missed");
    if (lz.lambda0) {
        c.require(std::fabs(*lz.lambda0 - 1.0) <= 1e-6, "r0=" + fmt(*lz.lambda0));
    }
    c.require(lz.crossing_count == 1, "lorenz m=" + std::to_string(lz.crossing_count));
    return c.ok;
}

LyapunovSpectrum g_benettin;  // criterion 4 result, reused by criterion 7

bool criterion_gle(Checker& c) {
    auto model = make_model("lorenz63", {});
    const State x0 =
        integrate_trajectory(*model, model->default_initial_state(), 0.0, 100.0, 0.01)
            .final_state();
    g_benettin = benettin_spectrum(*model, x0, 2000.0, 0.5, 3, 0.01);
    const auto& e = g_benettin.exponents;
    c.require(std::fabs(e[0] - 0.906) <= 0.02, "lambda1=" + fmt(e[0]));
    c.require(std::fabs(e[1]) <= 0.01, "lambda2=" + fmt(e[1]));
    const double sum = e[0] + e[1] + e[2];
    c.require(std::fabs(sum + 13.67) <= 0.05, "sum=" + fmt(sum));
    c.detail << (c.detail.tellp() > 0 ? "; " : "") << "spectrum=(" << fmt(e[0]) << ", "
             << fmt(e[1]) << ", " << fmt(e[2]) << ")";
    return c.ok;
}

bool criterion_infinitesimal_consistency(Checker& c) {
    auto model = make_model("lorenz63", {});
    const auto sample =
        sample_attractor(*model, model->default_initial_state(), 100.0, 100, 0.5, 0.01);
    Rng rng(29);
    int agree = 0;
    for (const auto& x0 : sample.points) {
        State dir(3);
        rng.unit_sphere(dir);
        State tiny = dir;
        for (auto& v : tiny) v *= 1e-9;
        const double nonlinear = nlle_single(*model, x0, tiny, 0.5, 0.01);
        const double linear = finite_time_lle(*model, x0, dir, 0.5, 0.01);
        if (std::fabs(nonlinear - linear) <= 1e-3) ++agree;
    }
    c.require(agree >= 95, "agreement on only " + std::to_string(agree) + "/100 points");
    c.detail << (c.detail.tellp() > 0 ? "; " : "") << "agree=" << agree << "/100";
    return c.ok;
}

ExperimentConfig saturation_config(const std::string& out_dir) {
    return parse_config_text(
        "[model]\nname = lorenz63\n"
        "[integrator]\nstep = 0.01\n"
        "[sampling]\nspinup = 100\ncount = 400\ninterval = 0.5\n"
        "[perturbation]\nepsilon = 1e-5\ndirections_per_point = 25\n"
        "[analysis]\ntype = nlle\nwindow = 10\nslope_tol = 0.02\ntheta = 0.05\n"
        "[output]\ndirectory = " + out_dir + "\n");
}

bool criterion_saturation(Checker& c) {
    const auto dir = work_dir();
    std::vector<double> t_p(3), e_sat(3);
    std::vector<double> grid;
    for (int s = 1; s <= 3; ++s) {
        const auto out = dir / ("sat_seed" + std::to_string(s));
        RunOptions opts;
        opts.seed = static_cast<std::uint64_t>(s);
        opts.workers = g_workers;
        run_config(saturation_config(out.string()), opts);

        const auto summary = nlohmann::json::parse(read_file((out / "nlle.json").string()));
        c.require(!summary["e_sat"].is_null() && !summary["t_p"].is_null(),
                  "seed " + std::to_string(s) + ": saturation not reached");
        if (summary["e_sat"].is_null() || summary["t_p"].is_null()) return c.ok;
        e_sat[s - 1] = summary["e_sat"].get<double>();
        t_p[s - 1] = summary["t_p"].get<double>();

        if (grid.empty()) {
            std::istringstream csv(read_file((out / "nlle.csv").string()));
            std::string line;
            std::getline(csv, line);  // header
            double max_rgie = 0.0;
            while (std::getline(csv, line)) {
                double tau, mean, rgie;
                std::sscanf(line.c_str(), "%lf,%lf,%lf", &tau, &mean, &rgie);
                grid.push_back(tau);
                max_rgie = std::max(max_rgie, rgie);
                c.require(std::fabs(rgie - std::exp(mean * tau)) <= 1e-12 * rgie,
                          "rgie identity broken at tau=" + fmt(tau));
            }
            // Bounded-attractor ceiling: growth can never exceed the sample
            // diameter over epsilon.
            auto model0 = make_model("lorenz63", {});
            const auto s0 = sample_attractor(*model0, model0->default_initial_state(), 100.0,
                                             400, 0.5, 0.01, 1);
            double diameter = 0.0;
            for (std::size_t i = 0; i < s0.points.size(); ++i) {
                for (std::size_t j = i + 1; j < s0.points.size(); ++j) {
                    diameter = std::max(diameter, dist2(s0.points[i], s0.points[j]));
                }
            }
            c.require(max_rgie <= (2.0 * diameter / 1e-5) * (1.0 + 1e-6),
                      "max rgie " + fmt(max_rgie) + " beyond diameter bound " +
                          fmt(2.0 * diameter / 1e-5));
        }
    }

    // Independent pair oracle on the same attractor sample: exp(<ln(|x-y|/eps)>).
    auto model = make_model("lorenz63", {});
    const auto sample = sample_attractor(*model, model->default_initial_state(), 100.0, 400,
                                         0.5, 0.01, 1);
    Rng rng(777);
    double acc = 0.0;
    const int n_pairs = 20000;
    for (int k = 0; k < n_pairs; ++k) {
        const auto i = static_cast<std::size_t>(rng.uniform01() * sample.points.size());
        std::size_t j;
        do {
            j = static_cast<std::size_t>(rng.uniform01() * sample.points.size());
        } while (j == i);
        acc += std::log(dist2(sample.points[i], sample.points[j]) / 1e-5);
    }
    const double oracle = std::exp(acc / n_pairs);
    c.require(std::fabs(e_sat[0] - oracle) <= 0.10 * oracle,
              "e_sat=" + fmt(e_sat[0]) + " vs pair oracle " + fmt(oracle));

    // T_p finite and stable: the three values may differ by at most one grid index.
    auto grid_index = [&](double tp) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (std::fabs(grid[k] - tp) <= 1e-9 * std::max(1.0, tp)) {
                return static_cast<long long>(k);
            }
        }
        return static_cast<long long>(-1);
    };
    for (int s = 0; s < 3; ++s) {
        c.require(std::isfinite(t_p[s]) && t_p[s] > 0.0,
                  "seed " + std::to_string(s + 1) + ": t_p not finite");
        c.require(grid_index(t_p[s]) >= 0,
                  "seed " + std::to_string(s + 1) + ": t_p off the tau grid");
    }
    const long long i1 = grid_index(t_p[0]), i2 = grid_index(t_p[1]), i3 = grid_index(t_p[2]);
    c.require(std::llabs(i1 - i2) <= 1 && std::llabs(i1 - i3) <= 1 && std::llabs(i2 - i3) <= 1,
              "t_p spread beyond one grid spacing: " + fmt(t_p[0]) + ", " + fmt(t_p[1]) +
                  ", " + fmt(t_p[2]));
    c.detail << (c.detail.tellp() > 0 ? "; " : "") << "e_sat=" << fmt(e_sat[0])
             << " oracle=" << fmt(oracle) << " t_p=[" << fmt(t_p[0]) << ", " << fmt(t_p[1])
             << ", " << fmt(t_p[2]) << "]";
    return c.ok;
}

bool criterion_nlle_spectrum(Checker& c) {
    auto model = make_model("lorenz63", {});
    const auto sample =
        sample_attractor(*model, model->default_initial_state(), 100.0, 20, 0.9, 0.01);
    PerturbationSpec pert;
    pert.epsilon = 1e-9;
    pert.seed = 4;
    const auto result = nlle_spectrum(*model, sample, pert, 100.0, 0.5, 3, 0.01, g_workers);
    for (int i = 0; i < 3; ++i) {
        c.require(std::fabs(result.exponents[i] - g_benettin.exponents[i]) <= 0.05,
                  "exponent " + std::to_string(i + 1) + ": " + fmt(result.exponents[i]) +
                      " vs TLM " + fmt(g_benettin.exponents[i]));
        if (i > 0) {
            c.require(result.exponents[i] <= result.exponents[i - 1],
                      "exponents not in nonincreasing GSR order");
        }
    }
    const double sum = result.exponents[0] + result.exponents[1] + result.exponents[2];
    c.require(std::fabs(sum + 13.67) <= 0.1, "spectrum sum=" + fmt(sum));
    c.detail << (c.detail.tellp() > 0 ? "; " : "") << "spectrum=(" << fmt(result.exponents[0])
             << ", " << fmt(result.exponents[1]) << ", " << fmt(result.exponents[2]) << ")";

    // GSR quality gates on random frames.
    Rng rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<State> frame(3, State(5));
        for (auto& v : frame) {
            for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        }
        const auto out = gsr_orthogonalize(frame);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t j = i + 1; j < out.size(); ++j) {
                c.require(std::fabs(dot(out[i], out[j])) <=
                              1e-10 * norm2(out[i]) * norm2(out[j]),
                          "GSR orthogonality residual above 1e-10");
            }
        }
        double prod = 1.0;
        for (const auto& v : out) prod *= norm2(v);
        const double vol = volume_m(frame);
        c.require(std::fabs(prod - vol) <= 1e-12 * std::max(prod, vol),
                  "volume vs GSR norm product beyond 1e-12 relative");
    }
    return c.ok;
}

bool criterion_synthetic_saturation(Checker& c) {
    NlleCurve curve;
    const double spacing = 0.15;
    for (int k = 1; k <= 100; ++k) {
        const double tau = spacing * k;
        curve.tau_grid.push_back(tau);
        curve.rgie.push_back(100.0 * (1.0 - std::exp(-tau)));
        curve.mean_nlle.push_back(std::log(curve.rgie.back()) / tau);
    }
    const auto [e_sat, t_p] = saturation_and_limit(curve, 10, 0.02, 0.05);
    (void)e_sat;
    c.require(std::fabs(t_p + std::log(0.05)) <= spacing + 1e-12,
              "t_p=" + fmt(t_p) + " vs -ln(0.05)=" + fmt(-std::log(0.05)));

    NlleCurve flat;
    for (int k = 1; k <= 30; ++k) {
        flat.tau_grid.push_back(0.1 * k);
        flat.rgie.push_back(5.0);
        flat.mean_nlle.push_back(std::log(5.0) / (0.1 * k));
    }
    const auto [fe, ft] = saturation_and_limit(flat, 10, 0.02, 0.05);
    c.require(std::fabs(fe - 5.0) <= 1e-12, "constant e_sat=" + fmt(fe));
    c.require(ft == flat.tau_grid.front(), "constant t_p=" + fmt(ft));
    return c.ok;
}

bool criterion_parallel_determinism(Checker& c) {
    const auto dir = work_dir();
    std::string ref_csv, ref_json;
    for (int workers : {1, 4, 16}) {
        const auto out = dir / ("det_w" + std::to_string(workers));
        RunOptions opts;
        opts.seed = 1;
        opts.workers = workers;
        run_config(saturation_config(out.string()), opts);
        const auto csv = read_file((out / "nlle.csv").string());
        const auto json = read_file((out / "nlle.json").string());
        if (ref_csv.empty()) {
            ref_csv = csv;
            ref_json = json;
        } else {
            c.require(csv == ref_csv,
                      "nlle.csv differs at workers=" + std::to_string(workers));
            c.require(json == ref_json,
                      "nlle.json differs at workers=" + std::to_string(workers));
        }
    }
    return c.ok;
}

bool criterion_jacobians(Checker& c) {
    struct Case {
        const char* name;
        std::map<std::string, double> params;
        double lo, hi;
    };
    const Case cases[] = {
        {"toy", {{"lambda", 1.0}}, -2.0, 2.0},
        {"lorenz63", {}, -20.0, 20.0},
        {"lorenz96", {{"F", 8.0}, {"n", 12.0}}, -10.0, 10.0},
        {"linear", {{"a", 0.7}}, -5.0, 5.0},
        {"lineardiag", {{"a1", 1.0}, {"a2", -2.0}}, -5.0, 5.0},
    };
    for (const auto& kase : cases) {
        auto model = make_model(kase.name, kase.params);
        Rng rng(4242);
        for (int trial = 0; trial < 100; ++trial) {
            const State x = testing::random_state(rng, model->dimension(), kase.lo, kase.hi);
            const double err = testing::matrix_rel_error(eval_jacobian(*model, x),
                                                         testing::fd_jacobian(*model, x));
            c.require(err <= 1e-5, std::string(kase.name) + ": FD mismatch " + fmt(err));
        }
    }
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_workers = std::max(1, std::atoi(argv[1]));

    struct Criterion {
        int id;
        const char* name;
        std::function<bool(Checker&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "toy attractor bifurcation across lambda in {0.25,0.5,1,2}",
         criterion_toy_bifurcation},
        {2, "pre-bifurcation global stability at lambda=-0.5", criterion_prebifurcation},
        {3, "PES crossings: toy at 0 (m=2), lorenz origin at r=1 (m=1)", criterion_pes},
        {4, "GLE baseline on lorenz63 (0.906, 0, sum -13.67)", criterion_gle},
        {5, "infinitesimal NLLE matches finite-time LLE on 95/100 points",
         criterion_infinitesimal_consistency},
        {6, "RGIE saturation: plateau, pair oracle, stable t_p across seeds",
         criterion_saturation},
        {7, "NLLE spectrum vs TLM oracle + GSR quality gates", criterion_nlle_spectrum},
        {8, "synthetic saturation analytics", criterion_synthetic_saturation},
        {9, "byte-identical artifacts across workers {1,4,16}", criterion_parallel_determinism},
        {10, "analytic jacobians match finite differences everywhere", criterion_jacobians},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Checker checker;
        bool ok = false;
        try {
            ok = criterion.run(checker);
        } catch (const std::exception& e) {
            checker.ok = false;
            checker.detail << "exception: " << e.what();
        }
        ok = ok && checker.ok;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL",
                    criterion.id, criterion.name, secs,
                    checker.detail.tellp() > 0 ? " -- " : "",
                    checker.detail.str().c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
