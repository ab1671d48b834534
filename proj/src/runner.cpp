#include "predkit/runner.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "predkit/bifurcation.hpp"
#include "predkit/errors.hpp"
#include "predkit/io.hpp"
#include "predkit/linear_lyap.hpp"
#include "predkit/model.hpp"
#include "predkit/nlle.hpp"
#include "predkit/parallel.hpp"
#include "predkit/rng.hpp"
#include "predkit/version.hpp"

namespace predkit {

namespace {

namespace fs = std::filesystem;

class ArtifactSink {
public:
    ArtifactSink(fs::path dir, bool csv, bool json)
        : dir_(std::move(dir)), csv_(csv), json_(json) {}

    void write(const std::string& name, const std::string& content) {
        const bool is_json = name.size() > 5 && name.substr(name.size() - 5) == ".json";
        if (is_json && !json_) return;
        if (!is_json && !csv_) return;
        const fs::path path = dir_ / name;
        write_file(path.string(), content);
        paths_.push_back(path);
        ArtifactInfo info;
        info.name = name;
        info.sha256 = sha256_hex(content);
        info.bytes = content.size();
        artifacts_.push_back(std::move(info));
    }

    void remove_all() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    const std::vector<ArtifactInfo>& artifacts() const { return artifacts_; }

private:
    fs::path dir_;
    bool csv_, json_;
    std::vector<fs::path> paths_;
    std::vector<ArtifactInfo> artifacts_;
};

std::string state_columns(int n) {
    std::string cols;
    for (int i = 1; i <= n; ++i) {
        if (i > 1) cols += ',';
        cols += "x" + std::to_string(i);
    }
    return cols;
}

std::string join_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    return row;
}

struct RunContext {
    const ExperimentConfig& cfg;
    std::uint64_t sampling_seed;
    std::uint64_t perturbation_seed;
    int workers;
    ArtifactSink& sink;
};

AttractorSample make_sample(const RunContext& ctx, const Model& model) {
    return sample_attractor(model, model.default_initial_state(), ctx.cfg.spinup,
                            ctx.cfg.count, ctx.cfg.interval, ctx.cfg.step,
                            ctx.sampling_seed);
}

std::vector<double> effective_tau_grid(const RunContext& ctx) {
    return ctx.cfg.tau_grid.empty() ? default_tau_grid(ctx.cfg.step)
                                    : snap_tau_grid(ctx.cfg.tau_grid, ctx.cfg.step);
}

void run_gle(const RunContext& ctx, const Model& model) {
    const State x0 = integrate_trajectory(model, model.default_initial_state(), 0.0,
                                          ctx.cfg.spinup, ctx.cfg.step)
                         .final_state();
    const int m = ctx.cfg.m > 0 ? ctx.cfg.m : model.dimension();
    const auto spectrum = benettin_spectrum(model, x0, ctx.cfg.total_time,
                                            ctx.cfg.renorm_interval, m, ctx.cfg.step);
    JsonWriter json;
    json.begin_object();
    json.begin_array("exponents");
    for (double e : spectrum.exponents) json.value(e);
    json.end_array();
    json.kv("renorm_interval", spectrum.renorm_interval);
    json.kv("total_time", spectrum.total_time);
    json.end_object();
    ctx.sink.write("gle.json", json.str() + "\n");
}

void run_lle(const RunContext& ctx, const Model& model) {
    const auto sample = make_sample(ctx, model);
    const double tau = ctx.cfg.tau.value_or(0.5);
    const int n = model.dimension();

    std::vector<double> lles(sample.points.size());
    parallel_for_slots(static_cast<long long>(sample.points.size()), ctx.workers,
                       [&](long long i) {
                           Rng rng = member_rng(ctx.perturbation_seed,
                                                static_cast<std::uint64_t>(i));
                           State dir(n);
                           rng.unit_sphere(dir);
                           lles[static_cast<std::size_t>(i)] = finite_time_lle(
                               model, sample.points[static_cast<std::size_t>(i)], dir, tau,
                               ctx.cfg.step);
                       });

    std::string csv = state_columns(n) + ",lle\n";
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        auto row = sample.points[i];
        row.push_back(lles[i]);
        csv += join_row(row) + "\n";
    }
    ctx.sink.write("lle.csv", csv);

    JsonWriter json;
    json.begin_object();
    json.kv("count", static_cast<long long>(sample.points.size()));
    json.kv("seed", ctx.perturbation_seed);
    json.kv("tau", tau);
    json.end_object();
    ctx.sink.write("lle.json", json.str() + "\n");
}

void run_nlle(const RunContext& ctx, const Model& model) {
    const auto sample = make_sample(ctx, model);
    PerturbationSpec pert;
    pert.epsilon = ctx.cfg.epsilon;
    pert.directions_per_point = ctx.cfg.directions_per_point;
    pert.seed = ctx.perturbation_seed;
    const auto grid = effective_tau_grid(ctx);

    NlleCurve curve = mean_nlle_curve(model, sample, pert, grid, ctx.cfg.step, ctx.workers);
    try {
        saturation_and_limit(curve, ctx.cfg.window, ctx.cfg.slope_tol, ctx.cfg.theta);
    } catch (const SaturationNotReached&) {
        // e_sat / t_p stay null in the summary
    }

    std::string csv = "tau,mean_nlle,rgie,stderr\n";
    for (std::size_t k = 0; k < curve.tau_grid.size(); ++k) {
        csv += join_row({curve.tau_grid[k], curve.mean_nlle[k], curve.rgie[k],
                         curve.std_error[k]}) +
               "\n";
    }
    ctx.sink.write("nlle.csv", csv);

    JsonWriter json;
    json.begin_object();
    if (curve.e_sat) json.kv("e_sat", *curve.e_sat); else json.kv_null("e_sat");
    json.kv("ensemble_size", curve.ensemble_size);
    json.kv("epsilon", pert.epsilon);
    json.kv("seed", curve.seed);
    if (curve.t_p) json.kv("t_p", *curve.t_p); else json.kv_null("t_p");
    json.kv("tau_points", static_cast<long long>(curve.tau_grid.size()));
    json.end_object();
    ctx.sink.write("nlle.json", json.str() + "\n");
}

void run_spectrum(const RunContext& ctx, const Model& model) {
    const auto sample = make_sample(ctx, model);
    PerturbationSpec pert;
    pert.epsilon = ctx.cfg.epsilon;
    pert.seed = ctx.perturbation_seed;
    const double tau = ctx.cfg.tau.value_or(100.0);
    const int m = ctx.cfg.m > 0 ? ctx.cfg.m : model.dimension();

    const auto result = nlle_spectrum(model, sample, pert, tau, ctx.cfg.renorm_interval, m,
                                      ctx.cfg.step, ctx.workers);
    JsonWriter json;
    json.begin_object();
    json.kv("ensemble_size", result.ensemble_size);
    json.kv("epsilon", result.epsilon);
    json.begin_array("exponents");
    for (double e : result.exponents) json.value(e);
    json.end_array();
    json.kv("renorm_interval", ctx.cfg.renorm_interval);
    json.kv("tau", result.tau);
    json.end_object();
    ctx.sink.write("spectrum.json", json.str() + "\n");
}

void run_localmap(const RunContext& ctx, const Model& model) {
    const auto sample = make_sample(ctx, model);
    const auto grid = effective_tau_grid(ctx);
    const int n = model.dimension();

    std::string csv = state_columns(n) + ",tau,local_mean_nlle,lrgie,local_t_p\n";
    for (std::size_t p = 0; p < sample.points.size(); ++p) {
        const auto record = local_mean_nlle(
            model, sample.points[p], ctx.cfg.epsilon, ctx.cfg.directions_per_point, grid,
            ctx.cfg.theta, ctx.cfg.step,
            derive_seed(ctx.perturbation_seed, static_cast<std::uint64_t>(p)), ctx.workers);
        for (std::size_t k = 0; k < record.tau_grid.size(); ++k) {
            auto row = record.x0;
            row.push_back(record.tau_grid[k]);
            row.push_back(record.local_mean_nlle[k]);
            row.push_back(record.lrgie[k]);
            csv += join_row(row);
            csv += ',';
            if (record.local_t_p) csv += format_double(*record.local_t_p);
            csv += '\n';
        }
    }
    ctx.sink.write("localmap.csv", csv);
}

void run_fixed_points(const RunContext& ctx, const Model& model) {
    const int n = model.dimension();
    if (static_cast<int>(ctx.cfg.box.size()) != 2 * n) {
        throw ValidationError("analysis.box needs " + std::to_string(2 * n) +
                              " entries for model dimension " + std::to_string(n));
    }
    State lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = ctx.cfg.box[2 * static_cast<std::size_t>(i)];
        hi[i] = ctx.cfg.box[2 * static_cast<std::size_t>(i) + 1];
    }
    const auto records =
        find_fixed_points(model, lo, hi, ctx.cfg.grid_per_axis, ctx.cfg.newton_tol);

    std::string csv = state_columns(n);
    for (int i = 1; i <= n; ++i) csv += ",re_eig" + std::to_string(i);
    for (int i = 1; i <= n; ++i) csv += ",im_eig" + std::to_string(i);
    csv += ",class\n";
    for (const auto& r : records) {
        auto row = r.location;
        for (const auto& e : r.eigenvalues) row.push_back(e.real());
        for (const auto& e : r.eigenvalues) row.push_back(e.imag());
        csv += join_row(row);
        csv += ',';
        csv += to_string(r.classification);
        csv += '\n';
    }
    ctx.sink.write("fixed-points.csv", csv);

    JsonWriter json;
    json.begin_object();
    json.kv("count", static_cast<long long>(records.size()));
    json.begin_array("fixed_points");
    for (const auto& r : records) {
        json.begin_object();
        json.kv("class", to_string(r.classification));
        json.begin_array("eigenvalues_im");
        for (const auto& e : r.eigenvalues) json.value(e.imag());
        json.end_array();
        json.begin_array("eigenvalues_re");
        for (const auto& e : r.eigenvalues) json.value(e.real());
        json.end_array();
        json.begin_array("location");
        for (double v : r.location) json.value(v);
        json.end_array();
        json.kv("residual", r.residual);
        json.end_object();
    }
    json.end_array();
    json.end_object();
    ctx.sink.write("fixed-points.json", json.str() + "\n");
}

void run_pes_scan(const RunContext& ctx, const Model& model) {
    ModelFamily family;
    family.model_name = ctx.cfg.model_name;
    family.base_params = ctx.cfg.model_params;
    family.parameter = ctx.cfg.pes_parameter;
    const State equilibrium =
        ctx.cfg.pes_equilibrium.value_or(State(static_cast<std::size_t>(model.dimension()), 0.0));

    const auto result = pes_scan(family, equilibrium, ctx.cfg.lambda_grid);

    std::string csv = "lambda";
    for (int i = 1; i <= model.dimension(); ++i) csv += ",re_eig" + std::to_string(i);
    csv += "\n";
    for (const auto& row : result.rows) {
        auto values = row.real_parts;
        values.insert(values.begin(), row.lambda);
        csv += join_row(values) + "\n";
    }
    ctx.sink.write("pes-scan.csv", csv);

    JsonWriter json;
    json.begin_object();
    json.kv("crossing_count", static_cast<long long>(result.crossing_count));
    if (result.lambda0) json.kv("lambda0", *result.lambda0); else json.kv_null("lambda0");
    json.kv("parameter", family.parameter);
    json.end_object();
    ctx.sink.write("pes-scan.json", json.str() + "\n");
}

void run_verify_toy(const RunContext& ctx) {
    auto it = ctx.cfg.model_params.find("lambda");
    const double lambda = it == ctx.cfg.model_params.end() ? 1.0 : it->second;
    const auto report = verify_toy_attractor(lambda, ctx.cfg.n_basin, ctx.cfg.horizon,
                                             ctx.sampling_seed, ctx.workers, ctx.cfg.step);

    JsonWriter json;
    json.begin_object();
    json.kv("basin_converged_fraction", report.basin_converged_fraction);
    json.begin_array("fixed_points");
    for (const auto& r : report.fixed_points) {
        json.begin_object();
        json.kv("class", to_string(r.classification));
        json.begin_array("eigenvalues_im");
        for (const auto& e : r.eigenvalues) json.value(e.imag());
        json.end_array();
        json.begin_array("eigenvalues_re");
        for (const auto& e : r.eigenvalues) json.value(e.real());
        json.end_array();
        json.begin_array("location");
        for (double v : r.location) json.value(v);
        json.end_array();
        json.kv("residual", r.residual);
        json.end_object();
    }
    json.end_array();
    json.kv("horizon", ctx.cfg.horizon);
    json.kv("lambda", report.lambda);
    json.kv("n_basin", ctx.cfg.n_basin);
    json.kv("node_count", static_cast<long long>(report.node_count));
    json.kv("radius_max", report.attractor_radius_max);
    json.kv("radius_min", report.attractor_radius_min);
    json.kv("saddle_count", static_cast<long long>(report.saddle_count));
    json.kv("seed", ctx.sampling_seed);
    json.end_object();
    ctx.sink.write("verify-toy.json", json.str() + "\n");
}

}  // namespace

RunManifest run_config(const ExperimentConfig& config, const RunOptions& options) {
    const auto t_start = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.version = PREDKIT_VERSION;
    manifest.sampling_seed = options.seed.value_or(config.sampling_seed);
    manifest.perturbation_seed = options.seed.value_or(config.perturbation_seed);
    manifest.config_echo = config.echo();

    const fs::path out_dir = options.output_dir.value_or(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir.string());

    ArtifactSink sink(out_dir, config.write_csv, config.write_json);
    RunContext ctx{config, manifest.sampling_seed, manifest.perturbation_seed,
                   std::max(1, options.workers), sink};

    try {
        if (config.analysis == "verify-toy") {
            run_verify_toy(ctx);
        } else {
            auto model = make_model(config.model_name, config.model_params);
            if (config.analysis == "gle") {
                run_gle(ctx, *model);
            } else if (config.analysis == "lle") {
                run_lle(ctx, *model);
            } else if (config.analysis == "nlle") {
                run_nlle(ctx, *model);
            } else if (config.analysis == "spectrum") {
                run_spectrum(ctx, *model);
            } else if (config.analysis == "localmap") {
                run_localmap(ctx, *model);
            } else if (config.analysis == "fixed-points") {
                run_fixed_points(ctx, *model);
            } else if (config.analysis == "pes-scan") {
                run_pes_scan(ctx, *model);
            } else {
                throw ValidationError("unknown analysis '" + config.analysis + "'");
            }
        }
    } catch (...) {
        sink.remove_all();
        throw;
    }

    manifest.artifacts = sink.artifacts();
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    JsonWriter json;
    json.begin_object();
    json.begin_array("artifacts");
    for (const auto& a : manifest.artifacts) {
        json.begin_object();
        json.kv("bytes", static_cast<std::uint64_t>(a.bytes));
        json.kv("name", a.name);
        json.kv("sha256", a.sha256);
        json.end_object();
    }
    json.end_array();
    json.key("config");
    json.begin_object();
    for (const auto& [k, v] : manifest.config_echo) json.kv(k, v);
    json.end_object();
    json.key("seeds");
    json.begin_object();
    json.kv("perturbation", manifest.perturbation_seed);
    json.kv("sampling", manifest.sampling_seed);
    json.end_object();
    json.kv("version", manifest.version);
    json.kv("wall_seconds", manifest.wall_seconds);
    json.end_object();
    write_file((out_dir / "manifest.json").string(), json.str() + "\n");

    return manifest;
}

}  // namespace predkit
