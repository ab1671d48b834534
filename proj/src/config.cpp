#include "predkit/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "predkit/errors.hpp"
#include "predkit/io.hpp"
#include "predkit/model.hpp"

namespace predkit {

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<Entry> tokenize(const std::string& text, std::vector<std::string>& problems) {
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        Entry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = lineno;
        if (e.section.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": key '" + e.key +
                               "' outside any [section]");
            continue;
        }
        if (e.key.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != nullptr && *end == '\0';
}

bool parse_int(const std::string& s, long long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return end != nullptr && *end == '\0';
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    char* end = nullptr;
    out = std::strtoull(s.c_str(), &end, 10);
    return end != nullptr && *end == '\0';
}

bool parse_double_list(const std::string& s, std::vector<double>& out) {
    out.clear();
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_double(trim(item), v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

/// Keys understood per (section, analysis). Analysis-specific keys live under
/// [analysis]; everything else is fixed.
const std::vector<std::string>& analysis_keys(const std::string& type) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"gle", {"type", "total_time", "renorm_interval", "m"}},
        {"lle", {"type", "tau"}},
        {"nlle", {"type", "tau_grid", "window", "slope_tol", "theta"}},
        {"spectrum", {"type", "tau", "renorm_interval", "m"}},
        {"localmap", {"type", "tau_grid", "theta"}},
        {"fixed-points", {"type", "box", "grid_per_axis", "newton_tol"}},
        {"pes-scan", {"type", "lambda_grid", "parameter", "equilibrium"}},
        {"verify-toy", {"type", "n_basin", "horizon"}},
    };
    static const std::vector<std::string> empty;
    auto it = table.find(type);
    return it == table.end() ? empty : it->second;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    std::vector<std::string> problems;
    auto entries = tokenize(text, problems);

    // Duplicate key detection.
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            if (entries[i].section == entries[j].section && entries[i].key == entries[j].key) {
                problems.push_back("duplicate key '" + entries[i].section + "." +
                                   entries[j].key + "' (lines " +
                                   std::to_string(entries[i].line) + " and " +
                                   std::to_string(entries[j].line) + ")");
            }
        }
    }

    ExperimentConfig cfg;
    auto find = [&](const std::string& section, const std::string& key) -> const Entry* {
        for (const auto& e : entries) {
            if (e.section == section && e.key == key) return &e;
        }
        return nullptr;
    };
    auto bad = [&](const Entry& e, const std::string& why) {
        problems.push_back("key '" + e.section + "." + e.key + "' (line " +
                           std::to_string(e.line) + "): " + why);
    };

    auto get_double = [&](const char* sec, const char* key, double& slot,
                          auto&& check, const char* why) {
        if (const Entry* e = find(sec, key)) {
            double v;
            if (!parse_double(e->value, v)) {
                bad(*e, "not a number");
            } else if (!check(v)) {
                bad(*e, why);
            } else {
                slot = v;
            }
        }
    };
    auto get_count = [&](const char* sec, const char* key, auto& slot, long long lo,
                         const char* why) {
        if (const Entry* e = find(sec, key)) {
            long long v;
            if (!parse_int(e->value, v) || v < lo) {
                bad(*e, why);
            } else {
                slot = static_cast<std::decay_t<decltype(slot)>>(v);
            }
        }
    };
    auto get_seed = [&](const char* sec, std::uint64_t& slot) {
        if (const Entry* e = find(sec, "seed")) {
            std::uint64_t v;
            if (!parse_u64(e->value, v)) {
                bad(*e, "not a nonnegative integer");
            } else {
                slot = v;
            }
        }
    };

    // --- [model] ---
    if (const Entry* e = find("model", "name")) {
        cfg.model_name = e->value;
    } else {
        problems.push_back("missing required key 'model.name'");
    }
    for (const auto& e : entries) {
        if (e.section != "model" || e.key == "name") continue;
        double v;
        if (!parse_double(e.value, v)) {
            bad(e, "not a number");
        } else {
            cfg.model_params[e.key] = v;
        }
    }
    if (!cfg.model_name.empty()) {
        try {
            (void)make_model(cfg.model_name, cfg.model_params);
        } catch (const ValidationError& err) {
            problems.push_back(err.what());
        }
    }

    // --- [integrator] ---
    get_double("integrator", "step", cfg.step, [](double v) { return v > 0.0; },
               "must be > 0");

    // --- [sampling] ---
    get_double("sampling", "spinup", cfg.spinup, [](double v) { return v > 0.0; },
               "must be > 0");
    get_count("sampling", "count", cfg.count, 1, "must be an integer >= 1");
    get_double("sampling", "interval", cfg.interval, [](double v) { return v > 0.0; },
               "must be > 0");
    get_seed("sampling", cfg.sampling_seed);

    // --- [perturbation] ---
    get_double("perturbation", "epsilon", cfg.epsilon, [](double v) { return v > 0.0; },
               "must be > 0");
    get_count("perturbation", "directions_per_point", cfg.directions_per_point, 1,
              "must be an integer >= 1");
    get_seed("perturbation", cfg.perturbation_seed);

    // --- [analysis] ---
    static const std::vector<std::string> kAnalyses = {
        "gle", "lle", "nlle", "spectrum", "localmap", "fixed-points", "pes-scan", "verify-toy"};
    if (const Entry* e = find("analysis", "type")) {
        if (std::find(kAnalyses.begin(), kAnalyses.end(), e->value) == kAnalyses.end()) {
            bad(*e, "unknown analysis type");
        } else {
            cfg.analysis = e->value;
        }
    } else {
        problems.push_back("missing required key 'analysis.type'");
    }

    get_double("analysis", "total_time", cfg.total_time, [](double v) { return v > 0.0; },
               "must be > 0");
    get_double("analysis", "renorm_interval", cfg.renorm_interval,
               [](double v) { return v > 0.0; }, "must be > 0");
    get_count("analysis", "m", cfg.m, 1, "must be an integer >= 1");
    get_count("analysis", "window", cfg.window, 1, "must be an integer >= 1");
    get_double("analysis", "slope_tol", cfg.slope_tol, [](double v) { return v > 0.0; },
               "must be > 0");
    get_double("analysis", "theta", cfg.theta,
               [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0, 1)");
    get_count("analysis", "grid_per_axis", cfg.grid_per_axis, 2, "must be an integer >= 2");
    get_double("analysis", "newton_tol", cfg.newton_tol, [](double v) { return v > 0.0; },
               "must be > 0");
    get_count("analysis", "n_basin", cfg.n_basin, 1, "must be an integer >= 1");
    get_double("analysis", "horizon", cfg.horizon, [](double v) { return v > 0.0; },
               "must be > 0");
    if (const Entry* e = find("analysis", "tau")) {
        double v;
        if (!parse_double(e->value, v) || !(v > 0.0)) {
            bad(*e, "must be a number > 0");
        } else {
            cfg.tau = v;
        }
    }
    if (const Entry* e = find("analysis", "tau_grid")) {
        if (!parse_double_list(e->value, cfg.tau_grid)) {
            bad(*e, "must be a comma-separated list of numbers");
        } else {
            for (std::size_t i = 0; i < cfg.tau_grid.size(); ++i) {
                if (cfg.tau_grid[i] <= 0.0 || (i > 0 && cfg.tau_grid[i] <= cfg.tau_grid[i - 1])) {
                    bad(*e, "must be positive and strictly increasing");
                    break;
                }
            }
        }
    }
    if (const Entry* e = find("analysis", "box")) {
        if (!parse_double_list(e->value, cfg.box) || cfg.box.size() % 2 != 0) {
            bad(*e, "must be lo1,hi1,lo2,hi2,... with lo < hi per axis");
        } else {
            for (std::size_t i = 0; i + 1 < cfg.box.size(); i += 2) {
                if (!(cfg.box[i] < cfg.box[i + 1])) {
                    bad(*e, "must be lo1,hi1,lo2,hi2,... with lo < hi per axis");
                    break;
                }
            }
        }
    }
    if (const Entry* e = find("analysis", "lambda_grid")) {
        if (!parse_double_list(e->value, cfg.lambda_grid) || cfg.lambda_grid.size() < 2 ||
            !std::is_sorted(cfg.lambda_grid.begin(), cfg.lambda_grid.end())) {
            bad(*e, "must be an increasing list of at least two numbers");
        }
    }
    if (const Entry* e = find("analysis", "parameter")) {
        cfg.pes_parameter = e->value;
    }
    if (const Entry* e = find("analysis", "equilibrium")) {
        std::vector<double> eq;
        if (!parse_double_list(e->value, eq)) {
            bad(*e, "must be a comma-separated list of numbers");
        } else {
            cfg.pes_equilibrium = eq;
        }
    }

    // --- [output] ---
    if (const Entry* e = find("output", "directory")) {
        if (e->value.empty()) {
            bad(*e, "must not be empty");
        } else {
            cfg.output_dir = e->value;
        }
    }
    if (const Entry* e = find("output", "formats")) {
        cfg.write_csv = cfg.write_json = false;
        std::istringstream ss(e->value);
        std::string item;
        bool ok = true;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item == "csv") {
                cfg.write_csv = true;
            } else if (item == "json") {
                cfg.write_json = true;
            } else {
                ok = false;
            }
        }
        if (!ok || (!cfg.write_csv && !cfg.write_json)) {
            bad(*e, "must be a subset of {csv, json}");
        }
    }

    // --- unknown keys (hard error, list all) ---
    static const std::map<std::string, std::vector<std::string>> kFixedKeys = {
        {"integrator", {"step"}},
        {"sampling", {"spinup", "count", "interval", "seed"}},
        {"perturbation", {"epsilon", "directions_per_point", "seed"}},
        {"output", {"directory", "formats"}},
    };
    for (const auto& e : entries) {
        if (e.section == "model") continue;  // parameter keys validated by make_model
        if (e.section == "analysis") {
            const auto& allowed = analysis_keys(cfg.analysis);
            if (cfg.analysis.empty()) continue;  // already reported
            if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
                bad(e, "unknown key for analysis '" + cfg.analysis + "'");
            }
            continue;
        }
        auto it = kFixedKeys.find(e.section);
        if (it == kFixedKeys.end()) {
            bad(e, "unknown section");
            continue;
        }
        if (std::find(it->second.begin(), it->second.end(), e.key) == it->second.end()) {
            bad(e, "unknown key");
        }
    }

    // --- analysis-specific requirements ---
    if (cfg.analysis == "fixed-points" && cfg.box.empty()) {
        problems.push_back("analysis 'fixed-points' requires 'analysis.box'");
    }
    if (cfg.analysis == "pes-scan") {
        if (cfg.pes_parameter.empty()) {
            problems.push_back("analysis 'pes-scan' requires 'analysis.parameter'");
        }
        if (cfg.lambda_grid.empty()) {
            problems.push_back("analysis 'pes-scan' requires 'analysis.lambda_grid'");
        }
    }
    if (cfg.analysis == "verify-toy" && !cfg.model_name.empty() && cfg.model_name != "toy") {
        problems.push_back("analysis 'verify-toy' requires model.name = toy");
    }

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "config validation failed (" << problems.size() << " problem"
            << (problems.size() > 1 ? "s" : "") << "):";
        for (const auto& p : problems) msg << "\n  - " << p;
        throw ValidationError(msg.str());
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    return parse_config_text(read_file(path));
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("model.name", model_name);
    for (const auto& [k, v] : model_params) kv.emplace_back("model." + k, format_double(v));
    kv.emplace_back("integrator.step", format_double(step));
    kv.emplace_back("sampling.spinup", format_double(spinup));
    kv.emplace_back("sampling.count", std::to_string(count));
    kv.emplace_back("sampling.interval", format_double(interval));
    kv.emplace_back("sampling.seed", std::to_string(sampling_seed));
    kv.emplace_back("perturbation.epsilon", format_double(epsilon));
    kv.emplace_back("perturbation.directions_per_point", std::to_string(directions_per_point));
    kv.emplace_back("perturbation.seed", std::to_string(perturbation_seed));
    kv.emplace_back("analysis.type", analysis);
    if (analysis == "gle") {
        kv.emplace_back("analysis.total_time", format_double(total_time));
        kv.emplace_back("analysis.renorm_interval", format_double(renorm_interval));
        kv.emplace_back("analysis.m", std::to_string(m));
    } else if (analysis == "lle" || analysis == "spectrum") {
        if (tau) kv.emplace_back("analysis.tau", format_double(*tau));
        if (analysis == "spectrum") {
            kv.emplace_back("analysis.renorm_interval", format_double(renorm_interval));
            kv.emplace_back("analysis.m", std::to_string(m));
        }
    } else if (analysis == "nlle" || analysis == "localmap") {
        std::string grid;
        for (std::size_t i = 0; i < tau_grid.size(); ++i) {
            if (i) grid += ",";
            grid += format_double(tau_grid[i]);
        }
        kv.emplace_back("analysis.tau_grid", grid.empty() ? "(default)" : grid);
        kv.emplace_back("analysis.theta", format_double(theta));
        if (analysis == "nlle") {
            kv.emplace_back("analysis.window", std::to_string(window));
            kv.emplace_back("analysis.slope_tol", format_double(slope_tol));
        }
    } else if (analysis == "fixed-points") {
        std::string b;
        for (std::size_t i = 0; i < box.size(); ++i) {
            if (i) b += ",";
            b += format_double(box[i]);
        }
        kv.emplace_back("analysis.box", b);
        kv.emplace_back("analysis.grid_per_axis", std::to_string(grid_per_axis));
        kv.emplace_back("analysis.newton_tol", format_double(newton_tol));
    } else if (analysis == "pes-scan") {
        std::string g;
        for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
            if (i) g += ",";
            g += format_double(lambda_grid[i]);
        }
        kv.emplace_back("analysis.lambda_grid", g);
        kv.emplace_back("analysis.parameter", pes_parameter);
        if (pes_equilibrium) {
            std::string eq;
            for (std::size_t i = 0; i < pes_equilibrium->size(); ++i) {
                if (i) eq += ",";
                eq += format_double((*pes_equilibrium)[i]);
            }
            kv.emplace_back("analysis.equilibrium", eq);
        }
    } else if (analysis == "verify-toy") {
        kv.emplace_back("analysis.n_basin", std::to_string(n_basin));
        kv.emplace_back("analysis.horizon", format_double(horizon));
    }
    kv.emplace_back("output.directory", output_dir);
    std::string fmts;
    if (write_csv) fmts += "csv";
    if (write_json) fmts += fmts.empty() ? "json" : ",json";
    kv.emplace_back("output.formats", fmts);
    return kv;
}

}  // namespace predkit
