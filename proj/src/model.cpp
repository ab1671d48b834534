#include "predkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predkit/errors.hpp"

namespace predkit {

namespace {

void require_keys(const std::string& model_name,
                  const std::map<std::string, double>& params,
                  const std::vector<std::string>& allowed) {
    std::vector<std::string> offenders;
    for (const auto& [k, v] : params) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            offenders.push_back(k);
        }
    }
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << "model '" << model_name << "': unknown parameter";
        if (offenders.size() > 1) msg << "s";
        for (const auto& k : offenders) msg << " '" << k << "'";
        throw ValidationError(msg.str());
    }
}

double get_or(const std::map<std::string, double>& params, const std::string& key,
              double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

class ToyBifurcation final : public Model {
public:
    explicit ToyBifurcation(std::map<std::string, double> params)
        : Model("toy", 2, params), lambda_(get_or(params, "lambda", 1.0)) {}

    void drift(std::span<const double> x, std::span<double> out) const override {
        out[0] = lambda_ * x[0] - x[0] * x[0] * x[0];
        out[1] = lambda_ * x[1] - x[1] * x[1] * x[1];
    }

    void jacobian(std::span<const double> x, std::span<double> jac) const override {
        jac[0] = lambda_ - 3.0 * x[0] * x[0];
        jac[1] = 0.0;
        jac[2] = 0.0;
        jac[3] = lambda_ - 3.0 * x[1] * x[1];
    }

    State default_initial_state() const override { return {0.1, 0.07}; }

private:
    double lambda_;
};

class Lorenz63 final : public Model {
public:
    explicit Lorenz63(std::map<std::string, double> params)
        : Model("lorenz63", 3, params),
          sigma_(get_or(params, "sigma", 10.0)),
          r_(get_or(params, "r", 28.0)),
          b_(get_or(params, "b", 8.0 / 3.0)) {}

    void drift(std::span<const double> x, std::span<double> out) const override {
        out[0] = sigma_ * (x[1] - x[0]);
        out[1] = x[0] * (r_ - x[2]) - x[1];
        out[2] = x[0] * x[1] - b_ * x[2];
    }

    void jacobian(std::span<const double> x, std::span<double> jac) const override {
        jac[0] = -sigma_;     jac[1] = sigma_; jac[2] = 0.0;
        jac[3] = r_ - x[2];   jac[4] = -1.0;   jac[5] = -x[0];
        jac[6] = x[1];        jac[7] = x[0];   jac[8] = -b_;
    }

    State default_initial_state() const override { return {1.0, 1.0, 1.0}; }

private:
    double sigma_, r_, b_;
};

class Lorenz96 final : public Model {
public:
    explicit Lorenz96(std::map<std::string, double> params, int n)
        : Model("lorenz96", n, params), forcing_(get_or(params, "F", 8.0)) {}

    void drift(std::span<const double> x, std::span<double> out) const override {
        const int n = dimension();
        for (int i = 0; i < n; ++i) {
            const int im1 = (i - 1 + n) % n;
            const int im2 = (i - 2 + n) % n;
            const int ip1 = (i + 1) % n;
            out[i] = (x[ip1] - x[im2]) * x[im1] - x[i] + forcing_;
        }
    }

    void jacobian(std::span<const double> x, std::span<double> jac) const override {
        const int n = dimension();
        std::fill(jac.begin(), jac.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const int im1 = (i - 1 + n) % n;
            const int im2 = (i - 2 + n) % n;
            const int ip1 = (i + 1) % n;
            // Accumulate: with n >= 4 the four columns are distinct.
            jac[i * n + ip1] += x[im1];
            jac[i * n + im2] += -x[im1];
            jac[i * n + im1] += x[ip1] - x[im2];
            jac[i * n + i] += -1.0;
        }
    }

    State default_initial_state() const override {
        State x(dimension(), forcing_);
        x[0] += 0.01;  // break the symmetric equilibrium x_i = F
        return x;
    }

private:
    double forcing_;
};

class LinearScalar final : public Model {
public:
    explicit LinearScalar(std::map<std::string, double> params)
        : Model("linear", 1, params), a_(get_or(params, "a", -1.0)) {}

    void drift(std::span<const double> x, std::span<double> out) const override {
        out[0] = a_ * x[0];
    }

    void jacobian(std::span<const double>, std::span<double> jac) const override {
        jac[0] = a_;
    }

    State default_initial_state() const override { return {1.0}; }

private:
    double a_;
};

class LinearDiag final : public Model {
public:
    LinearDiag(std::map<std::string, double> params, std::vector<double> rates)
        : Model("lineardiag", static_cast<int>(rates.size()), std::move(params)),
          rates_(std::move(rates)) {}

    void drift(std::span<const double> x, std::span<double> out) const override {
        for (std::size_t i = 0; i < rates_.size(); ++i) out[i] = rates_[i] * x[i];
    }

    void jacobian(std::span<const double>, std::span<double> jac) const override {
        std::fill(jac.begin(), jac.end(), 0.0);
        const int n = dimension();
        for (int i = 0; i < n; ++i) jac[i * n + i] = rates_[i];
    }

    State default_initial_state() const override { return State(dimension(), 1.0); }

private:
    std::vector<double> rates_;
};

}  // namespace

State Model::default_initial_state() const { return State(dimension(), 1.0); }

std::unique_ptr<Model> make_model(const std::string& name,
                                  const std::map<std::string, double>& params) {
    if (name == "toy") {
        require_keys(name, params, {"lambda"});
        return std::make_unique<ToyBifurcation>(params);
    }
    if (name == "lorenz63") {
        require_keys(name, params, {"sigma", "r", "b"});
        return std::make_unique<Lorenz63>(params);
    }
    if (name == "lorenz96") {
        require_keys(name, params, {"F", "n"});
        const double n_raw = get_or(params, "n", 36.0);
        const int n = static_cast<int>(n_raw);
        if (n < 4 || static_cast<double>(n) != n_raw) {
            throw ValidationError("model 'lorenz96': parameter 'n' must be an integer >= 4");
        }
        return std::make_unique<Lorenz96>(params, n);
    }
    if (name == "linear") {
        require_keys(name, params, {"a"});
        return std::make_unique<LinearScalar>(params);
    }
    if (name == "lineardiag") {
        // Rates a1..an; the axis count is the number of keys present.
        std::vector<double> rates;
        for (std::size_t i = 1;; ++i) {
            auto it = params.find("a" + std::to_string(i));
            if (it == params.end()) break;
            rates.push_back(it->second);
        }
        if (rates.empty()) {
            throw ValidationError("model 'lineardiag': needs parameters a1, a2, ...");
        }
        std::vector<std::string> allowed;
        for (std::size_t i = 1; i <= rates.size(); ++i) allowed.push_back("a" + std::to_string(i));
        require_keys(name, params, allowed);
        return std::make_unique<LinearDiag>(params, std::move(rates));
    }
    throw ValidationError("unknown model '" + name + "'");
}

namespace {

void check_state(const Model& model, const State& x) {
    if (static_cast<int>(x.size()) != model.dimension()) {
        std::ostringstream msg;
        msg << "model '" << model.name() << "': state has dimension " << x.size()
            << ", expected " << model.dimension();
        throw std::invalid_argument(msg.str());
    }
    if (!all_finite(x)) {
        throw std::invalid_argument("model '" + model.name() + "': non-finite state component");
    }
}

}  // namespace

State eval_drift(const Model& model, const State& x) {
    check_state(model, x);
    State out(x.size());
    model.drift(x, out);
    return out;
}

std::vector<double> eval_jacobian(const Model& model, const State& x) {
    check_state(model, x);
    std::vector<double> jac(x.size() * x.size());
    model.jacobian(x, jac);
    return jac;
}

}  // namespace predkit
