#include "sls/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace sls {

double raised_cosine(Point2 z, double r) {
    const double rho = std::hypot(z.z1, z.z2);
    if (rho > r) return 0.0;
    return 0.5 + 0.5 * std::cos(std::numbers::pi * rho / r);
}

void SynthesisConfig::validate() const {
    if (T < 1) throw std::invalid_argument("SynthesisConfig: T must be at least 1");
    if (Q <= 0.0) throw std::invalid_argument("SynthesisConfig: Q must be positive");
    if (R < 0.0) throw std::invalid_argument("SynthesisConfig: R must be nonnegative");
    if (jobs < 1) throw std::invalid_argument("SynthesisConfig: jobs must be at least 1");
    domain.validate(k);
}

std::vector<Point2> actuator_grid(int n_u, const Domain2D& dom) {
    const int g = int(std::lround(std::sqrt(double(n_u))));
    if (g * g != n_u)
        throw std::invalid_argument("actuator_grid: n_u must be a perfect square");
    std::vector<Point2> pts;
    pts.reserve(std::size_t(n_u));
    const double c1 = dom.width1() / g;
    const double c2 = dom.width2() / g;
    for (int row = 0; row < g; ++row)
        for (int col = 0; col < g; ++col)
            pts.push_back({dom.z1_min + (row + 0.5) * c1, dom.z2_min + (col + 0.5) * c2});
    return pts;
}

KernelModel build_model(double r, std::vector<Point2> actuators, const Domain2D& dom, int k,
                        int jobs) {
    if (r <= 0.0) throw std::invalid_argument("build_model: r must be positive");
    if (r > 0.5 * std::min(dom.width1(), dom.width2()))
        throw std::invalid_argument("build_model: kernel support exceeds half the domain width");
    KernelModel model;
    model.r = r;
    model.domain = dom;
    model.a_raw = [r](Point2 z) { return raised_cosine(z, r); };
    model.a_coeffs = project(model.a_raw, k, dom);
    model.actuators = std::move(actuators);
    model.b_coeffs.resize(model.actuators.size());

    auto build_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t l = lo; l < hi; ++l) {
            SpectralField s = shift_coefficients(model.a_coeffs, model.actuators[l], dom);
            for (double& v : s.coeffs) v = -v;
            model.b_coeffs[l] = std::move(s);
        }
    };
    const std::size_t n = model.actuators.size();
    if (jobs <= 1 || n < 2) {
        build_range(0, n);
    } else {
        // static partition: worker w owns a fixed slice, so the result does
        // not depend on scheduling
        const std::size_t workers = std::min<std::size_t>(std::size_t(jobs), n);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            pool.emplace_back(build_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

KernelModel build_model(double r, int n_u, const Domain2D& dom, int k, int jobs) {
    return build_model(r, actuator_grid(n_u, dom), dom, k, jobs);
}

SpectralField actuation_field(const KernelModel& model, const Eigen::VectorXd& gains) {
    if (gains.size() != model.n_u())
        throw std::invalid_argument("actuation_field: gain count mismatch");
    SpectralField acc = SpectralField::zeros(model.a_coeffs.k);
    for (int l = 0; l < model.n_u(); ++l) {
        const double g = gains[l];
        if (g == 0.0) continue;
        const auto& b = model.b_coeffs[std::size_t(l)].coeffs;
        for (std::size_t j = 0; j < acc.coeffs.size(); ++j) acc.coeffs[j] += g * b[j];
    }
    return acc;
}

double eval_actuation(const KernelModel& model, const Eigen::VectorXd& gains, Point2 z) {
    const SpectralField acc = actuation_field(model, gains);
    return synthesize_grid(acc, {z}, model.domain)[0];
}

}  // namespace sls
