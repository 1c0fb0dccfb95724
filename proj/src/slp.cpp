#include "sls/slp.hpp"

#include <cmath>
#include <stdexcept>

namespace sls {

std::vector<int> locality_mask(const KernelModel& model, Point2 zt, const LocalitySpec& loc) {
    std::vector<int> out;
    for (int l = 0; l < model.n_u(); ++l) {
        const Point2 d = model.actuators[std::size_t(l)] - zt;
        const double dist = loc.norm == 1 ? std::abs(d.z1) + std::abs(d.z2)
                                          : std::hypot(d.z1, d.z2);
        if (dist <= loc.radius) out.push_back(l);
    }
    return out;
}

SLPProblem assemble(const KernelModel& model, const SynthesisConfig& cfg, Point2 zt) {
    cfg.validate();
    if (!cfg.domain.contains(zt))
        throw std::invalid_argument("assemble: disturbance location outside the domain");
    if (model.a_coeffs.k != cfg.k)
        throw std::invalid_argument("assemble: model truncation does not match config");

    SLPProblem p;
    p.zt = zt;
    p.T = cfg.T;
    p.k = cfg.k;
    p.n_u = model.n_u();
    p.n_alpha = int(model.a_coeffs.size());
    if (cfg.locality) {
        p.active = locality_mask(model, zt, *cfg.locality);
        p.empty_mask_warning = p.active.empty();
    } else {
        p.active.resize(std::size_t(p.n_u));
        for (int l = 0; l < p.n_u; ++l) p.active[std::size_t(l)] = l;
    }

    const int n_act = int(p.active.size());
    p.n_rows = p.T * p.n_alpha;
    p.n_vars = p.T * p.n_alpha + p.T * n_act;
    const Domain2D& dom = model.domain;
    const SpectralField shifted = shift_coefficients(model.a_coeffs, zt, dom);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(p.n_rows) * std::size_t(5 + n_act));
    p.rhs = Eigen::VectorXd::Zero(p.n_rows);

    for (int t = 1; t <= p.T; ++t) {
        const int row0 = (t - 1) * p.n_alpha;
        for (int j = 0; j < p.n_alpha; ++j)
            trip.emplace_back(row0 + j, p.alpha_var(t, j), 1.0);
        // actuation entering between t-1 and t
        for (int pos = 0; pos < n_act; ++pos) {
            const auto& b = model.b_coeffs[std::size_t(p.active[std::size_t(pos)])].coeffs;
            const int col = p.u_var(t - 1, pos);
            for (int j = 0; j < p.n_alpha; ++j)
                if (b[std::size_t(j)] != 0.0) trip.emplace_back(row0 + j, col, -b[std::size_t(j)]);
        }
        if (t == 1) {
            for (int j = 0; j < p.n_alpha; ++j) p.rhs[row0 + j] = shifted.coeffs[std::size_t(j)];
        } else {
            // previous state propagated through the per-mode convolution blocks
            for (int m = 0; m <= p.k; ++m) {
                for (int n = 0; n <= p.k; ++n) {
                    const double scale = conv_scale(m, n, dom);
                    const Eigen::Matrix4d blk = conv_matrix(model.a_coeffs, m, n);
                    const int jbase = int(model.a_coeffs.index(m, n, 1));
                    for (int ri = 0; ri < 4; ++ri)
                        for (int ci = 0; ci < 4; ++ci)
                            if (blk(ri, ci) != 0.0)
                                trip.emplace_back(row0 + jbase + ri,
                                                  p.alpha_var(t - 1, jbase + ci),
                                                  -scale * blk(ri, ci));
                }
            }
        }
    }

    p.A.resize(p.n_rows, p.n_vars);
    p.A.setFromTriplets(trip.begin(), trip.end());
    p.A.makeCompressed();

    p.cost_diag = Eigen::VectorXd::Zero(p.n_vars);
    for (int t = 1; t <= p.T; ++t)
        for (int j = 0; j < p.n_alpha; ++j) p.cost_diag[p.alpha_var(t, j)] = cfg.Q;
    for (int t = 0; t < p.T; ++t)
        for (int pos = 0; pos < n_act; ++pos) p.cost_diag[p.u_var(t, pos)] = cfg.R;
    return p;
}

double cost_of(const SLPProblem& problem, const Eigen::VectorXd& x) {
    if (x.size() != problem.n_vars) throw std::invalid_argument("cost_of: dimension mismatch");
    return x.cwiseProduct(x).dot(problem.cost_diag);
}

Eigen::VectorXd uncontrolled_solution(const KernelModel& model, const SynthesisConfig& cfg,
                                      Point2 zt, const SLPProblem& problem) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.n_vars);
    SpectralField state = shift_coefficients(model.a_coeffs, zt, model.domain);
    for (int t = 1; t <= cfg.T; ++t) {
        for (int j = 0; j < problem.n_alpha; ++j)
            x[problem.alpha_var(t, j)] = state.coeffs[std::size_t(j)];
        if (t < cfg.T) state = conv_apply(model.a_coeffs, state, model.domain);
    }
    return x;
}

}  // namespace sls
