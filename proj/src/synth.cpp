#include "sls/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sls/csv.hpp"
#include "sls/qpsolve.hpp"

namespace sls {

namespace {

// Innovations below this fraction of the running observation scale are
// treated as quadrature noise, not disturbances.
constexpr double kNoiseFloorFrac = 0.02;
// Fraction of the innovation norm that may remain unexplained by the bank's
// impulse dictionary before the realization refuses to continue.
constexpr double kAttributionTol = 0.1;

std::string dist_prefix(std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "d%03u", static_cast<unsigned>(idx));
    return buf;
}

}  // namespace

DisturbanceResponse synthesize_one(const KernelModel& model, const SynthesisConfig& cfg,
                                   Point2 zt) {
    const SLPProblem p = assemble(model, cfg, zt);
    if (p.empty_mask_warning)
        std::cerr << "synthesize: locality mask leaves no actuators for disturbance at ("
                  << zt.z1 << ", " << zt.z2 << "); response is the uncontrolled rollout\n";

    const EqConstrainedQP qp = p.qp();
    const QPSolution sol = cfg.R == 0.0 ? solve_with_R_zero(qp) : solve(qp);

    DisturbanceResponse out;
    out.zt = zt;
    out.objective = cost_of(p, sol.x);
    out.primal_residual = sol.primal_residual;
    out.alpha.reserve(std::size_t(cfg.T));
    for (int t = 1; t <= cfg.T; ++t) {
        SpectralField f = SpectralField::zeros(cfg.k);
        for (int j = 0; j < p.n_alpha; ++j) f.coeffs[std::size_t(j)] = sol.x[p.alpha_var(t, j)];
        out.alpha.push_back(std::move(f));
    }
    out.u_gains.assign(std::size_t(cfg.T), Eigen::VectorXd::Zero(model.n_u()));
    for (int t = 0; t < cfg.T; ++t)
        for (int pos = 0; pos < int(p.active.size()); ++pos)
            out.u_gains[std::size_t(t)][p.active[std::size_t(pos)]] = sol.x[p.u_var(t, pos)];
    return out;
}

ResponseBank synthesize_bank(const KernelModel& model, const SynthesisConfig& cfg,
                             const std::vector<Point2>& disturbances) {
    if (disturbances.empty())
        throw std::invalid_argument("synthesize_bank: disturbance list is empty");
    ResponseBank bank;
    bank.T = cfg.T;
    bank.k = cfg.k;
    bank.disturbances = disturbances;
    bank.responses.resize(disturbances.size());

    std::vector<std::string> errors(disturbances.size());
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t d = lo; d < hi; ++d) {
            try {
                bank.responses[d] = synthesize_one(model, cfg, disturbances[d]);
            } catch (const std::exception& e) {
                errors[d] = e.what();
            }
        }
    };
    const std::size_t n = disturbances.size();
    const std::size_t workers = std::min<std::size_t>(std::size_t(std::max(cfg.jobs, 1)), n);
    if (workers <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(run_range, n * w / workers, n * (w + 1) / workers);
        for (auto& th : pool) th.join();
    }

    std::string aggregate;
    for (std::size_t d = 0; d < n; ++d)
        if (!errors[d].empty())
            aggregate += "disturbance " + std::to_string(d) + ": " + errors[d] + "\n";
    if (!aggregate.empty())
        throw std::runtime_error("synthesize_bank failures:\n" + aggregate);
    return bank;
}

AggregateResponse superpose(const ResponseBank& bank, const std::vector<double>& weights) {
    if (weights.size() != bank.responses.size())
        throw std::invalid_argument("superpose: weight count mismatch");
    AggregateResponse out;
    if (bank.responses.empty()) return out;
    const auto& first = bank.responses.front();
    out.alpha.assign(first.alpha.size(), SpectralField::zeros(bank.k));
    out.u_gains.assign(first.u_gains.size(),
                       Eigen::VectorXd::Zero(first.u_gains.front().size()));
    for (std::size_t d = 0; d < bank.responses.size(); ++d) {
        const double w = weights[d];
        if (!std::isfinite(w)) throw std::invalid_argument("superpose: non-finite weight");
        const auto& r = bank.responses[d];
        for (std::size_t t = 0; t < out.alpha.size(); ++t)
            for (std::size_t j = 0; j < out.alpha[t].coeffs.size(); ++j)
                out.alpha[t].coeffs[j] += w * r.alpha[t].coeffs[j];
        for (std::size_t t = 0; t < out.u_gains.size(); ++t)
            out.u_gains[t] += w * r.u_gains[t];
    }
    return out;
}

FeedbackPolicy::FeedbackPolicy(const ResponseBank& bank, const KernelModel& model)
    : bank_(bank), model_(model) {
    const int n_coeff = int(model.a_coeffs.size());
    dict_.resize(n_coeff, int(bank.disturbances.size()));
    for (std::size_t d = 0; d < bank.disturbances.size(); ++d) {
        const SpectralField s = delta_surrogate(bank.disturbances[d], bank.k, model.domain);
        for (int j = 0; j < n_coeff; ++j) dict_(j, int(d)) = s.coeffs[std::size_t(j)];
    }
    dict_qr_.compute(dict_);
    predicted_ = SpectralField::zeros(bank.k);
}

void FeedbackPolicy::reset() {
    predicted_ = SpectralField::zeros(bank_.k);
    scale_ = 0.0;
    t_ = 0;
    log_.clear();
}

Eigen::VectorXd FeedbackPolicy::step(const SpectralField& observed) {
    const int n_coeff = int(predicted_.coeffs.size());
    if (int(observed.coeffs.size()) != n_coeff)
        throw std::invalid_argument("FeedbackPolicy: observation size mismatch");

    Eigen::Map<const Eigen::VectorXd> obs(observed.coeffs.data(), n_coeff);
    Eigen::Map<const Eigen::VectorXd> pred(predicted_.coeffs.data(), n_coeff);
    const Eigen::VectorXd innovation = obs - pred;
    scale_ = std::max(scale_, obs.norm());

    const double inov_norm = innovation.norm();
    if (inov_norm > kNoiseFloorFrac * scale_ && inov_norm > 0.0) {
        const Eigen::VectorXd c = dict_qr_.solve(innovation);
        const double resid = (dict_ * c - innovation).norm();
        if (resid > kAttributionTol * inov_norm)
            throw std::runtime_error(
                "FeedbackPolicy: innovation not attributable to the bank's disturbance set "
                "(residual " + std::to_string(resid) + " of " + std::to_string(inov_norm) + ")");
        const double cmax = c.cwiseAbs().maxCoeff();
        for (int d = 0; d < c.size(); ++d)
            if (std::abs(c[d]) > 1e-12 * std::max(1.0, cmax))
                log_.push_back({t_, d, c[d]});
        // fold the attributed impulses into the nominal model
        for (int d = 0; d < c.size(); ++d) {
            if (std::abs(c[d]) <= 1e-12 * std::max(1.0, cmax)) continue;
            for (int j = 0; j < n_coeff; ++j)
                predicted_.coeffs[std::size_t(j)] += c[d] * dict_(j, d);
        }
    }

    Eigen::VectorXd u = Eigen::VectorXd::Zero(model_.n_u());
    for (const Attribution& a : log_) {
        const int age = t_ - a.t;
        if (age >= 0 && age < bank_.T)
            u += a.weight * bank_.responses[std::size_t(a.d)].u_gains[std::size_t(age)];
    }

    predicted_ = conv_apply(model_.a_coeffs, predicted_, model_.domain);
    const SpectralField act = actuation_field(model_, u);
    for (int j = 0; j < n_coeff; ++j) predicted_.coeffs[std::size_t(j)] += act.coeffs[std::size_t(j)];
    ++t_;
    return u;
}

FeedbackPolicy realize_controller(const ResponseBank& bank, const KernelModel& model) {
    if (bank.responses.size() != bank.disturbances.size())
        throw std::invalid_argument("realize_controller: bank is incomplete");
    return FeedbackPolicy(bank, model);
}

void save_bank(const std::filesystem::path& dir, const ResponseBank& bank, const Domain2D& dom,
               const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream meta(dir / "meta");
        if (!meta) throw std::runtime_error("cannot write bank meta: " + dir.string());
        meta << "format=sls-response-bank-v1\n";
        meta << "T=" << bank.T << "\n";
        meta << "k=" << bank.k << "\n";
        meta << "n_u=" << (bank.responses.empty() ? 0 : bank.responses.front().u_gains.front().size())
             << "\n";
        meta << "lambda1=" << fmt17(dom.lambda1) << "\n";
        meta << "lambda2=" << fmt17(dom.lambda2) << "\n";
        meta << "z1_min=" << fmt17(dom.z1_min) << "\n";
        meta << "z1_max=" << fmt17(dom.z1_max) << "\n";
        meta << "z2_min=" << fmt17(dom.z2_min) << "\n";
        meta << "z2_max=" << fmt17(dom.z2_max) << "\n";
        meta << "quad_n=" << dom.quad_n << "\n";
        meta << "disturbances=" << bank.disturbances.size() << "\n";
        for (std::size_t d = 0; d < bank.disturbances.size(); ++d)
            meta << "zt" << d << "=" << fmt17(bank.disturbances[d].z1) << ","
                 << fmt17(bank.disturbances[d].z2) << "\n";
        for (std::size_t d = 0; d < bank.responses.size(); ++d)
            meta << "objective" << d << "=" << fmt17(bank.responses[d].objective) << "\n";
        for (const auto& [key, value] : extra_meta) meta << key << "=" << value << "\n";
    }
    for (std::size_t d = 0; d < bank.responses.size(); ++d) {
        const auto& r = bank.responses[d];
        for (std::size_t t = 0; t < r.alpha.size(); ++t)
            write_coeffs(dir / (dist_prefix(d) + "_state_t" + std::to_string(t + 1) + ".csv"),
                         r.alpha[t], dom, "state_t" + std::to_string(t + 1));
        std::ofstream gains(dir / (dist_prefix(d) + "_gains.csv"));
        if (!gains) throw std::runtime_error("cannot write gain file");
        gains << "t,l,value\n";
        for (std::size_t t = 0; t < r.u_gains.size(); ++t)
            for (int l = 0; l < r.u_gains[t].size(); ++l)
                gains << t << "," << l << "," << fmt17(r.u_gains[t][l]) << "\n";
    }
}

ResponseBank load_bank(const std::filesystem::path& dir, Domain2D* dom_out) {
    std::ifstream meta(dir / "meta");
    if (!meta) throw std::runtime_error("bank meta not found in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("bank meta missing key " + key);
        return it->second;
    };

    ResponseBank bank;
    bank.T = std::stoi(need("T"));
    bank.k = std::stoi(need("k"));
    const int n_u = std::stoi(need("n_u"));
    const std::size_t nd = std::stoul(need("disturbances"));
    Domain2D dom;
    dom.lambda1 = std::stod(need("lambda1"));
    dom.lambda2 = std::stod(need("lambda2"));
    dom.z1_min = std::stod(need("z1_min"));
    dom.z1_max = std::stod(need("z1_max"));
    dom.z2_min = std::stod(need("z2_min"));
    dom.z2_max = std::stod(need("z2_max"));
    dom.quad_n = std::stoi(need("quad_n"));
    if (dom_out) *dom_out = dom;

    for (std::size_t d = 0; d < nd; ++d) {
        const auto pos = split_csv(need("zt" + std::to_string(d)));
        bank.disturbances.push_back({std::stod(pos.at(0)), std::stod(pos.at(1))});
    }
    for (std::size_t d = 0; d < nd; ++d) {
        DisturbanceResponse r;
        r.zt = bank.disturbances[d];
        r.objective = std::stod(need("objective" + std::to_string(d)));
        for (int t = 1; t <= bank.T; ++t) {
            const CoeffFile cf = read_coeffs(
                dir / (dist_prefix(d) + "_state_t" + std::to_string(t) + ".csv"));
            r.alpha.push_back(cf.field);
        }
        r.u_gains.assign(std::size_t(bank.T), Eigen::VectorXd::Zero(n_u));
        std::ifstream gains(dir / (dist_prefix(d) + "_gains.csv"));
        if (!gains) throw std::runtime_error("bank gain file missing");
        std::getline(gains, line);  // header
        while (std::getline(gains, line)) {
            if (line.empty()) continue;
            const auto rec = split_csv(line);
            r.u_gains[std::stoul(rec.at(0))][std::stoi(rec.at(1))] = std::stod(rec.at(2));
        }
        bank.responses.push_back(std::move(r));
    }
    return bank;
}

}  // namespace sls
