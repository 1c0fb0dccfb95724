#pragma once

// Per-disturbance synthesis and everything built on top of it: parallel bank
// construction, superposition of responses, the feedback realization that
// replays stored gains against estimated disturbances, and bank persistence.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sls/model.hpp"
#include "sls/slp.hpp"

namespace sls {

struct DisturbanceResponse {
    Point2 zt;
    std::vector<SpectralField> alpha;       // t = 1..T
    std::vector<Eigen::VectorXd> u_gains;   // t = 0..T-1, length n_u, masked slots zero
    double objective = 0.0;
    double primal_residual = 0.0;
};

struct ResponseBank {
    int T = 0;
    int k = 0;
    std::vector<Point2> disturbances;
    std::vector<DisturbanceResponse> responses;
};

DisturbanceResponse synthesize_one(const KernelModel& model, const SynthesisConfig& cfg,
                                   Point2 zt);

// Runs synthesize_one over a static partition of the list with cfg.jobs
// workers. Failures are aggregated per disturbance id into one exception.
ResponseBank synthesize_bank(const KernelModel& model, const SynthesisConfig& cfg,
                             const std::vector<Point2>& disturbances);

struct AggregateResponse {
    std::vector<SpectralField> alpha;
    std::vector<Eigen::VectorXd> u_gains;
};
AggregateResponse superpose(const ResponseBank& bank, const std::vector<double>& weights);

// Feedback realization. Each step consumes the projected observation of the
// current state, explains the innovation against the bank's impulse
// dictionary, and emits the scheduled stored gains; an internal nominal model
// tracks what the observation should have been.
class FeedbackPolicy {
  public:
    FeedbackPolicy(const ResponseBank& bank, const KernelModel& model);

    Eigen::VectorXd step(const SpectralField& observed);
    void reset();
    int time() const { return t_; }

    struct Attribution {
        int t = 0;      // arrival step
        int d = 0;      // bank disturbance id
        double weight = 0.0;
    };
    const std::vector<Attribution>& attributions() const { return log_; }

  private:
    const ResponseBank& bank_;
    const KernelModel& model_;
    Eigen::MatrixXd dict_;         // impulse surrogate coefficients, one column per bank entry
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> dict_qr_;
    SpectralField predicted_;
    double scale_ = 0.0;
    int t_ = 0;
    std::vector<Attribution> log_;
};

FeedbackPolicy realize_controller(const ResponseBank& bank, const KernelModel& model);

// Bank directory: `meta` (key=value echo) plus per-disturbance coefficient
// and gain CSVs. extra_meta lines are appended verbatim after the fixed keys.
void save_bank(const std::filesystem::path& dir, const ResponseBank& bank, const Domain2D& dom,
               const std::vector<std::pair<std::string, std::string>>& extra_meta = {});
ResponseBank load_bank(const std::filesystem::path& dir, Domain2D* dom_out = nullptr);

}  // namespace sls
