#pragma once

// Pipeline configuration: JSON file with full defaults, deterministic
// disturbance generation, and the canonical fingerprint used to validate
// coefficient caches.

#include <stdexcept>
#include <string>
#include <vector>

#include "sls/model.hpp"

namespace sls {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SynthesisConfig synth;     // T, k, Q, R, domain, locality, jobs
    double r = 1.5;
    int n_u = 16;
    std::vector<Point2> disturbances;  // explicit locations, else generated
    int disturbance_count = 0;         // used with seed when the list is empty
    unsigned seed = 0;
    int grid_n = 80;
    std::vector<double> baseline_dx = {0.5, 0.25, 0.2};
    bool baseline_fine_dx = false;     // adds the heavy dx=0.1 row
    bool baseline_scale_cost = true;
    std::string cache_dir = "cache";
    std::string output_dir = "out";

    void validate() const;  // throws ConfigError
};

RunConfig default_config();
RunConfig load_config(const std::string& path);

// Locations the pipeline will synthesize for: the explicit list when given,
// otherwise disturbance_count seeded uniform draws over the domain shrunk by
// the kernel radius, otherwise the single default location.
std::vector<Point2> resolve_disturbances(const RunConfig& cfg);

// Canonical text of every field that determines the cached coefficients,
// plus a short digest of it. Cache validation compares the full text.
std::string coeff_fingerprint(const RunConfig& cfg);
std::string digest(const std::string& text);

}  // namespace sls
