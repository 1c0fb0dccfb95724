#include "sls/runconfig.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sls {

void RunConfig::validate() const {
    try {
        synth.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (r <= 0.0) throw ConfigError("kernel radius must be positive");
    const double half_min = 0.5 * std::min(synth.domain.width1(), synth.domain.width2());
    if (r > half_min) throw ConfigError("kernel radius exceeds half the domain width");
    const int g = static_cast<int>(std::lround(std::sqrt(double(n_u))));
    if (n_u < 1 || g * g != n_u) throw ConfigError("n_u must be a positive perfect square");
    if (grid_n < 8) throw ConfigError("grid_n must be at least 8");
    if (disturbance_count < 0) throw ConfigError("disturbance_count must be nonnegative");
    for (const Point2& z : disturbances)
        if (!synth.domain.contains(z)) throw ConfigError("disturbance outside domain");
    for (double dx : baseline_dx)
        if (dx <= 0.0) throw ConfigError("baseline dx must be positive");
    if (cache_dir.empty() || output_dir.empty()) throw ConfigError("empty directory path");
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.disturbances = {{-0.26, 0.56}};
    return cfg;
}

namespace {

using nlohmann::json;

Point2 parse_point(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(std::string(what) + " must be a [z1, z2] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    RunConfig cfg = default_config();
    cfg.disturbances.clear();
    try {
        SynthesisConfig& s = cfg.synth;
        s.T = j.value("T", s.T);
        s.k = j.value("k", s.k);
        s.Q = j.value("Q", s.Q);
        s.R = j.value("R", s.R);
        s.jobs = j.value("jobs", s.jobs);
        if (j.contains("domain")) {
            const json& d = j["domain"];
            Domain2D& dom = s.domain;
            dom.z1_min = d.value("z1_min", dom.z1_min);
            dom.z1_max = d.value("z1_max", dom.z1_max);
            dom.z2_min = d.value("z2_min", dom.z2_min);
            dom.z2_max = d.value("z2_max", dom.z2_max);
            dom.lambda1 = d.value("lambda1", dom.lambda1);
            dom.lambda2 = d.value("lambda2", dom.lambda2);
            dom.quad_n = d.value("quad_n", dom.quad_n);
        }
        if (j.contains("locality") && !j["locality"].is_null()) {
            const json& l = j["locality"];
            LocalitySpec spec;
            spec.norm = l.value("norm", spec.norm);
            spec.radius = l.value("radius", spec.radius);
            s.locality = spec;
        }
        cfg.r = j.value("r", cfg.r);
        cfg.n_u = j.value("n_u", cfg.n_u);
        if (j.contains("disturbances"))
            for (const json& p : j["disturbances"])
                cfg.disturbances.push_back(parse_point(p, "disturbance"));
        cfg.disturbance_count = j.value("disturbance_count", cfg.disturbance_count);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.grid_n = j.value("grid_n", cfg.grid_n);
        if (j.contains("baseline_dx")) {
            cfg.baseline_dx.clear();
            for (const json& v : j["baseline_dx"]) cfg.baseline_dx.push_back(v.get<double>());
        }
        cfg.baseline_fine_dx = j.value("baseline_fine_dx", cfg.baseline_fine_dx);
        cfg.baseline_scale_cost = j.value("baseline_scale_cost", cfg.baseline_scale_cost);
        cfg.cache_dir = j.value("cache_dir", cfg.cache_dir);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    if (cfg.disturbances.empty() && cfg.disturbance_count == 0) cfg.disturbances = {{-0.26, 0.56}};
    cfg.validate();
    return cfg;
}

std::vector<Point2> resolve_disturbances(const RunConfig& cfg) {
    if (!cfg.disturbances.empty()) return cfg.disturbances;
    const Domain2D& dom = cfg.synth.domain;
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> d1(dom.z1_min + cfg.r, dom.z1_max - cfg.r);
    std::uniform_real_distribution<double> d2(dom.z2_min + cfg.r, dom.z2_max - cfg.r);
    std::vector<Point2> out;
    out.reserve(cfg.disturbance_count);
    for (int i = 0; i < cfg.disturbance_count; ++i) {
        const double z1 = d1(rng);
        out.push_back({z1, d2(rng)});
    }
    return out;
}

std::string coeff_fingerprint(const RunConfig& cfg) {
    const Domain2D& dom = cfg.synth.domain;
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
        os << buf;
    };
    os << "coeff-cache-v1\n";
    put("r", cfg.r);
    os << "k=" << cfg.synth.k << "\n";
    os << "n_u=" << cfg.n_u << "\n";
    put("z1_min", dom.z1_min);
    put("z1_max", dom.z1_max);
    put("z2_min", dom.z2_min);
    put("z2_max", dom.z2_max);
    put("lambda1", dom.lambda1);
    put("lambda2", dom.lambda2);
    os << "quad_n=" << dom.quad_n << "\n";
    return os.str();
}

std::string digest(const std::string& text) {
    // FNV-1a, 64 bit.
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

}  // namespace sls
