#pragma once

// Plain-text persistence. Every float is written with 17 significant digits
// so files round-trip bit-exactly; nothing here emits timestamps or other
// run-dependent bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "sls/spectral.hpp"

namespace sls {

std::string fmt17(double v);

// Coefficient file layout:
//   k,lambda1,lambda2,role
//   <k>,<lambda1>,<lambda2>,<role>
//   m,n,i,value
//   <m>,<n>,<i>,<value>    (one row per stored coefficient, index order)
struct CoeffFile {
    int k = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::string role;
    SpectralField field;
};

void write_coeffs(const std::filesystem::path& path, const SpectralField& field,
                  const Domain2D& dom, const std::string& role);
CoeffFile read_coeffs(const std::filesystem::path& path);

struct Table1Row {
    int time_step = 0;
    double error_pct = 0.0;
    double perf_gain_pct = 0.0;
};
void write_table1(const std::filesystem::path& path, const std::vector<Table1Row>& rows);

struct Table3Row {
    std::string method;
    double dx = 0.0;
    int n_x = 0;
    double avg_perf_gain_pct = 0.0;
};
void write_table3(const std::filesystem::path& path, const std::vector<Table3Row>& rows);

// Scattered field dump, one row z1,z2,value per grid point.
void write_grid_dump(const std::filesystem::path& path, const std::vector<Point2>& grid,
                     const std::vector<double>& values);

// Split a CSV record on commas (no quoting; none of our fields need it).
std::vector<std::string> split_csv(const std::string& line);

}  // namespace sls
