#include "sls/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sls {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return is;
}

}  // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void write_coeffs(const std::filesystem::path& path, const SpectralField& field,
                  const Domain2D& dom, const std::string& role) {
    std::ofstream os = open_out(path);
    os << "k,lambda1,lambda2,role\n";
    os << field.k << "," << fmt17(dom.lambda1) << "," << fmt17(dom.lambda2) << "," << role << "\n";
    os << "m,n,i,value\n";
    for (int m = 0; m <= field.k; ++m)
        for (int n = 0; n <= field.k; ++n)
            for (int i = 1; i <= 4; ++i)
                os << m << "," << n << "," << i << "," << fmt17(field.at(m, n, i)) << "\n";
}

CoeffFile read_coeffs(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || split_csv(line)[0] != "k")
        throw std::runtime_error("coefficient file missing header: " + path.string());
    if (!std::getline(is, line)) throw std::runtime_error("truncated coefficient file");
    auto meta = split_csv(line);
    if (meta.size() != 4) throw std::runtime_error("malformed coefficient metadata");
    CoeffFile out;
    out.k = std::stoi(meta[0]);
    out.lambda1 = std::stod(meta[1]);
    out.lambda2 = std::stod(meta[2]);
    out.role = meta[3];
    if (!std::getline(is, line) || split_csv(line)[0] != "m")
        throw std::runtime_error("coefficient file missing column header");
    out.field = SpectralField::zeros(out.k);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto rec = split_csv(line);
        if (rec.size() != 4) throw std::runtime_error("malformed coefficient row");
        const int m = std::stoi(rec[0]), n = std::stoi(rec[1]), i = std::stoi(rec[2]);
        out.field.at(m, n, i) = std::stod(rec[3]);
    }
    return out;
}

void write_table1(const std::filesystem::path& path, const std::vector<Table1Row>& rows) {
    std::ofstream os = open_out(path);
    os << "time_step,error_pct,perf_gain_pct\n";
    for (const auto& r : rows)
        os << r.time_step << "," << fmt17(r.error_pct) << "," << fmt17(r.perf_gain_pct) << "\n";
}

void write_table3(const std::filesystem::path& path, const std::vector<Table3Row>& rows) {
    std::ofstream os = open_out(path);
    os << "method,dx,n_x,avg_perf_gain_pct\n";
    for (const auto& r : rows)
        os << r.method << "," << fmt17(r.dx) << "," << r.n_x << "," << fmt17(r.avg_perf_gain_pct)
           << "\n";
}

void write_grid_dump(const std::filesystem::path& path, const std::vector<Point2>& grid,
                     const std::vector<double>& values) {
    if (grid.size() != values.size()) throw std::invalid_argument("grid dump size mismatch");
    std::ofstream os = open_out(path);
    os << "z1,z2,value\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
        os << fmt17(grid[g].z1) << "," << fmt17(grid[g].z2) << "," << fmt17(values[g]) << "\n";
}

}  // namespace sls
