#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sls/csv.hpp"

using namespace sls;
namespace fs = std::filesystem;

namespace {

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "slskit_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("seventeen significant digits round-trip doubles bitwise") {
    // Subnormals are excluded: the standard parser signals underflow for
    // them, and no pipeline quantity is anywhere near that range.
    for (double v : {1.0 / 3.0, 0.1, 3.141592653589793, -4.45e-308, 1.7976931348623157e308,
                     6.5e-19, 0.0, -0.0, 42.0, -97.67851234567890123})
        CHECK(same_bits(std::stod(fmt17(v)), v));

    std::mt19937_64 rng(2024);
    int checked = 0;
    while (checked < 1000) {
        const double v = std::bit_cast<double>(rng());
        if (!std::isnormal(v) && v != 0.0) continue;
        CHECK(same_bits(std::stod(fmt17(v)), v));
        ++checked;
    }
}

TEST_CASE("comma splitting keeps empty fields and drops carriage returns") {
    CHECK(split_csv("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv(",x,") == std::vector<std::string>{"", "x", ""});
    CHECK(split_csv("abc") == std::vector<std::string>{"abc"});
    CHECK(split_csv("a,b\r") == std::vector<std::string>{"a", "b"});
    CHECK(split_csv("") == std::vector<std::string>{""});
}

TEST_CASE("coefficient files round-trip and rewrite byte-identically") {
    Domain2D dom;
    SpectralField f = SpectralField::zeros(5);
    std::mt19937 rng(9);
    std::normal_distribution<double> gauss;
    for (double& c : f.coeffs) c = gauss(rng);

    const fs::path p1 = scratch("coeffs_a.csv"), p2 = scratch("coeffs_b.csv");
    write_coeffs(p1, f, dom, "kernel");
    CoeffFile back = read_coeffs(p1);
    CHECK(back.k == 5);
    CHECK(back.lambda1 == dom.lambda1);
    CHECK(back.lambda2 == dom.lambda2);
    CHECK(back.role == "kernel");
    REQUIRE(back.field.coeffs.size() == f.coeffs.size());
    for (std::size_t j = 0; j < f.coeffs.size(); ++j)
        CHECK(same_bits(back.field.coeffs[j], f.coeffs[j]));

    write_coeffs(p2, back.field, dom, back.role);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("coefficient reader rejects damaged files") {
    CHECK_THROWS_AS(read_coeffs(scratch("missing.csv")), std::runtime_error);

    const fs::path bad_header = scratch("bad_header.csv");
    std::ofstream(bad_header) << "wrong,header\n1,2,3,kernel\n";
    CHECK_THROWS_AS(read_coeffs(bad_header), std::runtime_error);

    const fs::path bad_meta = scratch("bad_meta.csv");
    std::ofstream(bad_meta) << "k,lambda1,lambda2,role\n1,2\nm,n,i,value\n";
    CHECK_THROWS_AS(read_coeffs(bad_meta), std::runtime_error);

    const fs::path bad_row = scratch("bad_row.csv");
    std::ofstream(bad_row) << "k,lambda1,lambda2,role\n1,8,8,kernel\nm,n,i,value\n0,0\n";
    CHECK_THROWS_AS(read_coeffs(bad_row), std::runtime_error);
}

TEST_CASE("summary tables and grid dumps serialize exactly") {
    const fs::path t1 = scratch("table1.csv");
    write_table1(t1, {{1, 0.70551234, 49.10591}, {2, 0.0022013, 79.6666}});
    std::string expect1 = "time_step,error_pct,perf_gain_pct\n1," + fmt17(0.70551234) + "," +
                          fmt17(49.10591) + "\n2," + fmt17(0.0022013) + "," + fmt17(79.6666) + "\n";
    CHECK(slurp(t1) == expect1);

    const fs::path t3 = scratch("table3.csv");
    write_table3(t3, {{"continuous", 0.0, 0, 82.8}, {"baseline", 0.5, 64, 80.05}});
    std::string expect3 = "method,dx,n_x,avg_perf_gain_pct\ncontinuous," + fmt17(0.0) + ",0," +
                          fmt17(82.8) + "\nbaseline," + fmt17(0.5) + ",64," + fmt17(80.05) + "\n";
    CHECK(slurp(t3) == expect3);

    const fs::path gd = scratch("grid.csv");
    write_grid_dump(gd, {{-2.0, -2.0}, {0.25, 0.5}}, {1.5, -0.125});
    std::string expectg = "z1,z2,value\n" + fmt17(-2.0) + "," + fmt17(-2.0) + "," + fmt17(1.5) +
                          "\n" + fmt17(0.25) + "," + fmt17(0.5) + "," + fmt17(-0.125) + "\n";
    CHECK(slurp(gd) == expectg);

    CHECK_THROWS_AS(write_grid_dump(scratch("bad.csv"), {{0, 0}}, {1.0, 2.0}),
                    std::invalid_argument);

    // Values parsed back out of the table survive bitwise.
    std::string line2 = slurp(t1).substr(expect1.find('\n', expect1.find("1,")) + 1);
    auto rec = split_csv(line2.substr(0, line2.find('\n')));
    CHECK(same_bits(std::stod(rec[1]), 0.0022013));
}
