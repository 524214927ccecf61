#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include <unistd.h>

#include "afba/afba.hpp"

namespace testsupport {

// Brute-force minimizer of (1/2)(u - v)^2 + mu |u| over a uniform grid on
// [lo, hi]. Deliberately knows nothing about shrinkage formulas.
inline double grid_prox_scalar(double v, double mu, double lo = -10.0, double hi = 10.0,
                               double step = 1e-4) {
    double best_u = lo;
    double best_val = std::numeric_limits<double>::infinity();
    for (long i = 0;; ++i) {
        const double u = lo + static_cast<double>(i) * step;
        if (u > hi + step / 2) break;
        const double val = 0.5 * (u - v) * (u - v) + mu * std::abs(u);
        if (val < best_val) {
            best_val = val;
            best_u = u;
        }
    }
    return best_u;
}

// Central differences, coordinate by coordinate.
inline afba::Vector fd_gradient(const std::function<double(const afba::Vector&)>& f,
                                const afba::Vector& x, double h = 1e-6) {
    afba::Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        afba::Vector hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_err(const afba::Vector& got, const afba::Vector& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("afba_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testsupport
