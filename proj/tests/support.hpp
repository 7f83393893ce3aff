#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "dynega/error.hpp"

namespace testsupport {

// Code of the dynega::Error thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<dynega::ErrorCode> error_code(F&& f) {
    try {
        f();
    } catch (const dynega::Error& e) {
        return e.code();
    }
    return std::nullopt;
}


class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("dynega_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

// Textbook two-pass Pearson correlation of the columns of x.
inline Eigen::MatrixXd pearson(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) mean[j] += x(i, j);
        mean[j] /= n;
        for (int i = 0; i < n; ++i) sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
        sd[j] = std::sqrt(sd[j]);
    }
    Eigen::MatrixXd r(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            r(a, b) = a == b ? 1.0 : s / (sd[a] * sd[b]);
        }
    return 0.5 * (r + r.transpose()).eval();
}

// Sample correlation of a block factor model: item j loads `load` on the
// factor of block labels[j].
inline Eigen::MatrixXd block_correlation(const std::vector<int>& labels, double load, int samples,
                                         std::uint64_t seed) {
    int blocks = 0;
    for (int l : labels) blocks = std::max(blocks, l + 1);
    const Eigen::MatrixXd f = gaussian(samples, blocks, seed);
    const Eigen::MatrixXd e = gaussian(samples, static_cast<int>(labels.size()), seed ^ 0x9e3779b97f4a7c15ULL);
    Eigen::MatrixXd x(samples, static_cast<int>(labels.size()));
    for (int j = 0; j < static_cast<int>(labels.size()); ++j)
        x.col(j) = load * f.col(labels[j]) + std::sqrt(1.0 - load * load) * e.col(j);
    return pearson(x);
}

inline std::vector<int> block_labels(int blocks, int size) {
    std::vector<int> labels;
    for (int b = 0; b < blocks; ++b)
        for (int i = 0; i < size; ++i) labels.push_back(b);
    return labels;
}

} // namespace testsupport
