#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace dynega {

// Symmetric p x p correlation matrix with unit diagonal.
class CorrMatrix {
public:
    // Checks symmetry (1e-12), unit diagonal and range; throws NonSymmetric or
    // InvalidArgument.
    explicit CorrMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

private:
    Eigen::MatrixXd values_;
};

// Pearson correlations between the columns of `design` (M observations x p variables).
CorrMatrix correlation_matrix(const Eigen::MatrixXd& design);

struct Edge {
    int u = 0;  // u < v
    int v = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Network {
    Eigen::MatrixXd weights;          // symmetric, zero diagonal, zero off the edge set
    std::vector<Edge> edges;          // sorted by (u, v)
    std::vector<int> insertion_order; // seed clique first, then inserted vertices

    Eigen::Index size() const noexcept { return weights.rows(); }
};

// Triangulated Maximally Filtered Graph. Structure is selected on |r|; retained
// edges keep the signed similarity.
Network tmfg(const CorrMatrix& similarity);

// Builds a network from an arbitrary symmetric weight matrix (edges = nonzero
// off-diagonal entries).
Network network_from_weights(const Eigen::MatrixXd& weights);

void write_edge_list(const Network& net, const std::filesystem::path& path);

} // namespace dynega
