#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>

#include "dynega/ingest.hpp"

namespace dynega {

struct GllaConfig {
    int n = 5;           // window length (reconstruction embedding dimension)
    int tau = 1;         // delay between window columns
    double delta_t = 1.0;
    int max_order = 2;   // highest derivative order in the local polynomial basis
    int use_order = 1;   // derivative column that feeds the network

    // Throws InvalidArgument unless n >= max_order + 1 and 1 <= use_order <= max_order.
    void validate() const;
};

// Row i holds series[i], series[i + tau], ..., series[i + (n-1) tau].
Eigen::MatrixXd time_delay_embed(std::span<const double> series, int n, int tau);

// n x (max_order + 1); column a is (delta_t (v - mean v))^a / a!, v = 1..n.
Eigen::MatrixXd glla_weights(int n, double delta_t, int max_order);

// Y = X L (L'L)^-1, solved through a QR factorisation of L.
Eigen::MatrixXd glla_derivatives(const Eigen::MatrixXd& embedded, const Eigen::MatrixXd& weights);

// Window length actually usable at `depth`, or nullopt when no window leaves
// at least 3 embedded rows with enough points for the polynomial basis.
std::optional<int> effective_window(int depth, const GllaConfig& cfg);

struct DerivativeDesign {
    Eigen::MatrixXd values;  // M x p, one column per item
    int depth_used = 0;
    int effective_window = 0;
};

DerivativeDesign build_derivative_design(const EmbeddingMatrix& embeddings, int depth,
                                         const GllaConfig& cfg);

} // namespace dynega
