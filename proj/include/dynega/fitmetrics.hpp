#pragma once

#include <Eigen/Dense>

#include <vector>

#include "dynega/netfilter.hpp"
#include "dynega/partition.hpp"

namespace dynega {

inline constexpr double kEigenClamp = 1e-12;

// Von Neumann entropy (nats) of R / tr(R). Eigenvalues below kEigenClamp count as 0.
double von_neumann_entropy(const Eigen::MatrixXd& r);

struct EntropyReport {
    double total_entropy = 0.0;
    std::vector<double> per_dimension_entropy;
    double tefi = 0.0;
};

// Total Entropy Fit Index on |R|; lower is better. Each community's block of
// |R| is renormalised to unit trace before its entropy is taken.
EntropyReport entropy_report(const CorrMatrix& r, const Partition& part);

inline double tefi(const CorrMatrix& r, const Partition& part) { return entropy_report(r, part).tefi; }

// TEFI recomputed from stored entropies.
double tefi_from_entropies(double total_entropy, const std::vector<double>& per_dimension);

// Mutual information normalised by the arithmetic mean of the two entropies.
double nmi(const Partition& a, const Partition& b);

} // namespace dynega
