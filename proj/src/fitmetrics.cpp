#include "dynega/fitmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dynega/error.hpp"

namespace dynega {

namespace {

double density_entropy(const Eigen::MatrixXd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) fail(ErrorCode::Internal, "eigen decomposition failed");
    double s = 0.0;
    for (double lambda : eig.eigenvalues()) {
        if (lambda < kEigenClamp) continue;
        s -= lambda * std::log(lambda);
    }
    return s;
}

} // namespace

double von_neumann_entropy(const Eigen::MatrixXd& r) {
    if (r.rows() != r.cols() || r.rows() == 0) fail(ErrorCode::InvalidArgument, "entropy needs a non-empty square matrix");
    const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        fail(ErrorCode::NonSymmetric, "entropy input is not symmetric");
    const double trace = r.trace();
    if (!(trace > 0.0)) fail(ErrorCode::NonPositiveTrace, "entropy input has non-positive trace");
    if (r.rows() == 1) return 0.0;
    return density_entropy(r / trace);
}

double tefi_from_entropies(double total_entropy, const std::vector<double>& per_dimension) {
    const double nf = static_cast<double>(per_dimension.size());
    double sum = 0.0;
    for (double s : per_dimension) sum += s;
    return (sum / nf - total_entropy) + (total_entropy - sum) * std::sqrt(nf);
}

EntropyReport entropy_report(const CorrMatrix& r, const Partition& part) {
    if (static_cast<std::size_t>(r.size()) != part.size())
        fail(ErrorCode::LengthMismatch, "partition covers " + std::to_string(part.size()) + " items, matrix has " +
                                            std::to_string(r.size()));
    const Eigen::MatrixXd a = r.values().cwiseAbs();
    EntropyReport rep;
    rep.total_entropy = von_neumann_entropy(a);
    for (const auto& members : part.members()) {
        if (members.empty()) fail(ErrorCode::EmptyCommunity, "partition has an empty community");
        const auto k = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                sub(i, j) = a(static_cast<Eigen::Index>(members[static_cast<std::size_t>(i)]),
                              static_cast<Eigen::Index>(members[static_cast<std::size_t>(j)]));
        rep.per_dimension_entropy.push_back(von_neumann_entropy(sub));
    }
    if (rep.per_dimension_entropy.size() == 1) {
        // One community is the whole matrix: both brackets cancel exactly.
        rep.per_dimension_entropy[0] = rep.total_entropy;
        rep.tefi = 0.0;
        return rep;
    }
    rep.tefi = tefi_from_entropies(rep.total_entropy, rep.per_dimension_entropy);
    return rep;
}

double nmi(const Partition& a, const Partition& b) {
    if (a.size() != b.size())
        fail(ErrorCode::LengthMismatch, "partitions have " + std::to_string(a.size()) + " and " +
                                            std::to_string(b.size()) + " items");
    if (a.size() == 0) fail(ErrorCode::InvalidArgument, "empty partitions");
    const bool a_trivial = a.n_communities() == 1;
    const bool b_trivial = b.n_communities() == 1;
    if (a == b) return 1.0;  // labels are canonical, so this is exact agreement
    if (a_trivial && b_trivial) return 1.0;
    if (a_trivial || b_trivial) return 0.0;
    // fixed argument order keeps the floating-point sum symmetric
    if (b.labels() < a.labels()) return nmi(b, a);

    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::vector<double> ca(static_cast<std::size_t>(a.n_communities()), 0.0);
    std::vector<double> cb(static_cast<std::size_t>(b.n_communities()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ca[static_cast<std::size_t>(a[i])] += 1.0;
        cb[static_cast<std::size_t>(b[i])] += 1.0;
    }
    auto entropy = [n](const std::vector<double>& counts) {
        double h = 0.0;
        for (double c : counts)
            if (c > 0) h -= (c / n) * std::log(c / n);
        return h;
    };
    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double pij = count / n;
        mi += pij * std::log(pij / ((ca[static_cast<std::size_t>(cell.first)] / n) *
                                    (cb[static_cast<std::size_t>(cell.second)] / n)));
    }
    const double value = 2.0 * mi / (entropy(ca) + entropy(cb));
    return std::clamp(value, 0.0, 1.0);
}

} // namespace dynega
