#pragma once

#include <Eigen/Dense>

#include "dynega/netfilter.hpp"
#include "dynega/partition.hpp"

namespace dynega {

struct WalktrapResult {
    Partition partition;
    double modularity = 0.0;
};

// Pons-Latapy random-walk agglomeration over |W|. Each vertex carries a
// self-loop weighted by its mean incident weight; communities are merged by
// minimum increase in mean squared random-walk distance, and the dendrogram
// level with the largest modularity is returned (ties to fewer communities).
WalktrapResult walktrap_detailed(const Network& net, int steps = 4);

inline Partition walktrap(const Network& net, int steps = 4) {
    return walktrap_detailed(net, steps).partition;
}

// Weighted Newman modularity on |W| (no self-loops).
double modularity(const Eigen::MatrixXd& weights, const Partition& partition);

} // namespace dynega
