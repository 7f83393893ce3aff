#pragma once

#include <cstddef>
#include <vector>

namespace dynega {

// Community label per item, 0-based and contiguous.
class Partition {
public:
    Partition() = default;

    // Relabels arbitrary non-negative ids to contiguous ids in order of first
    // appearance.
    static Partition from_labels(const std::vector<int>& raw);

    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int n_communities() const noexcept { return n_communities_; }
    int operator[](std::size_t i) const { return labels_[i]; }

    std::vector<std::vector<std::size_t>> members() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> labels_;
    int n_communities_ = 0;
};

} // namespace dynega
