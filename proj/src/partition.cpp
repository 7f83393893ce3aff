#include "dynega/partition.hpp"

#include <unordered_map>

#include "dynega/error.hpp"

namespace dynega {

Partition Partition::from_labels(const std::vector<int>& raw) {
    Partition p;
    std::unordered_map<int, int> remap;
    p.labels_.reserve(raw.size());
    for (int r : raw) {
        if (r < 0) fail(ErrorCode::InvalidArgument, "partition labels must be non-negative");
        auto [it, inserted] = remap.try_emplace(r, static_cast<int>(remap.size()));
        p.labels_.push_back(it->second);
    }
    p.n_communities_ = static_cast<int>(remap.size());
    return p;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n_communities_));
    for (std::size_t i = 0; i < labels_.size(); ++i)
        out[static_cast<std::size_t>(labels_[i])].push_back(i);
    return out;
}

} // namespace dynega
