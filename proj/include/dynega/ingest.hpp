#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dynega/partition.hpp"

namespace dynega {

struct Item {
    std::string id;
    std::string text;
    std::string dimension_label;
};

class ItemPool {
public:
    // Validates: unique ids, known labels, >= 2 dimensions, >= 3 items each.
    ItemPool(std::vector<Item> items, std::vector<std::string> dimension_names);

    const std::vector<Item>& items() const noexcept { return items_; }
    const std::vector<std::string>& dimension_names() const noexcept { return dimension_names_; }
    std::size_t size() const noexcept { return items_.size(); }
    std::size_t index_of(std::string_view id) const;

    // Ground-truth partition; community id is the dimension's position in
    // dimension_names (then compacted).
    Partition truth() const;

private:
    std::vector<Item> items_;
    std::vector<std::string> dimension_names_;
};

// p items x D coordinates.
class EmbeddingMatrix {
public:
    EmbeddingMatrix(Eigen::MatrixXd values, std::vector<std::string> item_ids);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
    std::size_t items() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t depth() const noexcept { return static_cast<std::size_t>(values_.cols()); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> item_ids_;
};

// CSV `id,text,dimension` (optional leading `#dimensions=a,b,...` line) or
// JSONL `{"id":..,"text":..,"dimension":..}`; chosen by the .jsonl extension.
ItemPool load_item_pool(const std::filesystem::path& path);

// CSV `id,e0,e1,...` or JSONL `{"id":..,"embedding":[..]}`. Rows are
// reordered to pool order.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const ItemPool& pool);

void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path);
void save_embeddings_jsonl(const EmbeddingMatrix& m, const std::filesystem::path& path);

struct FetchConfig {
    std::string endpoint;  // base URL; requests go to {endpoint}/embeddings
    std::string model;
    std::string api_key;
    std::filesystem::path cache_dir;  // empty disables the cache
    std::size_t batch_size = 64;
    int max_attempts = 5;
    int backoff_initial_ms = 500;
    int backoff_max_ms = 16000;
    int timeout_seconds = 60;
    std::function<void(std::string_view)> log;
};

struct FetchStats {
    std::size_t requests = 0;
    std::size_t retries = 0;
    std::size_t cache_hits = 0;
};

EmbeddingMatrix fetch_embeddings(const FetchConfig& cfg, const ItemPool& pool,
                                 FetchStats* stats = nullptr);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

} // namespace dynega
