#include "dynega/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <iomanip>
#include <map>
#include <openssl/evp.h>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "csv.hpp"
#include "dynega/error.hpp"

namespace dynega {

namespace {

bool is_jsonl(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    return ext == ".jsonl" || ext == ".ndjson";
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return in;
}

std::string at_line(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        auto b = name.find_first_not_of(" \t");
        auto e = name.find_last_not_of(" \t\r");
        if (b != std::string::npos) out.push_back(name.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

ItemPool::ItemPool(std::vector<Item> items, std::vector<std::string> dimension_names)
    : items_(std::move(items)), dimension_names_(std::move(dimension_names)) {
    std::set<std::string> names;
    for (const auto& n : dimension_names_) {
        if (!names.insert(n).second)
            fail(ErrorCode::InvalidPool, "dimension '" + n + "' declared twice");
    }
    std::set<std::string> ids;
    std::map<std::string, std::size_t> counts;
    for (const auto& item : items_) {
        if (!ids.insert(item.id).second)
            fail(ErrorCode::DuplicateItemId, "duplicate item id '" + item.id + "'");
        if (!names.count(item.dimension_label))
            fail(ErrorCode::UnknownDimension, "item '" + item.id + "' has undeclared dimension '" +
                                                  item.dimension_label + "'");
        ++counts[item.dimension_label];
    }
    if (dimension_names_.size() < 2)
        fail(ErrorCode::InvalidPool, "an item pool needs at least 2 dimensions");
    for (const auto& n : dimension_names_) {
        if (counts[n] < 3)
            fail(ErrorCode::InvalidPool, "dimension '" + n + "' has " + std::to_string(counts[n]) +
                                             " items; at least 3 are required");
    }
}

std::size_t ItemPool::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (items_[i].id == id) return i;
    fail(ErrorCode::MissingId, "unknown item id '" + std::string(id) + "'");
}

Partition ItemPool::truth() const {
    std::vector<int> raw;
    raw.reserve(items_.size());
    for (const auto& item : items_) {
        for (std::size_t g = 0; g < dimension_names_.size(); ++g) {
            if (dimension_names_[g] == item.dimension_label) {
                raw.push_back(static_cast<int>(g));
                break;
            }
        }
    }
    return Partition::from_labels(raw);
}

EmbeddingMatrix::EmbeddingMatrix(Eigen::MatrixXd values, std::vector<std::string> item_ids)
    : values_(std::move(values)), item_ids_(std::move(item_ids)) {
    if (static_cast<std::size_t>(values_.rows()) != item_ids_.size())
        fail(ErrorCode::InvalidArgument, "embedding row count does not match id count");
    if (values_.cols() < 3)
        fail(ErrorCode::InvalidArgument, "embeddings need at least 3 coordinates");
    for (Eigen::Index r = 0; r < values_.rows(); ++r)
        for (Eigen::Index c = 0; c < values_.cols(); ++c)
            if (!std::isfinite(values_(r, c)))
                throw Error(ErrorCode::NonFiniteValue,
                            "non-finite value at row " + std::to_string(r) + ", column " +
                                std::to_string(c),
                            ErrorLocation{static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
}

ItemPool load_item_pool(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<Item> items;
    std::vector<std::string> declared;
    bool have_declared = false;

    if (is_jsonl(path)) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
                items.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                                 j.at("dimension").get<std::string>()});
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorCode::Parse, at_line(path, lineno) + e.what());
            }
        }
    } else {
        csv::Reader reader(in);
        std::vector<std::string> f;
        bool header_seen = false;
        while (reader.next(f)) {
            if (f.size() == 1 && f[0].empty()) continue;
            if (!header_seen && !f.empty() && f[0].rfind("#dimensions=", 0) == 0) {
                // the declaration itself may have been split on commas
                std::string joined = f[0].substr(12);
                for (std::size_t i = 1; i < f.size(); ++i) joined += "," + f[i];
                declared = split_names(joined);
                have_declared = true;
                continue;
            }
            if (!f.empty() && !f[0].empty() && f[0][0] == '#') continue;
            if (!header_seen) {
                if (f.size() != 3 || f[0] != "id" || f[1] != "text" || f[2] != "dimension")
                    fail(ErrorCode::Parse,
                         at_line(path, reader.line()) + "expected header 'id,text,dimension'");
                header_seen = true;
                continue;
            }
            if (f.size() != 3)
                fail(ErrorCode::Parse, at_line(path, reader.line()) + "expected 3 fields, got " +
                                           std::to_string(f.size()));
            items.push_back({f[0], f[1], f[2]});
        }
        if (!header_seen) fail(ErrorCode::Parse, path.string() + ": empty item pool file");
    }

    if (!have_declared) {
        for (const auto& item : items)
            if (std::find(declared.begin(), declared.end(), item.dimension_label) == declared.end())
                declared.push_back(item.dimension_label);
    }
    return ItemPool(std::move(items), std::move(declared));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const ItemPool& pool) {
    auto in = open_input(path);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;

    auto check_width = [&](std::size_t width, std::size_t lineno) {
        if (!rows.empty() && width != rows.front().size())
            fail(ErrorCode::RaggedRow, at_line(path, lineno) + "row has " + std::to_string(width) +
                                           " values, expected " +
                                           std::to_string(rows.front().size()));
    };

    if (is_jsonl(path)) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::vector<double> row;
            std::string id;
            try {
                auto j = nlohmann::json::parse(line);
                id = j.at("id").get<std::string>();
                for (const auto& v : j.at("embedding")) {
                    if (v.is_null())
                        row.push_back(std::numeric_limits<double>::quiet_NaN());
                    else
                        row.push_back(v.get<double>());
                }
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorCode::Parse, at_line(path, lineno) + e.what());
            }
            check_width(row.size(), lineno);
            ids.push_back(std::move(id));
            rows.push_back(std::move(row));
        }
    } else {
        csv::Reader reader(in);
        std::vector<std::string> f;
        if (!reader.next(f) || f.empty() || f[0] != "id")
            fail(ErrorCode::Parse, path.string() + ":1: expected header 'id,e0,e1,...'");
        std::size_t header_width = f.size() - 1;
        while (reader.next(f)) {
            if (f.size() == 1 && f[0].empty()) continue;
            std::vector<double> row(f.size() - 1);
            for (std::size_t c = 1; c < f.size(); ++c) {
                if (!csv::parse_double(f[c], row[c - 1]))
                    fail(ErrorCode::Parse, at_line(path, reader.line()) + "bad number '" + f[c] +
                                               "' in column " + std::to_string(c - 1));
            }
            if (row.size() != header_width)
                fail(ErrorCode::RaggedRow, at_line(path, reader.line()) + "row has " +
                                               std::to_string(row.size()) + " values, header has " +
                                               std::to_string(header_width));
            check_width(row.size(), reader.line());
            ids.push_back(f[0]);
            rows.push_back(std::move(row));
        }
    }

    std::unordered_map<std::string, std::size_t> file_index;
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (!file_index.emplace(ids[r], r).second)
            fail(ErrorCode::DuplicateItemId, path.string() + ": id '" + ids[r] + "' appears twice");
    }
    for (const auto& item : pool.items())
        if (!file_index.count(item.id))
            fail(ErrorCode::MissingId, path.string() + ": no embedding for item '" + item.id + "'");
    if (ids.size() != pool.size()) {
        for (const auto& id : ids) {
            bool known = false;
            for (const auto& item : pool.items()) known = known || item.id == id;
            if (!known)
                fail(ErrorCode::ExtraId, path.string() + ": id '" + id + "' is not in the pool");
        }
    }

    // Non-finite values are reported in file coordinates before reordering.
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            if (!std::isfinite(rows[r][c]))
                throw Error(ErrorCode::NonFiniteValue,
                            path.string() + ": non-finite value at row " + std::to_string(r) +
                                ", column " + std::to_string(c),
                            ErrorLocation{r, c});

    const std::size_t width = rows.empty() ? 0 : rows.front().size();
    if (width < 3) fail(ErrorCode::Parse, path.string() + ": embeddings need at least 3 columns");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(width));
    std::vector<std::string> ordered;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& row = rows[file_index.at(pool.items()[i].id)];
        for (std::size_t c = 0; c < width; ++c)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
        ordered.push_back(pool.items()[i].id);
    }
    return EmbeddingMatrix(std::move(values), std::move(ordered));
}

void save_embeddings_csv(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "id";
    for (std::size_t c = 0; c < m.depth(); ++c) out << ",e" << c;
    out << '\n';
    for (std::size_t r = 0; r < m.items(); ++r) {
        out << csv::quote(m.item_ids()[r]);
        for (std::size_t c = 0; c < m.depth(); ++c)
            out << ',' << csv::format_double(m.values()(static_cast<Eigen::Index>(r),
                                                        static_cast<Eigen::Index>(c)));
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void save_embeddings_jsonl(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (std::size_t r = 0; r < m.items(); ++r) {
        out << "{\"id\":" << nlohmann::json(m.item_ids()[r]).dump() << ",\"embedding\":[";
        for (std::size_t c = 0; c < m.depth(); ++c) {
            if (c) out << ',';
            const double v = m.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            // bare "-0" would read back as the integer 0
            out << (v == 0.0 && std::signbit(v) ? std::string("-0.0") : csv::format_double(v));
        }
        out << "]}\n";
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::Internal, "sha256 failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

} // namespace dynega
