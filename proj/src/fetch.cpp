#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "dynega/error.hpp"
#include "dynega/ingest.hpp"

// after Eigen: resolv.h, pulled in by httplib, defines a `_res` macro
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

namespace dynega {

namespace {

struct EndpointParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path prefix without trailing slash
};

EndpointParts split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        fail(ErrorCode::InvalidArgument, "endpoint must include a scheme: '" + endpoint + "'");
    auto path_start = endpoint.find('/', scheme_end + 3);
    EndpointParts parts;
    parts.origin = endpoint.substr(0, path_start);
    parts.path = path_start == std::string::npos ? "" : endpoint.substr(path_start);
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
    return parts;
}

std::string cache_key(const FetchConfig& cfg, const std::string& text) {
    return sha256_hex(cfg.endpoint + "\n" + cfg.model + "\n" + sha256_hex(text));
}

std::optional<std::vector<double>> read_cache(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(in);
        return j.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // corrupt entry is refetched
    }
}

void write_cache(const std::filesystem::path& file, const std::vector<double>& v) {
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write cache entry " + tmp.string());
        out << nlohmann::json{{"embedding", v}}.dump();
    }
    std::filesystem::rename(tmp, file);
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t limit = 200;
    return body.size() <= limit ? body : body.substr(0, limit) + "...";
}

bool retryable(int status) { return status == 429 || status >= 500; }

} // namespace

EmbeddingMatrix fetch_embeddings(const FetchConfig& cfg, const ItemPool& pool, FetchStats* stats) {
    if (cfg.api_key.empty()) fail(ErrorCode::InvalidArgument, "API key is empty");
    if (cfg.model.empty()) fail(ErrorCode::InvalidArgument, "model name is empty");
    if (cfg.batch_size == 0 || cfg.max_attempts < 1)
        fail(ErrorCode::InvalidArgument, "batch size and attempt count must be positive");

    FetchStats local;
    FetchStats& st = stats ? *stats : local;
    st = FetchStats{};
    auto log = [&](const std::string& msg) {
        if (cfg.log) cfg.log(msg);
    };

    const std::size_t p = pool.size();
    std::vector<std::optional<std::vector<double>>> vectors(p);
    std::vector<std::filesystem::path> cache_files(p);
    if (!cfg.cache_dir.empty()) {
        std::filesystem::create_directories(cfg.cache_dir);
        for (std::size_t i = 0; i < p; ++i) {
            cache_files[i] = cfg.cache_dir / (cache_key(cfg, pool.items()[i].text) + ".json");
            vectors[i] = read_cache(cache_files[i]);
            if (vectors[i]) ++st.cache_hits;
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < p; ++i)
        if (!vectors[i]) pending.push_back(i);

    if (!pending.empty()) {
        auto parts = split_endpoint(cfg.endpoint);
        httplib::Client client(parts.origin);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        client.set_write_timeout(cfg.timeout_seconds, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + cfg.api_key}};
        const std::string url = parts.path + "/embeddings";

        for (std::size_t start = 0; start < pending.size(); start += cfg.batch_size) {
            std::size_t end = std::min(pending.size(), start + cfg.batch_size);
            nlohmann::json body;
            body["model"] = cfg.model;
            body["input"] = nlohmann::json::array();
            for (std::size_t b = start; b < end; ++b)
                body["input"].push_back(pool.items()[pending[b]].text);
            const std::string payload = body.dump();

            std::string response_body;
            int delay_ms = cfg.backoff_initial_ms;
            for (int attempt = 1;; ++attempt) {
                ++st.requests;
                auto res = client.Post(url, headers, payload, "application/json");
                if (res && res->status == 200) {
                    response_body = res->body;
                    break;
                }
                std::string what = res ? "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body)
                                       : "transport error: " + httplib::to_string(res.error());
                if (res && !retryable(res->status))
                    fail(ErrorCode::Http, "embeddings request failed with " + what);
                if (attempt >= cfg.max_attempts)
                    fail(ErrorCode::RetryExhausted, "embeddings request failed after " +
                                                        std::to_string(attempt) +
                                                        " attempts; last " + what);
                ++st.retries;
                log("retry " + std::to_string(attempt) + " after " + what + "; waiting " +
                    std::to_string(delay_ms) + " ms");
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms = std::min(cfg.backoff_max_ms, delay_ms * 2);
            }

            nlohmann::json reply;
            try {
                reply = nlohmann::json::parse(response_body);
                const auto& data = reply.at("data");
                if (data.size() != end - start)
                    fail(ErrorCode::Http, "embeddings response has " + std::to_string(data.size()) +
                                              " entries for " + std::to_string(end - start) +
                                              " inputs");
                for (std::size_t d = 0; d < data.size(); ++d) {
                    std::size_t slot = data[d].contains("index") ? data[d]["index"].get<std::size_t>() : d;
                    if (slot >= end - start) fail(ErrorCode::Http, "embeddings response index out of range");
                    vectors[pending[start + slot]] = data[d].at("embedding").get<std::vector<double>>();
                }
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorCode::Http, std::string("malformed embeddings response: ") + e.what());
            }
            log("fetched batch of " + std::to_string(end - start) + " items");
        }
    }

    const std::size_t width = vectors.empty() || !vectors[0] ? 0 : vectors[0]->size();
    for (std::size_t i = 0; i < p; ++i) {
        if (!vectors[i]) fail(ErrorCode::Http, "no embedding returned for item '" + pool.items()[i].id + "'");
        if (vectors[i]->size() != width)
            fail(ErrorCode::InconsistentDimension,
                 "item '" + pool.items()[i].id + "' has " + std::to_string(vectors[i]->size()) +
                     "-wide embedding, expected " + std::to_string(width));
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(width));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t c = 0; c < width; ++c)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = (*vectors[i])[c];
        ids.push_back(pool.items()[i].id);
    }
    EmbeddingMatrix result(std::move(values), std::move(ids));

    // Cache only after the whole pool validated, so a bad batch never persists.
    if (!cfg.cache_dir.empty())
        for (std::size_t i = 0; i < p; ++i)
            if (!std::filesystem::exists(cache_files[i])) write_cache(cache_files[i], *vectors[i]);
    return result;
}

} // namespace dynega
