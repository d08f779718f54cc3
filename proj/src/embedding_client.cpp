#include "forage/embedding.hpp"

#include "forage/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace forage {

namespace fs = std::filesystem;
using nlohmann::json;

void validate_service_config(const EmbeddingServiceConfig& cfg) {
    if (cfg.endpoint.empty() ||
        (cfg.endpoint.rfind("http://", 0) != 0 && cfg.endpoint.rfind("https://", 0) != 0)) {
        throw ValidationError("embedding service endpoint must start with http:// or https://");
    }
    if (cfg.model.empty()) throw ValidationError("embedding service model must be nonempty");
    if (cfg.batch_size < 1) throw ValidationError("embedding service batch_size must be >= 1");
    if (cfg.timeout_s <= 0) throw ValidationError("embedding service timeout must be positive");
    if (cfg.max_attempts < 1) throw ValidationError("embedding service max_attempts must be >= 1");
    if (cfg.retry_base_delay_ms < 0) throw ValidationError("embedding service retry delay must be >= 0");
    if (cfg.max_concurrency < 1) throw ValidationError("embedding service max_concurrency must be >= 1");
}

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading '/'
};

SplitUrl split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto slash = endpoint.find('/', scheme_end + 3);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

std::optional<std::vector<double>> read_cached_vector(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        return std::nullopt;  // corrupt cache entry: treat as a miss and refetch
    }
    if (!j.is_array() || j.empty()) return std::nullopt;
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) return std::nullopt;
        v.push_back(x.get<double>());
    }
    return v;
}

void write_cached_vector(const fs::path& file, const std::vector<double>& v, int tag) {
    json j = v;
    fs::path tmp = file;
    tmp += ".tmp" + std::to_string(tag);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write embedding cache file: " + tmp.string());
        out << j.dump();
        if (!out) throw IoError("short write to embedding cache file: " + tmp.string());
    }
    fs::rename(tmp, file);  // atomic publish within the cache directory
}

std::vector<std::vector<double>> post_batch(const EmbeddingServiceConfig& cfg,
                                            const SplitUrl& url,
                                            const std::vector<std::string>& batch,
                                            std::atomic<int>* network_calls) {
    httplib::Client cli(url.base);
    cli.set_connection_timeout(cfg.timeout_s, 0);
    cli.set_read_timeout(cfg.timeout_s, 0);
    cli.set_write_timeout(cfg.timeout_s, 0);

    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

    json body;
    body[cfg.request_model_field] = cfg.model;
    body[cfg.request_input_field] = batch;
    const std::string payload = body.dump();

    std::string last_error;
    std::string response_body;
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = cfg.retry_base_delay_ms * (1LL << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        if (network_calls) network_calls->fetch_add(1, std::memory_order_relaxed);
        auto res = cli.Post(url.path, headers, payload, "application/json");
        if (res && res->status == 200) {
            response_body = res->body;
            ok = true;
            break;
        }
        if (res) {
            last_error = "HTTP status " + std::to_string(res->status);
        } else {
            last_error = "transport error: " + httplib::to_string(res.error());
        }
    }
    if (!ok) {
        throw IoError("embedding service request failed after " + std::to_string(cfg.max_attempts) +
                      " attempt(s): " + last_error);
    }

    json jr;
    try {
        jr = json::parse(response_body);
    } catch (const json::exception& e) {
        throw IoError(std::string("embedding service returned malformed JSON: ") + e.what());
    }
    if (!jr.contains(cfg.response_data_field) || !jr[cfg.response_data_field].is_array()) {
        throw IoError("embedding service response missing array field '" + cfg.response_data_field + "'");
    }
    const auto& data = jr[cfg.response_data_field];
    if (data.size() != batch.size()) {
        throw IoError("embedding service returned " + std::to_string(data.size()) +
                      " vectors for a batch of " + std::to_string(batch.size()));
    }
    std::vector<std::vector<double>> out;
    out.reserve(data.size());
    for (const auto& entry : data) {
        if (!entry.contains(cfg.response_embedding_field) ||
            !entry[cfg.response_embedding_field].is_array()) {
            throw IoError("embedding service response entry missing array field '" +
                          cfg.response_embedding_field + "'");
        }
        std::vector<double> v;
        const auto& arr = entry[cfg.response_embedding_field];
        v.reserve(arr.size());
        for (const auto& x : arr) {
            if (!x.is_number()) throw IoError("embedding service returned a non-numeric component");
            v.push_back(x.get<double>());
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

EmbeddingMatrix fetch_embeddings(const EmbeddingServiceConfig& cfg,
                                 const std::vector<std::string>& texts,
                                 const std::string& cache_dir,
                                 std::atomic<int>* network_calls) {
    validate_service_config(cfg);
    if (texts.empty()) throw ValidationError("fetch_embeddings requires at least one text");

    const bool use_cache = !cache_dir.empty();
    fs::path cache_root(cache_dir);
    if (use_cache) fs::create_directories(cache_root);

    const std::size_t n = texts.size();
    std::vector<std::vector<double>> results(n);
    std::vector<bool> have(n, false);
    std::vector<fs::path> cache_files(n);

    if (use_cache) {
        for (std::size_t i = 0; i < n; ++i) {
            cache_files[i] = cache_root / (embedding_cache_key(cfg.model, texts[i]) + ".json");
            if (auto v = read_cached_vector(cache_files[i])) {
                results[i] = std::move(*v);
                have[i] = true;
            }
        }
    }

    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < n; ++i) {
        if (!have[i]) misses.push_back(i);
    }

    if (!misses.empty()) {
        const SplitUrl url = split_endpoint(cfg.endpoint);
        std::vector<std::vector<std::size_t>> batches;
        for (std::size_t pos = 0; pos < misses.size(); pos += static_cast<std::size_t>(cfg.batch_size)) {
            const auto end = std::min(misses.size(), pos + static_cast<std::size_t>(cfg.batch_size));
            batches.emplace_back(misses.begin() + static_cast<std::ptrdiff_t>(pos),
                                 misses.begin() + static_cast<std::ptrdiff_t>(end));
        }

        std::vector<std::exception_ptr> batch_errors(batches.size());
        auto run_batch = [&](std::size_t b) {
            try {
                std::vector<std::string> batch_texts;
                batch_texts.reserve(batches[b].size());
                for (auto idx : batches[b]) batch_texts.push_back(texts[idx]);
                auto vectors = post_batch(cfg, url, batch_texts, network_calls);
                for (std::size_t k = 0; k < batches[b].size(); ++k) {
                    const auto idx = batches[b][k];
                    results[idx] = std::move(vectors[k]);
                    have[idx] = true;
                    if (use_cache) {
                        write_cached_vector(cache_files[idx], results[idx], static_cast<int>(b));
                    }
                }
            } catch (...) {
                batch_errors[b] = std::current_exception();
            }
        };

        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.max_concurrency), batches.size());
        if (workers <= 1) {
            for (std::size_t b = 0; b < batches.size(); ++b) run_batch(b);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&]() {
                    for (;;) {
                        const auto b = next.fetch_add(1);
                        if (b >= batches.size()) return;
                        run_batch(b);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }
        for (auto& err : batch_errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    const std::size_t dim = results[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i].size() != dim) {
            throw ValidationError("embedding dimension mismatch: text " + std::to_string(i) +
                                  " has " + std::to_string(results[i].size()) + " components, expected " +
                                  std::to_string(dim));
        }
    }
    EmbeddingMatrix E(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) E(i, d) = results[i][d];
    }
    validate_embedding_matrix(E, n);
    return E;
}

}  // namespace forage
