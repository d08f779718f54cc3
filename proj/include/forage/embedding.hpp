#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "forage/matrix.hpp"
#include "forage/vocabulary.hpp"

namespace forage {

// Rows are item embeddings, row i = item id i. Invariants enforced by the
// loaders/validators: row count N, uniform dimension, finite entries, no
// zero-norm rows.
using EmbeddingMatrix = Matrix;

void validate_embedding_matrix(const EmbeddingMatrix& E, std::size_t expected_rows);

// JSONL, one object per item: {"id": <int>, "vector": [...]}; any line order,
// every vocabulary id exactly once. Values round-trip at full precision.
EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab);
void save_embeddings(const EmbeddingMatrix& E, const std::string& path);

struct EmbeddingServiceConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:9000/v1/embeddings"
    std::string model;
    int batch_size = 16;
    std::string api_key;   // typically from EMBED_API_KEY
    double timeout_s = 30.0;
    int max_attempts = 3;
    int retry_base_delay_ms = 250;
    int max_concurrency = 1;
    // Provider-neutral request/response field names.
    std::string request_model_field = "model";
    std::string request_input_field = "input";
    std::string response_data_field = "data";
    std::string response_embedding_field = "embedding";
};

void validate_service_config(const EmbeddingServiceConfig& cfg);

// One vector per text, in input order. Every fetched vector is cached under
// <cache_dir>/<sha256(model \x1F text)>.json; warm-cache calls do no network
// I/O (observable via network_calls).
EmbeddingMatrix fetch_embeddings(const EmbeddingServiceConfig& cfg,
                                 const std::vector<std::string>& texts,
                                 const std::string& cache_dir,
                                 std::atomic<int>* network_calls = nullptr);

std::string embedding_cache_key(const std::string& model, const std::string& text);

}  // namespace forage
