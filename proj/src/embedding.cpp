#include "forage/embedding.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "forage/errors.hpp"
#include "forage/hash.hpp"

namespace forage {

using nlohmann::json;

void validate_embedding_matrix(const EmbeddingMatrix& E, std::size_t expected_rows) {
    if (E.rows() != expected_rows)
        throw ValidationError("embeddings: have " + std::to_string(E.rows()) +
                              " rows, vocabulary has " + std::to_string(expected_rows));
    if (E.cols() == 0) throw ValidationError("embeddings: zero dimension");
    for (std::size_t i = 0; i < E.rows(); ++i) {
        double norm_sq = 0.0;
        for (std::size_t d = 0; d < E.cols(); ++d) {
            const double v = E(i, d);
            if (!std::isfinite(v))
                throw ValidationError("embeddings: non-finite entry at id " + std::to_string(i));
            norm_sq += v * v;
        }
        if (std::sqrt(norm_sq) <= 1e-12)
            throw ValidationError("embeddings: zero-norm vector at id " + std::to_string(i));
    }
}

EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("embeddings: cannot open " + path);

    const std::size_t n = vocab.size();
    std::vector<std::vector<double>> rows(n);
    std::vector<bool> seen(n, false);
    std::string line;
    std::size_t lineno = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("embeddings: line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.contains("id") || !obj.contains("vector"))
            throw ValidationError("embeddings: line " + std::to_string(lineno) +
                                  " missing 'id' or 'vector'");
        const long long id = obj["id"].get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= n)
            throw ValidationError("embeddings: id " + std::to_string(id) +
                                  " outside vocabulary range 0.." + std::to_string(n - 1));
        if (seen[static_cast<std::size_t>(id)])
            throw ValidationError("embeddings: duplicate id " + std::to_string(id));
        seen[static_cast<std::size_t>(id)] = true;
        auto& vec = rows[static_cast<std::size_t>(id)];
        if (!obj["vector"].is_array())
            throw ValidationError("embeddings: id " + std::to_string(id) + " vector not an array");
        for (const auto& v : obj["vector"]) {
            if (!v.is_number())
                throw ValidationError("embeddings: id " + std::to_string(id) +
                                      " has a non-numeric component");
            vec.push_back(v.get<double>());
        }
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim)
            throw ValidationError("embeddings: id " + std::to_string(id) + " has dimension " +
                                  std::to_string(vec.size()) + ", expected " +
                                  std::to_string(dim));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i])
            throw ValidationError("embeddings: missing id " + std::to_string(i) + " (item '" +
                                  vocab.items[i].name + "')");
    }

    EmbeddingMatrix E(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) E(i, d) = rows[i][d];
    validate_embedding_matrix(E, n);
    return E;
}

void save_embeddings(const EmbeddingMatrix& E, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("embeddings: cannot write " + path);
    for (std::size_t i = 0; i < E.rows(); ++i) {
        json obj;
        obj["id"] = i;
        json vec = json::array();
        for (std::size_t d = 0; d < E.cols(); ++d) vec.push_back(E(i, d));
        obj["vector"] = std::move(vec);
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("embeddings: write failed for " + path);
}

std::string embedding_cache_key(const std::string& model, const std::string& text) {
    return sha256_hex(model + '\x1F' + text);
}

}  // namespace forage
