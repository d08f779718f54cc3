#include "forage/similarity.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <vector>

#include "forage/csv.hpp"
#include "forage/errors.hpp"

namespace forage {

void validate_similarity_matrix(const SimilarityMatrix& S) {
    const std::size_t n = S.rows();
    if (n == 0 || S.cols() != n) throw ValidationError("similarity matrix must be square and nonempty");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(S(i, i) - 1.0) > 1e-12) {
            throw ValidationError("similarity diagonal entry " + std::to_string(i) + " is not 1");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = S(i, j);
            if (!std::isfinite(v) || v < -1.0 - 1e-12 || v > 1.0 + 1e-12) {
                throw ValidationError("similarity entry out of [-1, 1]: S(" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")");
            }
            if (std::abs(v - S(j, i)) > 1e-12) {
                throw ValidationError("similarity matrix not symmetric at (" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")");
            }
        }
    }
}

namespace {

std::vector<double> inverse_norms(const EmbeddingMatrix& E) {
    const std::size_t n = E.rows();
    const std::size_t d = E.cols();
    std::vector<double> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double nrm = std::sqrt(dot(E.row(i), E.row(i), d));
        if (!(nrm > 1e-12)) {
            throw ValidationError("zero-norm embedding row " + std::to_string(i));
        }
        inv[i] = 1.0 / nrm;
    }
    return inv;
}

}  // namespace

SimilarityMatrix cosine_similarity_matrix(const EmbeddingMatrix& E) {
    const std::size_t n = E.rows();
    const std::size_t d = E.cols();
    if (n == 0 || d == 0) throw ValidationError("embedding matrix must be nonempty");
    const std::vector<double> inv = inverse_norms(E);
    SimilarityMatrix S(n, n);
    // Each unordered pair is written by exactly one iteration; cells are
    // disjoint across iterations, so the parallel fill is race-free and
    // bitwise equal to the serial reference.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        S(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = dot(E.row(i), E.row(j), d) * inv[i] * inv[j];
            S(i, j) = v;
            S(j, i) = v;
        }
    }
    return S;
}

namespace reference {

SimilarityMatrix cosine_similarity_matrix(const EmbeddingMatrix& E) {
    const std::size_t n = E.rows();
    const std::size_t d = E.cols();
    if (n == 0 || d == 0) throw ValidationError("embedding matrix must be nonempty");
    const std::vector<double> inv = inverse_norms(E);
    SimilarityMatrix S(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        S(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = dot(E.row(i), E.row(j), d) * inv[i] * inv[j];
            S(i, j) = v;
            S(j, i) = v;
        }
    }
    return S;
}

}  // namespace reference

Matrix additive_category_matrix(const SimilarityMatrix& S, const Vocabulary& vocab,
                                const std::set<int>& subset) {
    const std::size_t n = S.rows();
    if (vocab.items.size() != n) {
        throw ValidationError("vocabulary size does not match similarity matrix");
    }
    if (subset.empty()) throw ValidationError("category subset must be nonempty");
    for (int c : subset) {
        if (c < 0 || static_cast<std::size_t>(c) >= vocab.scheme.size()) {
            throw ValidationError("unknown category id in subset: " + std::to_string(c));
        }
    }
    // Per-item membership restricted to the subset, precomputed once.
    std::vector<std::set<int>> member(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c : vocab.items[i].categories) {
            if (subset.count(c)) member[i].insert(c);
        }
    }
    Matrix A(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            int shared = 0;
            for (int c : member[i]) {
                if (member[j].count(c)) ++shared;
            }
            A(i, j) = S(i, j) * shared;
        }
    }
    return A;
}

void export_matrix_csv(const Matrix& M, const Vocabulary& vocab, const std::string& path) {
    const std::size_t n = M.rows();
    if (M.cols() != n || vocab.items.size() != n) {
        throw ValidationError("matrix dimensions do not match vocabulary for CSV export");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open matrix CSV for writing: " + path);
    std::vector<std::string> header;
    header.reserve(n + 1);
    header.emplace_back("name");
    for (const auto& item : vocab.items) header.push_back(item.name);
    csv::write_row(out, header);
    std::vector<std::string> row(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        row[0] = vocab.items[i].name;
        for (std::size_t j = 0; j < n; ++j) row[j + 1] = csv::format_double(M(i, j));
        csv::write_row(out, row);
    }
    if (!out) throw IoError("short write to matrix CSV: " + path);
}

Matrix import_matrix_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.size() < 2) throw ValidationError("matrix CSV has no data rows: " + path);
    const std::size_t n = rows.size() - 1;
    Matrix M(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i + 1];
        if (r.size() != n + 1) {
            throw ValidationError("matrix CSV row " + std::to_string(i + 2) + " has " +
                                  std::to_string(r.size()) + " fields, expected " +
                                  std::to_string(n + 1));
        }
        for (std::size_t j = 0; j < n; ++j) M(i, j) = csv::parse_double(r[j + 1]);
    }
    return M;
}

}  // namespace forage
