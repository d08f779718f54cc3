#pragma once

#include <set>
#include <string>

#include "forage/embedding.hpp"
#include "forage/matrix.hpp"
#include "forage/vocabulary.hpp"

namespace forage {

// Symmetric N x N cosine matrix: diagonal exactly 1, entries in
// [-1 - 1e-12, 1 + 1e-12], row/column order = item id order.
using SimilarityMatrix = Matrix;

void validate_similarity_matrix(const SimilarityMatrix& S);

// Parallel by row; bitwise identical to reference::cosine_similarity_matrix.
SimilarityMatrix cosine_similarity_matrix(const EmbeddingMatrix& E);

// A[i][j] = S[i][j] * |shared categories of i and j within subset|.
Matrix additive_category_matrix(const SimilarityMatrix& S, const Vocabulary& vocab,
                                const std::set<int>& subset);

// Header row of item names, one labeled row per item, round-trip precision.
void export_matrix_csv(const Matrix& M, const Vocabulary& vocab, const std::string& path);
Matrix import_matrix_csv(const std::string& path);

namespace reference {
// Serial baseline kept for equivalence tests and benchmarks.
SimilarityMatrix cosine_similarity_matrix(const EmbeddingMatrix& E);
}  // namespace reference

}  // namespace forage
