#pragma once

#include <cstdint>
#include <vector>

#include "forage/embedding.hpp"
#include "forage/matrix.hpp"

namespace forage {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
    double exaggeration_factor = 12.0;
    int exaggeration_duration = 250;
    std::uint64_t seed = 0;
    bool cosine_distance = false;  // default: squared Euclidean on raw rows
};

void validate_tsne_config(const TsneConfig& cfg, std::size_t n);

struct ProjectedPoints {
    Matrix coords;  // N x 2
    double kl = 0.0;
    std::vector<double> kl_trace;  // KL(P_true || Q) per iteration
};

// Squared Euclidean by default; with cosine = true, d^2(i,j) = 1 - cos(i,j).
Matrix pairwise_distances(const EmbeddingMatrix& E, bool cosine);

struct PerplexityCalibration {
    std::vector<double> sigma;
    Matrix conditional;  // p_{j|i}, rows sum to 1, zero diagonal
};

// Per-point bisection on beta = 1/(2 sigma^2) until the conditional entropy
// matches log2(perplexity) bits within 1e-5 (max 50 steps).
PerplexityCalibration perplexity_calibration(const Matrix& distances, double perplexity);

// P = (p_{j|i} + p_{i|j}) / (2N); symmetric, nonnegative, sums to 1.
Matrix symmetrized_affinities(const Matrix& conditional);

// KL(P || Q(Y)) with Q floored at 1e-12 inside the log only.
double tsne_kl(const Matrix& P, const Matrix& Y);

// Analytic gradient of KL(P_eff || Q(Y)): 4 * sum_j (p - q) qnum (y_i - y_j).
// Row-parallel with fixed-order reductions: bitwise equal to the reference.
Matrix tsne_gradient(const Matrix& P_eff, const Matrix& Y);

ProjectedPoints tsne(const EmbeddingMatrix& E, const TsneConfig& cfg);

namespace reference {
// Serial baseline kept for equivalence tests and benchmarks.
Matrix tsne_gradient(const Matrix& P_eff, const Matrix& Y);
}  // namespace reference

}  // namespace forage
