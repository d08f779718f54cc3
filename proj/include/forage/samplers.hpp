#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forage/matrix.hpp"
#include "forage/rng.hpp"
#include "forage/similarity.hpp"
#include "forage/vocabulary.hpp"

namespace forage {

enum class SamplerKind { random_walk, metropolis_hastings };
enum class ProposalKind { uniform, softmax };

SamplerKind parse_sampler_kind(const std::string& s);
ProposalKind parse_proposal_kind(const std::string& s);
std::string to_string(SamplerKind k);
std::string to_string(ProposalKind k);

struct SamplerConfig {
    double temperature = 0.027;
    int steps = 300;
    int walks = 141;
    std::uint64_t master_seed = 0;
    SamplerKind sampler = SamplerKind::random_walk;
    ProposalKind proposal = ProposalKind::softmax;
    double lambda = 0.8;   // profitability decay, (0, 1]
    double epsilon = 1e-6; // profitability floor
};

void validate_sampler_config(const SamplerConfig& cfg);

// Row-stochastic within 1e-12; diagonal exactly 0 unless a test oracle
// explicitly allows self-transitions.
using TransitionMatrix = Matrix;

void validate_transition_matrix(const TransitionMatrix& P, bool allow_diagonal = false);

// P(j|i) = exp(sim(i,j)/T) / sum_{k != i} exp(sim(i,k)/T), max-subtracted.
// include_diagonal is test-only: production chains exclude self-transitions.
TransitionMatrix softmax_transition_matrix(const SimilarityMatrix& S, double temperature,
                                           bool include_diagonal = false);

// Row-normalizes a nonnegative matrix (power-method input convenience).
TransitionMatrix row_normalize(const Matrix& M);

struct WalkTrace {
    int walk = 0;
    std::uint64_t seed = 0;
    std::vector<int> steps;
    std::vector<int> rejected;  // step indices where an MH proposal was rejected
};

// Inverse-CDF draw from row `current` over ascending item id.
int sample_row(const TransitionMatrix& P, int current, Rng& rng);

WalkTrace random_walk(const TransitionMatrix& P, int start, int steps, Rng& rng);

struct ProfitabilityModel {
    double lambda = 0.8;
    double epsilon = 1e-6;
    // base[i]: mean similarity to other items sharing >= 1 category;
    // epsilon when i is uncategorized or its categories are singletons.
    std::vector<double> base;
    // sharers[i]: ids sharing >= 1 category with i, self included when
    // categorized. Drives the incremental n_c bookkeeping inside mh_walk.
    std::vector<std::vector<int>> sharers;
};

ProfitabilityModel build_profitability_model(const SimilarityMatrix& S, const Vocabulary& vocab,
                                             double lambda, double epsilon);

// pi(i) = max(epsilon, base(i) * lambda^{n_c(i)}) with n_c recomputed from
// the unique-retrieval history; mh_walk maintains the same quantity
// incrementally and the two must agree exactly.
double profitability(int item, const std::vector<int>& unique_history,
                     const ProfitabilityModel& model, const Vocabulary& vocab);

// softmax_proposal must be non-null when cfg.proposal == softmax (built once
// by the caller so all walks share it).
WalkTrace mh_walk(const SimilarityMatrix& S, const Vocabulary& vocab, const SamplerConfig& cfg,
                  int start, Rng& rng, const TransitionMatrix* softmax_proposal = nullptr);

// Runs cfg.walks independent walks; walk w uses the RNG stream derived from
// (master_seed, w), so results are identical for any thread count.
std::vector<WalkTrace> simulate_walks(const SimilarityMatrix& S, const Vocabulary& vocab,
                                      const SamplerConfig& cfg);

struct StationaryDistribution {
    std::vector<double> probabilities;
    int iterations = 0;
    double residual = 0.0;
};

// Power method from the uniform vector with per-iterate L1 renormalization.
// A converged limit is confirmed from a deterministic one-hot start; periodic
// or start-dependent (reducible) chains raise ConvergenceError.
StationaryDistribution stationary_distribution(const TransitionMatrix& P, double tol = 1e-10,
                                               int max_iters = 100000);

// JSON Lines: {"walk": w, "seed": s, "steps": [...], "rejected": [...]}.
void save_traces(const std::vector<WalkTrace>& traces, const std::string& path);
std::vector<WalkTrace> load_traces(const std::string& path);

namespace reference {
// Serial baseline kept for equivalence tests and benchmarks.
TransitionMatrix softmax_transition_matrix(const SimilarityMatrix& S, double temperature,
                                           bool include_diagonal = false);
std::vector<WalkTrace> simulate_walks(const SimilarityMatrix& S, const Vocabulary& vocab,
                                      const SamplerConfig& cfg);
}  // namespace reference

}  // namespace forage
