// Parallel kernels vs their serial reference implementations at the
// toolkit's headline scale (550 items).
#include <benchmark/benchmark.h>

#include "forage/projection.hpp"
#include "forage/rng.hpp"
#include "forage/samplers.hpp"
#include "forage/similarity.hpp"

namespace {

using namespace forage;

const EmbeddingMatrix& embeddings_550() {
    static const EmbeddingMatrix E = [] {
        EmbeddingMatrix M(550, 64);
        Rng rng(7);
        for (std::size_t i = 0; i < M.rows(); ++i)
            for (std::size_t j = 0; j < M.cols(); ++j) M(i, j) = rng.normal();
        return M;
    }();
    return E;
}

const SimilarityMatrix& similarity_550() {
    static const SimilarityMatrix S = cosine_similarity_matrix(embeddings_550());
    return S;
}

struct TsneInputs {
    Matrix P;
    Matrix Y;
};

const TsneInputs& tsne_inputs_550() {
    static const TsneInputs in = [] {
        TsneInputs t;
        const Matrix D = pairwise_distances(embeddings_550(), false);
        t.P = symmetrized_affinities(perplexity_calibration(D, 30.0).conditional);
        t.Y = Matrix(550, 2);
        Rng rng(11);
        for (std::size_t i = 0; i < 550; ++i) {
            t.Y(i, 0) = rng.normal();
            t.Y(i, 1) = rng.normal();
        }
        return t;
    }();
    return in;
}

// One category per 55 items so simulate_walks exercises the category
// bookkeeping without degenerating into a single patch.
const Vocabulary& vocabulary_550() {
    static const Vocabulary v = [] {
        Vocabulary vocab;
        for (int i = 0; i < 550; ++i) {
            const int cat = vocab.scheme.add_or_get("cat" + std::to_string(i / 55));
            vocab.items.push_back({i, "item" + std::to_string(i), std::nullopt, {cat}});
        }
        return vocab;
    }();
    return v;
}

void BM_CosineSimilarity(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity_matrix(embeddings_550()));
}
BENCHMARK(BM_CosineSimilarity);

void BM_CosineSimilarityReference(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::cosine_similarity_matrix(embeddings_550()));
}
BENCHMARK(BM_CosineSimilarityReference);

void BM_SoftmaxTransition(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(softmax_transition_matrix(similarity_550(), 0.027));
}
BENCHMARK(BM_SoftmaxTransition);

void BM_SoftmaxTransitionReference(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(
            reference::softmax_transition_matrix(similarity_550(), 0.027));
}
BENCHMARK(BM_SoftmaxTransitionReference);

void BM_TsneGradient(benchmark::State& state) {
    const auto& in = tsne_inputs_550();
    for (auto _ : state) benchmark::DoNotOptimize(tsne_gradient(in.P, in.Y));
}
BENCHMARK(BM_TsneGradient);

void BM_TsneGradientReference(benchmark::State& state) {
    const auto& in = tsne_inputs_550();
    for (auto _ : state) benchmark::DoNotOptimize(reference::tsne_gradient(in.P, in.Y));
}
BENCHMARK(BM_TsneGradientReference);

SamplerConfig walk_config() {
    SamplerConfig cfg;
    cfg.walks = 32;
    cfg.steps = 300;
    cfg.master_seed = 5;
    return cfg;
}

void BM_SimulateWalks(benchmark::State& state) {
    const auto cfg = walk_config();
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_walks(similarity_550(), vocabulary_550(), cfg));
}
BENCHMARK(BM_SimulateWalks);

void BM_SimulateWalksReference(benchmark::State& state) {
    const auto cfg = walk_config();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            reference::simulate_walks(similarity_550(), vocabulary_550(), cfg));
}
BENCHMARK(BM_SimulateWalksReference);

}  // namespace

BENCHMARK_MAIN();
