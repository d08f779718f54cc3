#include "forage/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forage/errors.hpp"

namespace forage {

using nlohmann::json;

SamplerKind parse_sampler_kind(const std::string& s) {
    if (s == "random_walk") return SamplerKind::random_walk;
    if (s == "metropolis_hastings") return SamplerKind::metropolis_hastings;
    throw ValidationError("unknown sampler kind: '" + s +
                          "' (expected random_walk or metropolis_hastings)");
}

ProposalKind parse_proposal_kind(const std::string& s) {
    if (s == "uniform") return ProposalKind::uniform;
    if (s == "softmax") return ProposalKind::softmax;
    throw ValidationError("unknown proposal kind: '" + s + "' (expected uniform or softmax)");
}

std::string to_string(SamplerKind k) {
    return k == SamplerKind::random_walk ? "random_walk" : "metropolis_hastings";
}

std::string to_string(ProposalKind k) {
    return k == ProposalKind::uniform ? "uniform" : "softmax";
}

void validate_sampler_config(const SamplerConfig& cfg) {
    if (!(cfg.temperature > 0.0)) throw ValidationError("temperature must be positive");
    if (cfg.steps < 2) throw ValidationError("steps must be >= 2");
    if (cfg.walks < 1) throw ValidationError("walks must be >= 1");
    if (!(cfg.lambda > 0.0) || cfg.lambda > 1.0) throw ValidationError("lambda must be in (0, 1]");
    if (!(cfg.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
}

void validate_transition_matrix(const TransitionMatrix& P, bool allow_diagonal) {
    const std::size_t n = P.rows();
    if (n == 0 || P.cols() != n) throw ValidationError("transition matrix must be square and nonempty");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = P(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("transition entry negative or non-finite at (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw ValidationError("transition row " + std::to_string(i) + " sums to " +
                                  std::to_string(sum) + ", expected 1");
        }
        if (!allow_diagonal && P(i, i) != 0.0) {
            throw ValidationError("transition diagonal must be exactly 0 at row " + std::to_string(i));
        }
    }
}

namespace {

void softmax_row(const SimilarityMatrix& S, double temperature, bool include_diagonal,
                 std::size_t i, TransitionMatrix& P) {
    const std::size_t n = S.rows();
    double m = -HUGE_VAL;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i && !include_diagonal) continue;
        m = std::max(m, S(i, j));
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i && !include_diagonal) {
            P(i, j) = 0.0;
            continue;
        }
        const double e = std::exp((S(i, j) - m) / temperature);
        P(i, j) = e;
        denom += e;
    }
    for (std::size_t j = 0; j < n; ++j) P(i, j) /= denom;
    if (!include_diagonal) P(i, i) = 0.0;
}

}  // namespace

TransitionMatrix softmax_transition_matrix(const SimilarityMatrix& S, double temperature,
                                           bool include_diagonal) {
    if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
    const std::size_t n = S.rows();
    if (n < 2 || S.cols() != n) {
        throw ValidationError("softmax transition requires a square similarity matrix with N >= 2");
    }
    TransitionMatrix P(n, n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        softmax_row(S, temperature, include_diagonal, static_cast<std::size_t>(ii), P);
    }
    return P;
}

namespace reference {

TransitionMatrix softmax_transition_matrix(const SimilarityMatrix& S, double temperature,
                                           bool include_diagonal) {
    if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
    const std::size_t n = S.rows();
    if (n < 2 || S.cols() != n) {
        throw ValidationError("softmax transition requires a square similarity matrix with N >= 2");
    }
    TransitionMatrix P(n, n);
    for (std::size_t i = 0; i < n; ++i) softmax_row(S, temperature, include_diagonal, i, P);
    return P;
}

}  // namespace reference

TransitionMatrix row_normalize(const Matrix& M) {
    const std::size_t n = M.rows();
    if (n == 0 || M.cols() != n) throw ValidationError("row_normalize requires a square matrix");
    TransitionMatrix P(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = M(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("row_normalize requires nonnegative finite entries");
            }
            sum += v;
        }
        if (!(sum > 0.0)) throw ValidationError("row_normalize: row " + std::to_string(i) + " is all zero");
        for (std::size_t j = 0; j < n; ++j) P(i, j) = M(i, j) / sum;
    }
    return P;
}

int sample_row(const TransitionMatrix& P, int current, Rng& rng) {
    const std::size_t n = P.cols();
    const double u = rng.uniform01();
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = P(static_cast<std::size_t>(current), j);
        if (p > 0.0) last_positive = static_cast<int>(j);
        cum += p;
        if (u < cum) return static_cast<int>(j);
    }
    // Rounding left cum marginally below 1: the draw belongs to the last
    // positive-mass cell.
    if (last_positive < 0) {
        throw NumericError("transition row " + std::to_string(current) + " has no positive mass");
    }
    return last_positive;
}

WalkTrace random_walk(const TransitionMatrix& P, int start, int steps, Rng& rng) {
    if (steps < 1) throw ValidationError("random_walk requires steps >= 1");
    if (start < 0 || static_cast<std::size_t>(start) >= P.rows()) {
        throw ValidationError("random_walk start item out of range");
    }
    WalkTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(steps));
    int current = start;
    trace.steps.push_back(current);
    for (int t = 1; t < steps; ++t) {
        current = sample_row(P, current, rng);
        trace.steps.push_back(current);
    }
    return trace;
}

ProfitabilityModel build_profitability_model(const SimilarityMatrix& S, const Vocabulary& vocab,
                                             double lambda, double epsilon) {
    if (!(lambda > 0.0) || lambda > 1.0) throw ValidationError("lambda must be in (0, 1]");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    const std::size_t n = vocab.size();
    if (S.rows() != n) throw ValidationError("similarity matrix does not match vocabulary");
    ProfitabilityModel model;
    model.lambda = lambda;
    model.epsilon = epsilon;
    model.base.assign(n, epsilon);
    model.sharers.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        int peers = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!vocab.shares_category(static_cast<int>(i), static_cast<int>(j))) continue;
            model.sharers[i].push_back(static_cast<int>(j));
            if (j != i) {
                sum += S(i, j);
                ++peers;
            }
        }
        if (peers > 0) model.base[i] = sum / peers;
    }
    return model;
}

double profitability(int item, const std::vector<int>& unique_history,
                     const ProfitabilityModel& model, const Vocabulary& vocab) {
    if (item < 0 || static_cast<std::size_t>(item) >= model.base.size()) {
        throw ValidationError("profitability item id out of range");
    }
    int n_c = 0;
    for (int u : unique_history) {
        if (vocab.shares_category(item, u)) ++n_c;
    }
    const double pi = model.base[static_cast<std::size_t>(item)] * std::pow(model.lambda, n_c);
    return std::max(model.epsilon, pi);
}

namespace {

struct MhState {
    std::vector<int> n_c;        // retrieved uniques sharing >= 1 category, per item
    std::vector<bool> retrieved;

    explicit MhState(std::size_t n) : n_c(n, 0), retrieved(n, false) {}

    void retrieve(int item, const ProfitabilityModel& model) {
        if (retrieved[static_cast<std::size_t>(item)]) return;
        retrieved[static_cast<std::size_t>(item)] = true;
        for (int k : model.sharers[static_cast<std::size_t>(item)]) {
            ++n_c[static_cast<std::size_t>(k)];
        }
    }

    double pi(int item, const ProfitabilityModel& model) const {
        const auto i = static_cast<std::size_t>(item);
        return std::max(model.epsilon, model.base[i] * std::pow(model.lambda, n_c[i]));
    }
};

}  // namespace

WalkTrace mh_walk(const SimilarityMatrix& S, const Vocabulary& vocab, const SamplerConfig& cfg,
                  int start, Rng& rng, const TransitionMatrix* softmax_proposal) {
    validate_sampler_config(cfg);
    const std::size_t n = vocab.size();
    if (n < 2) throw ValidationError("mh_walk requires at least 2 items");
    if (start < 0 || static_cast<std::size_t>(start) >= n) {
        throw ValidationError("mh_walk start item out of range");
    }
    if (cfg.proposal == ProposalKind::softmax && softmax_proposal == nullptr) {
        throw ValidationError("mh_walk with softmax proposal requires the proposal matrix");
    }

    const ProfitabilityModel model =
        build_profitability_model(S, vocab, cfg.lambda, cfg.epsilon);
    MhState state(n);

    WalkTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(cfg.steps));
    int current = start;
    trace.steps.push_back(current);
    state.retrieve(current, model);

    for (int t = 1; t < cfg.steps; ++t) {
        int proposed;
        double q_forward;   // q(j|i)
        double q_backward;  // q(i|j)
        if (cfg.proposal == ProposalKind::uniform) {
            const auto r = static_cast<int>(rng.uniform_int(n - 1));
            proposed = r < current ? r : r + 1;
            q_forward = q_backward = 1.0 / static_cast<double>(n - 1);
        } else {
            proposed = sample_row(*softmax_proposal, current, rng);
            q_forward = (*softmax_proposal)(static_cast<std::size_t>(current),
                                            static_cast<std::size_t>(proposed));
            q_backward = (*softmax_proposal)(static_cast<std::size_t>(proposed),
                                             static_cast<std::size_t>(current));
        }
        const double acceptance =
            std::min(1.0, state.pi(proposed, model) * q_backward /
                              (state.pi(current, model) * q_forward));
        const double u = rng.uniform01();
        if (u < acceptance) {
            current = proposed;
            trace.steps.push_back(current);
            state.retrieve(current, model);
        } else {
            trace.steps.push_back(current);
            trace.rejected.push_back(t);
        }
    }
    return trace;
}

namespace {

std::vector<WalkTrace> simulate_walks_impl(const SimilarityMatrix& S, const Vocabulary& vocab,
                                           const SamplerConfig& cfg, bool parallel) {
    validate_sampler_config(cfg);
    validate_similarity_matrix(S);
    if (vocab.size() != S.rows()) throw ValidationError("vocabulary does not match similarity matrix");
    if (vocab.size() < 2) throw ValidationError("simulation requires at least 2 items");

    const bool needs_softmax = cfg.sampler == SamplerKind::random_walk ||
                               cfg.proposal == ProposalKind::softmax;
    TransitionMatrix P;
    if (needs_softmax) P = softmax_transition_matrix(S, cfg.temperature);

    const std::size_t n = vocab.size();
    std::vector<WalkTrace> traces(static_cast<std::size_t>(cfg.walks));
    // Walk w writes only traces[w]; every walk owns an independent RNG
    // stream, so scheduling order cannot change results.
    auto run_walk = [&](int w) {
        const std::uint64_t seed = derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(w));
        Rng rng(seed);
        const int start = static_cast<int>(rng.uniform_int(n));
        WalkTrace trace;
        if (cfg.sampler == SamplerKind::random_walk) {
            trace = random_walk(P, start, cfg.steps, rng);
        } else {
            trace = mh_walk(S, vocab, cfg, start, rng,
                            cfg.proposal == ProposalKind::softmax ? &P : nullptr);
        }
        trace.walk = w;
        trace.seed = seed;
        traces[static_cast<std::size_t>(w)] = std::move(trace);
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int w = 0; w < cfg.walks; ++w) run_walk(w);
    } else {
        for (int w = 0; w < cfg.walks; ++w) run_walk(w);
    }
    return traces;
}

}  // namespace

std::vector<WalkTrace> simulate_walks(const SimilarityMatrix& S, const Vocabulary& vocab,
                                      const SamplerConfig& cfg) {
    return simulate_walks_impl(S, vocab, cfg, true);
}

namespace reference {

std::vector<WalkTrace> simulate_walks(const SimilarityMatrix& S, const Vocabulary& vocab,
                                      const SamplerConfig& cfg) {
    return simulate_walks_impl(S, vocab, cfg, false);
}

}  // namespace reference

StationaryDistribution stationary_distribution(const TransitionMatrix& P, double tol,
                                               int max_iters) {
    if (!(tol > 0.0)) throw ValidationError("stationary tolerance must be positive");
    if (max_iters < 1) throw ValidationError("stationary max_iters must be >= 1");
    validate_transition_matrix(P, /*allow_diagonal=*/true);
    const std::size_t n = P.rows();

    auto iterate = [&](std::vector<double> p, int* iters_out, double* residual_out) {
        std::vector<double> next(n);
        double residual = HUGE_VAL;
        for (int it = 1; it <= max_iters; ++it) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += p[i] * P(i, j);
                next[j] = s;
            }
            double mass = 0.0;
            for (double v : next) mass += v;
            if (!(mass > 0.0) || !std::isfinite(mass)) {
                throw NumericError("power method produced a degenerate iterate");
            }
            for (double& v : next) v /= mass;
            residual = 0.0;
            for (std::size_t j = 0; j < n; ++j) residual += std::abs(next[j] - p[j]);
            p.swap(next);
            if (residual <= tol) {
                *iters_out = it;
                *residual_out = residual;
                return p;
            }
        }
        *iters_out = -1;
        *residual_out = residual;
        return p;
    };

    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    int iters = 0;
    double residual = 0.0;
    std::vector<double> p_star = iterate(uniform, &iters, &residual);
    if (iters < 0) {
        throw ConvergenceError("power method did not converge within " + std::to_string(max_iters) +
                                   " iterations (residual " + std::to_string(residual) + ")",
                               residual);
    }

    // A uniform start can sit on a symmetric fixed point of a periodic or
    // reducible chain; confirm the limit from a deterministic one-hot start.
    std::vector<double> one_hot(n, 0.0);
    one_hot[0] = 1.0;
    int confirm_iters = 0;
    double confirm_residual = 0.0;
    std::vector<double> p_confirm = iterate(one_hot, &confirm_iters, &confirm_residual);
    if (confirm_iters < 0) {
        throw ConvergenceError(
            "power method converged from the uniform start but not from a one-hot start "
            "(periodic chain?); last residual " +
                std::to_string(confirm_residual),
            confirm_residual);
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff += std::abs(p_star[j] - p_confirm[j]);
    if (diff > 10.0 * tol) {
        throw ConvergenceError(
            "power method limit depends on the start vector (reducible chain?); L1 gap " +
                std::to_string(diff),
            diff);
    }

    StationaryDistribution sd;
    sd.probabilities = std::move(p_star);
    sd.iterations = iters;
    sd.residual = residual;
    return sd;
}

void save_traces(const std::vector<WalkTrace>& traces, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open trace file for writing: " + path);
    for (const auto& t : traces) {
        nlohmann::ordered_json j;
        j["walk"] = t.walk;
        j["seed"] = t.seed;
        j["steps"] = t.steps;
        j["rejected"] = t.rejected;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("short write to trace file: " + path);
}

std::vector<WalkTrace> load_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace file: " + path);
    std::vector<WalkTrace> traces;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("trace file line " + std::to_string(line_no) +
                                  " is not valid JSON: " + e.what());
        }
        if (!j.contains("walk") || !j.contains("seed") || !j.contains("steps") ||
            !j.contains("rejected")) {
            throw ValidationError("trace file line " + std::to_string(line_no) +
                                  " is missing a required field");
        }
        WalkTrace t;
        t.walk = j["walk"].get<int>();
        t.seed = j["seed"].get<std::uint64_t>();
        t.steps = j["steps"].get<std::vector<int>>();
        t.rejected = j["rejected"].get<std::vector<int>>();
        if (t.steps.empty()) {
            throw ValidationError("trace file line " + std::to_string(line_no) + " has no steps");
        }
        traces.push_back(std::move(t));
    }
    if (traces.empty()) throw ValidationError("trace file has no walks: " + path);
    return traces;
}

}  // namespace forage
