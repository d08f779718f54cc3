#include "forage/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "forage/errors.hpp"
#include "forage/rng.hpp"
#include "forage/similarity.hpp"

namespace forage {

void validate_tsne_config(const TsneConfig& cfg, std::size_t n) {
    if (n < 4) throw ValidationError("t-SNE requires at least 4 points");
    if (!(cfg.perplexity > 0.0)) throw ValidationError("perplexity must be positive");
    if (cfg.perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
        throw ValidationError("perplexity must be below (N - 1) / 3 for bisection feasibility");
    }
    if (cfg.iterations < 1) throw ValidationError("t-SNE iterations must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ValidationError("t-SNE learning rate must be positive");
    if (cfg.momentum_initial < 0.0 || cfg.momentum_initial >= 1.0 || cfg.momentum_final < 0.0 ||
        cfg.momentum_final >= 1.0) {
        throw ValidationError("t-SNE momentum must lie in [0, 1)");
    }
    if (cfg.momentum_switch_iter < 0) throw ValidationError("momentum switch iteration must be >= 0");
    if (!(cfg.exaggeration_factor >= 1.0)) throw ValidationError("exaggeration factor must be >= 1");
    if (cfg.exaggeration_duration < 0) throw ValidationError("exaggeration duration must be >= 0");
}

Matrix pairwise_distances(const EmbeddingMatrix& E, bool cosine) {
    const std::size_t n = E.rows();
    const std::size_t d = E.cols();
    if (n == 0 || d == 0) throw ValidationError("distance computation requires a nonempty matrix");
    Matrix D(n, n);
    if (cosine) {
        const SimilarityMatrix S = cosine_similarity_matrix(E);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) D(i, j) = i == j ? 0.0 : 1.0 - S(i, j);
        }
        return D;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            const double* a = E.row(i);
            const double* b = E.row(j);
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
            D(i, j) = s;
            D(j, i) = s;
        }
    }
    return D;
}

namespace {

void validate_distances(const Matrix& D) {
    const std::size_t n = D.rows();
    if (n < 2 || D.cols() != n) throw ValidationError("distance matrix must be square with N >= 2");
    for (std::size_t i = 0; i < n; ++i) {
        if (D(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be exactly 0");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = D(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("distance matrix entries must be finite and nonnegative");
            }
            if (std::abs(v - D(j, i)) > 1e-12) {
                throw ValidationError("distance matrix must be symmetric");
            }
        }
    }
}

// Entropy (bits) of the Gaussian conditional at precision beta, plus the
// weights needed to materialize the row. Max-subtraction keeps exp in range.
double row_entropy_bits(const Matrix& D, std::size_t i, double beta, std::vector<double>& weights) {
    const std::size_t n = D.rows();
    double dmin = HUGE_VAL;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) dmin = std::min(dmin, D(i, j));
    }
    double sum_w = 0.0;
    double sum_wd = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            weights[j] = 0.0;
            continue;
        }
        const double shifted = D(i, j) - dmin;
        const double w = std::exp(-beta * shifted);
        weights[j] = w;
        sum_w += w;
        sum_wd += w * shifted;
    }
    const double h_nats = std::log(sum_w) + beta * sum_wd / sum_w;
    return h_nats / std::numbers::ln2_v<double>;
}

}  // namespace

PerplexityCalibration perplexity_calibration(const Matrix& distances, double perplexity) {
    validate_distances(distances);
    const std::size_t n = distances.rows();
    if (!(perplexity > 0.0)) throw ValidationError("perplexity must be positive");
    // log2(perplexity) can reach log2(N - 1) (uniform over the N - 1
    // neighbors) but never exceed it.
    if (perplexity > static_cast<double>(n) - 1.0) {
        throw ValidationError("infeasible perplexity: must not exceed N - 1");
    }
    const double target_bits = std::log2(perplexity);

    PerplexityCalibration cal;
    cal.sigma.assign(n, 0.0);
    cal.conditional = Matrix(n, n);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = 0.0;
        double hi = HUGE_VAL;
        for (int step = 0; step < 50; ++step) {
            const double h = row_entropy_bits(distances, i, beta, weights);
            if (std::abs(h - target_bits) <= 1e-5) break;
            if (h > target_bits) {
                lo = beta;
                beta = hi == HUGE_VAL ? beta * 2.0 : 0.5 * (lo + hi);
            } else {
                hi = beta;
                beta = 0.5 * (lo + hi);
            }
        }
        double sum_w = 0.0;
        row_entropy_bits(distances, i, beta, weights);
        for (std::size_t j = 0; j < n; ++j) sum_w += weights[j];
        for (std::size_t j = 0; j < n; ++j) cal.conditional(i, j) = weights[j] / sum_w;
        cal.conditional(i, i) = 0.0;
        cal.sigma[i] = std::sqrt(0.5 / beta);
    }
    return cal;
}

Matrix symmetrized_affinities(const Matrix& conditional) {
    const std::size_t n = conditional.rows();
    if (n == 0 || conditional.cols() != n) {
        throw ValidationError("conditional affinity matrix must be square");
    }
    Matrix P(n, n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            P(i, j) = (conditional(i, j) + conditional(j, i)) * scale;
        }
    }
    return P;
}

namespace {

// Student-t numerators qnum(i,j) = 1 / (1 + ||y_i - y_j||^2) and their total.
// Row partials are accumulated serially and combined in ascending row order,
// so the sum is bitwise identical for any thread count.
double student_t_numerators(const Matrix& Y, Matrix& qnum, bool parallel) {
    const std::size_t n = Y.rows();
    std::vector<double> row_sums(n, 0.0);
    auto fill_row = [&](std::size_t i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                qnum(i, j) = 0.0;
                continue;
            }
            const double d0 = Y(i, 0) - Y(j, 0);
            const double d1 = Y(i, 1) - Y(j, 1);
            const double q = 1.0 / (1.0 + d0 * d0 + d1 * d1);
            qnum(i, j) = q;
            rs += q;
        }
        row_sums[i] = rs;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            fill_row(static_cast<std::size_t>(ii));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) fill_row(i);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += row_sums[i];
    return total;
}

Matrix gradient_with(const Matrix& P_eff, const Matrix& Y, const Matrix& qnum, double sum_q,
                     bool parallel) {
    const std::size_t n = Y.rows();
    Matrix grad(n, 2);
    auto fill_row = [&](std::size_t i) {
        double g0 = 0.0;
        double g1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double q = qnum(i, j);
            const double coeff = (P_eff(i, j) - q / sum_q) * q;
            g0 += coeff * (Y(i, 0) - Y(j, 0));
            g1 += coeff * (Y(i, 1) - Y(j, 1));
        }
        grad(i, 0) = 4.0 * g0;
        grad(i, 1) = 4.0 * g1;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            fill_row(static_cast<std::size_t>(ii));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) fill_row(i);
    }
    return grad;
}

double kl_with(const Matrix& P, const Matrix& qnum, double sum_q) {
    const std::size_t n = P.rows();
    std::vector<double> row_sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double p = P(i, j);
            if (p <= 0.0) continue;
            const double q = std::max(qnum(i, j) / sum_q, 1e-12);
            rs += p * std::log(p / q);
        }
        row_sums[i] = rs;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) kl += row_sums[i];
    // Mathematically >= 0; guard the last-ulp dip when Q ~= P.
    return std::max(kl, 0.0);
}

void check_square_pair(const Matrix& P, const Matrix& Y, const char* what) {
    if (Y.cols() != 2 || P.rows() != P.cols() || P.rows() != Y.rows()) {
        throw ValidationError(std::string(what) + ": expects square P and N x 2 Y of matching N");
    }
}

}  // namespace

double tsne_kl(const Matrix& P, const Matrix& Y) {
    check_square_pair(P, Y, "tsne_kl");
    Matrix qnum(Y.rows(), Y.rows());
    const double sum_q = student_t_numerators(Y, qnum, true);
    return kl_with(P, qnum, sum_q);
}

Matrix tsne_gradient(const Matrix& P_eff, const Matrix& Y) {
    check_square_pair(P_eff, Y, "tsne_gradient");
    Matrix qnum(Y.rows(), Y.rows());
    const double sum_q = student_t_numerators(Y, qnum, true);
    return gradient_with(P_eff, Y, qnum, sum_q, true);
}

namespace reference {

Matrix tsne_gradient(const Matrix& P_eff, const Matrix& Y) {
    check_square_pair(P_eff, Y, "tsne_gradient");
    Matrix qnum(Y.rows(), Y.rows());
    const double sum_q = student_t_numerators(Y, qnum, false);
    return gradient_with(P_eff, Y, qnum, sum_q, false);
}

}  // namespace reference

ProjectedPoints tsne(const EmbeddingMatrix& E, const TsneConfig& cfg) {
    const std::size_t n = E.rows();
    validate_tsne_config(cfg, n);
    validate_embedding_matrix(E, n);

    const Matrix D = pairwise_distances(E, cfg.cosine_distance);
    const PerplexityCalibration cal = perplexity_calibration(D, cfg.perplexity);
    const Matrix P = symmetrized_affinities(cal.conditional);
    Matrix P_exaggerated(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            P_exaggerated(i, j) = P(i, j) * cfg.exaggeration_factor;
        }
    }

    Rng rng(cfg.seed);
    Matrix Y(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        Y(i, 0) = rng.normal() * 1e-4;
        Y(i, 1) = rng.normal() * 1e-4;
    }
    Matrix velocity(n, 2, 0.0);
    Matrix gains(n, 2, 1.0);
    Matrix qnum(n, n);

    ProjectedPoints out;
    out.kl_trace.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int it = 0; it < cfg.iterations; ++it) {
        const bool exaggerating = it < cfg.exaggeration_duration;
        const double sum_q = student_t_numerators(Y, qnum, true);
        const Matrix grad = gradient_with(exaggerating ? P_exaggerated : P, Y, qnum, sum_q, true);
        // KL is always reported against the true P, so the trace stays a
        // valid divergence during the exaggeration phase.
        out.kl_trace.push_back(kl_with(P, qnum, sum_q));

        const double momentum =
            it < cfg.momentum_switch_iter ? cfg.momentum_initial : cfg.momentum_final;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t dcol = 0; dcol < 2; ++dcol) {
                const bool same_sign = (grad(i, dcol) > 0.0) == (velocity(i, dcol) > 0.0);
                gains(i, dcol) = same_sign ? gains(i, dcol) * 0.8 : gains(i, dcol) + 0.2;
                gains(i, dcol) = std::max(gains(i, dcol), 0.01);
                velocity(i, dcol) =
                    momentum * velocity(i, dcol) - cfg.learning_rate * gains(i, dcol) * grad(i, dcol);
                Y(i, dcol) += velocity(i, dcol);
            }
        }
        double mean0 = 0.0;
        double mean1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mean0 += Y(i, 0);
            mean1 += Y(i, 1);
        }
        mean0 /= static_cast<double>(n);
        mean1 /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            Y(i, 0) -= mean0;
            Y(i, 1) -= mean1;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(Y(i, 0)) || !std::isfinite(Y(i, 1))) {
                throw NumericError("t-SNE produced a non-finite coordinate at iteration " +
                                   std::to_string(it));
            }
        }
    }
    out.coords = std::move(Y);
    out.kl = out.kl_trace.back();
    return out;
}

}  // namespace forage
