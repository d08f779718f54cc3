#include "forage/stats.hpp"

#include <algorithm>
#include <cmath>

#include "forage/errors.hpp"

namespace forage {

namespace {

constexpr double kMinP = 1e-300;

// Continued fraction for I_x(a, b) (Lentz). Converges quickly for
// x < (a+1)/(a+b+2); callers apply the symmetry switch.
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-12;
    constexpr int max_iter = 500;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double coeff = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + coeff * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + coeff / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + coeff * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + coeff / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) return h;
    }
    throw NumericError("incomplete beta continued fraction failed to converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta requires a, b > 0");
    if (!std::isfinite(x)) throw ValidationError("incomplete beta requires finite x");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // x^a (1-x)^b / B(a, b), evaluated in log space; symmetric under
    // (a, b, x) -> (b, a, 1-x), so both branches reuse it.
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
    if (df < 1) throw ValidationError("student t requires df >= 1");
    if (std::isnan(t)) throw ValidationError("student t statistic is NaN");
    if (std::isinf(t)) return kMinP;
    const double x = df / (df + t * t);
    const double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
    return std::clamp(p, kMinP, 1.0);
}

RegressionResult ols_regression(const std::vector<std::pair<double, double>>& points) {
    const auto n = static_cast<int>(points.size());
    if (n < 3) throw ValidationError("regression requires at least 3 points");
    for (const auto& [x, y] : points) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw ValidationError("regression requires finite points");
        }
    }
    double x_bar = 0.0, y_bar = 0.0;
    for (const auto& [x, y] : points) {
        x_bar += x;
        y_bar += y;
    }
    x_bar /= n;
    y_bar /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = x - x_bar;
        const double dy = y - y_bar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw ValidationError("regression x values are all identical");

    RegressionResult res;
    res.n = n;
    res.slope = sxy / sxx;
    res.intercept = y_bar - res.slope * x_bar;
    const double sse = std::max(0.0, syy - res.slope * sxy);
    const int df = n - 2;
    res.slope_se = std::sqrt(sse / df / sxx);
    if (res.slope_se > 0.0) {
        res.t_stat = res.slope / res.slope_se;
    } else {
        // Exact fit: the slope test saturates (or is vacuous for a flat fit).
        res.t_stat = res.slope == 0.0 ? 0.0
                     : res.slope > 0.0 ? HUGE_VAL
                                       : -HUGE_VAL;
    }
    res.p_value = res.t_stat == 0.0 && res.slope_se == 0.0
                      ? 1.0
                      : student_t_two_sided_p(res.t_stat, df);
    res.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    return res;
}

}  // namespace forage
