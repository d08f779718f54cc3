#include <doctest.h>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "forage/errors.hpp"
#include "forage/stats.hpp"

using namespace forage;

namespace {

std::vector<std::pair<double, double>> zip(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], y[i]);
    return pts;
}

}  // namespace

TEST_CASE("ols reproduces the spelled-out 4-point example") {
    auto r = ols_regression(zip({1, 2, 3, 4}, {2, 1, 4, 3}));
    CHECK(r.n == 4);
    CHECK(r.slope == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(r.intercept == doctest::Approx(1.0).epsilon(1e-14));
    // se = sqrt(SSE / (n-2) / Sxx) with SSE = 3.2, Sxx = 5.
    CHECK(r.slope_se == doctest::Approx(0.56568542494923802).epsilon(1e-14));
    CHECK(r.t_stat == doctest::Approx(1.0606601717798213).epsilon(1e-14));
    CHECK(r.p_value == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.r_squared == doctest::Approx(0.36).epsilon(1e-14));
}

TEST_CASE("ols reproduces a second independently computed example") {
    auto r = ols_regression(zip({0, 1, 2, 3, 4}, {1.1, 1.9, 3.2, 3.9, 5.1}));
    CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.intercept == doctest::Approx(1.04).epsilon(1e-13));
    CHECK(r.slope_se == doctest::Approx(0.048989794855663562).epsilon(1e-12));
    CHECK(r.t_stat == doctest::Approx(20.412414523193151).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.00025706797798305473).epsilon(1e-10));
    CHECK(r.r_squared == doctest::Approx(0.99285146942017474).epsilon(1e-13));
}

TEST_CASE("student t two-sided p matches the high-precision oracle table") {
    struct Row {
        double t;
        int df;
        double p;
    };
    const Row rows[] = {
        {2.5, 10, 0.031446844236608804}, {1.0, 1, 0.5},
        {0.5, 3, 0.65144796484815099},   {3.0, 57, 0.003998897207689344},
        {10.0, 5, 0.00017094757574296359}, {40.0, 2, 0.00062441467218474064},
        {1.5, 8, 0.17200329195191129},
    };
    for (const auto& row : rows) {
        CHECK(student_t_two_sided_p(row.t, row.df) ==
              doctest::Approx(row.p).epsilon(1e-12));
    }
}

TEST_CASE("p-values are exactly symmetric in t and monotone in |t|") {
    for (int df : {1, 2, 5, 30, 120}) {
        for (double t : {0.1, 0.7, 1.3, 2.9, 17.0}) {
            CHECK(student_t_two_sided_p(t, df) == student_t_two_sided_p(-t, df));
        }
        double prev = student_t_two_sided_p(0.0, df);
        CHECK(prev == 1.0);
        for (double t = 0.25; t < 40.0; t *= 2.0) {
            const double p = student_t_two_sided_p(t, df);
            CHECK(p < prev);
            CHECK(p > 0.0);
            prev = p;
        }
    }
}

TEST_CASE("p-values are clamped to [1e-300, 1] at the extremes") {
    CHECK(student_t_two_sided_p(1e155, 3) == 1e-300);
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 3) == 1e-300);
    CHECK(student_t_two_sided_p(0.0, 7) == 1.0);
    CHECK_THROWS_AS(student_t_two_sided_p(std::nan(""), 3), ValidationError);
    CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0), ValidationError);
}

TEST_CASE("regularized incomplete beta matches reference values") {
    CHECK(regularized_incomplete_beta(2, 3, 0.3) ==
          doctest::Approx(0.34829999999999998).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.5, 5, 0.7) ==
          doctest::Approx(0.99930869661423702).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(4, 4, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(10, 2, 0.9) ==
          doctest::Approx(0.69735688020000009).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.5, 0.5, 0.05) ==
          doctest::Approx(0.14356629312870627).epsilon(1e-12));
}

TEST_CASE("incomplete beta edge and symmetry identities") {
    CHECK(regularized_incomplete_beta(2, 5, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 5, 1.0) == 1.0);
    CHECK(regularized_incomplete_beta(2, 5, -0.2) == 0.0);
    CHECK(regularized_incomplete_beta(2, 5, 1.3) == 1.0);

    // I_x(a, b) = 1 - I_{1-x}(b, a), across the continued-fraction switch.
    for (double a : {0.5, 1.0, 3.5, 28.5}) {
        for (double b : {0.5, 2.0, 9.0}) {
            for (double x : {0.02, 0.3, 0.5, 0.77, 0.98}) {
                const double lhs = regularized_incomplete_beta(a, b, x);
                const double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
        }
    }

    // Large df stays stable (continued fraction must converge).
    const double p = student_t_two_sided_p(30.0, 1000);
    CHECK(p > 0.0);
    CHECK(p < 1e-100);
}

TEST_CASE("exact linear data drives p to the floor and r^2 to 1") {
    auto r = ols_regression(zip({0, 1, 2, 3}, {1, 3, 5, 7}));  // y = 2x + 1
    CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.intercept == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.slope_se == 0.0);
    CHECK(r.p_value == 1e-300);
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("perfectly flat data yields slope 0 with p = 1") {
    auto r = ols_regression(zip({0, 1, 2, 3}, {5, 5, 5, 5}));
    CHECK(r.slope == 0.0);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.r_squared == 0.0);  // Syy = 0 convention
}

TEST_CASE("regression is equivariant under affine changes of y") {
    std::vector<double> x{0.5, 1.5, 2.0, 4.0, 5.5, 6.1, 8.0};
    std::vector<double> y{2.2, 1.9, 3.4, 3.1, 4.8, 5.2, 5.9};
    auto base = ols_regression(zip(x, y));

    const double a = -3.7, b = 11.0;
    std::vector<double> y2;
    for (double v : y) y2.push_back(a * v + b);
    auto scaled = ols_regression(zip(x, y2));

    CHECK(scaled.slope == doctest::Approx(a * base.slope).epsilon(1e-12));
    CHECK(scaled.intercept == doctest::Approx(a * base.intercept + b).epsilon(1e-12));
    CHECK(std::abs(scaled.t_stat) == doctest::Approx(std::abs(base.t_stat)).epsilon(1e-10));
    CHECK(scaled.p_value == doctest::Approx(base.p_value).epsilon(1e-10));
    CHECK(scaled.r_squared == doctest::Approx(base.r_squared).epsilon(1e-12));
}

TEST_CASE("residuals are orthogonal to x and sum to zero") {
    std::vector<double> x{1, 2, 4, 5, 9, 11, 13};
    std::vector<double> y{3.1, 2.7, 5.9, 4.2, 9.8, 10.1, 13.7};
    auto r = ols_regression(zip(x, y));
    double sum = 0.0, dot_x = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double resid = y[i] - (r.slope * x[i] + r.intercept);
        sum += resid;
        dot_x += resid * x[i];
    }
    CHECK(std::abs(sum) <= 1e-9);
    CHECK(std::abs(dot_x) <= 1e-9);
}

TEST_CASE("regression input validation") {
    CHECK_THROWS_AS(ols_regression(zip({1, 2}, {1, 2})), ValidationError);
    // Degenerate x (zero variance) cannot be fit.
    CHECK_THROWS_AS(ols_regression(zip({2, 2, 2}, {1, 2, 3})), ValidationError);
    CHECK_THROWS_AS(ols_regression(zip({1, 2, std::nan("")}, {1, 2, 3})), ValidationError);
}
