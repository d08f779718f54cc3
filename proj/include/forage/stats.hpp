#pragma once

#include <utility>
#include <vector>

namespace forage {

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;  // two-sided slope test, floored at 1e-300
    double r_squared = 0.0;
    int n = 0;
};

// Simple OLS with a two-sided t test on the slope (df = n - 2).
RegressionResult ols_regression(const std::vector<std::pair<double, double>>& points);

// p = I_{df/(df+t^2)}(df/2, 1/2); exact in t <-> -t symmetry.
double student_t_two_sided_p(double t, int df);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// 1e-12 tolerance, symmetry switch at x = (a+1)/(a+b+2).
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace forage
