#include "esa/tdist.hpp"

#include "esa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace esa {
namespace {

constexpr int kMaxIterations = 20000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

/// Continued fraction for I_x(a, b) (converges quickly for x < (a+1)/(a+b+2)).
double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

/// I_x(a, b) with y = 1 - x supplied separately to keep precision near x = 1.
double incomplete_beta_xy(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, y) / b;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete_beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete_beta needs x in [0, 1]");
    return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw ArgumentError("Student t needs positive degrees of freedom");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double p = incomplete_beta_xy(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
    return std::clamp(p, 0.0, 1.0);
}

} // namespace esa
