#pragma once

namespace esa {

/// Regularised incomplete beta function I_x(a, b), evaluated with the
/// modified Lentz continued fraction (relative accuracy about 1e-14).
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof`
/// degrees of freedom.
double student_t_two_sided_p(double t, double dof);

} // namespace esa
