#pragma once

namespace morphotok {

// I_x(a, b) for a, b > 0 and x in [0, 1], by Lentz's continued fraction.
// Absolute error is below 1e-13 over the range the tests cover.
double RegularizedIncompleteBeta(double a, double b, double x);

// P(T <= t) for Student's t with `df` degrees of freedom.
double StudentTCdf(double t, double df);
// P(|T| >= |t|).
double StudentTTwoSidedP(double t, double df);

// P(F >= f) for the F distribution with (df1, df2) degrees of freedom.
double FSurvival(double f, double df1, double df2);

}  // namespace morphotok
