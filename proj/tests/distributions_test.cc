#include "morphotok/distributions.h"

#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace morphotok {
namespace {

TEST(IncompleteBeta, MatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 7.0, 30.0}) {
    for (double b : {0.5, 1.0, 3.0, 12.0}) {
      for (double x : {0.0, 1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0}) {
        EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x), boost::math::ibeta(a, b, x), 1e-13)
            << a << " " << b << " " << x;
      }
    }
  }
}

TEST(StudentT, MatchesBoost) {
  for (double df : {1.0, 2.0, 5.0, 13.0, 16.0, 100.0}) {
    const boost::math::students_t dist(df);
    for (double t : {-8.0, -2.1, -0.3, 0.0, 0.7, 1.96, 2.4, 12.0}) {
      EXPECT_NEAR(StudentTCdf(t, df), boost::math::cdf(dist, t), 1e-12) << df << " " << t;
      EXPECT_NEAR(StudentTTwoSidedP(t, df), 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t))),
                  1e-12);
    }
  }
}

TEST(FSurvival, MatchesBoost) {
  for (double d1 : {1.0, 2.0, 5.0}) {
    for (double d2 : {3.0, 12.0, 14.0, 60.0}) {
      const boost::math::fisher_f dist(d1, d2);
      for (double f : {0.0, 0.2, 1.0, 4.1394, 276.82, 1e4}) {
        EXPECT_NEAR(FSurvival(f, d1, d2), boost::math::cdf(boost::math::complement(dist, f)), 1e-12)
            << d1 << " " << d2 << " " << f;
      }
    }
  }
}

TEST(StudentT, PValueFallsWithMagnitude) {
  double last = 1.0;
  for (double t = 0.0; t < 10.0; t += 0.25) {
    const double p = StudentTTwoSidedP(t, 16);
    EXPECT_LE(p, last);
    last = p;
  }
  last = 1.0;
  for (double f = 0.0; f < 50.0; f += 0.5) {
    const double p = FSurvival(f, 2, 14);
    EXPECT_LE(p, last);
    last = p;
  }
}

}  // namespace
}  // namespace morphotok
