#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vblob/quadrature.hpp"

using namespace vblob;

TEST(GaussLegendre, ExactForPolynomials) {
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
        const auto rule = quad::gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        EXPECT_NEAR(wsum, 2.0, 1e-14);
        for (std::size_t deg = 0; deg < 2 * n; ++deg) {
            const double got = quad::integrate_fixed(rule, [&](double x) { return std::pow(x, deg); }, 0.0, 1.0);
            EXPECT_NEAR(got, 1.0 / (deg + 1.0), 1e-14) << "n=" << n << " deg=" << deg;
        }
    }
}

TEST(Adaptive, SmoothAndSingular) {
    EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0.0, oracle::pi), 2.0, 1e-12);
    EXPECT_NEAR(quad::integrate([](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; }, 0.0, 1.0, 1e-10), 2.0, 1e-6);
}

TEST(Oracle, SimpsonAgreesWithClosedForm) {
    EXPECT_NEAR(oracle::simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-14), std::exp(1.0) - 1.0, 1e-13);
}
