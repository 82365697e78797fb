#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vblob/discretization.hpp"
#include "vblob/serfati.hpp"

using namespace vblob;

namespace {

// Test-side f_i = (1 - a(|z|)) K_i(z) with the quintic ramp on [R, 2R].
double f_oracle(int i, double x, double y, double R) {
    const double r = std::hypot(x, y);
    double b = 1.0;
    if (r <= R) b = 0.0;
    else if (r < 2 * R) {
        const double s = r / R - 1.0;
        b = 10 * std::pow(s, 3) - 15 * std::pow(s, 4) + 6 * std::pow(s, 5);
    }
    const double k = 1.0 / (2.0 * oracle::pi * (x * x + y * y));
    return b * (i == 0 ? -y * k : x * k);
}

std::vector<Ensemble> series_of(const Ensemble& e0, double dt, double t_end) {
    std::vector<Ensemble> out;
    std::vector<Observer> obs{[&](const Ensemble& s, std::span<const Vec2>, DiagnosticsRecord&) { out.push_back(s); }};
    const RunResult r = run(e0, Integrator{dt, t_end}, {}, obs, 1);
    if (r.error) throw *r.error;
    return out;
}

Ensemble pair(double eps) {
    return Ensemble({{0.0, 0.25}, {0.0, -0.25}}, {0.5, -0.5}, BlobParams{eps, eps, eps, Profile::Poly6}, 0.0);
}

}  // namespace

TEST(Cutoff, RampIsC2AndBounded) {
    const Cutoff a{0.5};
    double b, db, d2b;
    a.far(0.5, b, db, d2b);
    EXPECT_EQ(b, 0.0);
    a.far(0.5 + 1e-9, b, db, d2b);
    EXPECT_NEAR(db, 0.0, 1e-12);
    EXPECT_NEAR(d2b, 0.0, 1e-6);
    a.far(1.0 - 1e-9, b, db, d2b);
    EXPECT_NEAR(b, 1.0, 1e-12);
    EXPECT_NEAR(db, 0.0, 1e-12);
    EXPECT_NEAR(d2b, 0.0, 1e-6);
    for (double r = 0.0; r < 1.5; r += 0.01) {
        EXPECT_GE(a.near(r), 0.0);
        EXPECT_LE(a.near(r), 1.0);
        if (r <= 0.5) {
            EXPECT_EQ(a.near(r), 1.0);
        }
        if (r >= 1.0) {
            EXPECT_EQ(a.near(r), 0.0);
        }
    }
}

TEST(FarKernel, DerivativesMatchFiniteDifferences) {
    const double R = 0.5, h = 1e-4;
    const Cutoff a{R};
    const Vec2 pts[] = {{0.6, 0.1}, {-0.3, 0.55}, {0.2, -0.8}, {1.3, 0.4}, {-0.7, -0.7}, {0.0, 0.9}};
    for (const Vec2 z : pts) {
        const FarKernelDerivatives d = far_kernel_derivatives(z, a);
        for (int i = 0; i < 2; ++i) {
            auto f = [&](double x, double y) { return f_oracle(i, x, y, R); };
            const double fx = (f(z.x + h, z.y) - f(z.x - h, z.y)) / (2 * h);
            const double fy = (f(z.x, z.y + h) - f(z.x, z.y - h)) / (2 * h);
            EXPECT_NEAR(d.d1[i][0], fx, 1e-6) << z.x << "," << z.y;
            EXPECT_NEAR(d.d1[i][1], fy, 1e-6);
            const double f0 = f(z.x, z.y);
            const double fxx = (f(z.x + h, z.y) - 2 * f0 + f(z.x - h, z.y)) / (h * h);
            const double fyy = (f(z.x, z.y + h) - 2 * f0 + f(z.x, z.y - h)) / (h * h);
            const double fxy = (f(z.x + h, z.y + h) - f(z.x + h, z.y - h) - f(z.x - h, z.y + h) +
                                f(z.x - h, z.y - h)) /
                               (4 * h * h);
            EXPECT_NEAR(d.d2[i][0][0], fxx, 1e-4);
            EXPECT_NEAR(d.d2[i][1][1], fyy, 1e-4);
            EXPECT_NEAR(d.d2[i][0][1], fxy, 1e-4);
            EXPECT_NEAR(d.d2[i][0][1], d.d2[i][1][0], 1e-13 * std::abs(fxy));
        }
    }
    const FarKernelDerivatives inside = far_kernel_derivatives({0.3, 0.2}, a);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(inside.d1[i][j], 0.0);
}

TEST(FarKernel, FieldIsDivergenceFree) {
    // div f = (1 - a)' (z/r . K) = 0 since K is perpendicular to z.
    const Cutoff a{0.5};
    for (double t = 0.0; t < 6.0; t += 0.37) {
        const Vec2 z{0.8 * std::cos(t), 0.8 * std::sin(t)};
        const FarKernelDerivatives d = far_kernel_derivatives(z, a);
        EXPECT_NEAR(d.d1[0][0] + d.d1[1][1], 0.0, 1e-12);
    }
}

TEST(SerfatiResidual, VanishesAtTimeZero) {
    const Ensemble e = pair(0.2);
    const std::vector<Ensemble> series{e};
    const GridSpec g = GridSpec::covering({-1.5, -1.5}, {1.5, 1.5}, 0.05);
    const std::vector<Vec2> samples{{0.0, 0.0}, {0.2, 0.3}, {-0.1, -0.2}};
    EXPECT_EQ(serfati_residual(series, 0.5, g, samples), 0.0);
}

TEST(SerfatiResidual, ZeroEnsembleGivesZero) {
    const Ensemble e({{0.0, 0.1}, {0.1, 0.0}}, {0.0, 0.0}, BlobParams{0.2, 0.2, 0.2, Profile::Poly6}, 0.0);
    const auto series = series_of(e, 0.1, 0.3);
    const GridSpec g = GridSpec::covering({-1.2, -1.2}, {1.2, 1.2}, 0.05);
    const std::vector<Vec2> samples{{0.0, 0.0}, {0.1, 0.1}};
    EXPECT_EQ(serfati_residual(series, 0.5, g, samples), 0.0);
}

TEST(SerfatiResidual, RejectsBadInputs) {
    const Ensemble e = pair(0.2);
    const std::vector<Ensemble> one{e};
    const std::vector<Vec2> samples{{0.0, 0.0}};
    const GridSpec g = GridSpec::covering({-1.5, -1.5}, {1.5, 1.5}, 0.05);
    EXPECT_THROW(serfati_residual(std::vector<Ensemble>{}, 0.5, g, samples), DomainError);
    EXPECT_THROW(serfati_residual(one, 0.5, GridSpec::covering({-1.5, -1.5}, {1.5, 1.5}, 0.06), samples), DomainError);
    EXPECT_THROW(serfati_residual(one, 0.0, g, samples), DomainError);
    EXPECT_THROW(serfati_residual(one, 0.5, GridSpec::covering({-0.2, -0.2}, {1.5, 1.5}, 0.05), samples), DomainError);
    EXPECT_THROW(serfati_residual(one, 0.8, g, samples), DomainError);  // cutoff ball leaves the grid
    const std::vector<Ensemble> backwards{e.at_time(1.0), e};
    EXPECT_THROW(serfati_residual(backwards, 0.5, g, samples), DomainError);
}

TEST(SerfatiResidual, ShrinksUnderGridAndStepRefinement) {
    const double eps = 0.2, R = 0.5, t = 0.3;
    const std::vector<Vec2> samples{{0.0, 0.0}, {0.15, 0.1}, {-0.1, 0.3}};
    double prev = INFINITY;
    for (int level = 0; level < 2; ++level) {
        const double dx = eps / 4 / (1 << level), dt = 0.05 / (1 << level);
        const auto series = series_of(pair(eps), dt, t);
        const GridSpec g = GridSpec::covering({-1.6, -1.6}, {1.6, 1.6}, dx);
        const double r = serfati_residual(series, R, g, samples);
        EXPECT_GT(r, 0.0);
        EXPECT_LE(2.0 * r, prev) << level;
        prev = r;
    }
}
