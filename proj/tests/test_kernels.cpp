#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vblob/kernels.hpp"

using namespace vblob;

TEST(BiotSavart, UnitPoints) {
    const Vec2 a = biot_savart({1.0, 0.0});
    EXPECT_DOUBLE_EQ(a.x, 0.0);
    EXPECT_DOUBLE_EQ(a.y, 1.0 / (2.0 * oracle::pi));
    const Vec2 b = biot_savart({0.0, 2.0});
    EXPECT_DOUBLE_EQ(b.x, -1.0 / (4.0 * oracle::pi));
    EXPECT_DOUBLE_EQ(b.y, 0.0);
    const Vec2 c = biot_savart({-1.0, 0.0});
    EXPECT_DOUBLE_EQ(c.y, -1.0 / (2.0 * oracle::pi));
}

TEST(BiotSavart, OriginIsDomainError) { EXPECT_THROW(biot_savart({0.0, 0.0}), DomainError); }

TEST(Mollifier, RejectsNonPositiveRadius) {
    EXPECT_THROW(Mollifier(Profile::Poly6, 0.0), DomainError);
    EXPECT_THROW(Mollifier(Profile::Gaussian, -1.0), DomainError);
}

TEST(CumulativeMass, Poly6ClosedForms) {
    const Mollifier m(Profile::Poly6, 1.0);
    EXPECT_EQ(cumulative_mass(m, 0.0), 0.0);
    EXPECT_EQ(cumulative_mass(m, 1.0), 1.0);
    EXPECT_EQ(cumulative_mass(m, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(cumulative_mass(m, 0.5), 0.68359375);
    EXPECT_THROW(cumulative_mass(m, -0.1), DomainError);
}

TEST(CumulativeMass, MatchesRadialQuadrature) {
    for (auto prof : {Profile::Poly6, Profile::Gaussian}) {
        for (double eps : {0.05, 0.3, 1.0}) {
            const Mollifier m(prof, eps);
            for (double f : {0.1, 0.5, 0.9, 1.5, 3.0}) {
                const double r = f * eps;
                const double ref = oracle::simpson(
                    [&](double s) {
                        return 2.0 * oracle::pi * s *
                               (prof == Profile::Poly6 ? oracle::poly6(s, eps) : oracle::gauss(s, eps));
                    },
                    0.0, r, 1e-14);
                EXPECT_NEAR(cumulative_mass(m, r), ref, 1e-12) << profile_name(prof) << " eps=" << eps << " r=" << r;
            }
        }
    }
}

TEST(Mollifier, UnitMassAndNonnegative) {
    for (auto prof : {Profile::Poly6, Profile::Gaussian}) {
        const Mollifier m(prof, 0.2);
        const double mass = oracle::simpson(
            [&](double s) { return 2.0 * oracle::pi * s * m.value_r2(s * s); }, 0.0, m.support_radius(), 1e-14);
        EXPECT_NEAR(mass, 1.0, 1e-12);
        for (int k = 0; k <= 200; ++k) EXPECT_GE(m.value_r2(std::pow(k * 0.01, 2)), 0.0);
    }
}

TEST(RegularizedKernel, OriginAndFarField) {
    const RegularizedKernel k{Mollifier(Profile::Poly6, 0.1)};
    const Vec2 z = regularized_velocity_kernel(k, {0.0, 0.0});
    EXPECT_EQ(z.x, 0.0);
    EXPECT_EQ(z.y, 0.0);
    const Vec2 f = k({1.0, 0.0});
    EXPECT_EQ(f.x, 0.0);
    EXPECT_DOUBLE_EQ(f.y, 1.0 / (2.0 * oracle::pi));
    // Exactly K outside a compact core.
    for (double r : {0.1, 0.2, 0.7}) {
        const Vec2 x{r * 0.6, r * 0.8};
        EXPECT_DOUBLE_EQ(k(x).x, biot_savart(x).x);
        EXPECT_DOUBLE_EQ(k(x).y, biot_savart(x).y);
    }
}

TEST(RegularizedKernel, InsideCoreMatchesConvolution) {
    const RegularizedKernel k{Mollifier(Profile::Poly6, 1.0)};
    const Vec2 v = k({0.5, 0.0});
    const auto [u, w] = oracle::convolved_kernel(0.5, 0.0, 1.0, false);
    EXPECT_NEAR(v.x, u, 1e-6);
    EXPECT_NEAR(v.y, w, 1e-6);
    EXPECT_NEAR(v.y, biot_savart({0.5, 0.0}).y * 0.68359375, 1e-15);
}

TEST(RegularizedKernel, ConvolutionIdentityBothProfiles) {
    for (auto prof : {Profile::Poly6, Profile::Gaussian}) {
        const double eps = 0.1;
        const RegularizedKernel k{Mollifier(prof, eps)};
        for (double f : {0.1, 0.7, 1.0, 1.6, 3.0}) {
            const double th = 0.3 + f;
            const double x = f * eps * std::cos(th), y = f * eps * std::sin(th);
            const auto [u, w] = oracle::convolved_kernel(x, y, eps, prof == Profile::Gaussian);
            const Vec2 v = k({x, y});
            EXPECT_NEAR(v.x, u, 1e-6) << profile_name(prof) << " f=" << f;
            EXPECT_NEAR(v.y, w, 1e-6) << profile_name(prof) << " f=" << f;
        }
    }
}

TEST(RegularizedKernel, OddPerpendicularDominated) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (auto prof : {Profile::Poly6, Profile::Gaussian}) {
        const RegularizedKernel k{Mollifier(prof, 0.1)};
        for (int i = 0; i < 1000; ++i) {
            const Vec2 x{U(rng), U(rng)};
            const Vec2 a = k(x), b = k(-x);
            EXPECT_EQ(a.x, -b.x);
            EXPECT_EQ(a.y, -b.y);
            EXPECT_LE(std::abs(dot(a, x)), 1e-14 * norm(a) * norm(x));
            EXPECT_LE(norm(a), norm(biot_savart(x)) * (1.0 + 1e-15));
        }
    }
}

TEST(RegularizedKernel, SmoothAcrossCoreEdge) {
    const RegularizedKernel k{Mollifier(Profile::Poly6, 0.1)};
    const double below = k({0.1 - 1e-12, 0.0}).y, above = k({0.1 + 1e-12, 0.0}).y;
    EXPECT_NEAR(below, above, 1e-9);
}

TEST(Green, GradientPerpIsKernel) {
    for (auto prof : {Profile::Poly6, Profile::Gaussian}) {
        const Mollifier m(prof, 0.2);
        for (double r : {0.01, 0.1, 0.19, 0.25, 0.6, 1.5}) {
            const double d = 1e-6 * std::max(r, 0.01);
            const double dG = (m.green(r + d) - m.green(r - d)) / (2.0 * d);
            // K_eps = perp(grad G) has magnitude G'(r).
            EXPECT_NEAR(dG, m.kernel_factor(r * r) * r, 1e-7 * std::max(1.0, 1.0 / r)) << r;
        }
        EXPECT_NEAR(m.green(5.0), std::log(5.0) / (2.0 * oracle::pi), 1e-14);
    }
}

TEST(TranslationGap, TrivialAndDomain) {
    EXPECT_EQ(kernel_translation_gap({0.0, 0.0}, 1.5), 0.0);
    EXPECT_THROW(kernel_translation_gap({0.01, 0.0}, 1.0), DomainError);
    EXPECT_THROW(kernel_translation_gap({0.01, 0.0}, 2.0), DomainError);
}

TEST(TranslationGap, MatchesBruteForce) {
    for (double r : {1.2, 1.5, 1.8}) {
        const double lib = kernel_translation_gap({0.01, 0.0}, r);
        const double ref = oracle::translation_gap(0.01, r);
        EXPECT_NEAR(lib / ref, 1.0, 1e-2) << "r=" << r;
    }
    // Direction does not matter.
    const double a = kernel_translation_gap({0.006, 0.008}, 1.5);
    EXPECT_NEAR(a / oracle::translation_gap(0.01, 1.5), 1.0, 1e-2);
}

TEST(TranslationGap, DoublingRatio) {
    const double r = 1.5;
    const double ratio = kernel_translation_gap({0.02, 0.0}, r) / kernel_translation_gap({0.01, 0.0}, r);
    EXPECT_NEAR(ratio / std::pow(2.0, 2.0 / r - 1.0), 1.0, 0.1);
}

TEST(TranslationGap, LogLogSlope) {
    const double r = 1.5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double a = 1e-3; a <= 0.1 * (1 + 1e-9); a *= std::sqrt(10.0)) {
        const double x = std::log(a), y = std::log(kernel_translation_gap({a, 0.0}, r));
        sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope, 2.0 / r - 1.0, 0.05);
}
