#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vblob/transport.hpp"

using namespace vblob;

namespace {

MollifiedVorticity patch_datum(double amp, double radius, double delta) {
    return mollify_initial(InitialVorticity(Patch{amp, radius, {}}), delta);
}

double carried_mass(const TracerCloud& tc) {
    double s = 0.0;
    for (double v : tc.values) s += v * tc.weight();
    return s;
}

Ensemble single_blob(double gamma, double eps) {
    return Ensemble({{0.0, 0.0}}, {gamma}, BlobParams{eps, eps, eps, Profile::Poly6}, 0.0);
}

}  // namespace

TEST(SeedTracers, ZeroDatumCarriesNothing) {
    const TracerCloud tc = seed_tracers(patch_datum(0.0, 1.0, 0.1), 0.1, 0.05);
    for (double v : tc.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(carried_mass(tc), 0.0);
}

TEST(SeedTracers, InteriorMarkersCarryAmplitude) {
    const TracerCloud tc = seed_tracers(patch_datum(2.5, 1.0, 0.1), 0.1, 0.05);
    std::size_t interior = 0;
    for (std::size_t k = 0; k < tc.size(); ++k) {
        if (norm(tc.initial[k]) < 0.9 - 1e-9) {
            EXPECT_NEAR(tc.values[k], 2.5, 1e-14);
            ++interior;
        }
        EXPECT_LE(norm(tc.initial[k]), 1.1 + 1e-12);
    }
    EXPECT_GT(interior, 1000u);
}

TEST(SeedTracers, MassMatchesMollifiedIntegral) {
    // Mollification preserves the integral: int w0^delta = amp * pi R^2.
    const TracerCloud tc = seed_tracers(patch_datum(1.0, 1.0, 0.1), 0.1, 0.025);
    EXPECT_NEAR(carried_mass(tc), oracle::pi, 1e-4 * oracle::pi);
}

TEST(SeedTracers, DipoleHasZeroMass) {
    const InitialVorticity w0(GaussianDipole{});
    const TracerCloud tc = seed_tracers(mollify_initial(w0, 0.1), 0.1, 0.05);
    ASSERT_GT(tc.size(), 0u);
    EXPECT_LE(std::abs(carried_mass(tc)), 1e-4 * w0.norm_l1());
}

TEST(SeedTracers, RejectsCoarsePitch) {
    EXPECT_THROW(seed_tracers(patch_datum(1.0, 1.0, 0.1), 0.1, 0.051), DomainError);
    EXPECT_THROW(seed_tracers(patch_datum(1.0, 1.0, 0.1), 0.1, 0.0), DomainError);
    EXPECT_NO_THROW(seed_tracers(patch_datum(1.0, 1.0, 0.1), 0.1, 0.05));
}

TEST(AdvectTracers, ZeroCirculationLeavesMarkersFixed) {
    const Ensemble e({{0.0, 0.0}, {0.3, 0.1}}, {0.0, 0.0}, BlobParams{0.1, 0.1, 0.1, Profile::Poly6}, 0.0);
    TracerCloud tc = seed_tracers(patch_datum(1.0, 0.2, 0.1), 0.1, 0.05);
    const AdvectResult r = advect_tracers(tc, e, Integrator{0.1, 1.0}, {});
    ASSERT_FALSE(r.run.error);
    for (std::size_t k = 0; k < tc.size(); ++k) EXPECT_EQ(r.tracers.current[k], tc.initial[k]);
}

TEST(AdvectTracers, MarkerAtBlobCentreStays) {
    TracerCloud tc;
    tc.pitch = 0.01;
    tc.initial = tc.current = {{0.0, 0.0}};
    tc.values = {1.0};
    const AdvectResult r = advect_tracers(tc, single_blob(1.0, 0.05), Integrator{0.01, 1.0}, {});
    EXPECT_EQ(r.tracers.current[0], (Vec2{0.0, 0.0}));
}

TEST(AdvectTracers, FarMarkerOrbitsWithPointVortexPeriod) {
    // d / eps = 20: the marker sees the exact point-vortex field.
    const double d = 1.0, eps = 0.05, gamma = 1.0;
    const double period = 2.0 * oracle::pi / (gamma / (2.0 * oracle::pi * d * d));
    TracerCloud tc;
    tc.pitch = 0.01;
    tc.initial = tc.current = {{d, 0.0}};
    tc.values = {1.0};

    double angle = 0.0, last = 0.0, crossing = -1.0, prev_t = 0.0;
    std::vector<Observer> obs{[&](const Ensemble& s, std::span<const Vec2> m, DiagnosticsRecord&) {
        const double a = std::atan2(m[0].y, m[0].x);
        double da = a - last;
        if (da < -oracle::pi) da += 2.0 * oracle::pi;
        if (da > oracle::pi) da -= 2.0 * oracle::pi;
        const double before = angle;
        angle += da;
        last = a;
        if (crossing < 0.0 && before < 2.0 * oracle::pi && angle >= 2.0 * oracle::pi)
            crossing = prev_t + (s.time() - prev_t) * (2.0 * oracle::pi - before) / (angle - before);
        prev_t = s.time();
    }};
    const AdvectResult r = advect_tracers(tc, single_blob(gamma, eps), Integrator{0.05, 1.1 * period}, {}, obs);
    ASSERT_FALSE(r.run.error);
    ASSERT_GT(crossing, 0.0);
    EXPECT_NEAR(crossing, period, 0.01 * period);
    EXPECT_NEAR(norm(r.tracers.current[0]), d, 1e-6);
    EXPECT_EQ(r.tracers.values, tc.values);
}

TEST(AdvectTracers, ValuesAndMassInvariant) {
    const MollifiedVorticity w = patch_datum(1.0, 0.3, 0.1);
    const Ensemble e = tile_and_weight(w, 0.05, 0.2);
    const TracerCloud tc = seed_tracers(w, 0.2, 0.05);
    const AdvectResult r = advect_tracers(tc, e, Integrator{0.05, 0.5}, {});
    ASSERT_FALSE(r.run.error);
    EXPECT_EQ(r.tracers.values, tc.values);
    EXPECT_EQ(r.tracers.weight(), tc.weight());
    EXPECT_EQ(carried_mass(r.tracers), carried_mass(tc));
    EXPECT_NE(r.tracers.current, tc.current);
}

TEST(MollifiedTransportField, ZeroValuesGiveZero) {
    TracerCloud tc;
    tc.pitch = 0.05;
    tc.initial = tc.current = {{0.0, 0.0}, {0.05, 0.0}};
    tc.values = {0.0, 0.0};
    const GridSpec g = GridSpec::covering({-0.5, -0.5}, {0.5, 0.5}, 0.025);
    const GridField f = mollified_transport_field(tc, Mollifier(Profile::Poly6, 0.1), g);
    EXPECT_EQ(lp_norm(f, INFINITY), 0.0);
}

TEST(MollifiedTransportField, VanishesAwayFromSupport) {
    const TracerCloud tc = seed_tracers(patch_datum(1.0, 0.5, 0.1), 0.1, 0.05);
    const Mollifier m(Profile::Poly6, 0.1);
    const GridSpec g = GridSpec::covering({2.0, 2.0}, {2.5, 2.5}, 0.025);
    EXPECT_EQ(lp_norm(mollified_transport_field(tc, m, g), INFINITY), 0.0);
}

TEST(MollifiedTransportField, MatchesConvolutionAtTimeZero) {
    const double eps = 0.1;
    const MollifiedVorticity w = patch_datum(1.0, 1.0, 0.1);
    const TracerCloud tc = seed_tracers(w, eps, eps / 4);
    const Mollifier m(Profile::Poly6, eps);
    const Vec2 pts[10] = {{0.0, 0.0},   {0.3, 0.1},   {-0.5, 0.4},  {0.7, -0.2}, {0.0, 0.9},
                          {-0.93, 0.0}, {0.66, 0.66}, {0.81, -0.45}, {0.2, -0.97}, {-0.6, -0.72}};
    for (const Vec2 x : pts) {
        const GridSpec g{x, 1.0, 1, 1};
        const double got = mollified_transport_field(tc, m, g).values[0];
        const double ref = oracle::simpson(
            [&](double rho) {
                return rho * oracle::poly6(rho, eps) *
                       oracle::simpson([&](double th) { return w(x + Vec2{rho * std::cos(th), rho * std::sin(th)}); },
                                       0.0, 2.0 * oracle::pi, 1e-9, 14);
            },
            0.0, eps, 1e-8, 14);
        EXPECT_NEAR(got, ref, 1e-3 * std::abs(ref)) << x.x << "," << x.y;
    }
}

TEST(LagrangianGap, ZeroDataGiveZero) {
    const MollifiedVorticity w = patch_datum(0.0, 0.5, 0.1);
    const Ensemble e = tile_and_weight(w, 0.05, 0.1);
    const TracerCloud tc = seed_tracers(w, 0.1, 0.05);
    EXPECT_EQ(lagrangian_gap(e, tc, 2.0, transport_grid(e, tc, 0.025)), 0.0);
}

TEST(LagrangianGap, RejectsUncoveredOrCoarseGrid) {
    const MollifiedVorticity w = patch_datum(1.0, 0.5, 0.1);
    const Ensemble e = tile_and_weight(w, 0.05, 0.1);
    const TracerCloud tc = seed_tracers(w, 0.1, 0.05);
    EXPECT_THROW(lagrangian_gap(e, tc, 2.0, GridSpec::covering({-0.2, -0.2}, {0.2, 0.2}, 0.025)), DomainError);
    EXPECT_THROW(lagrangian_gap(e, tc, 2.0, transport_grid(e, tc, 0.03)), DomainError);
    EXPECT_NO_THROW(lagrangian_gap(e, tc, INFINITY, transport_grid(e, tc, 0.025)));
}

TEST(LagrangianGap, ShrinksWithLatticeAtTimeZero) {
    const double eps = 0.2;
    const MollifiedVorticity w = patch_datum(1.0, 0.3, 0.1);
    const TracerCloud tc = seed_tracers(w, eps, 0.00625);
    double prev = INFINITY;
    std::vector<double> gaps;
    for (double h : {0.05, 0.025, 0.0125}) {
        const Ensemble e = tile_and_weight(w, h, eps);
        const double g = lagrangian_gap(e, tc, 2.0, transport_grid(e, tc, eps / 8));
        EXPECT_LT(g, prev) << h;
        prev = g;
        gaps.push_back(g);
    }
    EXPECT_GE(std::log2(gaps[0] / gaps[2]) / 2.0, 0.8);
}

TEST(TransportInvariants, LpNormOfTransportedFieldStable) {
    const double eps = 0.2;
    const MollifiedVorticity w = patch_datum(1.0, 0.3, 0.1);
    const Ensemble e = tile_and_weight(w, 0.05, eps);
    const TracerCloud tc = seed_tracers(w, eps, 0.025);
    const AdvectResult r = advect_tracers(tc, e, Integrator{0.05, 0.5}, {});
    ASSERT_FALSE(r.run.error);
    const Mollifier m(Profile::Poly6, eps);
    for (double p : {1.0, 2.0, 4.0}) {
        const double n0 = lp_norm(mollified_transport_field(tc, m, transport_grid(e, tc, eps / 8)), p);
        const double n1 = lp_norm(
            mollified_transport_field(r.tracers, m, transport_grid(r.run.final_state, r.tracers, eps / 8)), p);
        EXPECT_NEAR(n1, n0, 0.05 * n0) << p;
    }
    double lo0 = INFINITY, hi0 = -INFINITY;
    for (double v : r.tracers.values) lo0 = std::min(lo0, v), hi0 = std::max(hi0, v);
    double lo1 = INFINITY, hi1 = -INFINITY;
    for (double v : tc.values) lo1 = std::min(lo1, v), hi1 = std::max(hi1, v);
    EXPECT_EQ(lo0, lo1);
    EXPECT_EQ(hi0, hi1);
}
