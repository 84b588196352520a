#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "superrad/cumulant.hpp"
#include "superrad/exact_lindblad.hpp"

using namespace superrad;
using namespace superrad::cumulant;
using exact::HilbertConfig;
using exact::Matrix;

namespace {

SystemParams regression(std::int64_t n, double omega)
{
    SystemParams p;
    p.n_emitters = n;
    p.g = 5.0;
    p.kappa = 50.0;
    p.omega = omega;
    p.gamma_minus = 0.1;
    p.gamma_z = 1.0;
    return p;
}

SystemParams random_params(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SystemParams p;
    p.n_emitters = n;
    p.delta_c = p.delta + 6.0 * (u(rng) - 0.5);
    p.g = 0.2 + 3.0 * u(rng);
    p.kappa = 20.0 * u(rng);
    p.omega = 2.0 * u(rng);
    p.gamma_minus = u(rng);
    p.gamma_z = u(rng);
    return p;
}

std::vector<double> random_field(std::mt19937_64& rng, int support)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(support));
    for (auto& v : f)
        v = u(rng);
    return f;
}

}  // namespace

TEST_CASE("closure formula")
{
    const cplx a{0.3, 0.1}, b{-0.2, 0.5}, c{0.7, -0.4};
    const cplx ab{0.05, 0.02}, ac{-0.1, 0.3}, bc{0.2, 0.2};
    const cplx printed = closure_triple(a, b, c, ab, ac, bc, ClosureVariant::AsPrinted);
    const cplx twice = closure_triple(a, b, c, ab, ac, bc, ClosureVariant::DoubleSubtract);
    CHECK(std::abs(printed - (a * bc + b * ac + ab * c - a * b * c)) < 1e-15);
    CHECK(std::abs(twice - (a * bc + b * ac + ab * c - 2.0 * a * b * c)) < 1e-15);
    // Vanishing first moments make the variants coincide.
    const cplx z{};
    CHECK(closure_triple(z, b, c, ab, ac, bc, ClosureVariant::AsPrinted) ==
          closure_triple(z, b, c, ab, ac, bc, ClosureVariant::DoubleSubtract));
}

TEST_CASE("closure examples and label symmetry")
{
    CHECK(closure_triple(1.0, 2.0, 3.0, 5.0, 7.0, 11.0) == cplx(34.0));
    // Factorised pair moments: one subtraction leaves 2 <A><B><C>, two recover it.
    CHECK(closure_triple(1.0, 2.0, 3.0, 2.0, 3.0, 6.0) == cplx(12.0));
    CHECK(closure_triple(1.0, 2.0, 3.0, 2.0, 3.0, 6.0, ClosureVariant::DoubleSubtract) == cplx(6.0));
    CHECK(closure_triple(0.0, 0.0, 0.0, 5.0, 7.0, 11.0) == cplx(0.0));

    std::mt19937_64 rng(20);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto c = [&] { return cplx(nd(rng), nd(rng)); };
    for (int draw = 0; draw < 50; ++draw) {
        const cplx m[3] = {c(), c(), c()};
        cplx pair[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                pair[i][j] = pair[j][i] = c();
        const cplx ref = closure_triple(m[0], m[1], m[2], pair[0][1], pair[0][2], pair[1][2]);
        int perm[3] = {0, 1, 2};
        do {
            const auto [x, y, z] = perm;
            const cplx v = closure_triple(m[x], m[y], m[z], pair[x][y], pair[x][z], pair[y][z]);
            CHECK(std::abs(v - ref) < 1e-12 * (1.0 + std::abs(ref)));
        } while (std::next_permutation(perm, perm + 3));
    }
}

TEST_CASE("field decouples without coupling")
{
    SystemParams p = regression(4, 1.0);
    p.g = 0.0;
    const MomentState m{0.7, 0.1, {0.2, -0.3}, {0.01, 0.0}, 0.2};
    const MomentState d = moment_rhs(validate_params(p), m);
    CHECK(d.n_photon == -p.kappa * m.n_photon);
    const MomentState dark = moment_rhs(validate_params(regression(4, 0.0)), MomentState::dark());
    for (double v : dark.to_array())
        CHECK(v == 0.0);
}

TEST_CASE("moment packing round trip")
{
    MomentState m{0.4, -0.3, {0.01, -0.02}, {0.003, 0.0004}, 0.2};
    CHECK(MomentState::from_array(m.to_array()) == m);
    CHECK(is_physical(MomentState::dark()));
    CHECK(is_physical(MomentState::half_inverted()));
    CHECK_FALSE(is_physical(MomentState{-1.0, 0.0, {}, {}, 0.0}));
}

TEST_CASE("derivatives match the Liouvillian on product states")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n : {2, 3}) {
        HilbertConfig h;
        h.n_max = 4;
        h.n_emitters = n;
        const exact::Operators ops(h);
        for (int draw = 0; draw < 25; ++draw) {
            const auto vp = validate_params(random_params(rng, n));
            const Matrix rho = oracle::product_state(h, random_field(rng, h.n_max), u(rng));
            const auto l = exact::build_liouvillian(vp, h);
            const MomentState want = oracle::moments(ops, l.apply(rho));
            const MomentState state = oracle::moments(ops, rho);
            for (auto variant : {ClosureVariant::AsPrinted, ClosureVariant::DoubleSubtract}) {
                double worst = 0.0;
                const bool ok =
                    oracle::moments_close(moment_rhs(vp, state, variant), want, 1e-8, 1e-12, &worst);
                CAPTURE(worst);
                CHECK(ok);
            }
        }
    }
}

TEST_CASE("hierarchy is exact on correlated symmetric states given exact triples")
{
    std::mt19937_64 rng(22);
    for (int n : {2, 3}) {
        HilbertConfig h;
        h.n_max = 3;
        h.n_emitters = n;
        const exact::Operators ops(h);
        for (int draw = 0; draw < 20; ++draw) {
            const auto vp = validate_params(random_params(rng, n));
            const Matrix rho = oracle::symmetrize(
                h, oracle::u1_project(h, oracle::random_density(h, rng), h.n_max));
            const auto l = exact::build_liouvillian(vp, h);
            const MomentState want = oracle::moments(ops, l.apply(rho));
            const MomentState got =
                moment_rhs_with_triples(vp, oracle::moments(ops, rho), oracle::triples(ops, rho));
            double worst = 0.0;
            const bool ok = oracle::moments_close(got, want, 1e-9, 1e-6, &worst);
            CAPTURE(worst);
            CHECK(ok);
        }
    }
}

TEST_CASE("steady state without drive or coupling is dark")
{
    SystemParams p = regression(3, 0.0);
    CHECK(photon_flux_cumulant(validate_params(p)) == 0.0);
    const MomentState m = integrate_to_steady_state(validate_params(p), MomentState::half_inverted());
    CHECK(m.n_photon == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.s_z == doctest::Approx(-1.0).epsilon(1e-9));

    p = regression(3, 1.0);
    p.g = 0.0;
    CHECK(photon_flux_cumulant(validate_params(p)) == 0.0);
}

TEST_CASE("uncoupled emitters reach the rate-equation inversion")
{
    SystemParams p;
    p.n_emitters = 50;
    p.omega = 1.0;
    p.gamma_minus = 3.0;
    p.kappa = 1.0;
    const MomentState m = integrate_to_steady_state(validate_params(p), MomentState::dark());
    CHECK(0.5 * (1.0 + m.s_z) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(m.z_zz == doctest::Approx(m.s_z * m.s_z).epsilon(1e-9));
}

TEST_CASE("steady state does not depend on the start")
{
    const auto vp = validate_params(regression(3, 1.0));
    SolveStats stats;
    const MomentState a = integrate_to_steady_state(vp, MomentState::dark(), 1e-11, {}, &stats);
    const MomentState b = integrate_to_steady_state(vp, MomentState::half_inverted(), 1e-11);
    CHECK(stats.residual <= 1e-11);
    CHECK(is_physical(a));
    CHECK(a.n_photon == doctest::Approx(b.n_photon).epsilon(1e-8));
    CHECK(a.z_zz == doctest::Approx(b.z_zz).epsilon(1e-8));
    CHECK(derivative_norm(moment_rhs(vp, a)) <= 1e-11);
}

TEST_CASE("stall handover matches explicit-only integration")
{
    const auto vp = validate_params(regression(2, 1.0));
    SolverOptions patient;
    patient.stall_steps = patient.max_explicit_steps;
    SolveStats a_stats, b_stats;
    const MomentState a = integrate_to_steady_state(vp, MomentState::dark(), 1e-10, {}, &a_stats);
    const MomentState b = integrate_to_steady_state(vp, MomentState::dark(), 1e-10, patient, &b_stats);
    CHECK(b_stats.explicit_steps >= a_stats.explicit_steps);
    const auto x = a.to_array(), y = b.to_array();
    for (std::size_t k = 0; k < x.size(); ++k)
        CHECK(std::abs(x[k] - y[k]) <= 1e-9);
}

TEST_CASE("time limit")
{
    SolverOptions opts;
    opts.t_max = 1e-3;
    try {
        integrate_to_steady_state(validate_params(regression(2, 1.0)), MomentState::dark(), 1e-10, opts);
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == "NoConvergence");
    }
}

TEST_CASE("flux is monotone in the pump at large N")
{
    SystemParams p;
    p.n_emitters = 10000;
    p.g = 0.11;
    p.kappa = 134.0;
    p.gamma_minus = 1.0;
    p.gamma_z = 10.0;
    double last = 0.0;
    for (double omega : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        p.omega = omega;
        const double f = photon_flux_cumulant(validate_params(p));
        CHECK(std::isfinite(f));
        CHECK(f > last);
        last = f;
    }
}

TEST_CASE("flux decomposition recovers the photon flux")
{
    std::mt19937_64 rng(23);
    for (int draw = 0; draw < 8; ++draw) {
        SystemParams p = random_params(rng, 2 + draw * 3);
        p.kappa += 20.0;
        const auto vp = validate_params(p);
        const MomentState m = integrate_to_steady_state(vp, MomentState::dark(), 1e-11);
        const FluxDecomposition f = flux_decomposition(vp, m);
        CHECK(f.n == p.n_emitters);
        CHECK(f.total() == doctest::Approx(p.kappa * m.n_photon).epsilon(1e-6));
    }
}

TEST_CASE("resonant pair correlation stays real")
{
    const auto vp = validate_params(regression(20, 1.0));
    const MomentState m = integrate_to_steady_state(vp, MomentState::dark());
    CHECK(std::abs(m.x_pm.imag()) <= 1e-8);
}

TEST_CASE("agrees with the exact flux in the bad-cavity regime")
{
    for (std::int64_t n : {1, 2}) {
        const auto vp = validate_params(regression(n, 0.1));
        exact::HilbertConfig h;
        h.n_max = 3;
        h.n_emitters = static_cast<int>(n);
        const double ex = exact::photon_flux_exact(vp, h);
        const double cu = photon_flux_cumulant(vp);
        CHECK(cu == doctest::Approx(ex).epsilon(0.01));
    }
}

TEST_CASE("invalid tolerance")
{
    const auto vp = validate_params(regression(2, 1.0));
    try {
        integrate_to_steady_state(vp, MomentState::dark(), 0.0);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.kind() == "InvalidArgument");
    }
    try {
        integrate_to_steady_state(vp, MomentState{std::nan(""), 0.0, {}, {}, 0.0});
        FAIL("expected NonFiniteState");
    } catch (const Error& e) {
        CHECK(e.kind() == "NonFiniteState");
    }
}
