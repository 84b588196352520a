#include <doctest.h>

#include <cmath>
#include <random>

#include "superrad/optics.hpp"

using namespace superrad;
using namespace superrad::optics;

namespace {

std::string kind_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return "none";
}

OpticalParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OpticalParams p;
    p.e_c0 = 2200.0 + 200.0 * u(rng);
    p.n_eff = 1.2 + 2.0 * u(rng);
    p.delta = 2250.0 + 200.0 * u(rng);
    p.g_coll = 40.0 * u(rng);
    p.kappa = 1.0 + 200.0 * u(rng);
    p.kappa_ext = p.kappa * u(rng);
    p.gamma_perp = 400.0 * u(rng);
    return p;
}

}  // namespace

TEST_CASE("reference device")
{
    const OpticalParams p = reference_device();
    CHECK(p.kappa == doctest::Approx(133.93).epsilon(1e-4));
    CHECK(p.gamma_perp == doctest::Approx(331.04).epsilon(1e-4));
    CHECK(p.kappa_ext == p.kappa / 2.0);
    CHECK(cavity_dispersion(p, 20.0) == doctest::Approx(p.delta).epsilon(1e-12));
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("parameter validation")
{
    OpticalParams p;
    p.n_eff = 1.0;
    CHECK(kind_of([&] { validate(p); }) == "InvalidOpticalParams");
    p = OpticalParams{};
    p.kappa_ext = p.kappa + 1.0;
    CHECK(kind_of([&] { validate(p); }) == "InvalidOpticalParams");
    p = OpticalParams{};
    p.gamma_perp = -1.0;
    CHECK(kind_of([&] { validate(p); }) == "InvalidOpticalParams");
    p = OpticalParams{};
    p.e_c0 = 0.0;
    CHECK(kind_of([&] { validate(p); }) == "InvalidOpticalParams");
}

TEST_CASE("cavity dispersion")
{
    OpticalParams p;
    p.e_c0 = 2300.0;
    p.n_eff = 1.8;
    CHECK(cavity_dispersion(p, 0.0) == 2300.0);
    CHECK(cavity_dispersion(p, 20.0) == doctest::Approx(2342.6791046577823).epsilon(1e-13));
    double last = cavity_dispersion(p, 0.0);
    for (int i = 1; i <= 8900; ++i) {
        const double e = cavity_dispersion(p, 0.01 * i);
        CHECK(e > last);
        last = e;
    }
    p.n_eff = 1e6;
    CHECK(std::abs(cavity_dispersion(p, 60.0) / p.e_c0 - 1.0) <= 1e-9);
    CHECK(kind_of([&] { cavity_dispersion(p, 90.0); }) == "AngleOutOfRange");
    CHECK(kind_of([&] { cavity_dispersion(p, -1.0); }) == "AngleOutOfRange");
}

TEST_CASE("eigenvalue trace identity")
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> angle(0.0, 64.0);
    for (int draw = 0; draw < 200; ++draw) {
        const OpticalParams p = random_params(rng);
        const double th = angle(rng);
        const auto m = polariton_eigenmodes(p, th);
        const cplx trace = cplx(cavity_dispersion(p, th), -0.5 * p.kappa) + cplx(p.delta, -0.5 * p.gamma_perp);
        CHECK(std::abs(m.lp + m.up - trace) <= 1e-10 * std::abs(trace));
        const cplx det = cplx(cavity_dispersion(p, th), -0.5 * p.kappa) * cplx(p.delta, -0.5 * p.gamma_perp) -
                         p.g_coll * p.g_coll;
        CHECK(std::abs(m.lp * m.up - det) <= 1e-10 * std::abs(det));
        CHECK(m.lp.real() <= m.up.real());
    }
}

TEST_CASE("polariton limits")
{
    OpticalParams p = reference_device();
    p.g_coll = 0.0;
    const auto bare = polariton_eigenmodes(p, 10.0);
    const cplx cav(cavity_dispersion(p, 10.0), -0.5 * p.kappa);
    const cplx emi(p.delta, -0.5 * p.gamma_perp);
    CHECK(std::abs(bare.lp - cav) < 1e-12);
    CHECK(std::abs(bare.up - emi) < 1e-12);

    p = reference_device();
    p.kappa = p.gamma_perp = 50.0;
    p.kappa_ext = 25.0;
    const auto res = polariton_eigenmodes(p, 20.0);
    CHECK((res.up - res.lp).real() == doctest::Approx(2.0 * p.g_coll).epsilon(1e-12));

    // Finite linewidth difference: 2 sqrt(g^2 - (kappa - gamma)^2 / 16).
    p.kappa = 60.0;
    p.kappa_ext = 30.0;
    const auto off = polariton_eigenmodes(p, 20.0);
    CHECK((off.up - off.lp).real() == doctest::Approx(2.0 * std::sqrt(121.0 - 100.0 / 16.0)).epsilon(1e-10));
}

TEST_CASE("minimum splitting")
{
    OpticalParams p = reference_device();
    p.kappa = p.gamma_perp = 100.0;
    p.kappa_ext = 50.0;
    const auto m = min_branch_splitting(p);
    CHECK(m.splitting == doctest::Approx(22.0).epsilon(1e-9));
    CHECK(m.theta_deg == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("reflectance bounds")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(0.0, 64.0);
    const auto energies = linear_grid(1800.0, 2900.0, 5.0);
    for (int draw = 0; draw < 100; ++draw) {
        const OpticalParams p = random_params(rng);
        const auto r = reflectance_spectrum(p, angle(rng), energies);
        for (double v : r) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("reflectance limits")
{
    OpticalParams p = reference_device();
    p.g_coll = 0.0;
    CHECK(reflectance(p, 30.0, cavity_dispersion(p, 30.0)) < 1e-24);
    CHECK(reflectance(p, 30.0, cavity_dispersion(p, 30.0) + 1e6 * p.kappa) >= 1.0 - 1e-6);
}

TEST_CASE("broadened device shows one dip")
{
    const OpticalParams p = reference_device();
    const auto energies = linear_grid(2000.0, 2700.0, 0.5);
    const auto r = reflectance_spectrum(p, 20.0, energies);
    CHECK(local_minima(r).size() == 1);
}

TEST_CASE("narrow lines resolve both branches")
{
    OpticalParams p = reference_device();
    p.kappa = p.gamma_perp = 2.0;
    p.kappa_ext = 1.0;
    const auto energies = linear_grid(2300.0, 2400.0, 0.01);
    const auto r = reflectance_spectrum(p, 20.0, energies);
    const auto mins = local_minima(r);
    REQUIRE(mins.size() == 2);
    const auto modes = polariton_eigenmodes(p, 20.0);
    CHECK(std::abs(energies[mins[0]] - modes.lp.real()) <= p.gamma_perp / 2.0);
    CHECK(std::abs(energies[mins[1]] - modes.up.real()) <= p.gamma_perp / 2.0);
}

TEST_CASE("local minima")
{
    const std::vector<double> v = {3, 1, 2, 0, 0, 4, 5, 5, 1};
    const auto m = local_minima(v);
    REQUIRE(m.size() == 2);
    CHECK(m[0] == 1);
    CHECK(m[1] == 3);
    const std::vector<double> flat = {1, 1, 1};
    CHECK(local_minima(flat).empty());
}

TEST_CASE("reflectance map layout")
{
    const OpticalParams p = reference_device();
    const auto th = linear_grid(0.0, 64.0, 4.0);
    const auto en = linear_grid(2000.0, 2700.0, 10.0);
    const auto map = reflectance_map(p, th, en);
    CHECK(map.r_values.size() == th.size());
    CHECK(map.r_values.front().size() == en.size());
    CHECK(map.lp_branch.size() == th.size());
    for (std::size_t i = 0; i < th.size(); ++i)
        CHECK(map.lp_branch[i].real() <= map.up_branch[i].real());
    CHECK(kind_of([] { linear_grid(0.0, 1.0, 0.0); }) == "InvalidGrid");
    CHECK(linear_grid(0.0, 64.0, 1.0).size() == 65);
}

TEST_CASE("filtered emission width")
{
    OpticalParams p = reference_device();
    p.kappa = p.gamma_perp = 80.0;
    p.kappa_ext = 40.0;
    const auto same = emission_fwhm(p, 20.0);
    CHECK(same.center == doctest::Approx(p.delta).epsilon(1e-9));
    CHECK(same.fwhm == doctest::Approx(80.0 * std::sqrt(std::sqrt(2.0) - 1.0)).epsilon(1e-6));

    p = reference_device();
    p.kappa = 1e6 * p.gamma_perp;
    p.kappa_ext = 0.5 * p.kappa;
    CHECK(emission_fwhm(p, 20.0).fwhm == doctest::Approx(p.gamma_perp).epsilon(0.01));

    const auto dev = emission_fwhm(reference_device(), 20.0);
    CHECK(dev.fwhm < reference_device().kappa);

    p = reference_device();
    p.kappa = p.gamma_perp = 1.0;
    p.kappa_ext = 0.5;
    CHECK(kind_of([&] { emission_fwhm(p, 60.0); }) == "PeakNotFound");
}

TEST_CASE("coherence length")
{
    CHECK(coherence_length(527.0, 30.0) == doctest::Approx(9.257633333333333).epsilon(1e-12));
    CHECK(coherence_length(500.0, 50.0) == doctest::Approx(5.0));
    CHECK(kind_of([] { coherence_length(527.0, 0.0); }) == "ZeroLinewidth");
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(1.0, 1000.0);
    for (int draw = 0; draw < 100; ++draw) {
        const double l = u(rng), dl = u(rng);
        CHECK(std::abs(coherence_length(l, dl) * 1e3 * dl / (l * l) - 1.0) <= 1e-12);
    }
}

TEST_CASE("coupling scaling fit")
{
    std::vector<std::pair<double, double>> pts, flat, noisy;
    std::mt19937_64 rng(44);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (double n : {1e2, 3e2, 1e3, 3e3, 1e4, 3e4}) {
        pts.emplace_back(n, 0.11 * std::sqrt(n));
        flat.emplace_back(n, 11.0);
        noisy.emplace_back(n, 0.11 * std::sqrt(n) * std::exp(noise(rng)));
    }
    CHECK(std::abs(fit_coupling_scaling(pts) - 0.5) <= 1e-9);
    CHECK(std::abs(fit_coupling_scaling(flat)) <= 1e-12);
    CHECK(std::abs(fit_coupling_scaling(noisy) - 0.5) <= 0.05);
    const std::vector<std::pair<double, double>> one = {{1.0, 1.0}};
    CHECK(kind_of([&] { fit_coupling_scaling(one); }) == "InsufficientPoints");
}
