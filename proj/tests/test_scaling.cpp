#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "superrad/scaling.hpp"

using namespace superrad;
using namespace superrad::scaling;

namespace {

SweepSpec bad_cavity_spec(DriveRule rule)
{
    SweepSpec s;
    s.n_values = {100, 1000, 10000};
    s.drive_rule = rule;
    s.omega_1 = 1e-4;
    s.gamma_r = 1e-3;
    s.base_params.g = 0.11;
    s.base_params.kappa = 134.0;
    s.base_params.gamma_minus = 0.01;
    s.base_params.gamma_z = 1.0;
    return s;
}

std::vector<std::pair<double, double>> planted(double alpha, double c, const std::vector<double>& ns)
{
    std::vector<std::pair<double, double>> pts;
    for (double n : ns)
        pts.emplace_back(n, c * std::pow(n, alpha));
    return pts;
}

std::string kind_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return "none";
}

}  // namespace

TEST_CASE("control luminance")
{
    CHECK(control_luminance(100, 0.0, 1.0, 1.0) == 0.0);
    CHECK(control_luminance(100, 1.0, 1.0, 1.0) == doctest::Approx(100.0 / 3.0));
    const double sat = control_luminance(7, 1e6 * 2.0, 1.0, 1.0);
    CHECK(std::abs(sat - 7.0) / 7.0 < 1e-5);
    CHECK(kind_of([] { control_luminance(10, 0.0, 0.0, 0.0); }) == "DegenerateRates");
}

TEST_CASE("sweep specification checks")
{
    SweepSpec s = bad_cavity_spec(DriveRule::Scaled);
    CHECK_NOTHROW(validate_spec(s));
    CHECK(drive_for(s, 1000) == doctest::Approx(0.1));
    s.drive_rule = DriveRule::Fixed;
    CHECK(drive_for(s, 1000) == 1e-4);

    s = bad_cavity_spec(DriveRule::Scaled);
    s.n_values = {100, 100};
    CHECK(kind_of([&] { validate_spec(s); }) == "InvalidSweep");
    s.n_values = {1000, 100};
    CHECK(kind_of([&] { validate_spec(s); }) == "InvalidSweep");
    s.n_values = {0, 100};
    CHECK(kind_of([&] { validate_spec(s); }) == "InvalidSweep");
    s = bad_cavity_spec(DriveRule::Scaled);
    s.omega_1 = 0.0;
    CHECK(kind_of([&] { validate_spec(s); }) == "InvalidSweep");
    s = bad_cavity_spec(DriveRule::Scaled);
    s.gamma_r = -1.0;
    CHECK(kind_of([&] { validate_spec(s); }) == "InvalidSweep");
    s = bad_cavity_spec(DriveRule::Scaled);
    s.base_params.kappa = -1.0;
    CHECK(kind_of([&] { validate_spec(s); }) == "NegativeRate");
}

TEST_CASE("single-point sweep")
{
    SweepSpec s = bad_cavity_spec(DriveRule::Fixed);
    s.n_values = {1};
    const auto rows = run_concentration_sweep(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ratio > 0.0);
    CHECK(rows[0].ratio == doctest::Approx(rows[0].l_cavity / rows[0].l_control));
}

TEST_CASE("scaled drive sweep")
{
    const SweepSpec s = bad_cavity_spec(DriveRule::Scaled);
    const auto rows = run_concentration_sweep(s);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].n == s.n_values[i]);
        CHECK(rows[i].l_cavity >= 0.0);
        CHECK(rows[i].l_control >= 0.0);
        if (i > 0)
            CHECK(rows[i].ratio >= rows[i - 1].ratio);
    }
    const auto scaled = fit_power_law(rows);
    CHECK(scaled.alpha >= -0.05);
    CHECK(scaled.alpha <= 1.05);
    const auto fixed = fit_power_law(run_concentration_sweep(bad_cavity_spec(DriveRule::Fixed)));
    CHECK(fixed.alpha < scaled.alpha);
    // Bit-identical on repetition.
    CHECK(run_concentration_sweep(s) == rows);
}

TEST_CASE("planted exponents")
{
    const std::vector<double> ns = {100, 300, 1000, 3000, 10000};
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        const auto f = fit_power_law(planted(alpha, 2.5, ns));
        CHECK(std::abs(f.alpha - alpha) <= 1e-9);
        CHECK(f.rmsd <= 1e-9);
        CHECK(f.prefactor == doctest::Approx(2.5).epsilon(1e-9));
    }
    const auto flat = fit_power_law(planted(0.0, 1.0, ns));
    CHECK(flat.alpha == 0.0);
    CHECK(flat.rmsd == 0.0);
}

TEST_CASE("fit invariances")
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int draw = 0; draw < 100; ++draw) {
        std::vector<std::pair<double, double>> pts;
        for (double n : {10.0, 50.0, 200.0, 1e3, 5e3})
            pts.emplace_back(n, std::pow(n, 0.3) * std::exp(noise(rng)));
        const auto base = fit_power_law(pts);
        const double c = u(rng);

        auto scaled_y = pts;
        for (auto& [n, y] : scaled_y)
            y *= c;
        const auto fy = fit_power_law(scaled_y);
        CHECK(std::abs(fy.alpha - base.alpha) <= 1e-12);
        CHECK(std::abs(fy.rmsd - base.rmsd) <= 1e-12);
        CHECK(fy.prefactor == doctest::Approx(c * base.prefactor).epsilon(1e-10));

        auto scaled_n = pts;
        for (auto& [n, y] : scaled_n)
            n *= c;
        const auto fn = fit_power_law(scaled_n);
        CHECK(std::abs(fn.alpha - base.alpha) <= 1e-10);

        auto reversed = std::vector(pts.rbegin(), pts.rend());
        CHECK(std::abs(fit_power_law(reversed).alpha - base.alpha) <= 1e-12);
        CHECK(base.rmsd >= 0.0);
    }
}

TEST_CASE("fit errors")
{
    const std::vector<std::pair<double, double>> one = {{10.0, 1.0}};
    CHECK(kind_of([&] { fit_power_law(one); }) == "InsufficientPoints");
    const std::vector<std::pair<double, double>> same_n = {{10.0, 1.0}, {10.0, 2.0}};
    CHECK(kind_of([&] { fit_power_law(same_n); }) == "InsufficientPoints");
    const std::vector<std::pair<double, double>> zero = {{10.0, 1.0}, {100.0, 0.0}};
    CHECK(kind_of([&] { fit_power_law(zero); }) == "NonPositiveValue");
    const std::vector<std::pair<double, double>> neg_n = {{-10.0, 1.0}, {100.0, 1.0}};
    CHECK(kind_of([&] { fit_power_law(neg_n); }) == "NonPositiveValue");
}

TEST_CASE("solver failures name the sweep point")
{
    SweepSpec s = bad_cavity_spec(DriveRule::Scaled);
    s.solver.t_max = 1e-6;
    try {
        run_concentration_sweep(s);
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == "NoConvergence");
        CHECK(std::string(e.what()).find("n=100") != std::string::npos);
    }
}
