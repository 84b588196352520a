#include "superrad/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "superrad/scaling.hpp"
#include "superrad/units.hpp"

namespace superrad::optics {

namespace {

constexpr cplx I{0.0, 1.0};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Peak-normalised Lorentzian with full width `fwhm`.
double lorentzian(double e, double center, double fwhm)
{
    const double hw = 0.5 * fwhm;
    const double x = e - center;
    return hw * hw / (x * x + hw * hw);
}

// Golden-section maximisation of f on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, double rel_tol)
{
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > rel_tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

void validate(const OpticalParams& p)
{
    auto fail = [](const char* what) { throw Error("InvalidOpticalParams", what); };
    if (!(p.e_c0 > 0.0) || !std::isfinite(p.e_c0))
        fail("e_c0 must be > 0");
    if (!(p.delta > 0.0) || !std::isfinite(p.delta))
        fail("delta must be > 0");
    if (!(p.n_eff > 1.0) || !std::isfinite(p.n_eff))
        fail("n_eff must be > 1");
    if (!(p.g_coll >= 0.0) || !std::isfinite(p.g_coll))
        fail("g_coll must be >= 0");
    if (!(p.kappa >= 0.0) || !std::isfinite(p.kappa))
        fail("kappa must be >= 0");
    if (!(p.gamma_perp >= 0.0) || !std::isfinite(p.gamma_perp))
        fail("gamma_perp must be >= 0");
    if (!(p.kappa_ext >= 0.0) || !(p.kappa_ext <= p.kappa))
        fail("kappa_ext must lie in [0, kappa]");
}

double resonant_cavity_energy(double delta, double n_eff, double theta_deg)
{
    const double s = std::sin(radians(theta_deg)) / n_eff;
    return delta * std::sqrt(1.0 - s * s);
}

OpticalParams reference_device()
{
    OpticalParams p;
    p.delta = 2350.0;
    p.g_coll = 11.0;
    p.n_eff = 1.8;
    p.kappa = units::linewidth_mev_from_nm(30.0, 527.0);
    p.kappa_ext = 0.5 * p.kappa;
    p.gamma_perp = units::linewidth_mev_from_nm(75.0, 530.0);
    p.e_c0 = resonant_cavity_energy(p.delta, p.n_eff, 20.0);
    return p;
}

double cavity_dispersion(const OpticalParams& p, double theta_deg)
{
    if (!(theta_deg >= 0.0 && theta_deg < 90.0)) {
        std::ostringstream os;
        os << "angle " << theta_deg << " deg outside [0, 90)";
        throw Error("AngleOutOfRange", os.str());
    }
    const double s = std::sin(radians(theta_deg)) / p.n_eff;
    return p.e_c0 / std::sqrt(1.0 - s * s);
}

PolaritonPair polariton_eigenmodes(const OpticalParams& p, double theta_deg)
{
    const cplx a = cavity_dispersion(p, theta_deg) - 0.5 * I * p.kappa;
    const cplx b = p.delta - 0.5 * I * p.gamma_perp;
    const cplx mean = 0.5 * (a + b);
    const cplx half_diff = 0.5 * (a - b);
    const cplx root = std::sqrt(half_diff * half_diff + p.g_coll * p.g_coll);
    cplx lo = mean - root, hi = mean + root;
    if (hi.real() < lo.real())
        std::swap(lo, hi);
    return {lo, hi};
}

SplittingMinimum min_branch_splitting(const OpticalParams& p, double theta_lo, double theta_hi)
{
    auto split = [&](double th) {
        const auto m = polariton_eigenmodes(p, th);
        return (m.up - m.lp).real();
    };
    constexpr int samples = 6400;
    const double h = (theta_hi - theta_lo) / samples;
    int best = 0;
    double best_val = split(theta_lo);
    for (int i = 1; i <= samples; ++i) {
        const double v = split(theta_lo + i * h);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = theta_lo + std::max(0, best - 1) * h;
    const double b = theta_lo + std::min(samples, best + 1) * h;
    const double th = golden_max([&](double t) { return -split(t); }, a, b, 1e-12);
    const double v = split(th);
    if (v < best_val)
        return {th, v};
    return {theta_lo + best * h, best_val};
}

double reflectance(const OpticalParams& p, double theta_deg, double energy)
{
    const double ec = cavity_dispersion(p, theta_deg);
    const cplx emitter = 0.5 * p.gamma_perp - I * (energy - p.delta);
    cplx d = 0.5 * p.kappa - I * (energy - ec);
    if (p.g_coll != 0.0)
        d += p.g_coll * p.g_coll / emitter;
    return std::norm(1.0 - p.kappa_ext / d);
}

std::vector<double> reflectance_spectrum(const OpticalParams& p, double theta_deg,
                                         std::span<const double> energies)
{
    validate(p);
    std::vector<double> out;
    out.reserve(energies.size());
    for (double e : energies) {
        const double r = reflectance(p, theta_deg, e);
        if (!(r >= -1e-12 && r <= 1.0 + 1e-12)) {
            std::ostringstream os;
            os << "reflectance " << r << " outside [0, 1] at E=" << e;
            throw Error("InvalidReflectance", os.str());
        }
        out.push_back(r);
    }
    return out;
}

std::vector<std::size_t> local_minima(std::span<const double> v)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] < v[i - 1] && v[i] <= v[i + 1]) {
            // A flat bottom counts once, at its left edge.
            std::size_t j = i;
            while (j + 1 < v.size() && v[j + 1] == v[i])
                ++j;
            if (j + 1 < v.size() && v[j + 1] > v[i])
                idx.push_back(i);
            i = j;
        }
    }
    return idx;
}

ReflectanceMap reflectance_map(const OpticalParams& p, std::span<const double> thetas,
                               std::span<const double> energies)
{
    validate(p);
    ReflectanceMap map;
    map.thetas.assign(thetas.begin(), thetas.end());
    map.energies.assign(energies.begin(), energies.end());
    map.r_values.reserve(thetas.size());
    for (double th : thetas) {
        map.r_values.push_back(reflectance_spectrum(p, th, energies));
        const auto m = polariton_eigenmodes(p, th);
        map.lp_branch.push_back(m.lp);
        map.up_branch.push_back(m.up);
    }
    return map;
}

std::vector<double> linear_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo))
        throw Error("InvalidGrid", "grid needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + static_cast<double>(i) * step;
    return g;
}

EmissionPeak emission_fwhm(const OpticalParams& p, double theta_deg)
{
    validate(p);
    if (!(p.kappa > 0.0) || !(p.gamma_perp > 0.0))
        throw Error("PeakNotFound", "emission model needs kappa > 0 and gamma_perp > 0");
    const double ec = cavity_dispersion(p, theta_deg);
    auto s = [&](double e) { return lorentzian(e, p.delta, p.gamma_perp) * lorentzian(e, ec, p.kappa); };

    // Both factors fall off outside [min(Delta, Ec), max(Delta, Ec)], so every
    // maximum lies inside that interval.
    const double lo = std::min(p.delta, ec), hi = std::max(p.delta, ec);
    double center = lo;
    if (hi > lo) {
        constexpr int samples = 4000;
        const double h = (hi - lo) / samples;
        std::vector<double> v(samples + 1);
        for (int i = 0; i <= samples; ++i)
            v[static_cast<std::size_t>(i)] = s(lo + i * h);
        int maxima = 0, best = 0;
        for (int i = 0; i <= samples; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const bool left_ok = i == 0 || v[k] > v[k - 1];
            const bool right_ok = i == samples || v[k] >= v[k + 1];
            if (left_ok && right_ok)
                ++maxima;
            if (v[k] > v[static_cast<std::size_t>(best)])
                best = i;
        }
        if (maxima != 1) {
            std::ostringstream os;
            os << "emission spectrum has " << maxima
               << " maxima; emitter and cavity are too far apart to define one peak";
            throw Error("PeakNotFound", os.str());
        }
        const double a = lo + std::max(0, best - 1) * h;
        const double b = lo + std::min(samples, best + 1) * h;
        center = golden_max(s, a, b, 1e-15);
    }
    const double peak = s(center);
    if (!(peak > 1e-300))
        throw Error("PeakNotFound", "emission spectrum underflows");
    const double half = 0.5 * peak;

    // Expanding bracket then bisection on each side.
    auto crossing = [&](double dir) {
        double step = 0.25 * std::min(p.kappa, p.gamma_perp);
        double inner = center, outer = center + dir * step;
        while (s(outer) > half) {
            inner = outer;
            step *= 2.0;
            outer = center + dir * step;
        }
        for (int it = 0; it < 200 && std::abs(outer - inner) > 1e-13 * std::abs(center); ++it) {
            const double mid = 0.5 * (inner + outer);
            (s(mid) > half ? inner : outer) = mid;
        }
        return 0.5 * (inner + outer);
    };
    const double right = crossing(+1.0);
    const double left = crossing(-1.0);
    return {center, right - left};
}

double coherence_length(double lambda_nm, double delta_lambda_nm)
{
    if (!(delta_lambda_nm > 0.0))
        throw Error("ZeroLinewidth", "coherence length needs a positive linewidth");
    if (!(lambda_nm > 0.0))
        throw Error("InvalidArgument", "wavelength must be > 0");
    return lambda_nm * lambda_nm / delta_lambda_nm * 1e-3;
}

double fit_coupling_scaling(std::span<const std::pair<double, double>> points)
{
    return scaling::fit_power_law(points).alpha;
}

}  // namespace superrad::optics
