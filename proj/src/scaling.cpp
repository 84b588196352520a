#include "superrad/scaling.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace superrad::scaling {

void validate_spec(const SweepSpec& spec)
{
    if (spec.n_values.empty())
        throw Error("InvalidSweep", "n_values is empty");
    for (std::size_t i = 0; i < spec.n_values.size(); ++i) {
        if (spec.n_values[i] < 1)
            throw Error("InvalidSweep", "n_values must all be >= 1");
        if (i > 0 && spec.n_values[i] <= spec.n_values[i - 1])
            throw Error("InvalidSweep", "n_values must be strictly increasing");
    }
    if (!(spec.omega_1 > 0.0) || !std::isfinite(spec.omega_1))
        throw Error("InvalidSweep", "omega_1 must be > 0");
    if (!(spec.gamma_r > 0.0) || !std::isfinite(spec.gamma_r))
        throw Error("InvalidSweep", "gamma_r must be > 0");
    validate_params(spec.base_params);
}

double drive_for(const SweepSpec& spec, std::int64_t n)
{
    return spec.drive_rule == DriveRule::Scaled ? spec.omega_1 * static_cast<double>(n)
                                                : spec.omega_1;
}

double control_luminance(std::int64_t n, double omega, double gamma_r, double gamma_minus)
{
    if (omega < 0.0 || gamma_r < 0.0 || gamma_minus < 0.0)
        throw Error("DegenerateRates", "control rates must be >= 0");
    const double denom = omega + gamma_minus + gamma_r;
    if (!(denom > 0.0))
        throw Error("DegenerateRates", "omega + gamma_minus + gamma_r = 0");
    return static_cast<double>(n) * gamma_r * omega / denom;
}

namespace {

SweepRow sweep_point(const SweepSpec& spec, std::int64_t n)
{
    SystemParams p = spec.base_params;
    p.n_emitters = n;
    p.omega = drive_for(spec, n);
    SweepRow row;
    row.n = n;
    row.omega = p.omega;
    try {
        row.l_cavity = cumulant::photon_flux_cumulant(validate_params(p), spec.solver);
    } catch (const Error& e) {
        std::ostringstream os;
        os << "sweep point n=" << n << ": " << e.what();
        throw Error(e.kind(), os.str());
    }
    row.l_control = control_luminance(n, p.omega, spec.gamma_r, p.gamma_minus);
    row.ratio = row.l_control > 0.0 ? row.l_cavity / row.l_control : 0.0;
    return row;
}

}  // namespace

std::vector<SweepRow> run_concentration_sweep(const SweepSpec& spec)
{
    validate_spec(spec);
    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(spec.n_values.size());
    for (std::int64_t n : spec.n_values)
        jobs.push_back(std::async(std::launch::async, sweep_point, std::cref(spec), n));
    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& j : jobs)
        rows.push_back(j.get());
    return rows;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 2)
        throw Error("InsufficientPoints", "power-law fit needs at least two points");
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& [n, v] : points) {
        if (!(n > 0.0) || !(v > 0.0) || !std::isfinite(n) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "power-law fit needs positive finite values, got (" << n << ", " << v << ")";
            throw Error("NonPositiveValue", os.str());
        }
        x.push_back(std::log(n));
        y.push_back(std::log(v));
    }
    const double m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw Error("InsufficientPoints", "power-law fit needs at least two distinct n");

    PowerLawFit fit;
    fit.alpha = sxy / sxx;
    const double intercept = my - fit.alpha * mx;
    fit.prefactor = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + fit.alpha * x[i]);
        ss += r * r;
    }
    fit.rmsd = std::sqrt(ss / m);
    return fit;
}

PowerLawFit fit_power_law(std::span<const SweepRow> rows)
{
    std::vector<std::pair<double, double>> pts;
    pts.reserve(rows.size());
    for (const auto& r : rows)
        pts.emplace_back(static_cast<double>(r.n), r.ratio);
    return fit_power_law(pts);
}

}  // namespace superrad::scaling
