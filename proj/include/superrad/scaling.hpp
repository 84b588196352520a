#pragma once

// Concentration-scaling experiment: emitter-number sweeps of the cavity
// luminance (cumulant solver) against an extensive no-cavity control, and
// log-log power-law fits of their ratio.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "superrad/cumulant.hpp"
#include "superrad/model.hpp"

namespace superrad::scaling {

enum class DriveRule
{
    Scaled,  // omega = omega_1 * N
    Fixed,   // omega = omega_1
};

struct SweepSpec
{
    std::vector<std::int64_t> n_values;
    DriveRule drive_rule = DriveRule::Scaled;
    double omega_1 = 1e-4;
    /// Template for every point; n_emitters and omega are overridden. The
    /// per-emitter g is kept, so the collective coupling grows as sqrt(N).
    SystemParams base_params;
    /// Free-space radiative rate of the control emitters, meV.
    double gamma_r = 1e-3;
    cumulant::SolverOptions solver;
};

/// Throws Error("InvalidSweep") for unsorted or non-positive n_values,
/// omega_1 <= 0 or gamma_r <= 0, and ParamError for an invalid template.
void validate_spec(const SweepSpec& spec);

double drive_for(const SweepSpec& spec, std::int64_t n);

struct SweepRow
{
    std::int64_t n = 0;
    double omega = 0.0;      // meV
    double l_cavity = 0.0;   // kappa <a^+ a>, meV
    double l_control = 0.0;  // meV
    double ratio = 0.0;      // l_cavity / l_control

    bool operator==(const SweepRow&) const = default;
};

struct PowerLawFit
{
    double alpha = 0.0;
    double prefactor = 0.0;
    double rmsd = 0.0;  // RMS of the natural-log residuals
};

/// n * gamma_r * omega / (omega + gamma_minus + gamma_r): N independent
/// incoherently pumped two-level emitters radiating at gamma_r.
/// Throws Error("DegenerateRates") when the denominator vanishes.
double control_luminance(std::int64_t n, double omega, double gamma_r, double gamma_minus);

/// One row per n in spec order. Points run concurrently; the output order
/// and values do not depend on scheduling. Solver errors are rethrown with
/// the offending n in the message.
std::vector<SweepRow> run_concentration_sweep(const SweepSpec& spec);

/// Least-squares line through (ln n, ln y): alpha is the slope and
/// prefactor = exp(intercept). Throws Error("InsufficientPoints") with fewer
/// than two distinct n and Error("NonPositiveValue") for n <= 0 or y <= 0.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);
PowerLawFit fit_power_law(std::span<const SweepRow> rows);

}  // namespace superrad::scaling
