#pragma once

// Coupled-oscillator optics of a planar microcavity: angular dispersion,
// polariton eigenmodes, single-port reflectance, cavity-filtered emission and
// coherence length. Energies and linewidths (FWHM) in meV, angles in degrees.

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "superrad/error.hpp"

namespace superrad::optics {

using cplx = std::complex<double>;

struct OpticalParams
{
    double e_c0 = 2307.2;     // cavity energy at normal incidence
    double n_eff = 1.8;       // effective intracavity index
    double delta = 2350.0;    // emitter transition energy
    double g_coll = 11.0;     // collective coupling g sqrt(N)
    double kappa = 134.0;     // total cavity linewidth
    double kappa_ext = 67.0;  // external (mirror) linewidth
    double gamma_perp = 331.0;  // emitter homogeneous linewidth

    bool operator==(const OpticalParams&) const = default;
};

/// Throws Error("InvalidOpticalParams") naming the first violated invariant:
/// n_eff > 1, 0 <= kappa_ext <= kappa, linewidths >= 0, energies > 0.
void validate(const OpticalParams& p);

/// Normal-incidence cavity energy that puts the cavity on resonance with
/// `delta` at `theta_deg`.
double resonant_cavity_energy(double delta, double n_eff, double theta_deg);

/// Defaults for the reference device: Delta = 2350 meV, g_coll = 11 meV,
/// kappa = 134 meV (30 nm at 527 nm), gamma_perp = 331 meV (75 nm at 530 nm),
/// critical coupling, and cavity-emitter resonance at 20 degrees.
OpticalParams reference_device();

/// e_c0 / sqrt(1 - sin^2(theta) / n_eff^2). Throws Error("AngleOutOfRange")
/// outside [0, 90).
double cavity_dispersion(const OpticalParams& p, double theta_deg);

struct PolaritonPair
{
    cplx lp;  // lower branch (smaller real part)
    cplx up;
};

/// Eigenvalues of [[Delta_c(theta) - i kappa/2, g], [g, Delta - i gamma/2]].
PolaritonPair polariton_eigenmodes(const OpticalParams& p, double theta_deg);

struct SplittingMinimum
{
    double theta_deg = 0.0;
    double splitting = 0.0;  // Re(UP - LP)
};

/// Minimum of Re(UP - LP) over [theta_lo, theta_hi].
SplittingMinimum min_branch_splitting(const OpticalParams& p, double theta_lo = 0.0,
                                      double theta_hi = 64.0);

/// R(E) = |1 - kappa_ext / D(E)|^2 with
/// D(E) = kappa/2 - i (E - Delta_c) + g^2 / (gamma/2 - i (E - Delta)).
double reflectance(const OpticalParams& p, double theta_deg, double energy);
std::vector<double> reflectance_spectrum(const OpticalParams& p, double theta_deg,
                                         std::span<const double> energies);

/// Indices of strict interior local minima.
std::vector<std::size_t> local_minima(std::span<const double> values);

struct ReflectanceMap
{
    std::vector<double> thetas;    // degrees
    std::vector<double> energies;  // meV
    std::vector<std::vector<double>> r_values;  // [theta][energy]
    std::vector<cplx> lp_branch;
    std::vector<cplx> up_branch;
};

ReflectanceMap reflectance_map(const OpticalParams& p, std::span<const double> thetas,
                               std::span<const double> energies);

/// Evenly spaced grid lo, lo + step, ..., up to hi (inclusive within 1e-9 step).
std::vector<double> linear_grid(double lo, double hi, double step);

struct EmissionPeak
{
    double center = 0.0;  // meV
    double fwhm = 0.0;    // meV
};

/// Peak and FWHM of S(E) = Lor(E; Delta, gamma) * Lor(E; Delta_c(theta), kappa).
/// Throws Error("PeakNotFound") when S has no single well-defined maximum.
EmissionPeak emission_fwhm(const OpticalParams& p, double theta_deg);

/// lambda^2 / delta_lambda in micrometres (inputs in nm).
/// Throws Error("ZeroLinewidth") for delta_lambda <= 0.
double coherence_length(double lambda_nm, double delta_lambda_nm);

/// Log-log slope of g_coll against n. Throws Error("InsufficientPoints").
double fit_coupling_scaling(std::span<const std::pair<double, double>> points);

}  // namespace superrad::optics
