#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "superrad/error.hpp"

namespace superrad {

/// Parameters of the incoherently driven Tavis-Cummings model.
/// All energies and rates in meV (hbar = 1).
struct SystemParams
{
    std::int64_t n_emitters = 1;
    double delta = 2350.0;    // emitter transition energy
    double delta_c = 2350.0;  // cavity mode energy at normal incidence
    double g = 0.0;           // per-emitter coupling
    double kappa = 0.0;       // cavity loss
    double omega = 0.0;       // incoherent pump
    double gamma_minus = 0.0; // non-radiative relaxation
    double gamma_z = 0.0;     // pure dephasing (rate multiplying L[sigma_z])

    /// Cavity-emitter detuning Delta_c - Delta, the only energy left after
    /// rotating both subsystems at Delta.
    double detuning() const { return delta_c - delta; }

    bool operator==(const SystemParams&) const = default;
};

struct Violation
{
    std::string code;   // NegativeRate | ZeroEmitters | NonPositiveEnergy
    std::string field;
};

/// Raised by validate_params; lists every violated invariant, kind() is the
/// code of the first one.
class ParamError : public Error
{
public:
    explicit ParamError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return m_violations; }

private:
    std::vector<Violation> m_violations;
};

/// A SystemParams record that has passed validation. Only validate_params
/// can produce one.
class ValidatedParams
{
public:
    const SystemParams& get() const noexcept { return m_params; }
    const SystemParams* operator->() const noexcept { return &m_params; }

    bool operator==(const ValidatedParams&) const = default;

private:
    explicit ValidatedParams(const SystemParams& p) : m_params(p) {}
    friend ValidatedParams validate_params(const SystemParams&);

    SystemParams m_params;
};

ValidatedParams validate_params(const SystemParams& p);

/// Affine-clamped voltage to pump-rate map.
struct DriveMap
{
    double v_on = 0.0;      // volts
    double slope_mu = 0.0;  // meV per volt above onset
};

/// slope_mu * max(0, v - v_on). Throws Error("InvalidDrive") for a negative
/// slope or a non-finite voltage.
double omega_of_voltage(const DriveMap& d, double v);

/// g_single * sqrt(n).
double collective_coupling(double g_single, std::int64_t n);

/// Inverse of collective_coupling: per-emitter g that yields g_coll at n.
double single_coupling(double g_coll, std::int64_t n);

}  // namespace superrad
