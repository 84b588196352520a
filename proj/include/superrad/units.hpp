#pragma once

namespace superrad::units {

// hbar = 1 throughout; energies and rates are in meV.

/// One simulation time unit (hbar / meV) in picoseconds.
inline constexpr double time_unit_ps = 0.6582119569;

/// Photon energy [meV] times wavelength [nm].
inline constexpr double hc_mev_nm = 1239842.0;

inline constexpr double mev_from_nm(double lambda_nm) { return hc_mev_nm / lambda_nm; }
inline constexpr double nm_from_mev(double energy_mev) { return hc_mev_nm / energy_mev; }

/// Converts a linewidth given in wavelength units at a centre wavelength to
/// an energy linewidth, dE = hc * dlambda / lambda^2 (first order).
inline constexpr double linewidth_mev_from_nm(double delta_lambda_nm, double lambda_nm)
{
    return hc_mev_nm * delta_lambda_nm / (lambda_nm * lambda_nm);
}

}  // namespace superrad::units
