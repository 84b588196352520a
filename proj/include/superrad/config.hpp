#pragma once

// Run configuration: a YAML document with a strict schema. Unknown keys,
// missing required keys and ill-typed scalars are hard errors.
//
//   command: sweep            # validate | exact | cumulant | sweep | reflectance | fit | g2
//   output_dir: out
//   format: csv               # csv | json
//   seed: 0
//   params:      {n_emitters, delta, delta_c, g, kappa, omega, gamma_minus, gamma_z}
//   drive:       {v_on, slope_mu, voltage}          # optional, overrides params.omega
//   exact:       {n_max, dim_cap}                   # optional
//   solver:      {tol, closure: as_printed | double_subtract}   # optional
//   sweep:       {n_values, drive_rule: scaled | fixed, omega_1, gamma_r}
//   optics:      {e_c0, n_eff, delta, g_coll, kappa, kappa_ext, gamma_perp}
//   grid:        {theta_min, theta_max, theta_step, energy_min, energy_max, energy_step}
//   fit:         {points: [[n, y], ...]} or {synthetic: {n_values, alpha, prefactor, noise_sigma}}

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "superrad/cumulant.hpp"
#include "superrad/error.hpp"
#include "superrad/model.hpp"
#include "superrad/optics.hpp"
#include "superrad/scaling.hpp"

namespace superrad::io {

enum class Command { Validate, Exact, Cumulant, Sweep, Reflectance, Fit, G2 };
enum class Format { Csv, Json };

std::string to_string(Command c);
std::string to_string(Format f);
/// Throws Error("UnknownCommand").
Command parse_command(const std::string& s);
/// Throws Error("TypeMismatch").
Format parse_format(const std::string& s);

struct DriveSection
{
    DriveMap map;
    double voltage = 0.0;
    bool operator==(const DriveSection& o) const
    {
        return map.v_on == o.map.v_on && map.slope_mu == o.map.slope_mu && voltage == o.voltage;
    }
};

struct ExactSection
{
    int n_max = 3;
    std::int64_t dim_cap = 4096;
    bool operator==(const ExactSection&) const = default;
};

struct SolverSection
{
    double tol = 1e-10;
    cumulant::ClosureVariant closure = cumulant::ClosureVariant::AsPrinted;
    bool operator==(const SolverSection&) const = default;
};

struct SweepSection
{
    std::vector<std::int64_t> n_values;
    scaling::DriveRule drive_rule = scaling::DriveRule::Scaled;
    double omega_1 = 1e-4;
    double gamma_r = 1e-3;
    bool operator==(const SweepSection&) const = default;
};

struct GridSection
{
    double theta_min = 0.0;
    double theta_max = 64.0;
    double theta_step = 1.0;
    double energy_min = 2000.0;
    double energy_max = 2700.0;
    double energy_step = 1.0;
    bool operator==(const GridSection&) const = default;
};

struct SyntheticFit
{
    std::vector<double> n_values;
    double alpha = 0.0;
    double prefactor = 1.0;
    double noise_sigma = 0.0;  // log-normal multiplicative noise
    bool operator==(const SyntheticFit&) const = default;
};

struct FitSection
{
    std::vector<std::pair<double, double>> points;
    std::optional<SyntheticFit> synthetic;
    bool operator==(const FitSection&) const = default;
};

struct RunConfig
{
    Command command = Command::Validate;
    std::optional<SystemParams> params;
    std::optional<DriveSection> drive;
    std::optional<ExactSection> exact;
    std::optional<SolverSection> solver;
    std::optional<SweepSection> sweep;
    std::optional<optics::OpticalParams> optics;
    std::optional<GridSection> grid;
    std::optional<FitSection> fit;
    std::string output_dir = ".";
    Format format = Format::Csv;
    std::uint64_t seed = 0;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a configuration document. `command` supplies the
/// command when the document has none; if both are given they must agree.
/// Errors: SyntaxError (with line:column), UnknownKey, MissingKey,
/// MissingSection, TypeMismatch, UnknownCommand, CommandMismatch.
RunConfig parse_config(const std::string& text, std::optional<Command> command = std::nullopt);

/// YAML document that parse_config maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace superrad::io
