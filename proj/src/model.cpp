#include "superrad/model.hpp"

#include <cmath>
#include <sstream>

namespace superrad {

namespace {

std::string describe(const std::vector<Violation>& violations)
{
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& v : violations)
        os << ' ' << v.code << '(' << v.field << ')';
    return os.str();
}

}  // namespace

ParamError::ParamError(std::vector<Violation> violations)
    : Error(violations.empty() ? std::string("InvalidParams") : violations.front().code,
            describe(violations)),
      m_violations(std::move(violations))
{
}

ValidatedParams validate_params(const SystemParams& p)
{
    std::vector<Violation> bad;
    if (p.n_emitters < 1)
        bad.push_back({"ZeroEmitters", "n_emitters"});

    auto energy = [&](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0))
            bad.push_back({"NonPositiveEnergy", name});
    };
    energy(p.delta, "delta");
    energy(p.delta_c, "delta_c");

    auto rate = [&](double v, const char* name) {
        if (!(std::isfinite(v) && v >= 0.0))
            bad.push_back({"NegativeRate", name});
    };
    rate(p.g, "g");
    rate(p.kappa, "kappa");
    rate(p.omega, "omega");
    rate(p.gamma_minus, "gamma_minus");
    rate(p.gamma_z, "gamma_z");

    if (!bad.empty())
        throw ParamError(std::move(bad));
    return ValidatedParams(p);
}

double omega_of_voltage(const DriveMap& d, double v)
{
    if (!(d.slope_mu >= 0.0) || !std::isfinite(d.slope_mu))
        throw Error("InvalidDrive", "drive slope_mu must be finite and >= 0");
    if (!std::isfinite(v) || !std::isfinite(d.v_on))
        throw Error("InvalidDrive", "voltage must be finite");
    return d.slope_mu * std::max(0.0, v - d.v_on);
}

double collective_coupling(double g_single, std::int64_t n)
{
    return g_single * std::sqrt(static_cast<double>(n));
}

double single_coupling(double g_coll, std::int64_t n)
{
    return g_coll / std::sqrt(static_cast<double>(n));
}

}  // namespace superrad
