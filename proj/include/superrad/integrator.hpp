#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "superrad/error.hpp"

namespace superrad {

struct StepControl
{
    double dt_init = 1e-3;
    double dt_max = 1.0;
    /// Minimum step relative to max(1, |t|) before StepSizeUnderflow.
    double dt_min_rel = 1e-14;
    /// Step-size exponent; 1/5 for error-per-step, 1/4 for error-per-unit-time.
    double exponent = 0.2;
};

/// Adaptive Dormand-Prince integration of dx/dt = f(x) from t0 to t1.
///
/// `error_ratio(x, xerr, dt)` returns the local error scaled by the admitted
/// error; a step is accepted when it is <= 1. `observer(x, dxdt, t)` runs
/// after every accepted step and returns true to stop early. Returns the
/// time reached.
template <class State, class System, class ErrorRatio, class Observer>
double integrate_adaptive(System&& system, State& x, double t0, double t1,
                          const StepControl& ctl, ErrorRatio&& error_ratio,
                          Observer&& observer)
{
    namespace odeint = boost::numeric::odeint;
    using stepper_type = odeint::runge_kutta_dopri5<State>;

    if (t1 <= t0)
        return t0;

    auto rhs = [&](const State& in, State& out, double /*t*/) { system(in, out); };

    stepper_type stepper;
    State dxdt = x, x_new = x, dxdt_new = x, xerr = x;
    system(x, dxdt);

    double t = t0;
    double dt = std::min({ctl.dt_init, ctl.dt_max, t1 - t0});
    const double exponent = ctl.exponent;

    if (observer(x, dxdt, t))
        return t;

    while (t < t1) {
        dt = std::min(dt, t1 - t);
        if (dt < ctl.dt_min_rel * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "step size underflow at t=" << t << " (dt=" << dt << ")";
            throw Error("StepSizeUnderflow", os.str());
        }
        stepper.do_step(rhs, x, dxdt, t, x_new, dxdt_new, dt, xerr);
        const double ratio = error_ratio(x_new, xerr, dt);
        if (!std::isfinite(ratio)) {
            dt *= 0.1;
            continue;
        }
        if (ratio <= 1.0) {
            t += dt;
            std::swap(x, x_new);
            std::swap(dxdt, dxdt_new);
            if (observer(x, dxdt, t))
                return t;
            const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -exponent) : 5.0;
            dt = std::min(ctl.dt_max, dt * std::clamp(grow, 1.0, 5.0));
        } else {
            dt *= std::clamp(0.9 * std::pow(ratio, -exponent), 0.1, 0.9);
        }
    }
    return t;
}

}  // namespace superrad
