#include "superrad/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "superrad/integrator.hpp"

namespace superrad::cumulant {

namespace {

using Array = std::array<double, MomentState::size>;
using Vec7 = Eigen::Matrix<double, MomentState::size, 1>;
using Mat7 = Eigen::Matrix<double, MomentState::size, MomentState::size>;

constexpr cplx I{0.0, 1.0};

Array rhs_array(const ValidatedParams& p, const Array& x, ClosureVariant v)
{
    return moment_rhs(p, MomentState::from_array(x), v).to_array();
}

double inf_norm(const Array& a)
{
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

bool all_finite(const Array& a)
{
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Vec7 to_vec(const Array& a) { return Eigen::Map<const Vec7>(a.data()); }

Array to_array(const Vec7& v)
{
    Array a;
    Eigen::Map<Vec7>(a.data()) = v;
    return a;
}

Mat7 jacobian(const ValidatedParams& p, const Array& x, ClosureVariant v)
{
    Mat7 j;
    for (std::size_t k = 0; k < MomentState::size; ++k) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
        Array xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        j.col(static_cast<Eigen::Index>(k)) =
            (to_vec(rhs_array(p, xp, v)) - to_vec(rhs_array(p, xm, v))) / (2.0 * h);
    }
    return j;
}

[[noreturn]] void throw_non_finite(double t)
{
    std::ostringstream os;
    os << "moment state became non-finite at t=" << t;
    throw Error("NonFiniteState", os.str());
}

// Backward-Euler pseudo-transient continuation with switched-evolution-
// relaxation step growth. Returns true once ||f|| <= tol.
bool pseudo_transient(const ValidatedParams& p, Array& x, double tol, ClosureVariant v,
                      double dt0)
{
    Array f = rhs_array(p, x, v);
    double fn = inf_norm(f);
    double dt = dt0;
    for (int iter = 0; iter < 10'000 && fn > tol; ++iter) {
        const Mat7 a = Mat7::Identity() / dt - jacobian(p, x, v);
        const Vec7 step = a.partialPivLu().solve(to_vec(f));
        Array trial = to_array(to_vec(x) + step);
        Array ft = rhs_array(p, trial, v);
        const double ftn = inf_norm(ft);
        if (!all_finite(trial) || !std::isfinite(ftn) || ftn > 10.0 * fn) {
            dt *= 0.25;
            if (dt < 1e-12)
                return false;
            continue;
        }
        dt = std::min(1e12, dt * std::clamp(fn / std::max(ftn, 1e-300), 0.5, 10.0));
        x = trial;
        f = ft;
        fn = ftn;
    }
    return fn <= tol;
}

}  // namespace

// ---------------------------------------------------------------------------

std::array<double, MomentState::size> MomentState::to_array() const
{
    return {n_photon, s_z, coh.real(), coh.imag(), x_pm.real(), x_pm.imag(), z_zz};
}

MomentState MomentState::from_array(const std::array<double, size>& v)
{
    return {v[0], v[1], {v[2], v[3]}, {v[4], v[5]}, v[6]};
}

bool is_physical(const MomentState& m)
{
    if (!all_finite(m.to_array()))
        return false;
    return m.n_photon >= -1e-9 && std::abs(m.s_z) <= 1.0 + 1e-9 &&
           std::abs(m.z_zz) <= 1.0 + 1e-9 && std::abs(m.x_pm) <= 1.0;
}

cplx closure_triple(cplx a_mean, cplx b_mean, cplx c_mean, cplx ab, cplx ac, cplx bc,
                    ClosureVariant variant)
{
    const double k = variant == ClosureVariant::AsPrinted ? 1.0 : 2.0;
    return a_mean * bc + b_mean * ac + ab * c_mean - k * a_mean * b_mean * c_mean;
}

MomentTriples close_triples(const MomentState& m, ClosureVariant variant)
{
    // First moments <a>, <a^+>, <sigma^->, and the U(1)-odd pairs
    // <sigma^z a^+>, <sigma^z sigma^->, vanish under incoherent drive.
    const cplx zero{};
    MomentTriples t;
    // A = sigma_1^z, B = a^+, C = a
    t.sz_n = closure_triple(m.s_z, zero, zero, zero, zero, m.n_photon, variant).real();
    // A = sigma_2^z, B = a^+, C = sigma_1^-
    t.z_coh = closure_triple(m.s_z, zero, zero, zero, zero, m.coh, variant);
    return t;
}

MomentState moment_rhs_with_triples(const ValidatedParams& vp, const MomentState& m,
                                    const MomentTriples& t)
{
    const SystemParams& p = vp.get();
    const double n = static_cast<double>(p.n_emitters);
    const double g = p.g;
    const double gamma = 0.5 * (p.omega + p.gamma_minus) + 2.0 * p.gamma_z;
    const double im_coh = m.coh.imag();

    MomentState d;
    d.n_photon = -p.kappa * m.n_photon + 2.0 * g * n * im_coh;
    d.s_z = -4.0 * g * im_coh + p.omega * (1.0 - m.s_z) - p.gamma_minus * (1.0 + m.s_z);
    d.coh = (I * p.detuning() - 0.5 * p.kappa - gamma) * m.coh +
            I * g * (0.5 * (1.0 + m.s_z) + (n - 1.0) * m.x_pm + t.sz_n);
    d.x_pm = -2.0 * gamma * m.x_pm + I * g * (std::conj(t.z_coh) - t.z_coh);
    d.z_zz = (4.0 * I * g * (t.z_coh - std::conj(t.z_coh))).real() +
             2.0 * ((p.omega - p.gamma_minus) * m.s_z - (p.omega + p.gamma_minus) * m.z_zz);
    return d;
}

MomentState moment_rhs(const ValidatedParams& p, const MomentState& m, ClosureVariant variant)
{
    return moment_rhs_with_triples(p, m, close_triples(m, variant));
}

double derivative_norm(const MomentState& d) { return inf_norm(d.to_array()); }

MomentState integrate_to_steady_state(const ValidatedParams& p, const MomentState& m0,
                                      double tol, const SolverOptions& opts, SolveStats* stats)
{
    if (!(tol > 0.0))
        throw Error("InvalidArgument", "steady-state tolerance must be > 0");
    SolveStats local;
    SolveStats& st = stats ? *stats : local;
    st = SolveStats{};

    Array x = m0.to_array();
    if (!all_finite(x))
        throw_non_finite(0.0);

    auto system = [&](const Array& in, Array& out) { out = rhs_array(p, in, opts.closure); };
    auto error_ratio = [&](const Array& xn, const Array& err, double) {
        double r = 0.0;
        for (std::size_t k = 0; k < err.size(); ++k)
            r = std::max(r, std::abs(err[k]) / (opts.abs_tol + opts.rel_tol * std::abs(xn[k])));
        return r;
    };

    bool converged = false;
    double mark_norm = inf_norm(rhs_array(p, x, opts.closure));
    std::int64_t mark_step = 0;
    auto observer = [&](const Array& xs, const Array& dxdt, double t) {
        if (!all_finite(xs) || !all_finite(dxdt))
            throw_non_finite(t);
        ++st.explicit_steps;
        const double norm = inf_norm(dxdt);
        if (norm <= tol) {
            converged = true;
            return true;
        }
        if (norm < 0.5 * mark_norm) {
            mark_norm = norm;
            mark_step = st.explicit_steps;
        }
        return st.explicit_steps >= opts.max_explicit_steps ||
               st.explicit_steps - mark_step >= opts.stall_steps;
    };

    const SystemParams& sp = p.get();
    const double fastest = std::max({sp.kappa, sp.omega, sp.gamma_minus, sp.gamma_z, sp.g, 1e-12});
    StepControl ctl;
    ctl.dt_init = 1e-3 / fastest;
    ctl.dt_max = 1e6;
    st.t_reached = integrate_adaptive(system, x, 0.0, opts.t_max, ctl, error_ratio, observer);

    if (!converged) {
        if (st.t_reached >= opts.t_max) {
            std::ostringstream os;
            os << "no steady state within t_max=" << opts.t_max << " (||dm/dt|| = "
               << inf_norm(rhs_array(p, x, opts.closure)) << ")";
            throw Error("NoConvergence", os.str());
        }
        st.implicit_fallback = true;
        if (!pseudo_transient(p, x, tol, opts.closure, 1.0 / fastest)) {
            if (!all_finite(x))
                throw_non_finite(st.t_reached);
            std::ostringstream os;
            os << "explicit integration stopped at t=" << st.t_reached
               << " and implicit continuation failed (||dm/dt|| = "
               << inf_norm(rhs_array(p, x, opts.closure)) << ")";
            throw Error("NoConvergence", os.str());
        }
    }

    if (opts.newton_refine) {
        Array f = rhs_array(p, x, opts.closure);
        const double f0 = inf_norm(f);
        if (f0 > 0.0) {
            const Vec7 step = jacobian(p, x, opts.closure).partialPivLu().solve(-to_vec(f));
            const Array trial = to_array(to_vec(x) + step);
            if (step.allFinite() && step.cwiseAbs().maxCoeff() <= 10.0 * tol &&
                inf_norm(rhs_array(p, trial, opts.closure)) < f0) {
                x = trial;
                st.newton_applied = true;
            }
        }
    }
    st.residual = inf_norm(rhs_array(p, x, opts.closure));
    return MomentState::from_array(x);
}

double photon_flux_cumulant(const ValidatedParams& p, const SolverOptions& opts)
{
    if (p->g == 0.0 || p->omega == 0.0)
        return 0.0;
    const MomentState m = integrate_to_steady_state(p, MomentState::dark(), 1e-10, opts);
    return p->kappa * m.n_photon;
}

FluxDecomposition flux_decomposition(const ValidatedParams& vp, const MomentState& m)
{
    // With d A/dt = 0: A = i g S / (K - i delta), K = kappa/2 + Gamma, and
    // kappa n = 2 g N Im A = 2 g^2 N Re[S (K + i delta)] / (K^2 + delta^2).
    const SystemParams& p = vp.get();
    const double gamma = 0.5 * (p.omega + p.gamma_minus) + 2.0 * p.gamma_z;
    const cplx k(0.5 * p.kappa + gamma, p.detuning());
    const double denom = std::norm(k);
    const double g2 = p.g * p.g;
    const cplx single_source = 0.5 * (1.0 + m.s_z) + m.s_z * m.n_photon;

    FluxDecomposition fd;
    fd.n = p.n_emitters;
    fd.single = 2.0 * g2 * (single_source * k).real() / denom;
    fd.pair = 2.0 * g2 * (m.x_pm * k).real() / denom;
    return fd;
}

}  // namespace superrad::cumulant
