#pragma once

// Second-order cumulant dynamics of the incoherently driven Tavis-Cummings
// model for arbitrary N, assuming identical emitters (exact permutation
// symmetry) and vanishing first moments <a> = <sigma^-> = 0.
//
// Equations (rotating frame, delta = Delta_c - Delta,
// Gamma = (omega + gamma^-)/2 + 2 gamma^z):
//
//   d<a^+a>/dt       = -kappa n + 2 g N Im A
//   d<sz>/dt         = -4 g Im A + omega (1 - s) - gamma^- (1 + s)
//   d<a^+ s1^->/dt   = (i delta - kappa/2 - Gamma) A
//                      + i g [ (1 + s)/2 + (N - 1) X + <s1^z a^+ a> ]
//   d<s1^+ s2^->/dt  = -2 Gamma X + i g ( <s1^+ a s2^z> - <a^+ s2^- s1^z> )
//   d<s1^z s2^z>/dt  = 4 i g ( <s2^z a^+ s1^-> - c.c. )
//                      + 2 [ (omega - gamma^-) s - (omega + gamma^-) Z ]
//
// with the three-body moments replaced by closure_triple.

#include <array>
#include <complex>
#include <cstdint>

#include "superrad/model.hpp"

namespace superrad::cumulant {

using cplx = std::complex<double>;

struct MomentState
{
    double n_photon = 0.0;  // <a^+ a>
    double s_z = -1.0;      // <sigma^z>
    cplx coh{};             // <a^+ sigma^->
    cplx x_pm{};            // <sigma_i^+ sigma_j^->, i != j
    double z_zz = 1.0;      // <sigma_i^z sigma_j^z>, i != j

    /// Vacuum field, all emitters in the ground state.
    static MomentState dark() { return {}; }
    /// Vacuum field, uncorrelated emitters with <sigma^z> = 0.
    static MomentState half_inverted() { return {0.0, 0.0, {}, {}, 0.0}; }

    static constexpr std::size_t size = 7;
    std::array<double, size> to_array() const;
    static MomentState from_array(const std::array<double, size>& v);

    bool operator==(const MomentState&) const = default;
};

/// Loose invariants: n >= -1e-9, |s_z|, |z_zz| <= 1 + 1e-9, |x_pm| <= 1, all
/// finite.
bool is_physical(const MomentState& m);

enum class ClosureVariant
{
    AsPrinted,       // <A><BC> + <B><AC> + <AB><C> - <A><B><C>
    DoubleSubtract,  // ... - 2 <A><B><C> (third cumulant set to zero)
};

/// <ABC> from first and second moments.
cplx closure_triple(cplx a_mean, cplx b_mean, cplx c_mean, cplx ab, cplx ac, cplx bc,
                    ClosureVariant variant = ClosureVariant::AsPrinted);

/// The three-body moments entering the hierarchy.
struct MomentTriples
{
    double sz_n = 0.0;  // <sigma_1^z a^+ a>
    cplx z_coh{};       // <sigma_2^z a^+ sigma_1^->
};

/// Third-order moments estimated from a MomentState with the closure.
MomentTriples close_triples(const MomentState& m, ClosureVariant variant = ClosureVariant::AsPrinted);

/// Time derivatives of the moment set given explicit three-body moments.
MomentState moment_rhs_with_triples(const ValidatedParams& p, const MomentState& m,
                                    const MomentTriples& t);

/// Time derivatives of the closed moment set.
MomentState moment_rhs(const ValidatedParams& p, const MomentState& m,
                       ClosureVariant variant = ClosureVariant::AsPrinted);

struct SolverOptions
{
    ClosureVariant closure = ClosureVariant::AsPrinted;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double t_max = 1e6;
    /// Explicit steps attempted before falling back to the implicit scheme.
    std::int64_t max_explicit_steps = 2'000'000;
    /// Explicit steps without halving ||dm/dt|| before the implicit scheme
    /// takes over.
    std::int64_t stall_steps = 20'000;
    bool newton_refine = true;
};

struct SolveStats
{
    double t_reached = 0.0;
    std::int64_t explicit_steps = 0;
    bool implicit_fallback = false;
    bool newton_applied = false;
    double residual = 0.0;  // final ||d m/dt||_inf
};

/// Infinity norm over the seven real components of the derivative.
double derivative_norm(const MomentState& d);

/// Integrates moment_rhs from m0 until ||d m/dt||_inf <= tol. The adaptive
/// explicit integration is authoritative; a backward-Euler pseudo-transient
/// continuation takes over only when the explicit budget is exhausted or the
/// residual stalls at the step-size stability limit. A Newton polish is kept
/// only if it moves no component by more than 10 tol.
/// Throws Error("NoConvergence") or Error("NonFiniteState").
MomentState integrate_to_steady_state(const ValidatedParams& p, const MomentState& m0,
                                      double tol = 1e-10, const SolverOptions& opts = {},
                                      SolveStats* stats = nullptr);

/// kappa * <a^+ a> of the steady state reached from the dark state.
double photon_flux_cumulant(const ValidatedParams& p, const SolverOptions& opts = {});

/// Steady-state flux split into the independent-emitter and pair-correlation
/// channels: kappa n = N single + N (N - 1) pair, re-derived from the field
/// equation.
struct FluxDecomposition
{
    double single = 0.0;  // per-emitter term
    double pair = 0.0;    // per-pair term, proportional to Re <sigma_i^+ sigma_j^->
    std::int64_t n = 1;

    double total() const
    {
        const double nn = static_cast<double>(n);
        return nn * single + nn * (nn - 1.0) * pair;
    }
};

FluxDecomposition flux_decomposition(const ValidatedParams& p, const MomentState& m);

}  // namespace superrad::cumulant
