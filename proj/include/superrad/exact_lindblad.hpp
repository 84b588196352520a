#pragma once

// Brute-force solver for the driven-dissipative Tavis-Cummings model on the
// truncated space Fock(n_max) x (2-level)^N.
//
// Basis ordering: index = photons * 2^N + bits, where bit k of `bits` is set
// when emitter k is excited. Superoperators act on column-stacked density
// matrices, vec(A X B) = (B^T kron A) vec(X).

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "superrad/model.hpp"

namespace superrad::exact {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Lab: H exactly as written with absolute energies. Rotating: both the cavity
/// and the emitters rotate at Delta, leaving only the detuning Delta_c - Delta.
/// Every observable exposed here is invariant under the rotation.
enum class Frame { Rotating, Lab };

struct HilbertConfig
{
    int n_max = 3;
    int n_emitters = 1;
    std::int64_t dim_cap = 4096;

    /// (n_max + 1) * 2^N
    std::int64_t dim() const;
    std::int64_t emitter_dim() const { return std::int64_t{1} << n_emitters; }
};

/// Throws Error("DimensionCap") when the Hilbert dimension exceeds h.dim_cap
/// or when the superoperator dimension exceeds `superoperator_cap`.
void check_dimension(const HilbertConfig& h);

/// Largest superoperator dimension D^2 admitted for the direct steady-state
/// solve.
inline constexpr std::int64_t superoperator_cap = std::int64_t{1} << 18;

/// Sparse D x D operators on the truncated space.
class Operators
{
public:
    explicit Operators(const HilbertConfig& h);

    const HilbertConfig& config() const { return m_h; }
    std::int64_t dim() const { return m_dim; }

    SparseMatrix identity() const;
    SparseMatrix a() const;                // photon annihilation
    SparseMatrix sigma_minus(int k) const;
    SparseMatrix sigma_plus(int k) const;
    SparseMatrix sigma_z(int k) const;
    SparseMatrix photon_number() const;

    SparseMatrix hamiltonian(const SystemParams& p, Frame frame) const;

private:
    void check_index(int k) const;

    HilbertConfig m_h;
    std::int64_t m_dim;
};

/// Density matrix on a HilbertConfig. Construction enforces Hermiticity,
/// unit trace and positivity (tolerances below).
class DensityMatrix
{
public:
    static constexpr double hermiticity_tol = 1e-10;
    static constexpr double trace_tol = 1e-9;
    static constexpr double positivity_tol = 1e-8;

    /// Throws Error("InvalidDensityMatrix") if an invariant is violated.
    DensityMatrix(const HilbertConfig& h, Matrix rho);

    /// |photons, bits><photons, bits|
    static DensityMatrix basis_state(const HilbertConfig& h, int photons, std::uint64_t bits);
    /// |psi><psi| / <psi|psi>
    static DensityMatrix pure(const HilbertConfig& h, const Vector& psi);

    const HilbertConfig& config() const { return m_h; }
    const Matrix& matrix() const { return m_rho; }
    std::int64_t dim() const { return m_rho.rows(); }

    Vector vec() const;

private:
    HilbertConfig m_h;
    Matrix m_rho;
};

class Liouvillian
{
public:
    Liouvillian(const HilbertConfig& h, SparseMatrix l) : m_h(h), m_l(std::move(l)) {}

    const HilbertConfig& config() const { return m_h; }
    const SparseMatrix& matrix() const { return m_l; }
    /// D^2
    std::int64_t dim() const { return m_l.rows(); }

    /// L applied to a D x D matrix.
    Matrix apply(const Matrix& rho) const;

    /// ||vec(I)^T L||_inf, zero for a trace-preserving generator.
    double trace_defect() const;

private:
    HilbertConfig m_h;
    SparseMatrix m_l;
};

/// The Lindblad dissipator L[c] rho = c rho c^+ - 1/2 {c^+ c, rho} as a
/// superoperator.
SparseMatrix dissipator(const SparseMatrix& c);

Liouvillian build_liouvillian(const ValidatedParams& p, const HilbertConfig& h,
                              Frame frame = Frame::Rotating);

/// Solves L vec(rho) = 0 with one redundant row replaced by the trace
/// constraint. Throws Error("DegenerateSteadyState") if the steady state is not
/// unique or fails the residual bound.
DensityMatrix steady_state_exact(const Liouvillian& l);

/// ||L vec(rho)||_inf
double steady_state_residual(const Liouvillian& l, const DensityMatrix& rho);

/// Adaptive explicit integration of d rho/dt = L rho with a local error of at
/// most `tol_per_time` per unit time (infinity norm over entries).
DensityMatrix time_evolve(const Liouvillian& l, const DensityMatrix& rho0, double t_final,
                          double dt_max, double tol_per_time = 1e-9);

struct Observable
{
    enum class Kind { PhotonNumber, SigmaZ, CrossPm, CrossZz, FieldCoherence, PhotonPair };
    Kind kind = Kind::PhotonNumber;
    int i = 0;
    int j = 0;

    static Observable photon_number() { return {Kind::PhotonNumber, 0, 0}; }
    static Observable sigma_z(int n) { return {Kind::SigmaZ, n, 0}; }
    /// <sigma_i^+ sigma_j^->
    static Observable cross_pm(int i, int j) { return {Kind::CrossPm, i, j}; }
    static Observable cross_zz(int i, int j) { return {Kind::CrossZz, i, j}; }
    /// <a^+ sigma_n^->
    static Observable field_coherence(int n) { return {Kind::FieldCoherence, n, 0}; }
    /// <a^+ a^+ a a>
    static Observable photon_pair() { return {Kind::PhotonPair, 0, 0}; }
};

/// Parses ids such as "photon_number", "sigma_z(0)", "cross_pm(0,1)".
/// Throws Error("UnknownObservable").
Observable parse_observable(const std::string& id);

/// The operator matrix of an observable. Throws Error("IndexOutOfRange").
SparseMatrix observable_operator(const Operators& ops, const Observable& o);

/// Tr(O rho). Throws Error("IndexOutOfRange").
cplx expectation(const DensityMatrix& rho, const Observable& o);
cplx expectation(const DensityMatrix& rho, const SparseMatrix& op);

/// 1/2 ||a - b||_1
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct ExactSolution
{
    int n_max = 0;           // cutoff the result was obtained at
    double n_photon = 0.0;   // <a^+ a>
    double flux = 0.0;       // kappa <a^+ a>
    double photon_pair = 0.0;  // <a^+ a^+ a a>
    double sigma_z = 0.0;    // <sigma_z(0)>
    cplx cross_pm{};         // <sigma_0^+ sigma_1^-> (0 for N = 1)
    double cross_zz = 0.0;   // <sigma_0^z sigma_1^z> (0 for N = 1)
    double residual = 0.0;   // ||L vec(rho)||_inf
};

/// Relative cutoff-convergence threshold for photon_flux_exact / g2_zero_exact.
inline constexpr double cutoff_rel_tol = 1e-6;
/// Absolute floor (meV) below which two flux values count as equal.
inline constexpr double cutoff_abs_floor = 1e-13;

/// Steady state at h.n_max, then at n_max + 2, ... until the flux (and the
/// photon-pair moment) change by at most cutoff_rel_tol. Throws
/// Error("CutoffNotConverged") when the next cutoff would exceed the cap.
ExactSolution solve_converged(const ValidatedParams& p, const HilbertConfig& h);

/// kappa <a^+ a> on the cutoff-converged exact steady state.
double photon_flux_exact(const ValidatedParams& p, const HilbertConfig& h);

/// <a^+ a^+ a a> / <a^+ a>^2 on the cutoff-converged exact steady state.
/// Throws Error("VacuumState") when <a^+ a> <= 1e-12.
double g2_zero_exact(const ValidatedParams& p, const HilbertConfig& h);

}  // namespace superrad::exact
