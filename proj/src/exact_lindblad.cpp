#include "superrad/exact_lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "superrad/integrator.hpp"

namespace superrad::exact {

namespace {

using Triplet = Eigen::Triplet<cplx>;

SparseMatrix from_triplets(std::int64_t dim, const std::vector<Triplet>& t)
{
    SparseMatrix m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b)
{
    SparseMatrix out = Eigen::kroneckerProduct(a, b);
    out.makeCompressed();
    return out;
}

SparseMatrix sparse_identity(std::int64_t dim)
{
    SparseMatrix id(dim, dim);
    id.setIdentity();
    return id;
}

}  // namespace

// ---------------------------------------------------------------------------
// HilbertConfig

std::int64_t HilbertConfig::dim() const
{
    return static_cast<std::int64_t>(n_max + 1) * emitter_dim();
}

void check_dimension(const HilbertConfig& h)
{
    if (h.n_max < 1 || h.n_emitters < 1)
        throw Error("InvalidHilbertConfig", "n_max and n_emitters must be >= 1");
    std::ostringstream os;
    if (h.n_emitters > 30) {
        os << "2^" << h.n_emitters << " emitter states exceed the dimension cap " << h.dim_cap;
        throw Error("DimensionCap", os.str());
    }
    const std::int64_t d = h.dim();
    if (d > h.dim_cap) {
        os << "Hilbert dimension " << d << " = (" << h.n_max << "+1)*2^" << h.n_emitters
           << " exceeds cap " << h.dim_cap;
        throw Error("DimensionCap", os.str());
    }
    if (d * d > superoperator_cap) {
        os << "superoperator dimension " << d * d << " (D=" << d
           << ") exceeds the direct-solve cap " << superoperator_cap;
        throw Error("DimensionCap", os.str());
    }
}

// ---------------------------------------------------------------------------
// Operators

Operators::Operators(const HilbertConfig& h) : m_h(h), m_dim(h.dim())
{
    check_dimension(h);
}

void Operators::check_index(int k) const
{
    if (k < 0 || k >= m_h.n_emitters) {
        std::ostringstream os;
        os << "emitter index " << k << " outside [0, " << m_h.n_emitters << ")";
        throw Error("IndexOutOfRange", os.str());
    }
}

SparseMatrix Operators::identity() const { return sparse_identity(m_dim); }

SparseMatrix Operators::a() const
{
    const std::int64_t m = m_h.emitter_dim();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(m_dim));
    for (int n = 1; n <= m_h.n_max; ++n)
        for (std::int64_t b = 0; b < m; ++b)
            t.emplace_back((n - 1) * m + b, n * m + b, std::sqrt(static_cast<double>(n)));
    return from_triplets(m_dim, t);
}

SparseMatrix Operators::sigma_minus(int k) const
{
    check_index(k);
    const std::int64_t m = m_h.emitter_dim();
    const std::int64_t mask = std::int64_t{1} << k;
    std::vector<Triplet> t;
    for (int n = 0; n <= m_h.n_max; ++n)
        for (std::int64_t b = 0; b < m; ++b)
            if (b & mask)
                t.emplace_back(n * m + (b ^ mask), n * m + b, 1.0);
    return from_triplets(m_dim, t);
}

SparseMatrix Operators::sigma_plus(int k) const
{
    return SparseMatrix(sigma_minus(k).adjoint());
}

SparseMatrix Operators::sigma_z(int k) const
{
    check_index(k);
    const std::int64_t m = m_h.emitter_dim();
    const std::int64_t mask = std::int64_t{1} << k;
    std::vector<Triplet> t;
    for (std::int64_t i = 0; i < m_dim; ++i)
        t.emplace_back(i, i, (i % m) & mask ? 1.0 : -1.0);
    return from_triplets(m_dim, t);
}

SparseMatrix Operators::photon_number() const
{
    const std::int64_t m = m_h.emitter_dim();
    std::vector<Triplet> t;
    for (std::int64_t i = 0; i < m_dim; ++i)
        if (i / m > 0)
            t.emplace_back(i, i, static_cast<double>(i / m));
    return from_triplets(m_dim, t);
}

SparseMatrix Operators::hamiltonian(const SystemParams& p, Frame frame) const
{
    const std::int64_t m = m_h.emitter_dim();
    std::vector<Triplet> t;
    // Diagonal: cavity and emitter energies.
    const double e_cav = frame == Frame::Lab ? p.delta_c : p.detuning();
    const double e_emit = frame == Frame::Lab ? p.delta : 0.0;
    for (std::int64_t i = 0; i < m_dim; ++i) {
        const double e = e_cav * static_cast<double>(i / m) +
                         e_emit * std::popcount(static_cast<std::uint64_t>(i % m));
        if (e != 0.0)
            t.emplace_back(i, i, e);
    }
    SparseMatrix h = from_triplets(m_dim, t);
    if (p.g != 0.0) {
        const SparseMatrix ad = SparseMatrix(a().adjoint());
        SparseMatrix coupling(m_dim, m_dim);
        for (int k = 0; k < m_h.n_emitters; ++k)
            coupling += ad * sigma_minus(k);
        h += p.g * (coupling + SparseMatrix(coupling.adjoint()));
    }
    h.makeCompressed();
    return h;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const HilbertConfig& h, Matrix rho) : m_h(h), m_rho(std::move(rho))
{
    std::ostringstream os;
    if (m_rho.rows() != h.dim() || m_rho.cols() != h.dim()) {
        os << "density matrix is " << m_rho.rows() << "x" << m_rho.cols() << ", expected D="
           << h.dim();
        throw Error("InvalidDensityMatrix", os.str());
    }
    if (!m_rho.allFinite())
        throw Error("InvalidDensityMatrix", "density matrix has non-finite entries");
    const double herm = (m_rho - m_rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > hermiticity_tol) {
        os << "density matrix is not Hermitian (max |rho - rho^+| = " << herm << ")";
        throw Error("InvalidDensityMatrix", os.str());
    }
    const double tr = std::abs(m_rho.trace() - 1.0);
    if (tr > trace_tol) {
        os << "density matrix trace deviates from 1 by " << tr;
        throw Error("InvalidDensityMatrix", os.str());
    }
    const Matrix sym = 0.5 * (m_rho + m_rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -positivity_tol) {
        os << "density matrix has negative eigenvalue " << lo;
        throw Error("InvalidDensityMatrix", os.str());
    }
}

DensityMatrix DensityMatrix::basis_state(const HilbertConfig& h, int photons, std::uint64_t bits)
{
    check_dimension(h);
    if (photons < 0 || photons > h.n_max || bits >= static_cast<std::uint64_t>(h.emitter_dim()))
        throw Error("IndexOutOfRange", "basis state outside the truncated space");
    Matrix rho = Matrix::Zero(h.dim(), h.dim());
    const std::int64_t i = photons * h.emitter_dim() + static_cast<std::int64_t>(bits);
    rho(i, i) = 1.0;
    return DensityMatrix(h, std::move(rho));
}

DensityMatrix DensityMatrix::pure(const HilbertConfig& h, const Vector& psi)
{
    const double norm2 = psi.squaredNorm();
    if (!(norm2 > 0.0))
        throw Error("InvalidDensityMatrix", "zero state vector");
    return DensityMatrix(h, psi * psi.adjoint() / norm2);
}

Vector DensityMatrix::vec() const
{
    return Eigen::Map<const Vector>(m_rho.data(), m_rho.size());
}

// ---------------------------------------------------------------------------
// Liouvillian

Matrix Liouvillian::apply(const Matrix& rho) const
{
    const Eigen::Map<const Vector> v(rho.data(), rho.size());
    Vector out = m_l * v;
    return Eigen::Map<const Matrix>(out.data(), rho.rows(), rho.cols());
}

double Liouvillian::trace_defect() const
{
    const std::int64_t d = m_h.dim();
    Eigen::RowVectorXcd sum = Eigen::RowVectorXcd::Zero(m_l.cols());
    for (int col = 0; col < m_l.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m_l, col); it; ++it)
            if (it.row() % (d + 1) == 0)
                sum(col) += it.value();
    return sum.cwiseAbs().maxCoeff();
}

SparseMatrix dissipator(const SparseMatrix& c)
{
    const std::int64_t d = c.rows();
    const SparseMatrix id = sparse_identity(d);
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    const SparseMatrix c_conj = c.conjugate();
    return kron(c_conj, c) - 0.5 * kron(id, cdc) - 0.5 * kron(SparseMatrix(cdc.transpose()), id);
}

Liouvillian build_liouvillian(const ValidatedParams& vp, const HilbertConfig& h, Frame frame)
{
    const SystemParams& p = vp.get();
    if (p.n_emitters != h.n_emitters)
        throw Error("InvalidHilbertConfig", "HilbertConfig.n_emitters does not match params");
    const Operators ops(h);
    const std::int64_t d = ops.dim();
    const SparseMatrix id = ops.identity();

    const SparseMatrix ham = ops.hamiltonian(p, frame);
    SparseMatrix l = cplx(0.0, -1.0) * (kron(id, ham) - kron(SparseMatrix(ham.transpose()), id));

    if (p.kappa > 0.0)
        l += p.kappa * dissipator(ops.a());
    for (int k = 0; k < h.n_emitters; ++k) {
        const SparseMatrix sm = ops.sigma_minus(k);
        if (p.omega > 0.0)
            l += p.omega * dissipator(SparseMatrix(sm.adjoint()));
        if (p.gamma_minus > 0.0)
            l += p.gamma_minus * dissipator(sm);
        if (p.gamma_z > 0.0)
            l += p.gamma_z * dissipator(ops.sigma_z(k));
    }
    l.prune(cplx(0.0), 0.0);
    l.makeCompressed();
    (void)d;
    return Liouvillian(h, std::move(l));
}

// ---------------------------------------------------------------------------
// Steady state

double steady_state_residual(const Liouvillian& l, const DensityMatrix& rho)
{
    return (l.matrix() * rho.vec()).cwiseAbs().maxCoeff();
}

DensityMatrix steady_state_exact(const Liouvillian& l)
{
    const HilbertConfig& h = l.config();
    const std::int64_t d = h.dim();
    const std::int64_t n = l.dim();
    const SparseMatrix& lm = l.matrix();

    // Row 0 (the equation for rho_00) is replaced by Tr(rho) = 1.
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(lm.nonZeros() + d));
    for (int col = 0; col < lm.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(lm, col); it; ++it)
            if (it.row() != 0)
                t.emplace_back(it.row(), it.col(), it.value());
    for (std::int64_t i = 0; i < d; ++i)
        t.emplace_back(0, i * (d + 1), 1.0);
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw Error("DegenerateSteadyState",
                    "trace-replaced Liouvillian is singular: " + lu.lastErrorMessage());

    Vector rhs = Vector::Zero(n);
    rhs(0) = 1.0;
    Vector x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw Error("DegenerateSteadyState", "steady-state solve failed");

    // Condition probe: a unique steady state keeps ||A^-1|| moderate. A
    // multi-dimensional null space makes the replaced system (near) singular.
    double a_norm = 0.0;
    {
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
        for (int col = 0; col < a.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(a, col); it; ++it)
                row_sums(it.row()) += std::abs(it.value());
        a_norm = row_sums.maxCoeff();
    }
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector probe(n);
    for (std::int64_t i = 0; i < n; ++i)
        probe(i) = cplx(u(rng), u(rng));
    const Vector y = lu.solve(probe);
    const double cond = a_norm * y.cwiseAbs().maxCoeff() / probe.cwiseAbs().maxCoeff();
    if (!std::isfinite(cond) || cond > 1e13) {
        std::ostringstream os;
        os << "steady state is not unique (condition estimate " << cond << ")";
        throw Error("DegenerateSteadyState", os.str());
    }

    Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();

    const double res = (lm * Eigen::Map<const Vector>(rho.data(), rho.size())).cwiseAbs().maxCoeff();
    if (!(res <= 1e-10)) {
        std::ostringstream os;
        os << "steady-state residual " << res << " exceeds 1e-10";
        throw Error("DegenerateSteadyState", os.str());
    }
    try {
        return DensityMatrix(h, std::move(rho));
    } catch (const Error& e) {
        throw Error("DegenerateSteadyState", std::string("steady state is unphysical: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Time evolution

DensityMatrix time_evolve(const Liouvillian& l, const DensityMatrix& rho0, double t_final,
                          double dt_max, double tol_per_time)
{
    if (!(t_final >= 0.0) || !(dt_max > 0.0) || !(tol_per_time > 0.0))
        throw Error("InvalidArgument", "time_evolve needs t_final >= 0, dt_max > 0, tol > 0");
    if (t_final == 0.0)
        return rho0;

    using State = std::vector<cplx>;
    const auto n = static_cast<std::size_t>(rho0.matrix().size());
    State x(rho0.matrix().data(), rho0.matrix().data() + n);
    const SparseMatrix& lm = l.matrix();

    auto system = [&](const State& in, State& out) {
        out.resize(in.size());
        Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size())) =
            lm * Eigen::Map<const Vector>(in.data(), static_cast<Eigen::Index>(in.size()));
    };
    auto error_ratio = [&](const State&, const State& err, double dt) {
        // Max over real and imaginary parts; within sqrt(2) of the modulus.
        double e = 0.0;
        for (const auto& v : err)
            e = std::max({e, std::abs(v.real()), std::abs(v.imag())});
        return e / (tol_per_time * dt);
    };
    StepControl ctl;
    ctl.dt_init = std::min(dt_max, 1e-3);
    ctl.dt_max = dt_max;
    ctl.exponent = 0.25;
    integrate_adaptive(system, x, 0.0, t_final, ctl, error_ratio,
                       [](const State&, const State&, double) { return false; });

    const std::int64_t d = rho0.dim();
    Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
    return DensityMatrix(rho0.config(), std::move(rho));
}

// ---------------------------------------------------------------------------
// Observables

Observable parse_observable(const std::string& id)
{
    static const std::regex re(R"(^\s*([a-z_]+)\s*(?:\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\))?\s*$)");
    std::smatch m;
    if (!std::regex_match(id, m, re))
        throw Error("UnknownObservable", "unknown observable '" + id + "'");
    const std::string name = m[1];
    const bool has_i = m[2].matched;
    const bool has_j = m[3].matched;
    const int i = has_i ? std::stoi(m[2]) : 0;
    const int j = has_j ? std::stoi(m[3]) : 0;

    if (name == "photon_number" && !has_i)
        return Observable::photon_number();
    if (name == "photon_pair" && !has_i)
        return Observable::photon_pair();
    if (name == "sigma_z" && has_i && !has_j)
        return Observable::sigma_z(i);
    if (name == "field_coherence" && has_i && !has_j)
        return Observable::field_coherence(i);
    if (name == "cross_pm" && has_j)
        return Observable::cross_pm(i, j);
    if (name == "cross_zz" && has_j)
        return Observable::cross_zz(i, j);
    throw Error("UnknownObservable", "unknown observable '" + id + "'");
}

SparseMatrix observable_operator(const Operators& ops, const Observable& o)
{
    switch (o.kind) {
    case Observable::Kind::PhotonNumber:
        return ops.photon_number();
    case Observable::Kind::SigmaZ:
        return ops.sigma_z(o.i);
    case Observable::Kind::CrossPm:
        return ops.sigma_plus(o.i) * ops.sigma_minus(o.j);
    case Observable::Kind::CrossZz:
        return ops.sigma_z(o.i) * ops.sigma_z(o.j);
    case Observable::Kind::FieldCoherence:
        return SparseMatrix(ops.a().adjoint()) * ops.sigma_minus(o.i);
    case Observable::Kind::PhotonPair: {
        const SparseMatrix a = ops.a();
        const SparseMatrix ad = SparseMatrix(a.adjoint());
        return ad * ad * a * a;
    }
    }
    throw Error("UnknownObservable", "unhandled observable kind");
}

cplx expectation(const DensityMatrix& rho, const SparseMatrix& op)
{
    // Tr(O rho) = sum_ij O_ij rho_ji
    const Matrix& r = rho.matrix();
    cplx acc = 0.0;
    for (int col = 0; col < op.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(op, col); it; ++it)
            acc += it.value() * r(it.col(), it.row());
    return acc;
}

cplx expectation(const DensityMatrix& rho, const Observable& o)
{
    const Operators ops(rho.config());
    return expectation(rho, observable_operator(ops, o));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    const Matrix diff = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Converged observables

namespace {

ExactSolution solve_at(const ValidatedParams& p, HilbertConfig h)
{
    const Liouvillian l = build_liouvillian(p, h);
    const DensityMatrix rho = steady_state_exact(l);
    const Operators ops(h);

    ExactSolution s;
    s.n_max = h.n_max;
    s.n_photon = expectation(rho, ops.photon_number()).real();
    s.flux = p->kappa * s.n_photon;
    s.photon_pair = expectation(rho, observable_operator(ops, Observable::photon_pair())).real();
    s.sigma_z = expectation(rho, ops.sigma_z(0)).real();
    if (h.n_emitters >= 2) {
        s.cross_pm = expectation(rho, observable_operator(ops, Observable::cross_pm(0, 1)));
        s.cross_zz = expectation(rho, observable_operator(ops, Observable::cross_zz(0, 1))).real();
    }
    s.residual = steady_state_residual(l, rho);
    return s;
}

bool close(double a, double b)
{
    return std::abs(a - b) <= cutoff_rel_tol * std::abs(b) + cutoff_abs_floor;
}

}  // namespace

ExactSolution solve_converged(const ValidatedParams& p, const HilbertConfig& h0)
{
    HilbertConfig h = h0;
    h.n_emitters = static_cast<int>(p->n_emitters);
    check_dimension(h);
    ExactSolution prev = solve_at(p, h);
    for (;;) {
        HilbertConfig next = h;
        next.n_max += 2;
        try {
            check_dimension(next);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "photon cutoff not converged at n_max=" << h.n_max << " and n_max+2 exceeds the cap ("
               << e.what() << ")";
            throw Error("CutoffNotConverged", os.str());
        }
        ExactSolution cur = solve_at(p, next);
        if (close(prev.flux, cur.flux) &&
            close(prev.photon_pair, cur.photon_pair))
            return cur;
        prev = cur;
        h = next;
    }
}

double photon_flux_exact(const ValidatedParams& p, const HilbertConfig& h)
{
    return solve_converged(p, h).flux;
}

double g2_zero_exact(const ValidatedParams& p, const HilbertConfig& h)
{
    if (p->omega == 0.0 || p->g == 0.0)
        throw Error("VacuumState", "no photons are generated (omega = 0 or g = 0)");
    const ExactSolution s = solve_converged(p, h);
    if (!(s.n_photon > 1e-12)) {
        std::ostringstream os;
        os << "steady-state photon number " << s.n_photon << " is below 1e-12";
        throw Error("VacuumState", os.str());
    }
    return s.photon_pair / (s.n_photon * s.n_photon);
}

}  // namespace superrad::exact
