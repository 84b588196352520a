#include "superrad/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "superrad/cumulant.hpp"
#include "superrad/exact_lindblad.hpp"
#include "superrad/optics.hpp"
#include "superrad/scaling.hpp"

namespace superrad::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// CSV text with shortest round-trip numbers.
class Csv
{
public:
    explicit Csv(std::initializer_list<std::string> header)
    {
        bool first = true;
        for (const auto& h : header) {
            m_out << (first ? "" : ",") << h;
            first = false;
        }
        m_out << '\n';
    }

    template <class... T>
    void row(const T&... values)
    {
        static_assert(sizeof...(T) > 0);
        bool first = true;
        ((m_out << (first ? "" : ",") << cell(values), first = false), ...);
        m_out << '\n';
    }

    std::string str() const { return m_out.str(); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::int64_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::ostringstream m_out;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string result_name(const RunConfig& c)
{
    return to_string(c.command) + "_result." + to_string(c.format);
}

ordered_json params_json(const SystemParams& p)
{
    return {{"n_emitters", p.n_emitters}, {"delta", p.delta},   {"delta_c", p.delta_c},
            {"g", p.g},                   {"kappa", p.kappa},   {"omega", p.omega},
            {"gamma_minus", p.gamma_minus}, {"gamma_z", p.gamma_z}};
}

ordered_json optics_json(const optics::OpticalParams& o)
{
    return {{"e_c0", o.e_c0},       {"n_eff", o.n_eff}, {"delta", o.delta},
            {"g_coll", o.g_coll},   {"kappa", o.kappa}, {"kappa_ext", o.kappa_ext},
            {"gamma_perp", o.gamma_perp}};
}

/// params with the drive section applied.
SystemParams effective_params(const RunConfig& c)
{
    SystemParams p = *c.params;
    if (c.drive)
        p.omega = omega_of_voltage(c.drive->map, c.drive->voltage);
    return p;
}

exact::HilbertConfig hilbert_for(const RunConfig& c, const SystemParams& p)
{
    const ExactSection e = c.exact.value_or(ExactSection{});
    exact::HilbertConfig h;
    h.n_max = e.n_max;
    h.dim_cap = e.dim_cap;
    if (p.n_emitters > 30)
        throw Error("DimensionCap", "2^" + std::to_string(p.n_emitters) +
                                        " emitter states exceed the dimension cap");
    h.n_emitters = static_cast<int>(p.n_emitters);
    return h;
}

cumulant::SolverOptions solver_for(const RunConfig& c)
{
    cumulant::SolverOptions o;
    if (c.solver)
        o.closure = c.solver->closure;
    return o;
}

std::vector<Artifact> run_validate(const RunConfig& c)
{
    ordered_json j;
    j["valid"] = true;
    if (c.params) {
        const SystemParams p = effective_params(c);
        validate_params(p);
        j["params"] = params_json(p);
        j["collective_coupling"] = collective_coupling(p.g, p.n_emitters);
    }
    if (c.optics) {
        optics::validate(*c.optics);
        j["optics"] = optics_json(*c.optics);
    }
    if (c.format == Format::Json)
        return {{result_name(c), dump(j)}};
    Csv csv({"key", "value"});
    csv.row("valid", "true");
    for (const auto& section : {"params", "optics"}) {
        if (!j.contains(section))
            continue;
        for (const auto& [k, v] : j[section].items()) {
            if (v.is_number_integer())
                csv.row(std::string(section) + "." + k, v.get<std::int64_t>());
            else
                csv.row(std::string(section) + "." + k, v.get<double>());
        }
    }
    if (j.contains("collective_coupling"))
        csv.row("collective_coupling", j["collective_coupling"].get<double>());
    return {{result_name(c), csv.str()}};
}

std::vector<Artifact> run_exact(const RunConfig& c)
{
    const SystemParams p = effective_params(c);
    const auto vp = validate_params(p);
    const auto h = hilbert_for(c, p);
    exact::check_dimension(h);
    const exact::ExactSolution s = exact::solve_converged(vp, h);
    if (c.format == Format::Json) {
        ordered_json j = {{"n_max", s.n_max},
                          {"n_photon", s.n_photon},
                          {"flux", s.flux},
                          {"photon_pair", s.photon_pair},
                          {"sigma_z", s.sigma_z},
                          {"cross_pm_re", s.cross_pm.real()},
                          {"cross_pm_im", s.cross_pm.imag()},
                          {"cross_zz", s.cross_zz},
                          {"residual", s.residual}};
        return {{result_name(c), dump(j)}};
    }
    Csv csv({"n_emitters", "n_max", "n_photon", "flux", "photon_pair", "sigma_z", "cross_pm_re",
             "cross_pm_im", "cross_zz", "residual"});
    csv.row(p.n_emitters, s.n_max, s.n_photon, s.flux, s.photon_pair, s.sigma_z, s.cross_pm.real(),
            s.cross_pm.imag(), s.cross_zz, s.residual);
    return {{result_name(c), csv.str()}};
}

std::vector<Artifact> run_g2(const RunConfig& c)
{
    const SystemParams p = effective_params(c);
    const auto vp = validate_params(p);
    const auto h = hilbert_for(c, p);
    exact::check_dimension(h);
    const double g2 = exact::g2_zero_exact(vp, h);
    const exact::ExactSolution s = exact::solve_converged(vp, h);
    if (c.format == Format::Json) {
        ordered_json j = {{"n_emitters", p.n_emitters}, {"n_max", s.n_max},
                          {"n_photon", s.n_photon},     {"photon_pair", s.photon_pair},
                          {"g2_zero", g2}};
        return {{result_name(c), dump(j)}};
    }
    Csv csv({"n_emitters", "n_max", "n_photon", "photon_pair", "g2_zero"});
    csv.row(p.n_emitters, s.n_max, s.n_photon, s.photon_pair, g2);
    return {{result_name(c), csv.str()}};
}

std::vector<Artifact> run_cumulant(const RunConfig& c)
{
    const SystemParams p = effective_params(c);
    const auto vp = validate_params(p);
    const auto opts = solver_for(c);
    const double tol = c.solver ? c.solver->tol : SolverSection{}.tol;
    cumulant::SolveStats stats;
    const auto m = cumulant::integrate_to_steady_state(vp, cumulant::MomentState::dark(), tol, opts,
                                                       &stats);
    const double flux = p.kappa * m.n_photon;
    const auto split = cumulant::flux_decomposition(vp, m);
    if (c.format == Format::Json) {
        ordered_json j = {{"n_emitters", p.n_emitters},
                          {"omega", p.omega},
                          {"n_photon", m.n_photon},
                          {"flux", flux},
                          {"s_z", m.s_z},
                          {"coh_re", m.coh.real()},
                          {"coh_im", m.coh.imag()},
                          {"x_pm_re", m.x_pm.real()},
                          {"x_pm_im", m.x_pm.imag()},
                          {"z_zz", m.z_zz},
                          {"flux_single", split.single},
                          {"flux_pair", split.pair},
                          {"residual", stats.residual}};
        return {{result_name(c), dump(j)}};
    }
    Csv csv({"n_emitters", "omega", "n_photon", "flux", "s_z", "coh_re", "coh_im", "x_pm_re",
             "x_pm_im", "z_zz", "flux_single", "flux_pair", "residual"});
    csv.row(p.n_emitters, p.omega, m.n_photon, flux, m.s_z, m.coh.real(), m.coh.imag(),
            m.x_pm.real(), m.x_pm.imag(), m.z_zz, split.single, split.pair, stats.residual);
    return {{result_name(c), csv.str()}};
}

std::vector<Artifact> run_sweep(const RunConfig& c)
{
    scaling::SweepSpec spec;
    spec.n_values = c.sweep->n_values;
    spec.drive_rule = c.sweep->drive_rule;
    spec.omega_1 = c.sweep->omega_1;
    spec.gamma_r = c.sweep->gamma_r;
    spec.base_params = *c.params;
    spec.solver = solver_for(c);
    const auto rows = scaling::run_concentration_sweep(spec);
    const auto fit = scaling::fit_power_law(rows);

    ordered_json summary = {
        {"drive_rule", spec.drive_rule == scaling::DriveRule::Scaled ? "scaled" : "fixed"},
        {"n_points", rows.size()},
        {"alpha", fit.alpha},
        {"prefactor", fit.prefactor},
        {"rmsd", fit.rmsd}};
    if (c.format == Format::Json) {
        ordered_json j;
        j["rows"] = ordered_json::array();
        for (const auto& r : rows)
            j["rows"].push_back({{"n", r.n},
                                 {"omega_mev", r.omega},
                                 {"l_cavity_mev", r.l_cavity},
                                 {"l_control_mev", r.l_control},
                                 {"ratio", r.ratio}});
        j["fit"] = summary;
        return {{result_name(c), dump(j)}};
    }
    Csv csv({"n", "omega_mev", "l_cavity_mev", "l_control_mev", "ratio"});
    for (const auto& r : rows)
        csv.row(r.n, r.omega, r.l_cavity, r.l_control, r.ratio);
    return {{result_name(c), csv.str()}, {"sweep_summary.json", dump(summary)}};
}

std::vector<Artifact> run_reflectance(const RunConfig& c)
{
    const auto& o = *c.optics;
    const GridSection g = c.grid.value_or(GridSection{});
    const auto thetas = optics::linear_grid(g.theta_min, g.theta_max, g.theta_step);
    const auto energies = optics::linear_grid(g.energy_min, g.energy_max, g.energy_step);
    const auto map = optics::reflectance_map(o, thetas, energies);

    ordered_json branches = ordered_json::array();
    for (std::size_t i = 0; i < thetas.size(); ++i)
        branches.push_back({{"theta", thetas[i]},
                            {"cavity", optics::cavity_dispersion(o, thetas[i])},
                            {"lp_re", map.lp_branch[i].real()},
                            {"lp_im", map.lp_branch[i].imag()},
                            {"up_re", map.up_branch[i].real()},
                            {"up_im", map.up_branch[i].imag()}});
    const auto split = optics::min_branch_splitting(o, g.theta_min, g.theta_max);
    ordered_json side = {{"optics", optics_json(o)},
                         {"min_splitting", split.splitting},
                         {"min_splitting_theta", split.theta_deg},
                         {"branches", branches}};

    if (c.format == Format::Json) {
        side["energies"] = energies;
        side["r_values"] = map.r_values;
        return {{result_name(c), dump(side)}};
    }
    Csv csv({"theta_deg", "energy_mev", "reflectance"});
    for (std::size_t i = 0; i < thetas.size(); ++i)
        for (std::size_t k = 0; k < energies.size(); ++k)
            csv.row(thetas[i], energies[k], map.r_values[i][k]);
    return {{result_name(c), csv.str()}, {"reflectance_branches.json", dump(side)}};
}

std::vector<std::pair<double, double>> fit_points(const RunConfig& c)
{
    const FitSection& f = *c.fit;
    std::vector<std::pair<double, double>> pts = f.points;
    if (f.synthetic) {
        const SyntheticFit& s = *f.synthetic;
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> noise(0.0, s.noise_sigma > 0.0 ? s.noise_sigma : 1.0);
        for (double n : s.n_values) {
            double y = s.prefactor * std::pow(n, s.alpha);
            if (s.noise_sigma > 0.0)
                y *= std::exp(noise(rng));
            pts.emplace_back(n, y);
        }
    }
    return pts;
}

std::vector<Artifact> run_fit(const RunConfig& c)
{
    const auto pts = fit_points(c);
    const auto fit = scaling::fit_power_law(pts);
    if (c.format == Format::Json) {
        ordered_json j = {{"alpha", fit.alpha},
                          {"prefactor", fit.prefactor},
                          {"rmsd", fit.rmsd},
                          {"n_points", pts.size()}};
        j["points"] = ordered_json::array();
        for (const auto& [n, y] : pts)
            j["points"].push_back({n, y});
        return {{result_name(c), dump(j)}};
    }
    Csv csv({"alpha", "prefactor", "rmsd", "n_points"});
    csv.row(fit.alpha, fit.prefactor, fit.rmsd, pts.size());
    return {{result_name(c), csv.str()}};
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void remove_stale_results(const fs::path& dir, const std::string& command)
{
    for (const char* ext : {"csv", "json"}) {
        std::error_code ec;
        fs::remove(dir / (command + "_result." + ext), ec);
    }
}

}  // namespace

std::vector<Artifact> execute(const RunConfig& c)
{
    switch (c.command) {
    case Command::Validate: return run_validate(c);
    case Command::Exact: return run_exact(c);
    case Command::Cumulant: return run_cumulant(c);
    case Command::Sweep: return run_sweep(c);
    case Command::Reflectance: return run_reflectance(c);
    case Command::Fit: return run_fit(c);
    case Command::G2: return run_g2(c);
    }
    throw Error("UnknownCommand", "unhandled command");
}

void write_atomically(const fs::path& dir, const std::vector<Artifact>& files)
{
    fs::create_directories(dir);
    std::vector<fs::path> temps;
    try {
        for (const auto& f : files) {
            const fs::path tmp = dir / (f.name + ".tmp");
            temps.push_back(tmp);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << f.content;
            out.close();
            if (!out)
                throw Error("IoError", "cannot write " + tmp.string());
        }
    } catch (...) {
        for (const auto& t : temps) {
            std::error_code ec;
            fs::remove(t, ec);
        }
        throw;
    }
    for (std::size_t i = 0; i < files.size(); ++i)
        fs::rename(temps[i], dir / files[i].name);
}

int exit_code_for(const std::string& kind)
{
    static const std::set<std::string> config_kinds = {
        "SyntaxError", "UnknownKey",     "MissingKey",     "MissingSection",
        "TypeMismatch", "UnknownCommand", "CommandMismatch", "ConfigRead"};
    return config_kinds.contains(kind) ? 2 : 1;
}

int report_error(const fs::path& dir, const std::string& command, const Error& e)
{
    ordered_json j = {{"error", e.kind()}, {"message", e.what()}, {"command", command}};
    if (const auto* pe = dynamic_cast<const ParamError*>(&e)) {
        j["violations"] = ordered_json::array();
        for (const auto& v : pe->violations())
            j["violations"].push_back({{"code", v.code}, {"field", v.field}});
    }
    try {
        fs::create_directories(dir);
        remove_stale_results(dir, command);
        write_atomically(dir, {{"error.json", dump(j)}});
    } catch (const std::exception&) {
        // The exit status still carries the failure.
    }
    return exit_code_for(e.kind());
}

int run(const RunConfig& c, std::ostream& log)
{
    const fs::path dir = c.output_dir;
    const std::string command = to_string(c.command);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto files = execute(c);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ordered_json manifest = {{"tool", "superrad"},
                                 {"version", tool_version},
                                 {"command", command},
                                 {"seed", c.seed},
                                 {"config", serialize_config(c)},
                                 {"files", ordered_json::array()},
                                 {"wall_time_s", wall},
                                 {"timestamp", utc_timestamp()}};
        for (const auto& f : files)
            manifest["files"].push_back(f.name);
        files.push_back({"run_manifest.json", dump(manifest)});
        std::error_code ec;
        fs::remove(dir / "error.json", ec);
        write_atomically(dir, files);
        for (const auto& f : files)
            log << "wrote " << (dir / f.name).string() << '\n';
        return 0;
    } catch (const Error& e) {
        log << "error " << e.kind() << ": " << e.what() << '\n';
        return report_error(dir, command, e);
    } catch (const std::exception& e) {
        log << "error Internal: " << e.what() << '\n';
        return report_error(dir, command, Error("Internal", e.what()));
    }
}

}  // namespace superrad::io
