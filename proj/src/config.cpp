#include "superrad/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace superrad::io {

namespace {

std::string where(const YAML::Mark& m)
{
    std::ostringstream os;
    os << "line " << m.line + 1 << ", column " << m.column + 1;
    return os.str();
}

[[noreturn]] void type_mismatch(const YAML::Node& n, const std::string& key, const char* expected)
{
    throw Error("TypeMismatch", "TypeMismatch(\"" + key + "\"): expected " + expected + " at " +
                                    where(n.Mark()));
}

/// A mapping whose keys are checked against a fixed schema.
class Section
{
public:
    Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
        : m_node(node), m_name(std::move(name))
    {
        if (!m_node.IsMap())
            type_mismatch(m_node, m_name, "a mapping");
        for (const auto& kv : m_node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key))
                throw Error("UnknownKey", "UnknownKey(\"" + key + "\") in section '" + m_name +
                                              "' at " + where(kv.first.Mark()));
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(m_node[key]); }

    YAML::Node get(const std::string& key) const
    {
        YAML::Node n = m_node[key];
        if (!n)
            throw Error("MissingKey", "MissingKey(\"" + key + "\") in section '" + m_name + "' at " +
                                          where(m_node.Mark()));
        return n;
    }

    template <class T>
    T scalar(const std::string& key, const char* expected) const
    {
        const YAML::Node n = get(key);
        if (!n.IsScalar())
            type_mismatch(n, qualified(key), expected);
        try {
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            type_mismatch(n, qualified(key), expected);
        }
    }

    double number(const std::string& key) const { return scalar<double>(key, "a number"); }

    double number_or(const std::string& key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    std::int64_t integer(const std::string& key) const
    {
        return scalar<std::int64_t>(key, "an integer");
    }

    std::string text(const std::string& key) const { return scalar<std::string>(key, "a string"); }

    std::string qualified(const std::string& key) const
    {
        return m_name.empty() ? key : m_name + "." + key;
    }

private:
    YAML::Node m_node;
    std::string m_name;
};

template <class T>
std::vector<T> sequence(const YAML::Node& n, const std::string& key, const char* expected)
{
    if (!n.IsSequence())
        type_mismatch(n, key, "a sequence");
    std::vector<T> out;
    for (const auto& item : n) {
        if (!item.IsScalar())
            type_mismatch(item, key, expected);
        try {
            out.push_back(item.as<T>());
        } catch (const YAML::BadConversion&) {
            type_mismatch(item, key, expected);
        }
    }
    return out;
}

SystemParams parse_params(const YAML::Node& n)
{
    const Section s(n, "params", {"n_emitters", "delta", "delta_c", "g", "kappa", "omega",
                                  "gamma_minus", "gamma_z"});
    SystemParams p;
    p.n_emitters = s.integer("n_emitters");
    p.delta = s.number("delta");
    p.delta_c = s.number("delta_c");
    p.g = s.number("g");
    p.kappa = s.number("kappa");
    p.omega = s.number("omega");
    p.gamma_minus = s.number("gamma_minus");
    p.gamma_z = s.number("gamma_z");
    return p;
}

DriveSection parse_drive(const YAML::Node& n)
{
    const Section s(n, "drive", {"v_on", "slope_mu", "voltage"});
    DriveSection d;
    d.map.v_on = s.number("v_on");
    d.map.slope_mu = s.number("slope_mu");
    d.voltage = s.number("voltage");
    return d;
}

ExactSection parse_exact(const YAML::Node& n)
{
    const Section s(n, "exact", {"n_max", "dim_cap"});
    ExactSection e;
    if (s.has("n_max"))
        e.n_max = static_cast<int>(s.integer("n_max"));
    if (s.has("dim_cap"))
        e.dim_cap = s.integer("dim_cap");
    if (e.n_max < 1 || e.dim_cap < 1)
        throw Error("TypeMismatch", "exact.n_max and exact.dim_cap must be >= 1");
    return e;
}

SolverSection parse_solver(const YAML::Node& n)
{
    const Section s(n, "solver", {"tol", "closure"});
    SolverSection out;
    out.tol = s.number_or("tol", out.tol);
    if (s.has("closure")) {
        const std::string c = s.text("closure");
        if (c == "as_printed")
            out.closure = cumulant::ClosureVariant::AsPrinted;
        else if (c == "double_subtract")
            out.closure = cumulant::ClosureVariant::DoubleSubtract;
        else
            type_mismatch(s.get("closure"), "solver.closure", "as_printed or double_subtract");
    }
    if (!(out.tol > 0.0))
        type_mismatch(s.get("tol"), "solver.tol", "a positive number");
    return out;
}

SweepSection parse_sweep(const YAML::Node& n)
{
    const Section s(n, "sweep", {"n_values", "drive_rule", "omega_1", "gamma_r"});
    SweepSection out;
    out.n_values = sequence<std::int64_t>(s.get("n_values"), "sweep.n_values", "an integer");
    const std::string rule = s.text("drive_rule");
    if (rule == "scaled")
        out.drive_rule = scaling::DriveRule::Scaled;
    else if (rule == "fixed")
        out.drive_rule = scaling::DriveRule::Fixed;
    else
        type_mismatch(s.get("drive_rule"), "sweep.drive_rule", "scaled or fixed");
    out.omega_1 = s.number("omega_1");
    out.gamma_r = s.number_or("gamma_r", out.gamma_r);
    return out;
}

optics::OpticalParams parse_optics(const YAML::Node& n)
{
    const Section s(n, "optics", {"e_c0", "n_eff", "delta", "g_coll", "kappa", "kappa_ext",
                                  "gamma_perp"});
    optics::OpticalParams p = optics::reference_device();
    p.n_eff = s.number_or("n_eff", p.n_eff);
    p.delta = s.number_or("delta", p.delta);
    p.kappa = s.number_or("kappa", p.kappa);
    p.kappa_ext = s.number_or("kappa_ext", 0.5 * p.kappa);
    p.e_c0 = s.number_or("e_c0", optics::resonant_cavity_energy(p.delta, p.n_eff, 20.0));
    p.g_coll = s.number_or("g_coll", p.g_coll);
    p.gamma_perp = s.number_or("gamma_perp", p.gamma_perp);
    optics::validate(p);
    return p;
}

GridSection parse_grid(const YAML::Node& n)
{
    const Section s(n, "grid", {"theta_min", "theta_max", "theta_step", "energy_min",
                                "energy_max", "energy_step"});
    GridSection g;
    g.theta_min = s.number_or("theta_min", g.theta_min);
    g.theta_max = s.number_or("theta_max", g.theta_max);
    g.theta_step = s.number_or("theta_step", g.theta_step);
    g.energy_min = s.number_or("energy_min", g.energy_min);
    g.energy_max = s.number_or("energy_max", g.energy_max);
    g.energy_step = s.number_or("energy_step", g.energy_step);
    return g;
}

FitSection parse_fit(const YAML::Node& n)
{
    const Section s(n, "fit", {"points", "synthetic"});
    FitSection f;
    if (s.has("points")) {
        const YAML::Node pts = s.get("points");
        if (!pts.IsSequence())
            type_mismatch(pts, "fit.points", "a sequence of [n, y] pairs");
        for (const auto& item : pts) {
            const auto pair = sequence<double>(item, "fit.points", "a number");
            if (pair.size() != 2)
                type_mismatch(item, "fit.points", "an [n, y] pair");
            f.points.emplace_back(pair[0], pair[1]);
        }
    }
    if (s.has("synthetic")) {
        const Section syn(s.get("synthetic"), "fit.synthetic",
                          {"n_values", "alpha", "prefactor", "noise_sigma"});
        SyntheticFit sf;
        sf.n_values = sequence<double>(syn.get("n_values"), "fit.synthetic.n_values", "a number");
        sf.alpha = syn.number("alpha");
        sf.prefactor = syn.number_or("prefactor", 1.0);
        sf.noise_sigma = syn.number_or("noise_sigma", 0.0);
        f.synthetic = sf;
    }
    if (f.points.empty() && !f.synthetic)
        throw Error("MissingKey", "MissingKey(\"points\"): section 'fit' needs points or synthetic");
    return f;
}

[[noreturn]] void missing_section(const std::string& name, Command c)
{
    throw Error("MissingSection", "MissingSection(\"" + name + "\"): command '" + to_string(c) +
                                      "' requires section '" + name + "'");
}

}  // namespace

std::string to_string(Command c)
{
    switch (c) {
    case Command::Validate: return "validate";
    case Command::Exact: return "exact";
    case Command::Cumulant: return "cumulant";
    case Command::Sweep: return "sweep";
    case Command::Reflectance: return "reflectance";
    case Command::Fit: return "fit";
    case Command::G2: return "g2";
    }
    return "unknown";
}

std::string to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

Command parse_command(const std::string& s)
{
    for (Command c : {Command::Validate, Command::Exact, Command::Cumulant, Command::Sweep,
                      Command::Reflectance, Command::Fit, Command::G2})
        if (to_string(c) == s)
            return c;
    throw Error("UnknownCommand", "unknown command '" + s + "'");
}

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::Csv;
    if (s == "json")
        return Format::Json;
    throw Error("TypeMismatch", "TypeMismatch(\"format\"): expected csv or json, got '" + s + "'");
}

RunConfig parse_config(const std::string& text, std::optional<Command> command)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error("SyntaxError", "SyntaxError at " + where(e.mark) + ": " + e.msg);
    }
    if (root.IsNull())
        root = YAML::Node(YAML::NodeType::Map);

    const Section top(root, "", {"command", "output_dir", "format", "seed", "params", "drive",
                                 "exact", "solver", "sweep", "optics", "grid", "fit"});
    RunConfig cfg;
    if (top.has("command")) {
        try {
            cfg.command = parse_command(top.text("command"));
        } catch (const Error&) {
            throw Error("UnknownCommand", "unknown command '" + top.text("command") + "' at " +
                                              where(top.get("command").Mark()));
        }
        if (command && *command != cfg.command)
            throw Error("CommandMismatch", "command line says '" + to_string(*command) +
                                               "' but the document says '" +
                                               to_string(cfg.command) + "'");
    } else if (command) {
        cfg.command = *command;
    } else {
        throw Error("MissingKey", "MissingKey(\"command\")");
    }

    if (top.has("output_dir"))
        cfg.output_dir = top.text("output_dir");
    if (top.has("format")) {
        try {
            cfg.format = parse_format(top.text("format"));
        } catch (const Error&) {
            type_mismatch(top.get("format"), "format", "csv or json");
        }
    }
    if (top.has("seed"))
        cfg.seed = top.scalar<std::uint64_t>("seed", "an unsigned integer");

    if (top.has("params"))
        cfg.params = parse_params(top.get("params"));
    if (top.has("drive"))
        cfg.drive = parse_drive(top.get("drive"));
    if (top.has("exact"))
        cfg.exact = parse_exact(top.get("exact"));
    if (top.has("solver"))
        cfg.solver = parse_solver(top.get("solver"));
    if (top.has("sweep"))
        cfg.sweep = parse_sweep(top.get("sweep"));
    if (top.has("optics"))
        cfg.optics = parse_optics(top.get("optics"));
    if (top.has("grid"))
        cfg.grid = parse_grid(top.get("grid"));
    if (top.has("fit"))
        cfg.fit = parse_fit(top.get("fit"));

    switch (cfg.command) {
    case Command::Validate:
        if (!cfg.params && !cfg.optics)
            missing_section("params", cfg.command);
        break;
    case Command::Exact:
    case Command::Cumulant:
    case Command::G2:
        if (!cfg.params)
            missing_section("params", cfg.command);
        break;
    case Command::Sweep:
        if (!cfg.params)
            missing_section("params", cfg.command);
        if (!cfg.sweep)
            missing_section("sweep", cfg.command);
        break;
    case Command::Reflectance:
        if (!cfg.optics)
            missing_section("optics", cfg.command);
        break;
    case Command::Fit:
        if (!cfg.fit)
            missing_section("fit", cfg.command);
        break;
    }
    return cfg;
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string serialize_config(const RunConfig& c)
{
    YAML::Emitter out;
    auto num = [&](const char* key, double v) { out << YAML::Key << key << YAML::Value << format_double(v); };
    auto integer = [&](const char* key, std::int64_t v) { out << YAML::Key << key << YAML::Value << v; };

    out << YAML::BeginMap;
    out << YAML::Key << "command" << YAML::Value << to_string(c.command);
    out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
    out << YAML::Key << "format" << YAML::Value << to_string(c.format);
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    if (c.params) {
        const auto& p = *c.params;
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        integer("n_emitters", p.n_emitters);
        num("delta", p.delta);
        num("delta_c", p.delta_c);
        num("g", p.g);
        num("kappa", p.kappa);
        num("omega", p.omega);
        num("gamma_minus", p.gamma_minus);
        num("gamma_z", p.gamma_z);
        out << YAML::EndMap;
    }
    if (c.drive) {
        out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
        num("v_on", c.drive->map.v_on);
        num("slope_mu", c.drive->map.slope_mu);
        num("voltage", c.drive->voltage);
        out << YAML::EndMap;
    }
    if (c.exact) {
        out << YAML::Key << "exact" << YAML::Value << YAML::BeginMap;
        integer("n_max", c.exact->n_max);
        integer("dim_cap", c.exact->dim_cap);
        out << YAML::EndMap;
    }
    if (c.solver) {
        out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
        num("tol", c.solver->tol);
        out << YAML::Key << "closure" << YAML::Value
            << (c.solver->closure == cumulant::ClosureVariant::AsPrinted ? "as_printed"
                                                                         : "double_subtract");
        out << YAML::EndMap;
    }
    if (c.sweep) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "n_values" << YAML::Value << YAML::Flow << c.sweep->n_values;
        out << YAML::Key << "drive_rule" << YAML::Value
            << (c.sweep->drive_rule == scaling::DriveRule::Scaled ? "scaled" : "fixed");
        num("omega_1", c.sweep->omega_1);
        num("gamma_r", c.sweep->gamma_r);
        out << YAML::EndMap;
    }
    if (c.optics) {
        const auto& o = *c.optics;
        out << YAML::Key << "optics" << YAML::Value << YAML::BeginMap;
        num("e_c0", o.e_c0);
        num("n_eff", o.n_eff);
        num("delta", o.delta);
        num("g_coll", o.g_coll);
        num("kappa", o.kappa);
        num("kappa_ext", o.kappa_ext);
        num("gamma_perp", o.gamma_perp);
        out << YAML::EndMap;
    }
    if (c.grid) {
        const auto& g = *c.grid;
        out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
        num("theta_min", g.theta_min);
        num("theta_max", g.theta_max);
        num("theta_step", g.theta_step);
        num("energy_min", g.energy_min);
        num("energy_max", g.energy_max);
        num("energy_step", g.energy_step);
        out << YAML::EndMap;
    }
    if (c.fit) {
        out << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
        if (!c.fit->points.empty()) {
            out << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
            for (const auto& [n, y] : c.fit->points)
                out << YAML::Flow << YAML::BeginSeq << format_double(n) << format_double(y)
                    << YAML::EndSeq;
            out << YAML::EndSeq;
        }
        if (c.fit->synthetic) {
            const auto& s = *c.fit->synthetic;
            out << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "n_values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double v : s.n_values)
                out << format_double(v);
            out << YAML::EndSeq;
            num("alpha", s.alpha);
            num("prefactor", s.prefactor);
            num("noise_sigma", s.noise_sigma);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace superrad::io
