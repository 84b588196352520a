#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "superrad/config.hpp"
#include "superrad/runner.hpp"

using namespace superrad;

int main(int argc, char** argv)
{
    CLI::App app{"Driven-dissipative Tavis-Cummings solvers and cavity optics"};
    std::string command, config_path, out_dir, format;
    std::optional<std::uint64_t> seed;
    app.add_option("command", command, "validate | exact | cumulant | sweep | reflectance | fit | g2")
        ->required();
    app.add_option("--config", config_path, "YAML run configuration")->required();
    app.add_option("--out-dir", out_dir, "output directory (overrides output_dir)");
    app.add_option("--format", format, "csv | json (overrides format)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "seed for synthetic noise (overrides seed)");
    CLI11_PARSE(app, argc, argv);

    const std::string err_dir = out_dir.empty() ? "." : out_dir;
    io::RunConfig cfg;
    try {
        const io::Command cmd = io::parse_command(command);
        std::ifstream in(config_path, std::ios::binary);
        if (!in)
            throw Error("ConfigRead", "cannot read " + config_path);
        std::ostringstream text;
        text << in.rdbuf();
        cfg = io::parse_config(text.str(), cmd);
        if (!out_dir.empty())
            cfg.output_dir = out_dir;
        if (!format.empty())
            cfg.format = io::parse_format(format);
        if (seed)
            cfg.seed = *seed;
    } catch (const Error& e) {
        std::cerr << "error " << e.kind() << ": " << e.what() << '\n';
        return io::report_error(err_dir, command, e);
    }
    return io::run(cfg, std::cerr);
}
