// Command-line front end. Every subcommand takes a config file plus `--set` overrides;
// results go to stdout (or -o) as CSV or JSON, failures to stderr as a JSON error record.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using allee::cli::Format;
using allee::cli::Request;

struct Common {
    std::string configPath;
    std::vector<std::string> sets;
    std::vector<std::string> sweeps;
    std::string output;
    std::string format = "csv";
    unsigned threads = 0;
};

void addCommon(CLI::App* sub, Common& c)
{
    sub->add_option("config", c.configPath, "Config file of key = value lines")->required();
    sub->add_option("--set", c.sets, "Override one config key (repeatable)");
    sub->add_option("--sweep", c.sweeps, "Run once per value of key=lo:hi:n");
    sub->add_option("-o,--output", c.output, "Write the result here instead of stdout");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", c.threads, "Worker threads for --sweep (0 = hardware)");
}

int execute(Request req, const Common& c)
{
    req.config = allee::Config::load(c.configPath);
    for (const auto& s : c.sets) {
        req.config.assign(s);
    }
    req.format = c.format == "json" ? Format::Json : Format::Csv;
    if (c.sweeps.size() > 1) {
        throw allee::ConfigError("only one --sweep is supported");
    }
    const allee::cli::Output out = c.sweeps.empty()
                                       ? allee::cli::run(req)
                                       : allee::cli::runSweep(req, allee::SweepSpec::parse(c.sweeps.front()), c.threads);
    const std::string text = allee::cli::render(out, req.format);
    if (c.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(c.output, std::ios::binary);
        if (!f) {
            throw allee::ConfigError("cannot write " + c.output);
        }
        f << text;
    }
    return allee::cli::kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Predator-prey model with a prey Allee effect and hunting cooperation"};
    app.set_version_flag("--version", allee::cli::toolVersion());
    app.require_subcommand(1);

    Common common;
    Request req;

    auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory (columns t,x,y)");
    addCommon(simulate, common);

    auto* equilibria = app.add_subcommand("equilibria", "List and classify all equilibria");
    addCommon(equilibria, common);

    auto* portrait = app.add_subcommand("portrait", "Write nullclines, manifolds and trajectories as CSV files");
    addCommon(portrait, common);
    std::string outDir;
    portrait->add_option("--out-dir", outDir, "Directory for the CSV files and manifest.json")->required();

    auto* bifurcate = app.add_subcommand("bifurcate", "Locate one bifurcation point (JSON record)");
    bifurcate->add_option("kind", req.kind, "transcritical | saddle-node | hopf | heteroclinic | k0-origin")
        ->required()
        ->check(CLI::IsMember({"transcritical", "saddle-node", "hopf", "heteroclinic", "k0-origin"}));
    addCommon(bifurcate, common);
    std::string at;
    std::vector<double> bracket;
    int branch = -1;
    double probeK0 = 0.0;
    bifurcate->add_option("--at", at, "Boundary equilibrium for transcritical (E1 or E2)");
    bifurcate->add_option("--bracket", bracket, "Search interval lo hi")->expected(2);
    bifurcate->add_option("--branch", branch, "Interior branch index for hopf");
    auto* probeOpt = bifurcate->add_option("--probe-k0", probeK0, "k0 at which k0-origin looks for a cycle");

    auto* check = app.add_subcommand("check", "Evaluate a certificate (JSON checklist)");
    check->add_option("kind", req.kind, "trace | corollary | extinction")
        ->required()
        ->check(CLI::IsMember({"trace", "corollary", "extinction"}));
    addCommon(check, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : allee::cli::kConfigError;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            req.command = sub->get_name();
        }
        if (req.command == "portrait") {
            req.outDir = outDir;
            req.format = Format::Json;
        }
        // Flags map onto config keys so they survive --sweep and are checked the same way.
        if (!at.empty()) {
            common.sets.push_back("at=" + at);
        }
        if (bracket.size() == 2) {
            common.sets.push_back("bracket_lo=" + allee::formatNumber(bracket[0]));
            common.sets.push_back("bracket_hi=" + allee::formatNumber(bracket[1]));
        }
        if (branch >= 0) {
            common.sets.push_back("branch=" + std::to_string(branch));
        }
        if (probeOpt->count() > 0) {
            common.sets.push_back("probe_k0=" + allee::formatNumber(probeK0));
        }
        if (req.command == "portrait" && !common.sweeps.empty()) {
            throw allee::ConfigError("portrait does not support --sweep");
        }
        return execute(req, common);
    } catch (const std::exception& e) {
        std::cerr << allee::cli::errorJson(e).dump(2) << "\n";
        return allee::cli::exitCodeFor(e);
    }
}
