#include "commands.hpp"

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "allee/bifurcation.hpp"
#include "allee/certificates.hpp"
#include "allee/equilibria.hpp"
#include "allee/integrator.hpp"
#include "allee/manifolds.hpp"
#include "allee/parallel.hpp"

#ifndef ALLEE_VERSION
#define ALLEE_VERSION "0.0.0"
#endif

namespace allee::cli {

using json = nlohmann::ordered_json;

std::string toolVersion() { return std::string("allee ") + ALLEE_VERSION; }

namespace {

const std::set<std::string>& knownKeys()
{
    static const std::set<std::string> keys = {
        "r1", "k1", "k0", "lambda", "A", "b", "h", "s",
        // simulate
        "x0", "y0", "t_end", "rel_tol", "abs_tol", "max_step", "direction",
        // portrait
        "nullcline_points", "manifolds", "manifold_epsilon", "trajectories",
        // bifurcate
        "at", "bracket_lo", "bracket_hi", "branch", "probe_k0",
        // check
        "grid_n", "runs", "seed",
    };
    return keys;
}

Parameters parametersOf(const Config& cfg)
{
    try {
        return cfg.parameters();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

json stateJson(const State& s) { return json{{"x", s.x()}, {"y", s.y()}}; }

IntegratorConfig integratorFrom(const Config& cfg)
{
    IntegratorConfig ic;
    ic.relTol = cfg.num("rel_tol", ic.relTol);
    ic.absTol = cfg.num("abs_tol", ic.absTol);
    ic.maxStep = cfg.num("max_step", ic.maxStep);
    ic.tEnd = cfg.num("t_end", ic.tEnd);
    const std::string dir = cfg.str("direction", "forward");
    if (dir == "forward") {
        ic.direction = Direction::Forward;
    } else if (dir == "backward") {
        ic.direction = Direction::Backward;
    } else {
        throw ConfigError("direction must be forward or backward");
    }
    try {
        ic.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return ic;
}

Table trajectoryTable(const Trajectory& tr)
{
    Table t;
    t.header = {"t", "x", "y"};
    t.rows.reserve(tr.samples.size());
    for (const auto& smp : tr.samples) {
        t.rows.push_back({smp.t, smp.state.x(), smp.state.y()});
    }
    return t;
}

Output simulate(const Config& cfg)
{
    const Parameters p = parametersOf(cfg);
    const State init(cfg.num("x0"), cfg.num("y0"));
    if (!(init.x() >= 0.0 && init.y() >= 0.0)) {
        throw ConfigError("initial state must be non-negative");
    }
    Output out;
    out.table = trajectoryTable(integrate(p, init, integratorFrom(cfg)));
    return out;
}

Output equilibria(const Config& cfg)
{
    const Parameters p = parametersOf(cfg);
    Table t;
    t.header = {"kind", "x", "y", "re1", "im1", "re2", "im2", "class"};
    for (const auto& e : allEquilibria(p)) {
        t.rows.push_back({e.label(), e.state.x(), e.state.y(), e.eigenvalues[0].real(), e.eigenvalues[0].imag(),
                          e.eigenvalues[1].real(), e.eigenvalues[1].imag(), std::string(className(e.cls))});
    }
    Output out;
    out.table = std::move(t);
    return out;
}

std::vector<std::string> splitList(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) {
            out.push_back(item.substr(a, b - a + 1));
        }
    }
    return out;
}

void writeFile(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot write " + path.string());
    }
    f << text;
}

// "stable:E2", "unstable:E1" or "stable:E*1"; the suffix ":-" picks the opposite side.
struct ManifoldRequest {
    std::string token;
    ManifoldSense sense;
    std::string origin;
    int side = +1;
};

ManifoldRequest parseManifold(const std::string& token)
{
    const auto parts = splitList(token, ':');
    if (parts.size() < 2 || parts.size() > 3 || (parts[0] != "stable" && parts[0] != "unstable")) {
        throw ConfigError("manifold entries look like stable:E2 or unstable:E1[:-]");
    }
    ManifoldRequest r;
    r.token = token;
    r.sense = parts[0] == "stable" ? ManifoldSense::Stable : ManifoldSense::Unstable;
    r.origin = parts[1];
    if (parts.size() == 3) {
        if (parts[2] != "+" && parts[2] != "-") {
            throw ConfigError("manifold side must be + or -");
        }
        r.side = parts[2] == "-" ? -1 : +1;
    }
    return r;
}

Trajectory growFrom(const Parameters& p, const ManifoldRequest& req, double epsScale)
{
    // Boundary saddles go through growManifold so the crossing is recorded; interior
    // saddles have no section and run until they leave the box.
    if (req.origin == "E0" || req.origin == "E1" || req.origin == "E2") {
        ManifoldSpec spec;
        spec.origin = req.origin == "E0" ? EquilibriumKind::E0
                      : req.origin == "E1" ? EquilibriumKind::E1
                                           : EquilibriumKind::E2;
        spec.sense = req.sense;
        spec.side = req.side;
        spec.epsilonScale = epsScale;
        spec.requireCrossing = false;
        return growManifold(p, spec).path;
    }
    for (const auto& e : interiorEquilibria(p)) {
        if (e.label() == req.origin) {
            const SaddleDirections d = saddleEigendirections(p, e.state);
            const State dir = req.sense == ManifoldSense::Stable ? d.stable : d.unstable;
            IntegratorConfig ic;
            ic.relTol = 1e-11;
            ic.absTol = 1e-14;
            ic.maxStep = 0.05 * p.k1;
            ic.tEnd = 1e4;
            ic.direction = req.sense == ManifoldSense::Stable ? Direction::Backward : Direction::Forward;
            ic.boxMax = 2.0 * p.k1;
            ic.maxArcLength = 100.0 * p.k1;
            ic.convergeTol = 1e-10;
            return integrate(p, e.state + epsScale * p.k1 * req.side * dir, ic);
        }
    }
    throw NotSaddle("no equilibrium labelled " + req.origin);
}

Output portrait(const Request& req)
{
    const Config& cfg = req.config;
    const Parameters p = parametersOf(cfg);
    const long long points = cfg.integer("nullcline_points", 400);
    if (points < 2) {
        throw ConfigError("nullcline_points must be at least 2");
    }
    const double epsScale = cfg.num("manifold_epsilon", 1e-6);
    const IntegratorConfig trajCfg = integratorFrom(cfg);
    std::vector<ManifoldRequest> manifolds;
    for (const auto& tok : splitList(cfg.str("manifolds", ""), ',')) {
        manifolds.push_back(parseManifold(tok));
    }
    std::vector<State> starts;
    for (const auto& tok : splitList(cfg.str("trajectories", ""), ';')) {
        const auto xy = splitList(tok, ':');
        if (xy.size() != 2) {
            throw ConfigError("trajectories look like x:y;x:y");
        }
        starts.emplace_back(parseNumber(xy[0], "trajectory x"), parseNumber(xy[1], "trajectory y"));
    }
    std::filesystem::create_directories(req.outDir);

    json files = json::array();
    auto emit = [&](const std::string& name, const std::string& kind, const Table& t, json extra) {
        writeFile(req.outDir / name, toCsv(t));
        json entry{{"file", name}, {"kind", kind}, {"rows", t.rows.size()}};
        for (auto& [k, v] : extra.items()) {
            entry[k] = v;
        }
        files.push_back(std::move(entry));
    };

    Table f1;
    Table f2;
    f1.header = f2.header = {"x", "y"};
    for (long long i = 0; i < points; ++i) {
        const double x = p.k1 * static_cast<double>(i + 1) / static_cast<double>(points);
        if (const auto y = solvePreyNullcline(p, x); y && *y >= 0.0) {
            f1.rows.push_back({x, *y});
        }
        try {
            const double y = nullclineG2(p, x);
            if (y >= 0.0 && std::isfinite(y)) {
                f2.rows.push_back({x, y});
            }
        } catch (const PoleError&) {
        }
    }
    emit("nullcline_f1.csv", "nullcline_prey", f1, json::object());
    emit("nullcline_f2.csv", "nullcline_predator", f2, json::object());

    for (std::size_t i = 0; i < manifolds.size(); ++i) {
        const auto& m = manifolds[i];
        const Trajectory path = growFrom(p, m, epsScale);
        std::string name = "manifold_" + std::string(m.sense == ManifoldSense::Stable ? "stable_" : "unstable_") +
                           (m.origin.rfind("E*", 0) == 0 ? "Estar" + m.origin.substr(2) : m.origin) +
                           (m.side < 0 ? "_minus" : "") + ".csv";
        emit(name, "manifold", trajectoryTable(path),
             json{{"origin", m.origin},
                  {"sense", m.sense == ManifoldSense::Stable ? "stable" : "unstable"},
                  {"side", m.side}});
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "trajectory_%03zu.csv", i);
        emit(name, "trajectory", trajectoryTable(integrate(p, starts[i], trajCfg)),
             json{{"x0", starts[i].x()}, {"y0", starts[i].y()}});
    }

    json manifest;
    manifest["tool"] = toolVersion();
    manifest["command"] = "portrait";
    manifest["parameters"] = toJson(p);
    manifest["tolerances"] = json{{"trajectory_rel_tol", trajCfg.relTol},
                                  {"trajectory_abs_tol", trajCfg.absTol},
                                  {"trajectory_max_step", trajCfg.maxStep},
                                  {"trajectory_t_end", trajCfg.tEnd},
                                  {"manifold_rel_tol", 1e-11},
                                  {"manifold_abs_tol", 1e-14},
                                  {"manifold_epsilon", epsScale * p.k1}};
    manifest["files"] = std::move(files);
    writeFile(req.outDir / "manifest.json", manifest.dump(2) + "\n");
    Output out;
    out.json = std::move(manifest);
    return out;
}

json bifurcationJson(const Parameters& p, const BifurcationPoint& bp)
{
    json j;
    j["tool"] = toolVersion();
    j["kind"] = std::string(bifurcationKindName(bp.kind));
    j["parameter"] = std::string(paramName(bp.param));
    j["critical_value"] = bp.criticalValue;
    j["location"] = stateJson(bp.location);
    json diag = json::object();
    for (const auto& d : bp.diagnostics) {
        diag[d.name] = d.value;
    }
    j["diagnostics"] = std::move(diag);
    j["notes"] = bp.notes;
    j["parameters"] = toJson(p);
    return j;
}

json orbitJson(const PeriodicOrbit& o)
{
    return json{{"period", o.period},     {"amplitude_x", o.amplitude()},  {"multiplier", o.multiplier},
                {"stable", o.stable()},   {"residual", o.residual},        {"section_point", stateJson(o.sectionPoint)},
                {"min", stateJson(o.min)}, {"max", stateJson(o.max)}};
}

Interval bracketFrom(const Config& cfg)
{
    const Interval b{cfg.num("bracket_lo"), cfg.num("bracket_hi")};
    if (!(b.hi > b.lo)) {
        throw ConfigError("bracket_hi must exceed bracket_lo");
    }
    return b;
}

Output bifurcate(const Request& req)
{
    const Config& cfg = req.config;
    const Parameters p = parametersOf(cfg);
    Output out;
    if (req.kind == "transcritical") {
        const std::string at = cfg.str("at", "E1");
        if (at != "E1" && at != "E2") {
            throw ConfigError("transcritical --at must be E1 or E2");
        }
        out.json = bifurcationJson(p, transcriticalLambda(p, at == "E1" ? EquilibriumKind::E1 : EquilibriumKind::E2));
    } else if (req.kind == "saddle-node") {
        out.json = bifurcationJson(p, saddleNodeLambda(p, bracketFrom(cfg)));
    } else if (req.kind == "hopf") {
        const BifurcationPoint bp = hopfS(p, static_cast<int>(cfg.integer("branch", 0)), bracketFrom(cfg));
        out.json = bifurcationJson(p, bp);
        const HopfCriticality crit = hopfCriticality(p, bp);
        json probes = json::array();
        for (const auto& pr : crit.probes) {
            probes.push_back(json{{"offset", pr.offset}, {"cycle", pr.cycle ? orbitJson(*pr.cycle) : json(nullptr)}});
        }
        out.json["criticality"] = json{{"label", crit.label},
                                       {"unstable_side", crit.unstableSide},
                                       {"amplitudes_shrink", crit.amplitudesShrink},
                                       {"probes", std::move(probes)}};
    } else if (req.kind == "heteroclinic") {
        out.json = bifurcationJson(p, heteroclinicFind(p, bracketFrom(cfg)));
    } else if (req.kind == "k0-origin") {
        const K0OriginReport rep = transcriticalK0Origin(p, cfg.num("probe_k0", p.k0));
        out.json = bifurcationJson(p, rep.point);
        json limits = json::array();
        for (const auto& l : rep.limits) {
            limits.push_back(json{{"kind", std::string(omegaKindName(l.kind))}, {"point", stateJson(l.point)}});
        }
        out.json["probe"] = json{{"k0", rep.probeK0},
                                 {"cycle", rep.cycle ? orbitJson(*rep.cycle) : json(nullptr)},
                                 {"omega_limits", std::move(limits)}};
    } else {
        throw ConfigError("unknown bifurcation kind '" + req.kind + "'");
    }
    out.json["command"] = "bifurcate";
    return out;
}

json reportJson(const Parameters& p, const CertificateReport& rep)
{
    json j;
    j["tool"] = toolVersion();
    j["certificate"] = rep.kind;
    j["passed"] = rep.passed;
    j["verdict"] = std::string(verdictName(rep.verdict));
    j["extremal"] = json{{"value", rep.extremal().value}, {"at", stateJson(rep.extremal().at)}};
    j["trace_min"] = json{{"value", rep.minTrace.value}, {"at", stateJson(rep.minTrace.at)}};
    j["trace_max"] = json{{"value", rep.maxTrace.value}, {"at", stateJson(rep.maxTrace.at)}};
    json checks = json::object();
    json list = json::array();
    for (const auto& e : rep.checklist) {
        checks[e.name] = e.passed;
        list.push_back(json{{"name", e.name}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"passed", e.passed}});
    }
    j["checks"] = std::move(checks);
    j["checklist"] = std::move(list);
    if (rep.simulation) {
        const auto& s = *rep.simulation;
        j["simulation"] = json{{"runs", s.runs},           {"agreeing", s.agreeing}, {"worst", s.worst},
                               {"horizon", s.horizon},     {"tolerance", s.tolerance}, {"seed", s.seed},
                               {"all_agree", s.allAgree()}};
    } else {
        j["simulation"] = nullptr;
    }
    j["notes"] = rep.notes;
    j["parameters"] = toJson(p);
    return j;
}

Output check(const Request& req)
{
    const Config& cfg = req.config;
    const Parameters p = parametersOf(cfg);
    SimulationOptions sim;
    sim.runs = static_cast<int>(cfg.integer("runs", sim.runs));
    sim.seed = static_cast<std::uint64_t>(cfg.integer("seed", static_cast<long long>(sim.seed)));
    if (sim.runs < 1) {
        throw ConfigError("runs must be positive");
    }
    Output out;
    if (req.kind == "trace") {
        const int n = static_cast<int>(cfg.integer("grid_n", 400));
        if (n < 2) {
            throw ConfigError("grid_n must be at least 2");
        }
        const Region d0 = buildD0(p, n);
        out.json = reportJson(p, traceGridCertificate(p, d0));
        out.json["region"] = json{{"x_range", {d0.x.lo, d0.x.hi}},
                                  {"y_range", {d0.y.lo, d0.y.hi}},
                                  {"grid_n", d0.gridN},
                                  {"inset", d0.inset}};
        out.json["dulac_max_rel_error"] = dulacMaxRelError(p, d0);
    } else if (req.kind == "corollary") {
        out.json = reportJson(p, checkCorollaryGlobalStability(p, sim));
    } else if (req.kind == "extinction") {
        const CertificateReport rep = checkExtinction(p, sim);
        out.json = reportJson(p, rep);
        const auto interior = interiorEquilibria(p);
        json eqs = json::array();
        for (const auto& e : interior) {
            eqs.push_back(json{{"x", e.state.x()}, {"y", e.state.y()}, {"class", std::string(className(e.cls))}});
        }
        out.json["interior_equilibria"] = std::move(eqs);
    } else {
        throw ConfigError("unknown certificate kind '" + req.kind + "'");
    }
    out.json["command"] = "check";
    return out;
}

} // namespace

Output run(const Request& req)
{
    req.config.requireKnown(knownKeys());
    if (req.command == "simulate") {
        return simulate(req.config);
    }
    if (req.command == "equilibria") {
        return equilibria(req.config);
    }
    if (req.command == "portrait") {
        return portrait(req);
    }
    if (req.command == "bifurcate") {
        return bifurcate(req);
    }
    if (req.command == "check") {
        return check(req);
    }
    throw ConfigError("unknown command '" + req.command + "'");
}

int exitCodeFor(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) {
        return kConfigError;
    }
    if (dynamic_cast<const GateError*>(&e) || dynamic_cast<const BracketError*>(&e) ||
        dynamic_cast<const BranchLost*>(&e)) {
        return kGateFailure;
    }
    return kNumericalFailure;
}

nlohmann::ordered_json errorJson(const std::exception& e)
{
    std::string type = "Error";
    if (dynamic_cast<const ConfigError*>(&e)) {
        type = "ConfigError";
    } else if (dynamic_cast<const GateError*>(&e)) {
        type = "GateError";
    } else if (dynamic_cast<const BracketError*>(&e)) {
        type = "BracketError";
    } else if (dynamic_cast<const BranchLost*>(&e)) {
        type = "BranchLost";
    } else if (dynamic_cast<const StepFailure*>(&e)) {
        type = "StepFailure";
    } else if (dynamic_cast<const NotSaddle*>(&e)) {
        type = "NotSaddle";
    } else if (dynamic_cast<const NoCrossing*>(&e)) {
        type = "NoCrossing";
    } else if (dynamic_cast<const NotSemisimple*>(&e)) {
        type = "NotSemisimple";
    } else if (dynamic_cast<const DomainError*>(&e)) {
        type = "DomainError";
    } else if (dynamic_cast<const PoleError*>(&e)) {
        type = "PoleError";
    }
    return json{{"tool", toolVersion()},
                {"error", json{{"type", type}, {"reason", e.what()}, {"exit_code", exitCodeFor(e)}}}};
}

std::string render(const Output& out, Format format)
{
    if (out.table) {
        return format == Format::Csv ? toCsv(*out.table) : toJson(*out.table).dump(2) + "\n";
    }
    return out.json.dump(2) + "\n";
}

Output runSweep(const Request& req, const SweepSpec& sweep, unsigned threads)
{
    if (!knownKeys().count(sweep.key)) {
        throw ConfigError("unknown sweep key '" + sweep.key + "'");
    }
    if (req.command == "portrait") {
        throw ConfigError("portrait does not support --sweep");
    }
    const auto n = static_cast<std::size_t>(sweep.n);
    std::vector<Output> results(n);
    std::vector<std::exception_ptr> failures(n);
    parallelFor(
        n,
        [&](std::size_t i) {
            Request r = req;
            r.config.set(sweep.key, formatNumber(sweep.value(static_cast<int>(i))));
            try {
                results[i] = run(r);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        },
        threads);
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }

    Output merged;
    if (results.front().table) {
        Table t;
        t.header = {"sweep_index", sweep.key};
        t.header.insert(t.header.end(), results.front().table->header.begin(), results.front().table->header.end());
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& row : results[i].table->rows) {
                std::vector<Cell> r{static_cast<long long>(i), sweep.value(static_cast<int>(i))};
                r.insert(r.end(), row.begin(), row.end());
                t.rows.push_back(std::move(r));
            }
        }
        merged.table = std::move(t);
        return merged;
    }
    merged.json = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        merged.json.push_back(
            json{{"sweep_index", i}, {sweep.key, sweep.value(static_cast<int>(i))}, {"result", results[i].json}});
    }
    return merged;
}

} // namespace allee::cli
