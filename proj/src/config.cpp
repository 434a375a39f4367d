#include "hle/config.hpp"

#include <fstream>

#include "hle/errors.hpp"

namespace hle {

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return j;
}

SolverMode mode_from_string(const std::string& s) {
    if (s == "auto") return SolverMode::automatic;
    if (s == "linear") return SolverMode::linear;
    if (s == "nonlinear") return SolverMode::nonlinear;
    throw ConfigError("unknown solver mode: " + s + " (expected auto|linear|nonlinear)");
}

std::string mode_to_string(SolverMode m) {
    switch (m) {
        case SolverMode::automatic: return "auto";
        case SolverMode::linear: return "linear";
        case SolverMode::nonlinear: return "nonlinear";
    }
    return "auto";
}

} // namespace

DomainDescriptor domain_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "interval")
        return DomainDescriptor::interval(j.at("radius").get<double>());
    if (kind == "ball") return DomainDescriptor::ball(j.at("radius").get<double>());
    if (kind == "rectangle")
        return DomainDescriptor::rectangle(j.at("half_width").get<double>(),
                                           j.at("half_height").get<double>());
    throw ConfigError("unknown domain kind: " + kind);
}

nlohmann::ordered_json domain_to_json(const DomainDescriptor& d) {
    nlohmann::ordered_json j;
    switch (d.kind) {
        case DomainKind::interval:
            j["kind"] = "interval";
            j["radius"] = d.extent_x;
            break;
        case DomainKind::ball:
            j["kind"] = "ball";
            j["radius"] = d.extent_x;
            break;
        case DomainKind::rectangle:
            j["kind"] = "rectangle";
            j["half_width"] = d.extent_x;
            j["half_height"] = d.extent_y;
            break;
    }
    return j;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["problem"] = {{"n", problem.n}, {"p", problem.p}, {"a", problem.a}, {"b", problem.b}};
    j["domain"] = domain_to_json(problem.domain);
    j["grid"] = {{"cells", cells}};
    j["solver"] = {{"mode", mode_to_string(solver.mode)},
                   {"tol", solver.tol},
                   {"max_iterations", solver.max_iterations},
                   {"eigenvalue_count", solver.eigenvalue_count},
                   {"multistart", solver.multistart},
                   {"dense_threshold", solver.dense_threshold}};
    j["split_ratios"] = split_ratios;
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        const auto& prob = j.at("problem");
        cfg.problem.n = prob.at("n").get<int>();
        cfg.problem.p = prob.at("p").get<double>();
        cfg.problem.a = prob.at("a").get<double>();
        cfg.problem.b = prob.at("b").get<double>();
        cfg.problem.domain = domain_from_json(j.at("domain"));
        cfg.cells = j.at("grid").at("cells").get<int>();
        if (j.contains("solver")) {
            const auto& s = j["solver"];
            if (s.contains("mode")) cfg.solver.mode = mode_from_string(s["mode"]);
            if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
            if (s.contains("max_iterations"))
                cfg.solver.max_iterations = s["max_iterations"].get<int>();
            if (s.contains("eigenvalue_count"))
                cfg.solver.eigenvalue_count = s["eigenvalue_count"].get<int>();
            if (s.contains("multistart"))
                cfg.solver.multistart = s["multistart"].get<int>();
            if (s.contains("dense_threshold"))
                cfg.solver.dense_threshold = s["dense_threshold"].get<int>();
        }
        if (j.contains("split_ratios"))
            cfg.split_ratios = j["split_ratios"].get<std::vector<double>>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    if (!(cfg.problem.p > 1.0)) throw ConfigError("config: p must be > 1");
    if (cfg.cells < 8) throw ConfigError("config: grid too coarse (cells < 8)");
    if (cfg.solver.eigenvalue_count < 1)
        throw ConfigError("config: eigenvalue_count must be >= 1");
    if (!(cfg.solver.tol > 0.0)) throw ConfigError("config: tol must be positive");
    for (double r : cfg.split_ratios)
        if (!(r > 0.0)) throw ConfigError("config: split ratios must be positive");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    return from_json(read_json_file(path));
}

std::string fnv1a_hex(const std::string& payload) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : payload) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string RunConfig::hash() const {
    // canonical form: key-sorted serialization
    const nlohmann::json canonical = to_json();
    return fnv1a_hex(canonical.dump());
}

SweepConfig SweepConfig::load(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    SweepConfig cfg;
    cfg.base = RunConfig::from_json(j);
    if (!j.contains("sweep") || j["sweep"].empty())
        throw ConfigError("sweep config: missing \"sweep\" axes");
    for (const auto& [key, axis] : j["sweep"].items()) {
        if (key != "a" && key != "b" && key != "p")
            throw ConfigError("sweep config: axes may range over a, b or p only");
        SweepAxis ax;
        ax.parameter = key;
        if (axis.contains("values")) {
            ax.values = axis["values"].get<std::vector<double>>();
        } else {
            const double from = axis.at("from").get<double>();
            const double to = axis.at("to").get<double>();
            const int count = axis.at("count").get<int>();
            if (count < 2) throw ConfigError("sweep config: axis count must be >= 2");
            for (int i = 0; i < count; ++i)
                ax.values.push_back(from + (to - from) * i / (count - 1));
        }
        if (ax.values.empty()) throw ConfigError("sweep config: empty axis");
        cfg.axes.push_back(std::move(ax));
    }
    return cfg;
}

std::vector<VerifyCheckConfig> VerifyConfig::default_checks() {
    using nlohmann::json;
    std::vector<VerifyCheckConfig> checks;
    const json ball = {{"kind", "ball"}, {"radius", 1.0}};
    const json interval = {{"kind", "interval"}, {"radius", 1.0}};
    checks.push_back({"symmetry", {{"n", 2}, {"a", 1.0}, {"b", 2.0}, {"p", 3.0},
                                   {"domain", ball}, {"cells", 384}, {"tol", 2e-2}}});
    checks.push_back({"symmetry", {{"n", 2}, {"a", 0.5}, {"b", 1.0}, {"p", 1.5},
                                   {"domain", ball}, {"cells", 384}, {"tol", 2e-2}}});
    checks.push_back({"positivity", {{"n", 1}, {"a", 0.0}, {"b", 0.0}, {"p", 2.0},
                                     {"domain", interval}, {"cells", 256}}});
    checks.push_back({"scaling_slope",
                      {{"n", 1}, {"s", 0.0}, {"b", -4.5}, {"p", 2.0}, {"cells", 4096},
                       {"k_list", json::array({2, 3, 4, 6, 8, 12, 16})}}});
    checks.push_back({"scaling_slope",
                      {{"n", 2}, {"s", 1.0}, {"b", -5.5}, {"p", 2.0}, {"cells", 4096},
                       {"k_list", json::array({2, 3, 4, 6, 8, 12, 16})}}});
    checks.push_back({"low_dim_inequality",
                      {{"n", 1}, {"a", 0.0}, {"p", 2.0}, {"samples", 100}, {"cells", 256}}});
    checks.push_back({"low_dim_inequality",
                      {{"n", 2}, {"a", 1.0}, {"p", 1.5}, {"samples", 100}, {"cells", 256}}});
    checks.push_back({"low_dim_inequality",
                      {{"n", 1}, {"a", -0.5}, {"p", 3.0}, {"samples", 100}, {"cells", 256}}});
    checks.push_back({"equivalence", {{"n", 1}, {"a", 0.0}, {"b", 0.0}, {"p", 2.0},
                                      {"domain", interval}, {"cells", 256}, {"tol", 1e-6}}});
    checks.push_back({"finite_energy", {{"n", 1}, {"a", 0.0}, {"b", 0.0}, {"p", 2.0},
                                        {"domain", interval}, {"cells", 128}}});
    return checks;
}

VerifyCheckConfig VerifyConfig::rellich_default_check() {
    return {"rellich", {{"s", 0.0}, {"p", 2.0}, {"n", 5}, {"cells", 256}}};
}

VerifyConfig VerifyConfig::load(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    VerifyConfig cfg;
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("checks")) {
        for (const auto& c : j["checks"]) {
            VerifyCheckConfig check;
            check.name = c.at("name").get<std::string>();
            check.params = c;
            cfg.checks.push_back(std::move(check));
        }
    } else {
        cfg.checks = default_checks();
        cfg.used_default_checks = true;
    }
    return cfg;
}

std::string VerifyConfig::hash() const {
    nlohmann::json canonical;
    canonical["seed"] = seed;
    canonical["override_threshold_guard"] = override_threshold_guard;
    canonical["checks"] = nlohmann::json::array();
    for (const auto& check : checks)
        canonical["checks"].push_back({{"name", check.name}, {"params", check.params}});
    return fnv1a_hex(canonical.dump());
}

ConvergenceConfig ConvergenceConfig::load(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    ConvergenceConfig cfg;
    cfg.base = RunConfig::from_json(j);
    if (!j.contains("convergence") || !j["convergence"].contains("cells"))
        throw ConfigError("convergence config: missing \"convergence\".\"cells\" list");
    cfg.cells_list = j["convergence"]["cells"].get<std::vector<int>>();
    return cfg;
}

} // namespace hle
