// fsde: experiment driver for multiscale Caputo FSDE studies.
//
// Subcommands: simulate, table1, table2, compare, homogenize.
// Run configuration comes from a line-oriented `key = value` file with
// [section] headers (grammar documented in README.md); --seed/--paths/
// --threads/--output override the file. Every CSV written embeds the
// effective-config hash.
//
// Exit codes: 0 success, 2 config/usage error, 3 numerical/model error,
// 4 capacity error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsde/brownian.hpp"
#include "fsde/csvio.hpp"
#include "fsde/errors.hpp"
#include "fsde/experiment.hpp"
#include "fsde/homogenize.hpp"
#include "fsde/model.hpp"
#include "fsde/rng.hpp"
#include "fsde/solver.hpp"

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config file

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// section -> key -> value; the implicit top section is "".
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

ConfigMap parse_config_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    ConfigMap cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": unterminated [section] header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": empty section name");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected `key = value`, got \"" + t + "\"");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": empty key");
        cfg[section][key] = value;
    }
    return cfg;
}

// Reals accept plain decimals and `a/b` fractions (the paper's step sizes
// read naturally as 1/80, 1/1024, ...).
double parse_real(const std::string& raw, const std::string& where) {
    std::string s = trim(raw);
    auto slash = s.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        }
        std::string num = trim(s.substr(0, slash));
        std::string den = trim(s.substr(slash + 1));
        double a = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
        double b = std::stod(den, &used);
        if (used != den.size()) throw std::invalid_argument(den);
        if (b == 0.0) throw std::invalid_argument("zero denominator");
        return a / b;
    } catch (const std::exception&) {
        throw ConfigError("field " + where + ": cannot parse \"" + raw +
                          "\" as a real number");
    }
}

long long parse_int(const std::string& raw, const std::string& where) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(trim(raw), &used);
        if (used != trim(raw).size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field " + where + ": cannot parse \"" + raw +
                          "\" as an integer");
    }
}

bool parse_bool(const std::string& raw, const std::string& where) {
    std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("field " + where + ": cannot parse \"" + raw +
                      "\" as a boolean");
}

std::vector<double> parse_real_list(const std::string& raw,
                                    const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty())
            throw ConfigError("field " + where + ": empty list element");
        out.push_back(parse_real(item, where));
    }
    if (out.empty()) throw ConfigError("field " + where + ": empty list");
    return out;
}

/// Effective configuration: file contents merged with CLI overrides.
class RunConfig {
public:
    RunConfig(ConfigMap cfg, fs::path output_dir) : cfg_(std::move(cfg)) {
        if (!output_dir.empty()) set("", "output_dir", output_dir.string());
    }

    void set(const std::string& section, const std::string& key,
             const std::string& value) {
        cfg_[section][key] = value;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = cfg_.find(section);
        return s != cfg_.end() && s->second.count(key) > 0;
    }

    std::string raw(const std::string& section, const std::string& key) const {
        return cfg_.at(section).at(key);
    }

    double real_or(const std::string& section, const std::string& key,
                   double fallback) const {
        return has(section, key) ? parse_real(raw(section, key), name(section, key))
                                 : fallback;
    }
    long long int_or(const std::string& section, const std::string& key,
                     long long fallback) const {
        return has(section, key) ? parse_int(raw(section, key), name(section, key))
                                 : fallback;
    }
    bool bool_or(const std::string& section, const std::string& key,
                 bool fallback) const {
        return has(section, key) ? parse_bool(raw(section, key), name(section, key))
                                 : fallback;
    }
    std::string string_or(const std::string& section, const std::string& key,
                          const std::string& fallback) const {
        return has(section, key) ? raw(section, key) : fallback;
    }
    std::vector<double> real_list_or(const std::string& section,
                                     const std::string& key,
                                     std::vector<double> fallback) const {
        return has(section, key)
                   ? parse_real_list(raw(section, key), name(section, key))
                   : std::move(fallback);
    }

    /// Canonical echo of the effective config (sorted).
    std::string echo() const {
        std::ostringstream os;
        for (const auto& [section, entries] : cfg_) {
            for (const auto& [key, value] : entries) {
                if (!section.empty()) os << section << '.';
                os << key << " = " << value << "\n";
            }
        }
        return os.str();
    }

    /// Hash over the result-determining keys: where outputs land does not
    /// change what they contain.
    std::string hash() const {
        std::ostringstream os;
        for (const auto& [section, entries] : cfg_) {
            for (const auto& [key, value] : entries) {
                if (section.empty() && key == "output_dir") continue;
                if (!section.empty()) os << section << '.';
                os << key << " = " << value << "\n";
            }
        }
        return fsde::to_hex(fsde::fnv1a64(os.str()));
    }

private:
    static std::string name(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }
    ConfigMap cfg_;
};

// ---------------------------------------------------------------------------
// Shared pieces

constexpr std::uint64_t kDefaultSeed = fsde::kDefaultStudySeed;

struct GlobalArgs {
    std::string config_path;
    std::string output_dir;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<std::int64_t> threads;
};

RunConfig load_config(const GlobalArgs& args) {
    ConfigMap cfg;
    if (!args.config_path.empty())
        cfg = parse_config_file(args.config_path);
    RunConfig rc(std::move(cfg), args.output_dir);
    if (args.seed) rc.set("", "seed", std::to_string(*args.seed));
    if (args.paths) rc.set("", "n_paths", std::to_string(*args.paths));
    if (args.threads) rc.set("", "threads", std::to_string(*args.threads));
    return rc;
}

struct CommonParams {
    std::string model;
    double alpha;
    double epsilon;
    double horizon_T;
    std::size_t n_paths;
    std::uint64_t seed;
    int threads;
    fs::path out_dir;
};

CommonParams common_params(const RunConfig& rc, const std::string& default_model,
                           double default_T) {
    CommonParams p;
    p.model = rc.string_or("", "model", default_model);
    if (p.model.empty()) {
        std::string msg = "no model configured; known labels:";
        for (const auto& l : fsde::registry_labels()) msg += " " + l;
        throw ConfigError(msg);
    }
    p.alpha = rc.real_or("", "alpha", 0.9);
    p.epsilon = rc.real_or("", "epsilon", 1.0);
    p.horizon_T = rc.real_or("", "horizon_T", default_T);
    long long paths = rc.int_or("", "n_paths", 2000);
    if (paths < 1) throw ConfigError("n_paths must be >= 1");
    p.n_paths = static_cast<std::size_t>(paths);
    p.seed = static_cast<std::uint64_t>(
        rc.int_or("", "seed", static_cast<long long>(kDefaultSeed)));
    p.threads = static_cast<int>(rc.int_or("", "threads", 0));
    p.out_dir = rc.string_or("", "output_dir", "out");
    return p;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << body;
}

struct Manifest {
    std::string command;
    const RunConfig* config = nullptr;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();

    void write(const fs::path& out_dir) const {
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::ostringstream os;
        os << "command = " << command << "\n";
        os << "config_hash = " << config->hash() << "\n";
        os << "generator = " << fsde::kGeneratorId << "\n";
        os << "wall_clock_seconds = " << wall << "\n";
        for (const auto& o : outputs) os << "output = " << o << "\n";
        os << "# effective config\n" << config->echo();
        write_file(out_dir / "manifest.txt", os.str());
    }
};

std::string csv_name_for_real(const std::string& stem, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%g.csv", stem.c_str(), v);
    return buf;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const RunConfig& rc) {
    CommonParams p = common_params(rc, /*default_model=*/"", /*default_T=*/1.0);
    fsde::FractionalOrder order(p.alpha);
    fsde::FsdeProblem problem =
        fsde::make_from_registry(p.model, order, p.epsilon, p.horizon_T);

    long long n_steps = rc.int_or("simulate", "n_steps", 0);
    if (n_steps == 0) {
        double dt = rc.real_or("simulate", "dt", 0.0);
        if (dt > 0.0) n_steps = std::llround(p.horizon_T / dt);
        else n_steps = 80;
    }
    if (n_steps < 1) throw ConfigError("simulate.n_steps must be >= 1");
    double dt = p.horizon_T / static_cast<double>(n_steps);

    fs::create_directories(p.out_dir);
    Manifest manifest{.command = "simulate", .config = &rc};

    fsde::BrownianLattice lattice;
    if (rc.has("simulate", "lattice_file")) {
        fs::path file = rc.raw("simulate", "lattice_file");
        lattice = fsde::load_lattice(file);
        bool ok = lattice.seed == p.seed &&
                  lattice.n_paths == p.n_paths &&
                  lattice.n_steps == static_cast<std::size_t>(n_steps) &&
                  lattice.noise_dim == problem.noise_dim &&
                  std::fabs(lattice.dt - dt) <= 1e-12 * dt;
        if (!ok)
            throw ConfigError("lattice file " + file.string() +
                              " does not match this config (seed/grid/dims)");
    } else {
        fsde::GenerateOptions gen;
        gen.threads = p.threads;
        long long cap_mb = rc.int_or("", "memory_cap_mb", 2048);
        if (cap_mb < 1) throw ConfigError("memory_cap_mb must be >= 1");
        gen.memory_cap_bytes = static_cast<std::size_t>(cap_mb) << 20;
        lattice = fsde::generate(p.seed, p.n_paths,
                                 static_cast<std::size_t>(n_steps), dt,
                                 problem.noise_dim, gen);
    }
    if (rc.bool_or("simulate", "dump_lattice", false)) {
        fsde::save_lattice(lattice, p.out_dir / "lattice.bin");
        manifest.outputs.push_back("lattice.bin");
    }

    fsde::PathEnsemble ensemble =
        fsde::em_solve(problem, lattice, fsde::SolveOptions{p.threads});

    std::ostringstream body;
    body << "# metadata: model=" << p.model << " alpha="
         << fsde::format_double17(p.alpha) << " seed=" << p.seed
         << " generator=" << fsde::kGeneratorId << " config=" << rc.hash()
         << "\n";
    fsde::write_ensemble_csv(body, ensemble);
    write_file(p.out_dir / "ensemble.csv", body.str());
    manifest.outputs.push_back("ensemble.csv");
    manifest.write(p.out_dir);
    return 0;
}

int run_table(const RunConfig& rc, bool table1) {
    double default_T = table1 ? 0.1 : 1e-6;
    CommonParams p = common_params(rc, "example1", default_T);

    std::vector<double> alphas;
    if (rc.has("", "alpha")) alphas = {p.alpha};
    else alphas = {0.9, 0.7};  // paper defaults run both orders

    fs::create_directories(p.out_dir);
    Manifest manifest{.command = table1 ? "table1" : "table2", .config = &rc};

    for (double alpha : alphas) {
        fsde::FractionalOrder order(alpha);
        fsde::ConvergenceTable table;
        if (table1) {
            std::vector<double> dt_list = rc.real_list_or(
                "dt_study", "dt_list",
                {1.0 / 80, 1.0 / 160, 1.0 / 320, 1.0 / 640});
            fsde::FsdeProblem problem =
                fsde::make_from_registry(p.model, order, p.epsilon, p.horizon_T);
            table = fsde::dt_study(problem, dt_list, p.n_paths, p.seed,
                                   fsde::SolveOptions{p.threads});
        } else {
            std::vector<double> eps_list = rc.real_list_or(
                "eps_study", "eps_list", {4e-8, 8e-8, 1.6e-7, 3.2e-7});
            double dt = rc.real_or("eps_study", "dt", 1e-8);
            auto factory = [&](double eps) {
                return fsde::make_from_registry(p.model, order, eps,
                                                p.horizon_T);
            };
            table = fsde::eps_study(factory, eps_list, dt, p.n_paths, p.seed,
                                    fsde::SolveOptions{p.threads});
        }
        table.meta.config_hash = rc.hash();
        std::ostringstream body;
        fsde::write_table_csv(body, table);
        std::string name =
            csv_name_for_real(table1 ? "table1_alpha" : "table2_alpha", alpha);
        write_file(p.out_dir / name, body.str());
        manifest.outputs.push_back(name);
    }
    manifest.write(p.out_dir);
    return 0;
}

/// Looks up the registered homogenized twin, or averages on the fly when the
/// config enables it.
fsde::FsdeProblem homogenized_counterpart(const RunConfig& rc,
                                          const fsde::FsdeProblem& problem,
                                          const CommonParams& p) {
    std::string twin = problem.label + "-homogenized";
    for (const auto& label : fsde::registry_labels()) {
        if (label == twin)
            return fsde::make_from_registry(twin, problem.alpha, p.epsilon,
                                            p.horizon_T);
    }
    if (!rc.bool_or("compare", "on_the_fly_averaging", false))
        throw ConfigError(
            "model " + problem.label +
            " has no registered homogenized counterpart; set "
            "compare.on_the_fly_averaging = true to build one numerically");
    fsde::AveragingOptions avg;
    avg.T1_start = rc.real_or("compare", "T1_start", 64.0);
    avg.tol = rc.real_or("compare", "averaging_tol", 1e-4);
    avg.max_doublings = static_cast<std::size_t>(
        rc.int_or("compare", "max_doublings", 14));
    avg.probe_lo = {rc.real_or("compare", "probe_lo", -2.0)};
    avg.probe_hi = {rc.real_or("compare", "probe_hi", 2.0)};
    // on-the-fly averaging raises AveragingDivergenceError for models with
    // no time-average (example1); that surfaces as exit code 3
    return fsde::build_homogenized_problem(problem, avg);
}

int cmd_compare(const RunConfig& rc) {
    CommonParams p = common_params(rc, /*default_model=*/"", /*default_T=*/1.0);
    fsde::FractionalOrder order(p.alpha);

    double dt_ref = rc.real_or("compare", "dt_ref", 1.0 / 1024);
    double dt_coarse = rc.real_or("compare", "dt_coarse", 1.0 / 256);
    std::vector<double> eps_list =
        rc.real_list_or("compare", "eps_list", {1e-1, 1e-4});

    fs::create_directories(p.out_dir);
    Manifest manifest{.command = "compare", .config = &rc};

    for (double eps : eps_list) {
        fsde::FsdeProblem problem =
            fsde::make_from_registry(p.model, order, eps, p.horizon_T);
        CommonParams pe = p;
        pe.epsilon = eps;
        fsde::FsdeProblem homogenized = homogenized_counterpart(rc, problem, pe);
        fsde::ComparisonCurves curves = fsde::homogenization_comparison(
            problem, homogenized, dt_coarse, dt_ref, p.n_paths, p.seed,
            fsde::SolveOptions{p.threads});
        curves.meta.config_hash = rc.hash();
        std::ostringstream body;
        fsde::write_curves_csv(body, curves);
        std::string name = csv_name_for_real("compare_eps", eps);
        write_file(p.out_dir / name, body.str());
        manifest.outputs.push_back(name);
    }
    manifest.write(p.out_dir);
    return 0;
}

int cmd_homogenize(const RunConfig& rc) {
    CommonParams p = common_params(rc, /*default_model=*/"", /*default_T=*/1.0);
    fsde::FractionalOrder order(p.alpha);
    fsde::FsdeProblem problem =
        fsde::make_from_registry(p.model, order, p.epsilon, p.horizon_T);

    fsde::AveragingOptions avg;
    avg.T1_start = rc.real_or("homogenize", "T1_start", 64.0);
    avg.tol = rc.real_or("homogenize", "tol", 1e-4);
    avg.n_quad = static_cast<std::size_t>(rc.int_or("homogenize", "n_quad", 1280));
    avg.max_doublings =
        static_cast<std::size_t>(rc.int_or("homogenize", "max_doublings", 14));
    double x_lo = rc.real_or("homogenize", "x_lo", -2.0);
    double x_hi = rc.real_or("homogenize", "x_hi", 2.0);
    avg.probe_lo.assign(problem.state_dim, x_lo);
    avg.probe_hi.assign(problem.state_dim, x_hi);
    avg.probe_points =
        static_cast<std::size_t>(rc.int_or("homogenize", "probe_points", 9));

    fsde::AveragedCoefficient avg_drift = fsde::make_averaged_coefficient(
        problem, fsde::ProfileKind::drift, avg);
    fsde::AveragedCoefficient avg_diffusion = fsde::make_averaged_coefficient(
        problem, fsde::ProfileKind::diffusion, avg);

    std::vector<double> t1_grid =
        rc.real_list_or("homogenize", "t1_grid", {10.0, 100.0, 1000.0});
    auto profile_quad = static_cast<std::size_t>(
        rc.int_or("homogenize", "profile_quad", 40000));
    auto x_points =
        static_cast<std::size_t>(rc.int_or("homogenize", "x_points", 9));
    std::vector<std::vector<double>> x_grid;
    for (std::size_t i = 0; i < x_points; ++i) {
        double t = x_points == 1
                       ? 0.5
                       : static_cast<double>(i) / static_cast<double>(x_points - 1);
        x_grid.push_back(
            std::vector<double>(problem.state_dim, x_lo + t * (x_hi - x_lo)));
    }

    auto weak_d = fsde::weak_profile(problem.drift, avg_drift, order,
                                     fsde::ProfileKind::drift, t1_grid, x_grid,
                                     profile_quad);
    auto weak_g = fsde::weak_profile(problem.diffusion, avg_diffusion, order,
                                     fsde::ProfileKind::diffusion, t1_grid,
                                     x_grid, profile_quad);
    auto strong_d = fsde::strong_profile(problem.drift, avg_drift,
                                         fsde::ProfileKind::drift, t1_grid,
                                         x_grid, profile_quad);
    auto strong_g = fsde::strong_profile(problem.diffusion, avg_diffusion,
                                         fsde::ProfileKind::diffusion, t1_grid,
                                         x_grid, profile_quad);

    fs::create_directories(p.out_dir);
    Manifest manifest{.command = "homogenize", .config = &rc};

    std::ostringstream csv;
    csv << "# metadata: model=" << p.model
        << " alpha=" << fsde::format_double17(p.alpha)
        << " config=" << rc.hash() << "\n";
    fsde::write_profile_csv(csv, weak_d, weak_g, strong_d, strong_g);
    write_file(p.out_dir / "profiles.csv", csv.str());
    manifest.outputs.push_back("profiles.csv");

    std::ostringstream report;
    report << "model = " << p.model << "\n";
    report << "alpha = " << fsde::format_double17(p.alpha) << "\n";
    report << "epsilon = " << fsde::format_double17(p.epsilon) << "\n";
    report << "config_hash = " << rc.hash() << "\n";
    const auto& cd = avg_drift.certificate();
    const auto& cg = avg_diffusion.certificate();
    report << "drift_certificate: T1 = " << fsde::format_double17(cd.horizon)
           << ", deviation = " << fsde::format_double17(cd.max_deviation)
           << ", tol = " << fsde::format_double17(cd.tolerance) << "\n";
    report << "diffusion_certificate: T1 = " << fsde::format_double17(cg.horizon)
           << ", deviation = " << fsde::format_double17(cg.max_deviation)
           << ", tol = " << fsde::format_double17(cg.tolerance) << "\n";
    if (p.alpha < 1.0 && std::isfinite(p.epsilon)) {
        report << "balanced_step = "
               << fsde::format_double17(fsde::balanced_step(order, p.epsilon))
               << "  # eps^(2/(3-2*alpha))\n";
    } else {
        report << "balanced_step = n/a (requires alpha < 1 and finite epsilon)\n";
    }
    report << "averaged coefficients over the probe box:\n";
    report << "x,fbar,gbar\n";
    std::vector<double> fb(problem.state_dim),
        gb(problem.state_dim * problem.noise_dim);
    for (const auto& x : x_grid) {
        avg_drift(0.0, x, fb);
        avg_diffusion(0.0, x, gb);
        report << fsde::format_double17(x[0]) << ','
               << fsde::format_double17(fb[0]) << ','
               << fsde::format_double17(gb[0]) << "\n";
    }
    write_file(p.out_dir / "homogenize_report.txt", report.str());
    manifest.outputs.push_back("homogenize_report.txt");
    manifest.write(p.out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale Caputo FSDE simulation and homogenization toolkit"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "run configuration file");
    app.add_option("--output", args.output_dir, "output directory override");
    std::int64_t seed_opt = 0, paths_opt = 0, threads_opt = 0;
    auto* so = app.add_option("--seed", seed_opt, "seed override");
    auto* po = app.add_option("--paths", paths_opt, "path count override");
    auto* to = app.add_option("--threads", threads_opt,
                              "worker threads (0 = auto)");

    auto* simulate = app.add_subcommand("simulate", "solve one ensemble, export CSV");
    auto* table1 = app.add_subcommand("table1", "dt-convergence study");
    auto* table2 = app.add_subcommand("table2", "eps-convergence study");
    auto* compare = app.add_subcommand(
        "compare", "original vs homogenized accuracy curves");
    auto* homogenize = app.add_subcommand(
        "homogenize", "averaged coefficients and averaging profiles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (so->count()) args.seed = seed_opt;
    if (po->count()) args.paths = paths_opt;
    if (to->count()) args.threads = threads_opt;

    try {
        RunConfig rc = load_config(args);
        if (simulate->parsed()) return cmd_simulate(rc);
        if (table1->parsed()) return run_table(rc, true);
        if (table2->parsed()) return run_table(rc, false);
        if (compare->parsed()) return cmd_compare(rc);
        if (homogenize->parsed()) return cmd_homogenize(rc);
        std::cerr << "fsde: no subcommand\n";
        return 2;
    } catch (const fsde::CapacityError& e) {
        std::cerr << "fsde: capacity error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "fsde: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "fsde: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "fsde: config error: " << e.what() << "\n";
        return 2;
    } catch (const fsde::AveragingDivergenceError& e) {
        std::cerr << "fsde: " << e.what()
                  << "\nhint: oscillatory models average out, but models like "
                     "example1 (drift t*x) have no time-average; pick a model "
                     "with a registered homogenized counterpart instead\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "fsde: error: " << e.what() << "\n";
        return 3;
    }
}
