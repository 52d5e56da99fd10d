// Command-line front end: run, sweep, compare, rates, mesh-info.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "accreg/experiment.hpp"
#include "accreg/blt.hpp"
#include "accreg/mesh.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDivergedOnly = 3;
constexpr int kCheckFailed = 4;

struct CommonOptions {
    std::string config;
    std::string out;
    std::string history;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_check) {
    cmd->add_option("--config", o.config, "JSON experiment file")->required();
    cmd->add_option("--out", o.out, "CSV output path (default: the config's output, or stdout)");
    cmd->add_option("--history", o.history, "E_k / residual series CSV path");
    cmd->add_option("--seed", o.seed, "noise seed, overrides the config");
    cmd->add_option("--workers", o.workers, "concurrent runs")->check(CLI::PositiveNumber);
    if (with_check) cmd->add_flag("--check", o.check, "enable trend assertions");
}

template <class F>
void with_output(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    write(out);
}

enum class Mode { kRun, kSweep, kCompare };

int run_experiment(const CommonOptions& o, Mode mode) {
    accreg::ExperimentConfig cfg = accreg::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (mode == Mode::kSweep && !cfg.sweep)
        throw accreg::ConfigError("sweep: required for the sweep subcommand");
    if (mode == Mode::kCompare && cfg.sweep)
        throw accreg::ConfigError("sweep: not allowed for the compare subcommand");
    const auto records = accreg::run_config(cfg, o.workers);

    with_output(o.out.empty() ? cfg.output : o.out,
                [&](std::ostream& s) { accreg::emit_csv(records, s); });
    const std::string hist = o.history.empty() ? cfg.history : o.history;
    if (!hist.empty())
        with_output(hist, [&](std::ostream& s) { accreg::emit_history_csv(records, s); });

    bool all_diverged = !records.empty();
    for (const auto& r : records)
        if (r.run.stopped_by != accreg::StopReason::kDivergence) all_diverged = false;

    int code = all_diverged ? kDivergedOnly : kOk;
    if (o.check) {
        const accreg::CheckOutcome c = accreg::check_trends(cfg, records);
        for (const auto& m : c.messages) std::cerr << m << '\n';
        if (!c.passed) code = kCheckFailed;
    }
    return code;
}

int run_rates(const CommonOptions& o) {
    const accreg::ExperimentConfig cfg = accreg::load_config(o.config);
    if (!cfg.rates) throw accreg::ConfigError("rates: required for the rates subcommand");
    const auto rows = accreg::rate_report(*cfg.rates);
    with_output(o.out.empty() ? cfg.output : o.out,
                [&](std::ostream& s) { accreg::emit_rate_csv(rows, s); });
    return kOk;
}

struct MeshInfoOptions {
    std::string mesh_file;
    int level = 2;
    int example = 1;
    accreg::DiskMeshOptions mesh{7, 3, 0.5};
    std::string mode = "triangles";
    std::string write;
};

int mesh_info(const MeshInfoOptions& o) {
    accreg::Mesh m;
    if (o.mesh_file.empty()) {
        m = accreg::disk_mesh(o.level, o.mesh);
    } else {
        std::ifstream in(o.mesh_file);
        if (!in) throw accreg::ConfigError("--mesh: cannot open " + o.mesh_file);
        m = accreg::read_mesh(in);
    }
    const auto mode = o.mode == "nodal" ? accreg::Omega0Mode::kNodal : accreg::Omega0Mode::kTriangles;
    m = accreg::mark_omega0(std::move(m), accreg::blt_example(o.example).omega0, mode);
    std::printf("nodes %zu\ntriangles %zu\nedges %zu\nboundary_nodes %zu\n", m.nodes.size(),
                m.triangles.size(), m.num_edges(), m.boundary_nodes().size());
    std::printf("area %.10g\nh_max %.6g\nomega0_nodes %zu\n", m.area(), m.max_edge_length(),
                m.omega0_nodes.size());
    if (!o.write.empty()) {
        std::ofstream out(o.write, std::ios::binary);
        accreg::write_mesh(m, out);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accelerated iterative regularization experiments"};
    app.require_subcommand(1);

    CommonOptions run_o, sweep_o, cmp_o, rates_o;
    auto* run = app.add_subcommand("run", "run every (method, delta') point of a config");
    add_common(run, run_o, true);
    auto* sweep = app.add_subcommand("sweep", "parameter sweep over the config's sweep block");
    add_common(sweep, sweep_o, true);
    auto* cmp = app.add_subcommand("compare", "method comparison table");
    add_common(cmp, cmp_o, true);
    auto* rates = app.add_subcommand("rates", "convergence-rate slopes per mu");
    add_common(rates, rates_o, false);

    MeshInfoOptions mi;
    auto* info = app.add_subcommand("mesh-info", "statistics of a disk mesh or a mesh file");
    info->add_option("--mesh", mi.mesh_file, "mesh file");
    info->add_option("--level", mi.level, "refinement level of the built-in mesher")
        ->check(CLI::Range(0, 8));
    info->add_option("--example", mi.example, "source example for the Omega0 marking")
        ->check(CLI::Range(1, 2));
    info->add_option("--mode", mi.mode, "Omega0 marking")
        ->check(CLI::IsMember({"triangles", "nodal"}));
    info->add_option("--write", mi.write, "write the marked mesh to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return run_experiment(run_o, Mode::kRun);
        if (*sweep) return run_experiment(sweep_o, Mode::kSweep);
        if (*cmp) return run_experiment(cmp_o, Mode::kCompare);
        if (*rates) return run_rates(rates_o);
        if (*info) return mesh_info(mi);
    } catch (const accreg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
