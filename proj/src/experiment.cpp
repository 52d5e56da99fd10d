#include "accreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "accreg/continuous.hpp"

namespace accreg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) {
            std::string list;
            for (const char* k : known) list += std::string(list.empty() ? "" : ", ") + k;
            fail(where.empty() ? it.key() : where + "." + it.key(),
                 "unknown field; accepted fields are " + list);
        }
    }
}

const json& object_at(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_object()) fail(where, "expected an object");
    return v;
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

double get_positive(const json& v, const std::string& field) {
    const double x = get_number(v, field);
    if (!(x > 0.0) || !std::isfinite(x)) fail(field, "expected a positive number");
    return x;
}

long get_integer(const json& v, const std::string& field, long lo, long hi) {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    const long x = v.get<long>();
    if (x < lo || x > hi)
        fail(field, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "]");
    return x;
}

std::string get_string(const json& v, const std::string& field) {
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
}

std::string get_choice(const json& v, const std::string& field,
                       std::initializer_list<const char*> choices) {
    const std::string s = get_string(v, field);
    std::string list;
    for (const char* c : choices) {
        if (s == c) return s;
        list += std::string(list.empty() ? "" : ", ") + c;
    }
    fail(field, "unknown value \"" + s + "\"; accepted values are " + list);
}

std::vector<double> get_list(const json& v, const std::string& field) {
    if (!v.is_array()) fail(field, "expected a list of numbers");
    if (v.empty()) fail(field, "list must not be empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(get_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Method get_method(const json& v, const std::string& field) {
    const std::string s = get_string(v, field);
    try {
        return parse_method(s);
    } catch (const std::invalid_argument&) {
        fail(field, "unknown method \"" + s +
                        "\"; accepted values are landweber, nu, nesterov, arm, msvm, euler");
    }
}

void parse_params(const json& p, SchemeParams& params) {
    reject_unknown(p, "params", {"s", "dt", "nu", "alpha", "omega", "step_check"});
    if (p.contains("s")) {
        params.s = get_number(p["s"], "params.s");
        if (!(params.s > -0.5)) fail("params.s", "expected a number > -0.5");
    }
    if (p.contains("dt")) params.dt = get_positive(p["dt"], "params.dt");
    if (p.contains("nu")) params.nu = get_positive(p["nu"], "params.nu");
    if (p.contains("alpha")) params.alpha = get_positive(p["alpha"], "params.alpha");
    if (p.contains("omega")) params.omega = get_positive(p["omega"], "params.omega");
    if (p.contains("step_check"))
        params.step_check = get_choice(p["step_check"], "params.step_check",
                                       {"proof_bound", "none"}) == "none"
                                ? StepCheck::kNone
                                : StepCheck::kProofBound;
}

MethodOverrides parse_overrides(const json& o, const std::string& where) {
    reject_unknown(o, where, {"dt", "omega", "dt_scale", "omega_scale", "s", "nu", "alpha"});
    MethodOverrides m;
    if (o.contains("dt")) m.dt = get_positive(o["dt"], where + ".dt");
    if (o.contains("omega")) m.omega = get_positive(o["omega"], where + ".omega");
    if (o.contains("dt_scale")) m.dt_scale = get_positive(o["dt_scale"], where + ".dt_scale");
    if (o.contains("omega_scale"))
        m.omega_scale = get_positive(o["omega_scale"], where + ".omega_scale");
    if (o.contains("s")) {
        m.s = get_number(o["s"], where + ".s");
        if (!(*m.s > -0.5)) fail(where + ".s", "expected a number > -0.5");
    }
    if (o.contains("nu")) m.nu = get_positive(o["nu"], where + ".nu");
    if (o.contains("alpha")) m.alpha = get_positive(o["alpha"], where + ".alpha");
    return m;
}

void parse_blt(const json& b, BltProblemConfig& cfg) {
    reject_unknown(b, "problem.blt",
                   {"example", "level", "data_level", "mesh", "mesh_file", "data_mesh_file",
                    "omega0_mode", "coefficients", "f0"});
    if (b.contains("example"))
        cfg.example = static_cast<int>(get_integer(b["example"], "problem.blt.example", 1, 2));
    if (b.contains("level"))
        cfg.level = static_cast<int>(get_integer(b["level"], "problem.blt.level", 0, 8));
    if (b.contains("data_level"))
        cfg.data_level =
            static_cast<int>(get_integer(b["data_level"], "problem.blt.data_level", 0, 8));
    if (b.contains("mesh")) {
        const json& m = object_at(b, "mesh", "problem.blt.mesh");
        reject_unknown(m, "problem.blt.mesh",
                       {"square_divisions", "radial_layers", "square_half_width"});
        if (m.contains("square_divisions"))
            cfg.mesh.square_divisions = static_cast<int>(
                get_integer(m["square_divisions"], "problem.blt.mesh.square_divisions", 1, 1000));
        if (m.contains("radial_layers"))
            cfg.mesh.radial_layers = static_cast<int>(
                get_integer(m["radial_layers"], "problem.blt.mesh.radial_layers", 1, 1000));
        if (m.contains("square_half_width")) {
            cfg.mesh.square_half_width =
                get_positive(m["square_half_width"], "problem.blt.mesh.square_half_width");
            if (cfg.mesh.square_half_width >= 1.0 / std::sqrt(2.0))
                fail("problem.blt.mesh.square_half_width", "expected a number in (0, 0.7071)");
        }
    }
    if (b.contains("mesh_file"))
        cfg.mesh_file = get_string(b["mesh_file"], "problem.blt.mesh_file");
    if (b.contains("data_mesh_file"))
        cfg.data_mesh_file = get_string(b["data_mesh_file"], "problem.blt.data_mesh_file");
    for (const std::string* path : {&cfg.mesh_file, &cfg.data_mesh_file})
        if (!path->empty() && !std::filesystem::exists(*path))
            fail(path == &cfg.mesh_file ? "problem.blt.mesh_file" : "problem.blt.data_mesh_file",
                 "file \"" + *path + "\" does not exist");
    if (b.contains("omega0_mode"))
        cfg.omega0_mode = get_choice(b["omega0_mode"], "problem.blt.omega0_mode",
                                     {"triangles", "nodal"}) == "nodal"
                              ? Omega0Mode::kNodal
                              : Omega0Mode::kTriangles;
    if (b.contains("coefficients")) {
        const json& c = object_at(b, "coefficients", "problem.blt.coefficients");
        reject_unknown(c, "problem.blt.coefficients", {"mu_a", "mu_s_prime", "A"});
        if (c.contains("mu_a")) cfg.mu_a = get_positive(c["mu_a"], "problem.blt.coefficients.mu_a");
        if (c.contains("mu_s_prime"))
            cfg.mu_s_prime = get_positive(c["mu_s_prime"], "problem.blt.coefficients.mu_s_prime");
        if (c.contains("A")) cfg.robin_a = get_positive(c["A"], "problem.blt.coefficients.A");
    }
    if (b.contains("f0")) cfg.f0 = get_number(b["f0"], "problem.blt.f0");
}

void parse_spectral(const json& s, SpectralProblemConfig& cfg) {
    reject_unknown(s, "problem.spectral", {"modes", "sigma_min", "mu"});
    if (s.contains("modes"))
        cfg.modes =
            static_cast<std::size_t>(get_integer(s["modes"], "problem.spectral.modes", 2, 1000000));
    if (s.contains("sigma_min")) {
        cfg.sigma_min = get_positive(s["sigma_min"], "problem.spectral.sigma_min");
        if (cfg.sigma_min >= 1.0) fail("problem.spectral.sigma_min", "expected a number in (0, 1)");
    }
    if (s.contains("mu")) cfg.mu = get_positive(s["mu"], "problem.spectral.mu");
}

RatesConfig parse_rates(const json& r) {
    reject_unknown(r, "rates", {"mu", "deltas", "modes", "s", "tau", "dt"});
    RatesConfig cfg;
    if (!r.contains("mu")) fail("rates.mu", "required");
    cfg.mu = get_list(r["mu"], "rates.mu");
    for (double m : cfg.mu)
        if (!(m > 0.0)) fail("rates.mu", "expected positive values");
    if (!r.contains("deltas")) fail("rates.deltas", "required");
    cfg.deltas = get_list(r["deltas"], "rates.deltas");
    if (cfg.deltas.size() < 2) fail("rates.deltas", "need at least two noise levels");
    for (double d : cfg.deltas)
        if (!(d > 0.0)) fail("rates.deltas", "expected positive values");
    if (r.contains("modes"))
        cfg.modes = static_cast<std::size_t>(get_integer(r["modes"], "rates.modes", 2, 1000000));
    if (r.contains("s")) cfg.s = get_number(r["s"], "rates.s");
    if (r.contains("tau")) cfg.tau = get_positive(r["tau"], "rates.tau");
    if (r.contains("dt")) cfg.dt = get_positive(r["dt"], "rates.dt");
    return cfg;
}

ExperimentConfig parse_json(const json& j) {
    if (!j.is_object()) fail("config", "expected a JSON object");
    reject_unknown(j, "",
                   {"name", "problem", "methods", "params", "method_params", "noise", "stopping",
                    "sweep", "rates", "output", "history"});
    ExperimentConfig cfg;
    if (j.contains("name")) cfg.name = get_string(j["name"], "name");

    bool dt_given = false, tau_given = false;
    if (j.contains("problem")) {
        const json& p = object_at(j, "problem", "problem");
        reject_unknown(p, "problem", {"type", "blt", "spectral"});
        if (p.contains("type"))
            cfg.problem_type = get_choice(p["type"], "problem.type", {"blt", "spectral"});
        if (p.contains("blt")) parse_blt(object_at(p, "blt", "problem.blt"), cfg.blt);
        if (p.contains("spectral"))
            parse_spectral(object_at(p, "spectral", "problem.spectral"), cfg.spectral);
    }

    if (j.contains("methods")) {
        const json& m = j["methods"];
        if (!m.is_array()) fail("methods", "expected a list of method names");
        if (m.empty()) fail("methods", "list must not be empty");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const Method meth = get_method(m[i], "methods[" + std::to_string(i) + "]");
            if (std::find(cfg.methods.begin(), cfg.methods.end(), meth) != cfg.methods.end())
                fail("methods", "duplicate method " + std::string(method_name(meth)));
            cfg.methods.push_back(meth);
        }
    }
    if (j.contains("params")) {
        const json& p = object_at(j, "params", "params");
        dt_given = p.contains("dt");
        parse_params(p, cfg.params);
    }
    if (j.contains("method_params")) {
        const json& mp = object_at(j, "method_params", "method_params");
        for (auto it = mp.begin(); it != mp.end(); ++it) {
            const std::string where = "method_params." + it.key();
            const Method meth = get_method(json(it.key()), where);
            if (!it.value().is_object()) fail(where, "expected an object");
            cfg.overrides[meth] = parse_overrides(it.value(), where);
        }
    }
    if (j.contains("noise")) {
        const json& n = object_at(j, "noise", "noise");
        reject_unknown(n, "noise", {"delta_prime", "seed"});
        if (n.contains("delta_prime")) {
            cfg.delta_primes = get_list(n["delta_prime"], "noise.delta_prime");
            for (double d : cfg.delta_primes)
                if (!(d >= 0.0) || !std::isfinite(d))
                    fail("noise.delta_prime", "expected values >= 0");
        }
        if (n.contains("seed"))
            cfg.seed = static_cast<std::uint64_t>(
                get_integer(n["seed"], "noise.seed", 0, std::numeric_limits<long>::max()));
    }
    if (j.contains("stopping")) {
        const json& s = object_at(j, "stopping", "stopping");
        reject_unknown(s, "stopping", {"rule", "tau", "n_max"});
        if (s.contains("rule"))
            cfg.stopping = get_choice(s["rule"], "stopping.rule", {"discrepancy", "max_iter"});
        if (s.contains("tau")) {
            cfg.tau = get_number(s["tau"], "stopping.tau");
            if (!(cfg.tau > 1.0) && cfg.tau != 1.0)
                fail("stopping.tau", "expected a number >= 1");
            tau_given = true;
        }
        if (s.contains("n_max"))
            cfg.n_max =
                static_cast<std::size_t>(get_integer(s["n_max"], "stopping.n_max", 1, 100000000));
    }
    if (j.contains("sweep")) {
        const json& s = object_at(j, "sweep", "sweep");
        reject_unknown(s, "sweep", {"parameter", "values"});
        SweepConfig sw;
        if (!s.contains("parameter")) fail("sweep.parameter", "required");
        sw.parameter = get_choice(s["parameter"], "sweep.parameter",
                                  {"tau", "dt", "s", "omega", "nu", "alpha", "delta_prime"});
        if (!s.contains("values")) fail("sweep.values", "required");
        sw.values = get_list(s["values"], "sweep.values");
        cfg.sweep = std::move(sw);
    }
    if (j.contains("rates")) cfg.rates = parse_rates(object_at(j, "rates", "rates"));
    if (j.contains("output")) cfg.output = get_string(j["output"], "output");
    if (j.contains("history")) cfg.history = get_string(j["history"], "history");

    if (cfg.methods.empty() && !cfg.rates) fail("methods", "required (list of method names)");
    if (cfg.problem_type == "blt") {
        const BltExample ex = blt_example(cfg.blt.example);
        if (!dt_given) cfg.params.dt = ex.dt;
        if (!tau_given) cfg.tau = ex.tau;
    }
    return cfg;
}

// Operator, exact solution, start and a noise draw for a given delta'.
struct Problem {
    std::shared_ptr<const LinearOperator> op;
    std::shared_ptr<BltFixture> blt;  // set for BLT problems
    Vector f_true;
    Vector f0;
    Vector y_exact;     // spectral only
    Vector direction;   // spectral only, unit norm
    double omega_norm = 0.0;

    std::pair<Vector, double> data(double delta_prime, std::uint64_t seed) const {
        if (blt) {
            BltFixture fx = *blt;
            set_noise(fx, NoiseSpec{delta_prime, seed});
            return {std::move(fx.y_delta), fx.data.delta};
        }
        const double delta = delta_prime * op->data_inner().norm(y_exact);
        Vector y = y_exact;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += delta * direction[i];
        return {std::move(y), delta};
    }
};

std::shared_ptr<const Mesh> load_or_build(const std::string& file, int level,
                                          const DiskMeshOptions& opts) {
    if (file.empty()) return std::make_shared<const Mesh>(disk_mesh(level, opts));
    std::ifstream in(file);
    if (!in) throw ConfigError("mesh file \"" + file + "\": cannot open");
    return std::make_shared<const Mesh>(read_mesh(in));
}

Problem build_problem(const ExperimentConfig& cfg) {
    Problem pb;
    if (cfg.problem_type == "spectral") {
        const auto& sc = cfg.spectral;
        Vector sigma(sc.modes);
        for (std::size_t j = 0; j < sc.modes; ++j)
            sigma[j] = std::pow(sc.sigma_min,
                                static_cast<double>(j) / static_cast<double>(sc.modes - 1));
        pb.f_true.resize(sc.modes);
        pb.y_exact.resize(sc.modes);
        for (std::size_t j = 0; j < sc.modes; ++j) {
            pb.f_true[j] = std::pow(sigma[j], 2.0 * sc.mu);
            pb.y_exact[j] = sigma[j] * pb.f_true[j];
        }
        pb.f0.assign(sc.modes, 0.0);
        pb.direction = random_vector(sc.modes, cfg.seed);
        const double n = std::sqrt(std::inner_product(pb.direction.begin(), pb.direction.end(),
                                                      pb.direction.begin(), 0.0));
        for (double& d : pb.direction) d /= n;
        pb.op = std::make_shared<const DiagonalOperator>(std::move(sigma));
        pb.omega_norm = 1.0;
        return pb;
    }

    const auto& bc = cfg.blt;
    const BltExample ex = blt_example(bc.example);
    const Coefficients coeff = Coefficients::blt(bc.mu_a, bc.mu_s_prime, bc.robin_a);
    if (bc.mesh_file.empty() && bc.data_mesh_file.empty()) {
        BltFixtureOptions o;
        o.example = bc.example;
        o.level = bc.level;
        o.data_level = bc.data_level;
        o.mesh = bc.mesh;
        o.omega0_mode = bc.omega0_mode;
        o.coeff = coeff;
        o.noise = NoiseSpec{0.0, cfg.seed};
        pb.blt = std::make_shared<BltFixture>(make_blt_fixture(o));
    } else {
        auto coarse_mesh = load_or_build(bc.mesh_file, bc.level, bc.mesh);
        auto fine_mesh = load_or_build(bc.data_mesh_file, bc.data_level, bc.mesh);
        Mesh cm = mark_omega0(*coarse_mesh, ex.omega0, bc.omega0_mode);
        Mesh fm = mark_omega0(*fine_mesh, ex.omega0, bc.omega0_mode);
        auto fx = std::make_shared<BltFixture>();
        fx->example = ex;
        fx->sys = std::make_shared<const FemSystem>(
            assemble(std::make_shared<const Mesh>(std::move(cm)), coeff));
        fx->op = std::make_shared<const BltOperator>(fx->sys);
        fx->f_true = interpolate_omega0(*fx->sys, ex.source);
        const FemSystem fine = assemble(std::make_shared<const Mesh>(std::move(fm)), coeff);
        const Vector f_fine = interpolate_omega0(fine, ex.source);
        fx->g_exact = measure_flux(fine, f_fine, *fx->sys);
        fx->data = noisy_boundary_data(*fx->op, fx->g_exact, NoiseSpec{0.0, cfg.seed});
        fx->data.inverse_crime = fine.mesh->triangles.size() < 4 * fx->sys->mesh->triangles.size();
        fx->y_delta = fx->op->data(fx->data.g1, fx->data.g2);
        pb.blt = std::move(fx);
    }
    pb.op = pb.blt->op;
    pb.f_true = pb.blt->f_true;
    pb.f0.assign(pb.f_true.size(), bc.f0);
    pb.omega_norm = omega_norm(*pb.op, 200, 0);
    return pb;
}

struct SweepPoint {
    Method method;
    double delta_prime;
    std::optional<double> sweep_value;
    SchemeParams params;
    double tau;
};

SchemeParams method_params(const ExperimentConfig& cfg, Method m, double w) {
    SchemeParams p = cfg.params;
    p.op_norm = 1.0 / std::sqrt(w);
    const auto it = cfg.overrides.find(m);
    if (it == cfg.overrides.end()) return p;
    const MethodOverrides& o = it->second;
    if (o.dt) p.dt = *o.dt;
    if (o.dt_scale) p.dt = *o.dt_scale * w;
    if (o.omega) p.omega = *o.omega;
    if (o.omega_scale) p.omega = *o.omega_scale * w;
    if (o.s) p.s = *o.s;
    if (o.nu) p.nu = *o.nu;
    if (o.alpha) p.alpha = *o.alpha;
    return p;
}

std::vector<SweepPoint> expand(const ExperimentConfig& cfg, double w) {
    std::vector<std::optional<double>> sweep_values{std::nullopt};
    if (cfg.sweep) {
        sweep_values.clear();
        for (double v : cfg.sweep->values) sweep_values.emplace_back(v);
    }
    std::vector<SweepPoint> pts;
    for (const auto& sv : sweep_values) {
        std::vector<double> dps = cfg.delta_primes;
        if (sv && cfg.sweep->parameter == "delta_prime") dps = {*sv};
        for (double dp : dps) {
            for (Method m : cfg.methods) {
                SweepPoint pt{m, dp, sv, method_params(cfg, m, w), cfg.tau};
                if (sv) {
                    const std::string& name = cfg.sweep->parameter;
                    if (name == "tau") pt.tau = *sv;
                    else if (name == "dt") pt.params.dt = *sv;
                    else if (name == "s") pt.params.s = *sv;
                    else if (name == "omega") pt.params.omega = *sv;
                    else if (name == "nu") pt.params.nu = *sv;
                    else if (name == "alpha") pt.params.alpha = *sv;
                }
                pts.push_back(pt);
            }
        }
    }
    return pts;
}

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", x);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<ExperimentRecord> run_config(const ExperimentConfig& cfg, unsigned workers) {
    if (cfg.methods.empty()) throw ConfigError("methods: list must not be empty");
    const Problem pb = build_problem(cfg);
    const std::vector<SweepPoint> pts = expand(cfg, pb.omega_norm);
    std::vector<ExperimentRecord> out(pts.size());
    parallel_for(pts.size(), workers, [&](std::size_t i) {
        const SweepPoint& pt = pts[i];
        const auto [y, delta] = pb.data(pt.delta_prime, cfg.seed);
        const StoppingRule stop = cfg.stopping == "max_iter"
                                      ? StoppingRule::max_iterations(cfg.n_max)
                                      : StoppingRule::discrepancy(pt.tau, delta, cfg.n_max);
        RunRecord r;
        if (pb.blt) {
            r = reconstruct(*pb.blt->op, y, pt.method, pt.params, stop, pb.f0, pb.f_true);
        } else {
            RunOptions o;
            o.truth = pb.f_true;
            o.keep_solution = false;
            r = run(pt.method, *pb.op, y, pb.f0, pt.params, stop, o);
        }
        r.delta_prime = pt.delta_prime;
        r.tau = pt.tau;
        r.delta = delta;
        out[i] = ExperimentRecord{std::move(r), pt.sweep_value};
    });
    return out;
}

double reported_step(const RunRecord& r) {
    if (r.method == method_name(Method::kNu) || r.method == method_name(Method::kNesterov))
        return r.params.omega;
    return r.params.dt;
}

void emit_csv(std::span<const ExperimentRecord> records, std::ostream& out) {
    out << "method,delta_prime,tau,dt,s,k_star,E_kstar,stopped_by\n";
    for (const auto& rec : records) {
        const RunRecord& r = rec.run;
        out << r.method << ',' << fmt(r.delta_prime) << ',' << fmt(r.tau) << ','
            << fmt(reported_step(r)) << ',' << fmt(r.params.s) << ',' << r.k_star << ','
            << fmt(r.final_error()) << ',' << stop_reason_name(r.stopped_by) << '\n';
    }
}

void emit_history_csv(std::span<const ExperimentRecord> records, std::ostream& out) {
    out << "method,delta_prime,sweep,k,residual,E_k\n";
    for (const auto& rec : records) {
        const RunRecord& r = rec.run;
        const std::string sweep = rec.sweep_value ? fmt(*rec.sweep_value) : "";
        for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
            out << r.method << ',' << fmt(r.delta_prime) << ',' << sweep << ',' << k << ','
                << fmt(r.residual_history[k]) << ',';
            if (k < r.error_history.size()) out << fmt(r.error_history[k]);
            out << '\n';
        }
    }
}

CheckOutcome check_trends(const ExperimentConfig& cfg,
                          std::span<const ExperimentRecord> records) {
    CheckOutcome res;
    auto note = [&](bool ok, const std::string& msg) {
        if (!ok) res.passed = false;
        res.messages.push_back((ok ? "ok: " : "violated: ") + msg);
    };

    // Group by (method, delta') in declaration order.
    std::vector<std::pair<std::string, double>> keys;
    for (const auto& r : records) {
        const std::pair<std::string, double> key{r.run.method, r.run.delta_prime};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    auto series = [&](const std::pair<std::string, double>& key) {
        std::vector<const ExperimentRecord*> s;
        for (const auto& r : records)
            if (r.run.method == key.first && r.run.delta_prime == key.second) s.push_back(&r);
        std::stable_sort(s.begin(), s.end(), [](const auto* a, const auto* b) {
            return a->sweep_value.value_or(0.0) < b->sweep_value.value_or(0.0);
        });
        return s;
    };
    const std::string tag_sep = " ";

    if (cfg.sweep && cfg.sweep->parameter == "tau") {
        for (const auto& key : keys) {
            const auto s = series(key);
            const std::string tag = key.first + tag_sep + "delta'=" + fmt(key.second);
            bool ok = true, below = false;
            const ExperimentRecord* prev = nullptr;
            for (const auto* r : s) {
                if (r->run.stopped_by == StopReason::kDivergence) {
                    ok = false;
                    note(false, tag + ": divergence at tau=" + fmt(*r->sweep_value));
                    continue;
                }
                const bool capped = r->run.stopped_by == StopReason::kMaxIter;
                if (capped) {
                    if (below) {
                        ok = false;
                        note(false, tag + ": N_max reached at tau=" + fmt(*r->sweep_value) +
                                        " after a smaller tau stopped");
                    }
                    continue;
                }
                below = true;
                if (prev && static_cast<double>(r->run.k_star) >
                                1.1 * static_cast<double>(prev->run.k_star)) {
                    ok = false;
                    note(false, tag + ": k* rises from " + std::to_string(prev->run.k_star) +
                                    " to " + std::to_string(r->run.k_star) + " at tau=" +
                                    fmt(*r->sweep_value));
                }
                prev = r;
            }
            if (ok) note(true, tag + ": k* nonincreasing in tau");
        }
    } else if (cfg.sweep && cfg.sweep->parameter == "dt") {
        for (const auto& key : keys) {
            const auto s = series(key);
            const std::string tag = key.first + tag_sep + "delta'=" + fmt(key.second);
            bool ok = true;
            std::size_t compared = 0;
            const ExperimentRecord* prev = nullptr;
            for (const auto* r : s) {
                if (r->run.stopped_by == StopReason::kDivergence) {
                    res.messages.push_back("info: " + tag + ": divergence guard fired at dt=" +
                                           fmt(*r->sweep_value));
                    break;
                }
                if (r->run.stopped_by != StopReason::kDiscrepancy) {
                    prev = nullptr;
                    continue;
                }
                if (prev) {
                    const double a = static_cast<double>(prev->run.k_star) * prev->run.params.dt;
                    const double b = static_cast<double>(r->run.k_star) * r->run.params.dt;
                    ++compared;
                    if (b > 1.1 * a || b < a / 1.1) {
                        ok = false;
                        note(false, tag + ": k* dt changes from " + fmt(a) + " to " + fmt(b) +
                                        " at dt=" + fmt(*r->sweep_value));
                    }
                }
                prev = r;
            }
            if (compared == 0) {
                ok = false;
                note(false, tag + ": fewer than two discrepancy-stopped points");
            }
            if (ok) note(true, tag + ": k* dt constant within 10%");
        }
    } else if (!cfg.sweep) {
        auto find = [&](const std::string& m, double dp) -> const RunRecord* {
            for (const auto& r : records)
                if (r.run.method == m && r.run.delta_prime == dp) return &r.run;
            return nullptr;
        };
        const std::string lw(method_name(Method::kLandweber));
        for (double dp : cfg.delta_primes) {
            const RunRecord* l = find(lw, dp);
            if (!l) continue;
            for (Method m : {Method::kArm, Method::kNu}) {
                const RunRecord* r = find(std::string(method_name(m)), dp);
                if (!r) continue;
                const bool ok = 5 * r->k_star <= l->k_star;
                note(ok, std::string(method_name(m)) + " delta'=" + fmt(dp) + ": k*=" +
                             std::to_string(r->k_star) + " vs landweber " +
                             std::to_string(l->k_star) + " / 5");
            }
        }
        if (cfg.delta_primes.size() >= 2) {
            const auto [lo, hi] =
                std::minmax_element(cfg.delta_primes.begin(), cfg.delta_primes.end());
            for (Method m : cfg.methods) {
                const std::string name(method_name(m));
                const RunRecord* a = find(name, *lo);
                const RunRecord* b = find(name, *hi);
                if (!a || !b) continue;
                const bool ok = b->final_error() > a->final_error();
                note(ok, name + ": E=" + fmt(b->final_error()) + " at delta'=" + fmt(*hi) +
                             " vs " + fmt(a->final_error()) + " at delta'=" + fmt(*lo));
            }
        }
    }
    if (res.messages.empty()) res.messages.push_back("info: no trend checks for this config");
    return res;
}

std::vector<RateRow> rate_report(const RatesConfig& cfg) {
    if (cfg.mu.empty()) throw ConfigError("rates.mu: list must not be empty");
    if (cfg.deltas.size() < 2) throw ConfigError("rates.deltas: need at least two noise levels");
    const RateProblem pb = default_rate_problem(cfg.modes, cfg.s);
    RateOptions opts;
    opts.rule = RateRule::kDiscrepancy;
    opts.tau = cfg.tau;
    opts.dt = cfg.dt;
    std::vector<RateRow> rows;
    for (double mu : cfg.mu) {
        const SourceConditionFixture fx = unit_source(mu, cfg.modes);
        const double et = 2.0 * mu / (2.0 * mu + 1.0);
        const double st = -1.0 / (2.0 * mu + 1.0);
        const RateResult c = rate_experiment(fx, pb, cfg.deltas, opts);
        rows.push_back({mu, "continuous", c.error_slope, et, c.stop_slope, st});
        const RateResult d = discrete_rate_experiment(fx, pb, cfg.deltas, opts);
        rows.push_back({mu, "discrete", d.error_slope, et, d.stop_slope, st});
    }
    return rows;
}

void emit_rate_csv(std::span<const RateRow> rows, std::ostream& out) {
    out << "mu,kind,error_slope,error_theory,stop_slope,stop_theory\n";
    for (const auto& r : rows) {
        out << fmt(r.mu) << ',' << r.kind << ',' << fmt(r.error_slope) << ','
            << fmt(r.error_theory) << ',' << fmt(r.stop_slope) << ',' << fmt(r.stop_theory)
            << '\n';
    }
}

}  // namespace accreg
