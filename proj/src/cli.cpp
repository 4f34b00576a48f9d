#include "bosonlink/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "bosonlink/io.hpp"

namespace bosonlink::cli {

namespace {

namespace fs = std::filesystem;
constexpr const char* kVersion = "0.1.0";
constexpr double kPi = std::numbers::pi;

const std::set<std::string> kCommands = {"qst",       "sweep-m",     "sweep-temp",
                                         "sweep-phase", "sweep-jitter", "wstate",
                                         "ep",        "tradeoff",    "wigner"};

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"qst", {"input", "m", "temp", "jitter", "correction", "method"}},
    {"sweep-m", {"input", "m", "method"}},
    {"sweep-temp", {"input", "m", "temps", "method"}},
    {"sweep-phase", {"alpha", "m", "phases", "method"}},
    {"sweep-jitter", {"input", "m", "dtau"}},
    {"wstate", {"c", "k", "m"}},
    {"ep", {"k", "m", "method"}},
    {"tradeoff", {"e_tol", "mean_n"}},
    {"wigner", {"input", "m", "correction", "grid", "range"}},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("invalid number for key '" + key + "': " + text);
    }
    if (pos != text.size()) throw ConfigError("trailing junk in value for key '" + key + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v)) throw ConfigError("key '" + key + "' expects an integer");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("key '" + key + "' expects true/false");
}

std::string get(const RunConfig& c, const std::string& key, const std::string& fallback) {
    const auto it = c.params.find(key);
    return it == c.params.end() ? fallback : it->second;
}

std::string require(const RunConfig& c, const std::string& key) {
    const auto it = c.params.find(key);
    if (it == c.params.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

Method parse_method_one(const std::string& text) {
    if (text == "optimized") return Method::optimized;
    if (text == "rwa") return Method::rwa;
    throw ConfigError("unknown method '" + text + "' (expected optimized or rwa)");
}

std::string method_name(Method m) { return m == Method::optimized ? "optimized" : "rwa"; }

// ---- output helpers -----------------------------------------------------------

class Artifacts {
  public:
    Artifacts(const RunConfig& config) : config_(config) {
        manifest_["tool_version"] = kVersion;
        manifest_["config_hash"] = config_hash(config);
        manifest_["command"] = config.command;
        manifest_["params"] = config.params;
        manifest_["workers"] = config.workers;
        manifest_["runs"] = nlohmann::json::array();
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (ec && !fs::is_directory(config.output_dir))
            throw std::ios_base::failure("cannot create output directory " + config.output_dir);
    }

    void write_text(const std::string& name, const std::string& body,
                    const nlohmann::json& run_info) {
        const fs::path path = fs::path(config_.output_dir) / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::ios_base::failure("cannot open " + path.string());
        os << body;
        if (!os) throw std::ios_base::failure("write failed for " + path.string());
        nlohmann::json entry = run_info;
        entry["file"] = name;
        manifest_["runs"].push_back(entry);
        outputs_.push_back(name);
    }

    void write_json(const std::string& name, const nlohmann::json& j,
                    const nlohmann::json& run_info) {
        write_text(name, j.dump(2) + "\n", run_info);
    }

    /// Manifest goes last, through a temporary plus rename, so a missing or
    /// partial manifest marks an interrupted run.
    RunResult finalize() {
        const fs::path path = fs::path(config_.output_dir) / "manifest.json";
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary);
            if (!os) throw std::ios_base::failure("cannot open " + tmp.string());
            os << manifest_.dump(2) << "\n";
            if (!os) throw std::ios_base::failure("write failed for " + tmp.string());
        }
        fs::rename(tmp, path);
        outputs_.push_back("manifest.json");
        return RunResult{kOk, outputs_, manifest_};
    }

    nlohmann::json& manifest() { return manifest_; }

  private:
    RunConfig config_;
    nlohmann::json manifest_;
    std::vector<std::string> outputs_;
};

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

SimOptions sim_options(const RunConfig& config, int n_total_modes) {
    SimOptions opts;
    opts.workers = config.workers;
    opts.dt = config.dt;
    if (config.trunc)
        opts.trunc_override.assign(static_cast<std::size_t>(n_total_modes), *config.trunc);
    return opts;
}

nlohmann::json run_info(const PulseParams& pulse, const SimOptions& opts,
                        const std::vector<int>& dims, double dt, bool converged,
                        double wall_time) {
    nlohmann::json j;
    j["pulse"] = pulse_to_json(pulse);
    j["truncation_dims"] = dims.empty() ? nlohmann::json("auto-per-branch") : nlohmann::json(dims);
    j["integrator_dt"] = dt;
    j["converged"] = converged;
    j["wall_time_s"] = wall_time;
    (void)opts;
    return j;
}

// ---- per-command execution ------------------------------------------------------

void run_qst_cmd(const RunConfig& config, Artifacts& art) {
    QstTask task;
    task.input = parse_input_state(require(config, "input"));
    task.m = parse_int("m", require(config, "m"));
    task.channel_temp = parse_double("temp", get(config, "temp", "0"));
    task.jitter = parse_double("jitter", get(config, "jitter", "0"));
    task.apply_correction = parse_bool("correction", get(config, "correction", "false"));
    task.method = parse_method_one(get(config, "method", "optimized"));

    const SimOptions opts = sim_options(config, 3);
    const QstRecord rec = run_qst(task, opts);

    nlohmann::json j;
    j["units"] = {{"tau", "1/omega"}, {"temperature", "omega"}, {"fidelity", "dimensionless"}};
    j["fidelity"] = rec.fidelity;
    j["infidelity"] = rec.infidelity;
    j["theta_r"] = rec.theta_r;
    j["pulse"] = pulse_to_json(rec.pulse);
    j["method"] = method_name(task.method);
    j["correction"] = task.apply_correction;
    j["channel_temperature"] = task.channel_temp;
    if (task.jitter > 0.0) {
        const auto jrows = sweep_jitter(task.input, {task.m}, {task.jitter}, opts);
        j["jitter_delta_tau"] = task.jitter;
        j["jitter_max_infidelity"] = jrows.front().max_infidelity;
    }
    art.write_json("qst.json", j,
                   run_info(rec.pulse, opts, rec.dims, rec.dt, rec.converged, rec.wall_time_s));
}

void run_sweep_m_cmd(const RunConfig& config, Artifacts& art) {
    const InputState input = parse_input_state(require(config, "input"));
    const std::vector<int> ms = parse_int_list(get(config, "m", "5..17"));
    const std::vector<Method> methods = parse_methods(get(config, "method", "optimized,rwa"));
    const SimOptions opts = sim_options(config, 3);

    const auto rows = sweep_m(input, ms, methods, opts);
    std::string csv = csv_line({"m", "method", "tau_1_over_omega", "g_prime_omega", "infidelity"});
    for (const auto& r : rows)
        csv += csv_line({std::to_string(r.m), method_name(r.method), format_float(r.tau),
                         format_float(r.g_prime), format_float(r.infidelity)});
    art.write_text("sweep_m.csv", csv, {{"kind", "csv"}, {"rows", rows.size()}});
}

void run_sweep_temp_cmd(const RunConfig& config, Artifacts& art) {
    const InputState input = parse_input_state(require(config, "input"));
    const int m = parse_int("m", require(config, "m"));
    const std::vector<double> temps = parse_double_list(get(config, "temps", "0,1,2,3"));
    const std::vector<Method> methods = parse_methods(get(config, "method", "optimized,rwa"));
    const SimOptions opts = sim_options(config, 3);

    const auto rows = sweep_temp(input, m, temps, methods, opts);
    std::string csv = csv_line({"temperature_omega", "method", "infidelity"});
    for (const auto& r : rows)
        csv += csv_line({format_float(r.temperature), method_name(r.method),
                         format_float(r.infidelity)});
    art.write_text("sweep_temp.csv", csv,
                   run_info(qst_pulse(m), opts, {}, opts.dt, true, 0.0));
}

void run_sweep_phase_cmd(const RunConfig& config, Artifacts& art) {
    const double alpha = parse_double("alpha", get(config, "alpha", "1.0"));
    const int m = parse_int("m", require(config, "m"));
    const int n_phi = parse_int("phases", get(config, "phases", "16"));
    if (n_phi < 2) throw ConfigError("key 'phases' must be >= 2");
    const std::vector<Method> methods = parse_methods(get(config, "method", "optimized,rwa"));
    std::vector<double> phis;
    for (int i = 0; i < n_phi; ++i) phis.push_back(2.0 * kPi * i / n_phi);
    const SimOptions opts = sim_options(config, 3);

    const auto rows = sweep_phase(alpha, m, phis, methods, opts);
    std::string csv = csv_line({"phi_rad", "method", "infidelity"});
    for (const auto& r : rows)
        csv += csv_line({format_float(r.phi), method_name(r.method), format_float(r.infidelity)});
    art.write_text("sweep_phase.csv", csv, run_info(qst_pulse(m), opts, {}, opts.dt, true, 0.0));
}

void run_sweep_jitter_cmd(const RunConfig& config, Artifacts& art) {
    const InputState input = parse_input_state(get(config, "input", "fock:1"));
    const std::vector<int> ms = parse_int_list(get(config, "m", "5..11"));
    const std::vector<double> dtaus = parse_double_list(require(config, "dtau"));
    const SimOptions opts = sim_options(config, 3);

    const auto rows = sweep_jitter(input, ms, dtaus, opts);
    std::string csv = csv_line(
        {"m", "delta_tau_1_over_omega", "nominal_infidelity", "max_infidelity"});
    for (const auto& r : rows)
        csv += csv_line({std::to_string(r.m), format_float(r.delta_tau),
                         format_float(r.nominal_infidelity), format_float(r.max_infidelity)});
    art.write_text("sweep_jitter.csv", csv,
                   run_info(qst_pulse(ms.front()), opts, {}, opts.dt, true, 0.0));
}

void run_wstate_cmd(const RunConfig& config, Artifacts& art) {
    WTransferSpec spec;
    spec.amplitudes = parse_double_list(require(config, "c"));
    spec.receiver_weights = parse_double_list(require(config, "k"));
    const int m = parse_int("m", get(config, "m", "11"));
    const SimOptions opts = sim_options(config, static_cast<int>(2 * spec.amplitudes.size()) + 1);

    const WTransferRecord rec = run_w_transfer(spec, m, opts);
    nlohmann::json j;
    j["units"] = {{"tau", "1/omega"}, {"fidelity", "dimensionless"}};
    j["couplings"] = rec.couplings.k;
    j["base_coupling_g"] = rec.couplings.g;
    j["sender_restriction_residual"] =
        w_design_residual(spec.amplitudes,
                          rec.couplings.k);
    j["fidelity_ideal_transform"] = rec.fidelity_ideal_transform;
    j["fidelity_full"] = rec.fidelity_full;
    j["channel_dependence"] = rec.channel_dependence;
    j["pulse"] = pulse_to_json(rec.pulse);
    art.write_json("wstate.json", j, run_info(rec.pulse, opts, {}, opts.dt, true, 0.0));
}

void run_ep_cmd(const RunConfig& config, Artifacts& art) {
    const std::vector<double> k = parse_double_list(get(config, "k", "1,1"));
    const std::vector<int> ms = parse_int_list(get(config, "m", "2..7"));
    const std::vector<Method> methods = parse_methods(get(config, "method", "optimized"));
    for (int m : ms)
        if (m < 2) throw ConfigError("key 'm': m < 2 corresponds to an unbounded potential trap");
    const SimOptions opts = sim_options(config, static_cast<int>(k.size()) + 1);

    std::string csv = csv_line(
        {"m", "method", "tau_1_over_omega", "g_prime_omega", "infidelity", "log_negativity"});
    nlohmann::json meta;
    meta["rwa_comparison"] =
        "g'*tau = pi/2 half-exchange at the optimized pulse coupling (interpretation; "
        "the reference figure does not pin the baseline)";
    for (int m : ms)
        for (Method method : methods) {
            EpTask task;
            task.weights = k;
            task.m = m;
            task.method = method;
            task.negativity_samples = (ms.size() == 1 && methods.size() == 1) ? 200 : 0;
            const EpRecord rec = run_ep(task, opts);
            csv += csv_line({std::to_string(m), method_name(method), format_float(rec.pulse.tau),
                             format_float(rec.pulse.g_prime), format_float(rec.infidelity),
                             format_float(rec.final_negativity)});
            if (!rec.negativity_trace.empty()) {
                std::string trace = csv_line({"t_1_over_omega", "log_negativity"});
                for (const auto& [t, en] : rec.negativity_trace)
                    trace += csv_line({format_float(t), format_float(en)});
                art.write_text("ep_trace.csv", trace,
                               run_info(rec.pulse, opts, rec.dims, opts.dt, true, 0.0));
            }
        }
    art.write_text("ep.csv", csv, meta);
}

void run_tradeoff_cmd(const RunConfig& config, Artifacts& art) {
    const double e_tol = parse_double("e_tol", require(config, "e_tol"));
    const double mean_n = parse_double("mean_n", get(config, "mean_n", "1"));
    const TradeoffResult r = speed_limit(e_tol, mean_n);
    nlohmann::json j = tradeoff_to_json(r);
    j["units"] = {{"tau_th", "1/omega"}};
    j["e_tol"] = e_tol;
    j["mean_n"] = mean_n;
    art.write_json("tradeoff.json", j, {{"kind", "tradeoff"}});
}

void run_wigner_cmd(const RunConfig& config, Artifacts& art) {
    QstTask task;
    task.input = parse_input_state(require(config, "input"));
    task.m = parse_int("m", require(config, "m"));
    task.apply_correction = parse_bool("correction", get(config, "correction", "false"));
    const int n_grid = parse_int("grid", get(config, "grid", "101"));
    const double range = parse_double("range", get(config, "range", "5"));
    if (n_grid < 2) throw ConfigError("key 'grid' must be >= 2");

    const SimOptions opts = sim_options(config, 3);
    const PulseParams pulse = qst_pulse(task.m);
    const double theta_r = rotation_angle(pulse);

    // evolve once, reduce to the receiver, optionally rotate, then scan
    const int dn = task.input.kind == InputState::Kind::fock
                       ? suggested_dim(task.input.n)
                       : suggested_dim(std::norm(task.input.alpha));
    std::vector<int> dims = {dn, dn, suggested_dim(0)};
    if (config.trunc) dims.assign(3, *config.trunc);
    const FockBasis basis(dims);
    Eigen::VectorXcd psi_in;
    Eigen::VectorXcd target;
    switch (task.input.kind) {
        case InputState::Kind::fock:
            psi_in = fock_vec(dims[0], task.input.n);
            target = psi_in;
            break;
        case InputState::Kind::coherent:
            psi_in = coherent_vec(dims[0], task.input.alpha);
            target = coherent_vec(dims[1], -task.input.alpha);
            break;
        case InputState::Kind::cat:
            psi_in = cat_vec(dims[0], task.input.alpha, +1);
            target = cat_vec(dims[1], task.input.alpha, +1);
            break;
    }
    const State initial = product_state(
        basis, {psi_in, fock_vec(dims[1], 0), fock_vec(dims[2], 0)});
    EvolveOptions eo;
    eo.dt = config.dt;
    const SystemConfig cfg = equal_weight_config(2, pulse.g_prime);
    const State evolved = evolve(initial, cfg, pulse.tau, eo);
    DensityMatrix rho = partial_trace(evolved, {1});
    if (task.apply_correction) rho = apply_local_rotation(rho, 0, theta_r);
    const double f = fidelity(target, rho);

    PhaseSpaceGrid grid;
    grid.x_min = grid.p_min = -range;
    grid.x_max = grid.p_max = range;
    grid.nx = grid.np = n_grid;
    const WignerResult w = wigner(rho, grid);
    if (!w.grid_adequate)
        std::cerr << "warning: Wigner grid too coarse, integral = " << w.integral << "\n";

    std::string csv = csv_line({"x", "p", "w"});
    const double dx = (grid.x_max - grid.x_min) / (grid.nx - 1);
    const double dp = (grid.p_max - grid.p_min) / (grid.np - 1);
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int ip = 0; ip < grid.np; ++ip)
            csv += csv_line({format_float(grid.x_min + ix * dx), format_float(grid.p_min + ip * dp),
                             format_float(w.values(ix, ip))});
    nlohmann::json meta;
    meta["convention"] = "a=(x+ip)/sqrt(2), [x,p]=i, integral W dx dp = 1";
    meta["fidelity"] = f;
    meta["corrected"] = task.apply_correction;
    meta["grid_integral"] = w.integral;
    meta["grid_adequate"] = w.grid_adequate;
    meta["pulse"] = pulse_to_json(pulse);
    art.write_text("wigner.csv", csv, run_info(pulse, opts, dims, eo.effective_dt(1.0), true, 0.0));
    art.write_json("wigner.json", meta, {{"kind", "wigner-sidecar"}});
}

}  // namespace

// ---- parsing ----------------------------------------------------------------------

InputState parse_input_state(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("input spec '" + text + "' must look like fock:1, coherent:1.0@1.57 "
                          "or cat:1.2");
    const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
    if (kind == "fock") {
        const int n = parse_int("input", arg);
        if (n < 0) throw ConfigError("fock level must be >= 0");
        return InputState::fock(n);
    }
    if (kind == "coherent" || kind == "cat") {
        double mag = 0, phase = 0;
        const auto at = arg.find('@');
        if (at == std::string::npos) {
            mag = parse_double("input", arg);
        } else {
            mag = parse_double("input", arg.substr(0, at));
            phase = parse_double("input", arg.substr(at + 1));
        }
        const Complex alpha = std::polar(mag, phase);
        return kind == "coherent" ? InputState::coherent(alpha) : InputState::cat(alpha);
    }
    throw ConfigError("unknown input kind '" + kind + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = parse_int("list", text.substr(0, dots));
        const int hi = parse_int("list", text.substr(dots + 2));
        if (hi < lo) throw ConfigError("range '" + text + "' is empty");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int("list", trim(item)));
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double("list", trim(item)));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::vector<Method> parse_methods(const std::string& text) {
    std::vector<Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_method_one(trim(item)));
    if (out.empty()) throw ConfigError("empty method list");
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("parse error at line " + std::to_string(line_no) + ", column " +
                              std::to_string(body.size() + 1) + ": expected key=value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError("parse error at line " + std::to_string(line_no) +
                              ", column 1: empty key");
        if (key == "command")
            config.command = value;
        else
            config.params[key] = value;
    }
    return config;
}

RunConfig parse_pairs(const std::vector<std::string>& pairs) {
    RunConfig config;
    for (const std::string& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value, got '" + p + "'");
        const std::string key = trim(p.substr(0, eq)), value = trim(p.substr(eq + 1));
        if (key == "command")
            config.command = value;
        else
            config.params[key] = value;
    }
    return config;
}

void validate(const RunConfig& config) {
    if (config.command.empty()) throw ConfigError("no command given");
    if (!kCommands.count(config.command))
        throw ConfigError("unknown command '" + config.command + "'");
    const auto& known = kKnownKeys.at(config.command);
    for (const auto& [key, value] : config.params)
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "' for command " + config.command);
    if (config.workers < 1) throw ConfigError("workers must be >= 1");
    if (config.dt < 0) throw ConfigError("dt must be positive");
    if (config.trunc && *config.trunc < 2) throw ConfigError("trunc must be >= 2");

    // domain rules that do not need a simulation to detect
    if (config.command == "ep" || config.command == "qst" || config.command == "wigner" ||
        config.command == "sweep-m" || config.command == "sweep-temp" ||
        config.command == "sweep-phase" || config.command == "sweep-jitter") {
        const auto it = config.params.find("m");
        if (it != config.params.end()) {
            for (int m : parse_int_list(it->second))
                if (m < 2)
                    throw ConfigError("m=" + std::to_string(m) +
                                      ": unbounded potential trap (imaginary eigenfrequency)");
        }
    }
    if (config.command == "qst" || config.command == "wigner") {
        const bool correction =
            parse_bool("correction", get(config, "correction", "false"));
        if (correction && get(config, "method", "optimized") == "rwa")
            throw ConfigError(
                "correction=true conflicts with method=rwa: the local rotation is defined "
                "for optimized pulses");
    }
}

std::string config_hash(const RunConfig& config) {
    std::string canon = "command=" + config.command + ";";
    for (const auto& [k, v] : config.params) canon += k + "=" + v + ";";
    canon += "trunc=" + (config.trunc ? std::to_string(*config.trunc) : "auto") + ";";
    canon += "dt=" + format_float(config.dt);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunResult run(const RunConfig& config) {
    validate(config);
    Artifacts art(config);
    if (config.command == "qst")
        run_qst_cmd(config, art);
    else if (config.command == "sweep-m")
        run_sweep_m_cmd(config, art);
    else if (config.command == "sweep-temp")
        run_sweep_temp_cmd(config, art);
    else if (config.command == "sweep-phase")
        run_sweep_phase_cmd(config, art);
    else if (config.command == "sweep-jitter")
        run_sweep_jitter_cmd(config, art);
    else if (config.command == "wstate")
        run_wstate_cmd(config, art);
    else if (config.command == "ep")
        run_ep_cmd(config, art);
    else if (config.command == "tradeoff")
        run_tradeoff_cmd(config, art);
    else if (config.command == "wigner")
        run_wigner_cmd(config, art);
    return art.finalize();
}

int main_entry(const std::vector<std::string>& args) {
    try {
        RunConfig config;
        std::vector<std::string> pairs;
        std::string config_path;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            auto next = [&](const char* flag) -> std::string {
                if (i + 1 >= args.size())
                    throw ConfigError(std::string(flag) + " needs a value");
                return args[++i];
            };
            if (a == "--config")
                config_path = next("--config");
            else if (a == "--out")
                config.output_dir = next("--out");
            else if (a == "--workers")
                config.workers = parse_int("workers", next("--workers"));
            else if (a == "--trunc") {
                const std::string v = next("--trunc");
                if (v != "auto") config.trunc = parse_int("trunc", v);
            } else if (a == "--dt")
                config.dt = parse_double("dt", next("--dt"));
            else if (a == "--help" || a == "-h") {
                std::cout
                    << "usage: bosonlink <command> [key=value ...] [--config file] [--out dir]\n"
                       "                 [--workers n] [--trunc d|auto] [--dt step]\n"
                       "commands: qst sweep-m sweep-temp sweep-phase sweep-jitter wstate ep\n"
                       "          tradeoff wigner\n";
                return kOk;
            } else if (!a.empty() && a[0] == '-')
                throw ConfigError("unknown flag '" + a + "'");
            else
                pairs.push_back(a);
        }

        RunConfig parsed;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) {
                std::cerr << "error: cannot read config file " << config_path << "\n";
                return kIo;
            }
            std::stringstream buffer;
            buffer << is.rdbuf();
            parsed = parse_config(buffer.str());
        }
        // inline pairs override the file; first bare token is the command
        if (!pairs.empty() && pairs.front().find('=') == std::string::npos) {
            parsed.command = pairs.front();
            pairs.erase(pairs.begin());
        }
        const RunConfig inline_cfg = parse_pairs(pairs);
        if (!inline_cfg.command.empty()) parsed.command = inline_cfg.command;
        for (const auto& [k, v] : inline_cfg.params) parsed.params[k] = v;
        parsed.output_dir = config.output_dir;
        parsed.workers = config.workers;
        parsed.trunc = config.trunc;
        parsed.dt = config.dt;
        if (parsed.output_dir == ".") {
            if (const char* env = std::getenv("BOSONLINK_OUT")) parsed.output_dir = env;
        }

        const RunResult result = run(parsed);
        for (const std::string& f : result.outputs) std::cout << "wrote " << f << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const SpeedLimitUnreachable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
}

}  // namespace bosonlink::cli
