#include "bosonlink/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace bosonlink {

namespace {

constexpr char kMagic[4] = {'B', 'L', 'N', 'K'};
constexpr std::uint32_t kVersion = 1;

// The container is specified little-endian; this writer targets the
// little-endian platforms we build on.
static_assert(std::endian::native == std::endian::little,
              "state container writer assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

nlohmann::json complex_to_json(const Complex& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = Complex(j.at(i).at(c).at(0).get<double>(),
                              j.at(i).at(c).at(1).get<double>());
    return m;
}

}  // namespace

std::string format_float(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", value);
    return buf;
}

void save_state(const State& state, std::ostream& os) {
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(state.basis.n_modes()));
    for (int d : state.basis.dims) put_u32(os, static_cast<std::uint32_t>(d));
    put_u32(os, static_cast<std::uint32_t>(state.branches.size()));
    for (const Branch& b : state.branches) {
        put_f64(os, b.weight);
        for (std::int64_t i = 0; i < state.basis.dim; ++i) {
            put_f64(os, b.psi(i).real());
            put_f64(os, b.psi(i).imag());
        }
    }
    if (!os) throw std::runtime_error("save_state: write failed");
}

State load_state(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_state: bad magic");
    if (get_u32(is) != kVersion) throw std::runtime_error("load_state: unsupported version");
    const std::uint32_t n_modes = get_u32(is);
    std::vector<int> dims(n_modes);
    for (auto& d : dims) d = static_cast<int>(get_u32(is));
    State state;
    state.basis = FockBasis(dims);
    const std::uint32_t n_branches = get_u32(is);
    for (std::uint32_t b = 0; b < n_branches; ++b) {
        Branch br;
        br.weight = get_f64(is);
        br.psi.resize(state.basis.dim);
        for (std::int64_t i = 0; i < state.basis.dim; ++i) {
            const double re = get_f64(is), im = get_f64(is);
            br.psi(i) = Complex(re, im);
        }
        state.branches.push_back(std::move(br));
    }
    if (!is) throw std::runtime_error("load_state: truncated stream");
    return state;
}

void save_state_file(const State& state, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_state_file: cannot open " + path);
    save_state(state, os);
}

State load_state_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_state_file: cannot open " + path);
    return load_state(is);
}

nlohmann::json state_to_json(const State& state) {
    nlohmann::json j;
    j["dims"] = state.basis.dims;
    nlohmann::json branches = nlohmann::json::array();
    for (const Branch& b : state.branches) {
        nlohmann::json jb;
        jb["weight"] = b.weight;
        nlohmann::json amps = nlohmann::json::array();
        for (std::int64_t i = 0; i < state.basis.dim; ++i)
            amps.push_back(complex_to_json(b.psi(i)));
        jb["amplitudes"] = std::move(amps);
        branches.push_back(std::move(jb));
    }
    j["branches"] = std::move(branches);
    return j;
}

State state_from_json(const nlohmann::json& j) {
    State state;
    state.basis = FockBasis(j.at("dims").get<std::vector<int>>());
    for (const auto& jb : j.at("branches")) {
        Branch b;
        b.weight = jb.at("weight").get<double>();
        const auto& amps = jb.at("amplitudes");
        b.psi.resize(state.basis.dim);
        for (std::int64_t i = 0; i < state.basis.dim; ++i)
            b.psi(i) = Complex(amps.at(i).at(0).get<double>(), amps.at(i).at(1).get<double>());
        state.branches.push_back(std::move(b));
    }
    return state;
}

nlohmann::json transform_to_json(const BogoliubovTransform& t) {
    nlohmann::json j;
    j["frame"] = "interaction";
    j["time"] = t.time;
    j["u_a"] = matrix_to_json(t.u_a);
    j["u_b"] = matrix_to_json(t.u_b);
    return j;
}

BogoliubovTransform transform_from_json(const nlohmann::json& j) {
    BogoliubovTransform t;
    t.time = j.at("time").get<double>();
    t.u_a = matrix_from_json(j.at("u_a"));
    t.u_b = matrix_from_json(j.at("u_b"));
    return t;
}

std::string pulse_kind_name(PulseKind kind) {
    switch (kind) {
        case PulseKind::qst: return "qst";
        case PulseKind::ep: return "ep";
        case PulseKind::rwa: return "rwa";
    }
    return "unknown";
}

nlohmann::json pulse_to_json(const PulseParams& p) {
    return {{"m", p.m},         {"zeta", p.zeta}, {"theta", p.theta},
            {"g_prime", p.g_prime}, {"tau", p.tau},   {"kind", pulse_kind_name(p.kind)}};
}

nlohmann::json tradeoff_to_json(const TradeoffResult& r) {
    return {{"m_th", r.m_th},
            {"m_chosen", r.m_chosen},
            {"theta_th", r.theta_th},
            {"tau_th", r.tau_th},
            {"predicted_infidelity", r.predicted_infidelity}};
}

}  // namespace bosonlink
