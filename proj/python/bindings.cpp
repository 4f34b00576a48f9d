// Python bindings for the main operations: pulse design, analytic transforms,
// Fock-space runs and the task drivers.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bosonlink/analytic.hpp"
#include "bosonlink/fock.hpp"
#include "bosonlink/pulse.hpp"
#include "bosonlink/tasks.hpp"

namespace py = pybind11;
using namespace bosonlink;

namespace {

InputState input_from_spec(const std::string& kind, double a, double b) {
    if (kind == "fock") return InputState::fock(static_cast<int>(a));
    if (kind == "coherent") return InputState::coherent(Complex(a, b));
    if (kind == "cat") return InputState::cat(Complex(a, b));
    throw std::invalid_argument("input kind must be fock, coherent or cat");
}

}  // namespace

PYBIND11_MODULE(_bosonlink, m) {
    m.doc() = "Beyond-RWA bosonic mode transforms, pulse design and Fock-space oracle";

    py::register_exception<NonConvergenceError>(m, "NonConvergenceError");
    py::register_exception<SpeedLimitUnreachable>(m, "SpeedLimitUnreachable");

    py::enum_<PulseKind>(m, "PulseKind")
        .value("qst", PulseKind::qst)
        .value("ep", PulseKind::ep)
        .value("rwa", PulseKind::rwa);

    py::class_<PulseParams>(m, "PulseParams")
        .def_readonly("m", &PulseParams::m)
        .def_readonly("zeta", &PulseParams::zeta)
        .def_readonly("theta", &PulseParams::theta)
        .def_readonly("g_prime", &PulseParams::g_prime)
        .def_readonly("tau", &PulseParams::tau)
        .def_readonly("kind", &PulseParams::kind)
        .def("__repr__", [](const PulseParams& p) {
            return "PulseParams(m=" + std::to_string(p.m) + ", zeta=" + std::to_string(p.zeta) +
                   ", theta=" + std::to_string(p.theta) + ")";
        });

    m.def("qst_pulse", &qst_pulse, py::arg("m"));
    m.def("ep_pulse", &ep_pulse, py::arg("m"));
    m.def("rwa_pulse", &rwa_pulse, py::arg("g_prime"));
    m.def("rotation_angle", py::overload_cast<const PulseParams&>(&rotation_angle), py::arg("pulse"));
    m.def("amplitude_error", &amplitude_error, py::arg("m"));

    py::class_<TradeoffResult>(m, "TradeoffResult")
        .def_readonly("m_th", &TradeoffResult::m_th)
        .def_readonly("m_chosen", &TradeoffResult::m_chosen)
        .def_readonly("theta_th", &TradeoffResult::theta_th)
        .def_readonly("tau_th", &TradeoffResult::tau_th)
        .def_readonly("predicted_infidelity", &TradeoffResult::predicted_infidelity);
    m.def("speed_limit", &speed_limit, py::arg("e_tol"), py::arg("mean_n"));

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](double omega, double g, std::vector<double> weights) {
                 SystemConfig cfg;
                 cfg.omega = omega;
                 cfg.g = g;
                 cfg.weights = std::move(weights);
                 cfg.validate();
                 return cfg;
             }),
             py::arg("omega") = 1.0, py::arg("g") = 0.1,
             py::arg("weights") = std::vector<double>{1.0, 1.0})
        .def_readonly("omega", &SystemConfig::omega)
        .def_readonly("g", &SystemConfig::g)
        .def_readonly("weights", &SystemConfig::weights)
        .def_property_readonly("g_prime", &SystemConfig::g_prime);
    m.def("equal_weight_config", &equal_weight_config, py::arg("n_modes"), py::arg("g_prime"),
          py::arg("omega") = 1.0);

    py::class_<BogoliubovTransform>(m, "BogoliubovTransform")
        .def_readonly("u_a", &BogoliubovTransform::u_a)
        .def_readonly("u_b", &BogoliubovTransform::u_b)
        .def_readonly("time", &BogoliubovTransform::time)
        .def("symplectic_residual", &BogoliubovTransform::symplectic_residual);

    m.def("full_transform", &full_transform, py::arg("cfg"), py::arg("t"));
    m.def("rwa_transform", &rwa_transform, py::arg("cfg"), py::arg("t"));
    m.def("united_mode_transform", &united_mode_transform, py::arg("cfg"), py::arg("t"));
    m.def(
        "eigen_frequencies",
        [](const SystemConfig& cfg) {
            const EigenFrequencies f = eigen_frequencies(cfg);
            return std::make_pair(std::vector<Complex>(f.values.begin(), f.values.end()),
                                  f.hyperbolic);
        },
        py::arg("cfg"));
    m.def(
        "transfer_coefficients",
        [](const SystemConfig& cfg, double t) {
            const TransferCoefficients k = transfer_coefficients(cfg, t);
            py::dict d;
            d["k11"] = k.k11;
            d["k21"] = k.k21;
            d["kc1"] = k.kc1;
            d["k12"] = k.k12;
            d["k22"] = k.k22;
            d["kc2"] = k.kc2;
            return d;
        },
        py::arg("cfg"), py::arg("t"));

    py::class_<QstRecord>(m, "QstRecord")
        .def_readonly("infidelity", &QstRecord::infidelity)
        .def_readonly("fidelity", &QstRecord::fidelity)
        .def_readonly("theta_r", &QstRecord::theta_r)
        .def_readonly("pulse", &QstRecord::pulse)
        .def_readonly("wall_time_s", &QstRecord::wall_time_s);

    m.def(
        "run_qst",
        [](const std::string& input, double a, double b, int m, double temp, bool correction,
           const std::string& method) {
            QstTask task;
            task.input = input_from_spec(input, a, b);
            task.m = m;
            task.channel_temp = temp;
            task.apply_correction = correction;
            task.method = method == "rwa" ? Method::rwa : Method::optimized;
            return run_qst(task);
        },
        py::arg("input"), py::arg("a"), py::arg("b") = 0.0, py::arg("m") = 8,
        py::arg("temp") = 0.0, py::arg("correction") = false, py::arg("method") = "optimized");

    py::class_<EpRecord>(m, "EpRecord")
        .def_readonly("fidelity", &EpRecord::fidelity)
        .def_readonly("infidelity", &EpRecord::infidelity)
        .def_readonly("final_negativity", &EpRecord::final_negativity)
        .def_readonly("negativity_trace", &EpRecord::negativity_trace)
        .def_readonly("pulse", &EpRecord::pulse);

    m.def(
        "run_ep",
        [](std::vector<double> weights, int m, const std::string& method, int samples) {
            EpTask task;
            task.weights = std::move(weights);
            task.m = m;
            task.method = method == "rwa" ? Method::rwa : Method::optimized;
            task.negativity_samples = samples;
            return run_ep(task);
        },
        py::arg("weights") = std::vector<double>{1.0, 1.0}, py::arg("m") = 2,
        py::arg("method") = "optimized", py::arg("samples") = 0);
    m.def("min_ep_time", &min_ep_time, py::arg("n_modes"));

    py::class_<CouplingWeights>(m, "CouplingWeights")
        .def_readonly("k", &CouplingWeights::k)
        .def_readonly("g", &CouplingWeights::g);
    m.def(
        "design_w_couplings",
        [](std::vector<double> amplitudes, std::vector<double> receivers) {
            return design_w_couplings({std::move(amplitudes), std::move(receivers)});
        },
        py::arg("amplitudes"), py::arg("receiver_weights"));
    m.def("w_design_residual", &w_design_residual, py::arg("amplitudes"), py::arg("k"));

    // Fock-space primitives for quick experiments
    m.def("fock_vec", &fock_vec, py::arg("dim"), py::arg("n"));
    m.def("coherent_vec", &coherent_vec, py::arg("dim"), py::arg("alpha"));
    m.def("cat_vec", &cat_vec, py::arg("dim"), py::arg("alpha"), py::arg("parity") = 1);
    m.def("suggested_dim", &suggested_dim, py::arg("n_peak"));
    m.def("thermal_mean_occupation", &thermal_mean_occupation, py::arg("temperature"),
          py::arg("omega") = 1.0);

    m.def(
        "single_excitation_amplitudes",
        [](const SystemConfig& cfg, double t, int dim_per_mode, double dt) {
            // evolve |1> in each mode and stack the single-excitation amplitudes
            const int n = cfg.n_modes() + 1;
            const FockBasis basis(std::vector<int>(static_cast<std::size_t>(n), dim_per_mode));
            const Hamiltonian h(cfg, basis, Hamiltonian::Kind::full);
            EvolveOptions opts;
            opts.dt = dt;
            Eigen::MatrixXcd amps(n, n);
            for (int i = 0; i < n; ++i) {
                std::vector<int> occ(static_cast<std::size_t>(n), 0);
                occ[static_cast<std::size_t>(i)] = 1;
                const State fin = evolve(fock_state(basis, occ), h, t, opts);
                for (int j = 0; j < n; ++j) {
                    std::vector<int> out(static_cast<std::size_t>(n), 0);
                    out[static_cast<std::size_t>(j)] = 1;
                    amps(j, i) = fin.pure()(basis.index(out));
                }
            }
            return amps;
        },
        py::arg("cfg"), py::arg("t"), py::arg("dim_per_mode") = 8, py::arg("dt") = 0.0,
        "Columns are Fock-oracle amplitudes of evolving |1_i>; equals u_a at "
        "excitation-conserving pulses");

    m.attr("__version__") = "0.1.0";
}
