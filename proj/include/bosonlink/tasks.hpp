// tasks.hpp — experiment drivers: transfer runs and sweeps (index, temperature,
// phase, jitter), coupling design and transfer of W-type states, and
// entanglement preparation with negativity tracking.

#pragma once

#include <optional>
#include <vector>

#include "bosonlink/analytic.hpp"
#include "bosonlink/fock.hpp"
#include "bosonlink/pulse.hpp"

namespace bosonlink {

enum class Method { optimized, rwa };

struct InputState {
    enum class Kind { fock, coherent, cat };
    Kind kind = Kind::fock;
    int n = 1;                 // fock level
    Complex alpha = 0.0;       // coherent / cat amplitude

    static InputState fock(int n) { return {Kind::fock, n, 0.0}; }
    static InputState coherent(Complex a) { return {Kind::coherent, 0, a}; }
    static InputState cat(Complex a) { return {Kind::cat, 0, a}; }

    double mean_occupation() const;
};

/// Numerical knobs shared by the drivers. Zero/empty means "derive a default":
/// truncations from the occupancy policy, dt = (2 pi/omega)/200.
struct SimOptions {
    std::vector<int> trunc_override;
    double dt = 0.0;
    double adaptive_tol = 1e-11;  // local step error when dt = 0 (adaptive)
    double thermal_tail = 1e-8;
    double tail_epsilon = 1e-5;
    int extra_levels = 0;       // added to every auto-derived truncation
    bool force_direct = false;  // disable the united-mode fast path (testing)
    int workers = 1;            // sweep fan-out; results merge deterministically by key
};

struct QstTask {
    InputState input;
    int m = 5;
    double channel_temp = 0.0;  // units omega
    double jitter = 0.0;        // half-width Delta tau, units 1/omega
    bool apply_correction = false;
    Method method = Method::optimized;
};

struct QstRecord {
    double infidelity = 0.0;
    double fidelity = 0.0;
    double theta_r = 0.0;
    PulseParams pulse;
    double wall_time_s = 0.0;
    std::vector<int> dims;
    double dt = 0.0;
    bool converged = true;
};

/// One transfer run: sender state through a (possibly thermal) channel, scored
/// on the receiver against the phase-absorbed ideal target (K21 = -1); the
/// local rotation U_r = exp(-i theta_r n) is applied first when requested.
QstRecord run_qst(const QstTask& task, const SimOptions& opts = {});

struct SweepRow {
    int m = 0;
    Method method = Method::optimized;
    double tau = 0.0;
    double g_prime = 0.0;
    double infidelity = 0.0;
};

/// Infidelity vs pulse index for one or both methods (Fig. 1 style).
std::vector<SweepRow> sweep_m(const InputState& input, const std::vector<int>& ms,
                              const std::vector<Method>& methods, const SimOptions& opts = {});

struct TempRow {
    double temperature = 0.0;
    Method method = Method::optimized;
    double infidelity = 0.0;
};

std::vector<TempRow> sweep_temp(const InputState& input, int m,
                                const std::vector<double>& temperatures,
                                const std::vector<Method>& methods, const SimOptions& opts = {});

struct PhaseRow {
    double phi = 0.0;
    Method method = Method::optimized;
    double infidelity = 0.0;
};

/// Infidelity vs coherent-state phase at fixed |alpha|.
std::vector<PhaseRow> sweep_phase(double alpha_mag, int m, const std::vector<double>& phis,
                                  const std::vector<Method>& methods, const SimOptions& opts = {});

struct JitterRow {
    int m = 0;
    double delta_tau = 0.0;
    double nominal_infidelity = 0.0;
    double max_infidelity = 0.0;  // worst over the duration scan
};

/// Worst-case infidelity across durations in [tau - dtau, tau + dtau],
/// scanned on 23 uniform points (21 samples plus the endpoints).
std::vector<JitterRow> sweep_jitter(const InputState& input, const std::vector<int>& ms,
                                    const std::vector<double>& delta_taus,
                                    const SimOptions& opts = {});

// ---- W-type multi-mode transfer ---------------------------------------------

struct CouplingWeights {
    std::vector<double> k;  // senders then receivers
    double g = 0.0;
};

struct WTransferSpec {
    std::vector<double> amplitudes;        // C_1..C_ns, real, sum of squares 1
    std::vector<double> receiver_weights;  // k_{ns+1}..k_{2ns}, ratio = C ratio
};

/// Sender-side couplings that erase sender excitations under the ideal
/// transform a_i -> a_i - (2 k_i/sum k^2) sum_j k_j a_j. Zero amplitudes are
/// dropped to a reduced problem; n_s = 2 uses the closed-form quadratic,
/// larger n_s a damped Newton iteration seeded at the symmetric point.
CouplingWeights design_w_couplings(const WTransferSpec& spec);

/// Max absolute residual of the sender restrictions for given couplings.
double w_design_residual(const std::vector<double>& amplitudes, const std::vector<double>& k);

struct WTransferRecord {
    CouplingWeights couplings;
    double fidelity_ideal_transform = 0.0;  // 1 by construction
    double fidelity_full = 0.0;             // Fock evolution at the optimized pulse
    double channel_dependence = 0.0;        // |f_full(n_c=1) - f_full(n_c=0)|
    PulseParams pulse;
};

WTransferRecord run_w_transfer(const WTransferSpec& spec, int m, const SimOptions& opts = {});

// ---- entanglement preparation -------------------------------------------------

struct EpTask {
    std::vector<double> weights = {1.0, 1.0};
    int m = 2;
    Method method = Method::optimized;
    int negativity_samples = 200;  // E_N(t) grid for two-node tasks; 0 disables
};

struct EpRecord {
    double fidelity = 0.0;   // vs sum_j k_j |1_j>/|k| on the node modes
    double infidelity = 0.0;
    double final_negativity = 0.0;  // E_N of modes (a_1, a_2) at t = tau
    std::vector<std::pair<double, double>> negativity_trace;  // (t, E_N)
    PulseParams pulse;
    std::vector<int> dims;
};

/// Seeds the channel with |1>, nodes in vacuum, runs the entanglement pulse
/// (or the g' tau = pi/2 baseline for Method::rwa) and scores the node state.
EpRecord run_ep(const EpTask& task, const SimOptions& opts = {});

/// Fastest perfect-entanglement pulse; independent of the mode count.
PulseParams min_ep_time(int n_modes);

}  // namespace bosonlink
