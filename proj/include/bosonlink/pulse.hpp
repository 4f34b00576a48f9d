// pulse.hpp — excitation-conserving rectangle-pulse design for state transfer
// and entanglement preparation, plus the speed/fidelity tradeoff.
//
// Dimensionless convention: zeta = omega/g', theta = omega*tau. The stored
// g_prime and tau assume omega = 1 (couplings in omega, durations in 1/omega).

#pragma once

#include <stdexcept>

namespace bosonlink {

enum class PulseKind { qst, ep, rwa };

struct PulseParams {
    int m = 0;  // pulse index; 0 for the RWA baseline
    double zeta = 0.0;
    double theta = 0.0;
    double g_prime = 0.0;
    double tau = 0.0;
    PulseKind kind = PulseKind::qst;
};

/// Transfer pulse: solves (sqrt(1+2/zeta)-sqrt(1-2/zeta))*theta = 2*pi together
/// with sqrt(1+2/zeta)*theta = m*pi. Throws std::invalid_argument for m < 2
/// (unbounded potential, imaginary eigenfrequency). m = 2 sits exactly on the
/// singular coupling g' = omega/2; m <= 4 is the ultra-strong regime with
/// large residual infidelity.
PulseParams qst_pulse(int m);

/// Entanglement pulse: same constraints with right-hand sides pi and m*pi.
/// Identical parameters to qst_pulse(2m). Throws for m < 2.
PulseParams ep_pulse(int m);

/// Baseline pulse g'*tau = pi from the number-conserving approximation.
PulseParams rwa_pulse(double g_prime);

/// Residual receiver phase theta_r = -(sqrt(1+2/zeta)+sqrt(1-2/zeta)-2)*theta/4.
double rotation_angle(double zeta, double theta);
double rotation_angle(const PulseParams& p);

/// Amplitude-error magnitude G(m) = sin(theta_r(m)) on the continuous
/// extension of the transfer-pulse family; monotone decreasing, m > 2.
double amplitude_error(double m);

struct TradeoffResult {
    double m_th = 0.0;       // continuous threshold solving G(m) = sqrt(E_tol/<n1>)
    int m_chosen = 0;        // floor(m_th) + 1
    double theta_th = 0.0;
    double tau_th = 0.0;     // units 1/omega
    double predicted_infidelity = 0.0;  // <n1> * G(m_chosen)^2, first order
};

/// Raised when no pulse index up to the search cap meets the error budget.
class SpeedLimitUnreachable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shortest admissible pulse for tolerable error E_tol when sending a state of
/// mean occupancy mean_n: bisects G(m) = sqrt(E_tol/mean_n) on m in (2, 1e6].
/// Any budget already met at m = 3 returns m_chosen = 3; a budget unreachable
/// at the cap throws SpeedLimitUnreachable.
TradeoffResult speed_limit(double e_tol, double mean_n);

}  // namespace bosonlink
