#include "bosonlink/pulse.hpp"

#include <cmath>
#include <numbers>

namespace bosonlink {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSearchCap = 1e6;

// Continuous (zeta, theta) of the transfer family; scale = 2/m recovers the
// QST pulses, scale = 1/m the EP pulses.
void family_params(double m, double scale_over_m, double& zeta, double& theta) {
    const double w = 1.0 - scale_over_m;
    const double w2 = w * w;
    zeta = 2.0 * (w2 + 1.0) / (1.0 - w2);
    theta = m * kPi * std::sqrt((w2 + 1.0) / 2.0);
}

}  // namespace

PulseParams qst_pulse(int m) {
    if (m < 2)
        throw std::invalid_argument(
            "qst_pulse: m < 2 gives an unbounded potential (imaginary eigenfrequency)");
    PulseParams p;
    p.m = m;
    p.kind = PulseKind::qst;
    family_params(static_cast<double>(m), 2.0 / m, p.zeta, p.theta);
    p.g_prime = 1.0 / p.zeta;
    p.tau = p.theta;
    return p;
}

PulseParams ep_pulse(int m) {
    if (m < 2)
        throw std::invalid_argument("ep_pulse: m < 2 corresponds to an unbounded potential trap");
    PulseParams p;
    p.m = m;
    p.kind = PulseKind::ep;
    family_params(static_cast<double>(m), 1.0 / m, p.zeta, p.theta);
    p.g_prime = 1.0 / p.zeta;
    p.tau = p.theta;
    return p;
}

PulseParams rwa_pulse(double g_prime) {
    if (!(g_prime > 0.0)) throw std::invalid_argument("rwa_pulse: g_prime must be positive");
    PulseParams p;
    p.m = 0;
    p.kind = PulseKind::rwa;
    p.g_prime = g_prime;
    p.zeta = 1.0 / g_prime;
    p.tau = kPi / g_prime;
    p.theta = p.tau;
    return p;
}

double rotation_angle(double zeta, double theta) {
    if (!(zeta >= 2.0)) throw std::invalid_argument("rotation_angle: requires zeta >= 2");
    // sqrt(1+x)+sqrt(1-x)-2 cancels catastrophically for small x = 2/zeta;
    // the rationalized form -2x^2/((p+q)(p+1)(q+1)) is identical and stable.
    const double x = 2.0 / zeta;
    const double p = std::sqrt(1.0 + x), q = std::sqrt(1.0 - x);
    const double correction = -2.0 * x * x / ((p + q) * (p + 1.0) * (q + 1.0));
    return -correction * theta / 4.0;
}

double rotation_angle(const PulseParams& p) { return rotation_angle(p.zeta, p.theta); }

double amplitude_error(double m) {
    if (!(m > 2.0)) throw std::invalid_argument("amplitude_error: requires m > 2");
    double zeta, theta;
    family_params(m, 2.0 / m, zeta, theta);
    return std::sin(rotation_angle(zeta, theta));
}

TradeoffResult speed_limit(double e_tol, double mean_n) {
    if (!(e_tol > 0.0) || !(e_tol < 1.0))
        throw std::invalid_argument("speed_limit: need 0 < E_tol < 1");
    if (!(mean_n > 0.0)) throw std::invalid_argument("speed_limit: need mean_n > 0");

    const double target = std::sqrt(e_tol / mean_n);
    TradeoffResult out;

    const double g_cap = amplitude_error(kSearchCap);
    if (target < g_cap)
        throw SpeedLimitUnreachable(
            "speed_limit: error budget unreachable within the pulse-index search cap 1e6");

    // G decreases with m; just above m = 2 it approaches sin(pi(sqrt(2)-1)/2).
    double lo = 2.0 + 1e-9, hi = kSearchCap;
    if (target >= amplitude_error(lo)) {
        out.m_th = 2.0;  // every m >= 3 already satisfies the budget
    } else {
        while (hi - lo > 1e-10 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (amplitude_error(mid) > target)
                lo = mid;
            else
                hi = mid;
        }
        out.m_th = 0.5 * (lo + hi);
    }

    out.m_chosen = static_cast<int>(std::floor(out.m_th)) + 1;
    if (out.m_chosen < 3) out.m_chosen = 3;
    const PulseParams p = qst_pulse(out.m_chosen);
    out.theta_th = p.theta;
    out.tau_th = p.tau;
    const double g = amplitude_error(static_cast<double>(out.m_chosen));
    out.predicted_infidelity = mean_n * g * g;
    return out;
}

}  // namespace bosonlink
