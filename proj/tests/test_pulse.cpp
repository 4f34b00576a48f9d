#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bosonlink/analytic.hpp"
#include "bosonlink/pulse.hpp"

using namespace bosonlink;
constexpr double kPi = std::numbers::pi;

namespace {

// residuals of the two defining constraints with right-hand sides (rhs, m pi)
std::pair<double, double> constraint_residuals(double zeta, double theta, double rhs, int m) {
    const double p = std::sqrt(1.0 + 2.0 / zeta), q = std::sqrt(1.0 - 2.0 / zeta);
    return {(p - q) * theta - rhs, p * theta - m * kPi};
}

}  // namespace

TEST_CASE("qst pulse closed form") {
    CHECK_THROWS_AS(qst_pulse(1), std::invalid_argument);
    CHECK_THROWS_AS(qst_pulse(0), std::invalid_argument);

    const PulseParams p2 = qst_pulse(2);
    CHECK(p2.zeta == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(p2.theta == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-14));

    const PulseParams p5 = qst_pulse(5);
    CHECK(p5.zeta == doctest::Approx(4.25).epsilon(1e-14));
    CHECK(p5.theta == doctest::Approx(5.0 * kPi * std::sqrt(0.68)).epsilon(1e-14));
    CHECK(p5.g_prime == doctest::Approx(1.0 / 4.25));
    CHECK(p5.tau == p5.theta);

    // large m approaches the weak-coupling regime: zeta ~ m, theta/(m pi) -> 1
    const PulseParams big = qst_pulse(100000);
    CHECK(big.zeta > 0.9 * big.m);
    CHECK(big.g_prime < 2e-5);
    CHECK(std::abs(big.theta / (big.m * kPi) - 1.0) < 2.0 / big.m);
}

TEST_CASE("defining constraints vanish for qst and ep pulses") {
    for (int m = 2; m <= 100; ++m) {
        const PulseParams q = qst_pulse(m);
        const auto [r1, r2] = constraint_residuals(q.zeta, q.theta, 2.0 * kPi, m);
        CHECK(std::abs(r1) < 1e-10);
        CHECK(std::abs(r2) < 1e-10);

        const PulseParams e = ep_pulse(m);
        const auto [s1, s2] = constraint_residuals(e.zeta, e.theta, kPi, m);
        CHECK(std::abs(s1) < 1e-10);
        CHECK(std::abs(s2) < 1e-10);
    }
    for (const int m : {500, 2000, 10000}) {
        const PulseParams q = qst_pulse(m);
        const auto [r1, r2] = constraint_residuals(q.zeta, q.theta, 2.0 * kPi, m);
        CHECK(std::abs(r1) < 1e-8 * q.theta);  // relative: theta itself is ~ m pi
        CHECK(std::abs(r2) < 1e-8 * q.theta);
    }
}

TEST_CASE("ep pulse values and the m -> 2m identity") {
    CHECK_THROWS_AS(ep_pulse(1), std::invalid_argument);

    const PulseParams e2 = ep_pulse(2);
    CHECK(e2.zeta == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
    CHECK(e2.theta == doctest::Approx(std::sqrt(10.0) / 2.0 * kPi).epsilon(1e-14));

    // m -> m/2 scaling: identical coupling, half the duration
    for (int m = 2; m <= 50; ++m) {
        const PulseParams e = ep_pulse(m);
        const PulseParams q = qst_pulse(2 * m);
        CHECK(e.zeta == q.zeta);
        CHECK(2.0 * e.theta == doctest::Approx(q.theta).epsilon(1e-14));
    }
}

TEST_CASE("monotonicity of zeta and theta in m") {
    double prev_zeta = 0.0, prev_theta = 0.0;
    for (int m = 2; m <= 1000; ++m) {
        const PulseParams p = qst_pulse(m);
        CHECK(p.zeta > prev_zeta);
        CHECK(p.theta > prev_theta);
        prev_zeta = p.zeta;
        prev_theta = p.theta;
    }
}

TEST_CASE("rwa pulse") {
    CHECK_THROWS_AS(rwa_pulse(0.0), std::invalid_argument);
    const PulseParams p = rwa_pulse(0.1);
    CHECK(p.tau == doctest::Approx(10.0 * kPi));
    CHECK(p.kind == PulseKind::rwa);

    // offset against the optimized pulse at the same coupling: the baseline
    // g' tau = pi is slightly slower, and the gap closes as m grows
    const PulseParams opt = qst_pulse(11);
    const PulseParams rwa = rwa_pulse(opt.g_prime);
    CHECK(rwa.theta == doctest::Approx(kPi * opt.zeta));
    CHECK(rwa.theta > opt.theta);
    const double gap11 = rwa.theta - opt.theta;
    const double gap99 = rwa_pulse(qst_pulse(99).g_prime).theta - qst_pulse(99).theta;
    CHECK(gap99 < gap11);

    CHECK(rwa_pulse(1e6).tau == doctest::Approx(kPi * 1e-6));
}

TEST_CASE("rotation angle") {
    // identity theta_r = (theta - (m-1) pi)/2 on the pulse family
    for (int m = 2; m <= 60; ++m) {
        const PulseParams p = qst_pulse(m);
        const double direct = rotation_angle(p);
        CHECK(direct == doctest::Approx((p.theta - (m - 1) * kPi) / 2.0).epsilon(1e-10));
        CHECK(direct > 0.0);
    }
    const double t11 = rotation_angle(qst_pulse(11));
    CHECK(t11 == doctest::Approx(0.0783444424533).epsilon(1e-9));
    CHECK(rotation_angle(qst_pulse(5)) > t11);

    // weak coupling: no extra rotation
    CHECK(rotation_angle(1e8, 1e4 * kPi) < 1e-8);
    CHECK_THROWS_AS(rotation_angle(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("amplitude error G(m)") {
    CHECK_THROWS_AS(amplitude_error(2.0), std::invalid_argument);
    CHECK(amplitude_error(1e7) < 1e-6);

    // G equals sin(theta_r) on integer pulses and decreases monotonically
    double prev = 1.0;
    for (int m = 3; m <= 17; ++m) {
        const double g = amplitude_error(static_cast<double>(m));
        CHECK(g == doctest::Approx(std::sin(rotation_angle(qst_pulse(m)))).epsilon(1e-12));
        CHECK(g < prev);
        prev = g;
    }

    // |K11| from the analytic transform equals G(m) at the pulse
    for (const int m : {5, 9, 14}) {
        const PulseParams p = qst_pulse(m);
        const TransferCoefficients k =
            transfer_coefficients(equal_weight_config(2, p.g_prime), p.tau);
        CHECK(std::abs(k.k11) == doctest::Approx(amplitude_error(m)).epsilon(1e-9));
        CHECK(std::norm(k.k11) + std::norm(k.k21) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(k.kc1) < 1e-10);
        CHECK(std::abs(k.k12) < 1e-10);
        CHECK(std::abs(k.k22) < 1e-10);
        CHECK(std::abs(k.kc2) < 1e-10);
        // phases of equation-(8) form: K11 = sin(t_r) e^{i(t_r - pi/2)}
        const double tr = rotation_angle(p);
        CHECK(std::abs(k.k11 - std::sin(tr) * std::exp(Complex(0, tr - kPi / 2))) < 1e-9);
        CHECK(std::abs(k.k21 + std::cos(tr) * std::exp(Complex(0, tr))) < 1e-9);
    }
}

TEST_CASE("excitation conservation at the pulse endpoint: u_b vanishes") {
    for (const int m : {3, 5, 8, 11}) {
        const PulseParams p = qst_pulse(m);
        const BogoliubovTransform tr =
            full_transform(equal_weight_config(2, p.g_prime), p.tau);
        CHECK(tr.u_b.cwiseAbs().maxCoeff() < 1e-10);
    }
    for (const int m : {2, 4, 6}) {
        const PulseParams p = ep_pulse(m);
        const BogoliubovTransform tr =
            full_transform(equal_weight_config(2, p.g_prime), p.tau);
        CHECK(tr.u_b.cwiseAbs().maxCoeff() < 1e-10);
    }

    // m = 2 sits on the marginal coupling 2g' = w where the constraints
    // degenerate: sin(w_minus t)/s_minus tends to g' t, not zero, so the
    // off-diagonal block survives
    const PulseParams p2 = qst_pulse(2);
    const BogoliubovTransform marginal =
        full_transform(equal_weight_config(2, p2.g_prime), p2.tau);
    CHECK(marginal.u_b.cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("speed limit") {
    CHECK_THROWS_AS(speed_limit(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(speed_limit(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(speed_limit(1e-30, 1.0), SpeedLimitUnreachable);

    SUBCASE("exact inverse-function fixed point: floor + 1 rule") {
        const double g7 = amplitude_error(7.0);
        const TradeoffResult r = speed_limit(g7 * g7, 1.0);
        CHECK(r.m_th == doctest::Approx(7.0).epsilon(1e-7));
        CHECK(r.m_chosen == 8);
        CHECK(r.theta_th == doctest::Approx(qst_pulse(8).theta));
        CHECK(r.tau_th == doctest::Approx(qst_pulse(8).tau));
        CHECK(r.predicted_infidelity ==
              doctest::Approx(amplitude_error(8.0) * amplitude_error(8.0)));
    }
    SUBCASE("generic budget") {
        const TradeoffResult r = speed_limit(1e-2, 1.0);
        CHECK(amplitude_error(r.m_th) == doctest::Approx(0.1).epsilon(1e-8));
        CHECK(r.m_chosen == static_cast<int>(std::floor(r.m_th)) + 1);
        // sandwich property
        CHECK(amplitude_error(r.m_chosen) <= 0.1);
        CHECK(amplitude_error(r.m_chosen - 1.0) > 0.1);
    }
    SUBCASE("loose budget returns the smallest admissible index") {
        const double g3 = amplitude_error(3.0);
        const TradeoffResult r = speed_limit(std::min(0.99, 1.1 * g3 * g3), 1.0);
        CHECK(r.m_chosen == 3);
    }
    SUBCASE("heavier states need longer pulses") {
        const TradeoffResult one = speed_limit(1e-2, 1.0);
        const TradeoffResult three = speed_limit(1e-2, 3.0);
        CHECK(three.tau_th >= one.tau_th);
        CHECK(three.m_th > one.m_th);
    }
    SUBCASE("sandwich property over random budgets") {
        for (int i = 1; i <= 30; ++i) {
            const double e_tol = 0.2 / (i * i + 3.0);
            const TradeoffResult r = speed_limit(e_tol, 1.0);
            if (r.m_chosen - 1 >= 3) {
                const double target = std::sqrt(e_tol);
                CHECK(amplitude_error(r.m_chosen) <= target + 1e-12);
                CHECK(amplitude_error(r.m_chosen - 1.0) > target - 1e-12);
            }
        }
    }
}
