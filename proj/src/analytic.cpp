#include "bosonlink/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace bosonlink {

namespace {

constexpr Complex kI{0.0, 1.0};

// Entire-series helpers in x = w_minus^2: cos(w t) and sin(w t)/w as functions
// of x stay finite through x = 0, which is where the radicals cancel.
double cos_series(double x, double t) {
    double term = 1.0, sum = 1.0;
    const double t2 = t * t;
    for (int k = 1; k < 64; ++k) {
        term *= -x * t2 / ((2 * k - 1) * (2 * k));
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

double sinc_series(double x, double t) {
    double term = t, sum = t;
    const double t2 = t * t;
    for (int k = 1; k < 64; ++k) {
        term *= -x * t2 / ((2 * k) * (2 * k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

struct RowParts {
    Complex cos_m, cos_p;  // cos(w_minus t), cos(w_plus t)
    Complex sm, sp;        // sin(w_minus t)/s_minus, sin(w_plus t)/s_plus
};

// The w_minus/s_minus pair is singular at zeta = 2; sin(w t)/s == (w/zeta) *
// sin(w t)/w there, and both factors are entire in w^2.
RowParts row_parts(double omega, double zeta, double t) {
    RowParts p;
    const double delta = zeta - 2.0;
    if (std::abs(delta) < 1e-8) {
        // analytic limit at the singular point g' = w/2
        p.cos_m = 1.0;
        p.sm = omega * t / 2.0;
    } else if (std::abs(delta) < 1e-4) {
        // series in (zeta - 2); x = w_minus^2 carries no cancellation
        const double x = omega * omega * delta / zeta;
        p.cos_m = cos_series(x, t);
        p.sm = (omega / zeta) * sinc_series(x, t);
    } else {
        const Complex wm = std::sqrt(Complex(omega * omega - 2.0 * omega * omega / zeta, 0.0));
        const Complex smr = std::sqrt(Complex(zeta * zeta - 2.0 * zeta, 0.0));
        p.cos_m = std::cos(wm * t);
        p.sm = std::sin(wm * t) / smr;
    }
    const double wp = omega * std::sqrt(1.0 + 2.0 / zeta);
    const double spr = std::sqrt(zeta * zeta + 2.0 * zeta);
    p.cos_p = std::cos(wp * t);
    p.sp = std::sin(wp * t) / spr;
    return p;
}

// Interaction-frame united-mode row over (a, a^dag, c, c^dag).
Eigen::RowVector4cd united_row(double omega, double g_prime, double t) {
    Eigen::RowVector4cd row;
    if (g_prime == 0.0) {
        row << 1.0, 0.0, 0.0, 0.0;
        return row;
    }
    const double zeta = omega / g_prime;
    const RowParts p = row_parts(omega, zeta, t);
    const Complex phase = std::exp(kI * omega * t);
    row(0) = 0.5 * (p.cos_m + p.cos_p - kI * (zeta - 1.0) * p.sm - kI * (zeta + 1.0) * p.sp);
    row(1) = 0.5 * kI * (p.sm - p.sp);
    row(2) = 0.5 * (p.cos_p - p.cos_m + kI * (zeta - 1.0) * p.sm - kI * (zeta + 1.0) * p.sp);
    row(3) = -0.5 * kI * (p.sm + p.sp);
    return phase * row;
}

}  // namespace

double SystemConfig::weight_norm_sq() const {
    double s = 0.0;
    for (double k : weights) s += k * k;
    return s;
}

double SystemConfig::weight_norm() const { return std::sqrt(weight_norm_sq()); }

void SystemConfig::validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("SystemConfig: omega must be positive");
    if (weights.empty()) throw std::invalid_argument("SystemConfig: need at least one node mode");
    if (weight_norm_sq() == 0.0)
        throw std::invalid_argument("SystemConfig: at least one coupling weight must be nonzero");
    if (!std::isfinite(g) || !std::isfinite(g_prime()))
        throw std::invalid_argument("SystemConfig: coupling must be finite");
}

SystemConfig equal_weight_config(int n_modes, double g_prime, double omega) {
    if (n_modes < 1) throw std::invalid_argument("equal_weight_config: n_modes must be >= 1");
    SystemConfig cfg;
    cfg.omega = omega;
    cfg.weights.assign(static_cast<std::size_t>(n_modes), 1.0);
    cfg.g = g_prime / std::sqrt(static_cast<double>(n_modes));
    return cfg;
}

EigenFrequencies eigen_frequencies(const SystemConfig& cfg) {
    cfg.validate();
    const double w = cfg.omega, gp = cfg.g_prime();
    EigenFrequencies out;
    const Complex wm = std::sqrt(Complex(w * w - 2.0 * std::abs(gp) * w, 0.0));
    const Complex wp = std::sqrt(Complex(w * w + 2.0 * std::abs(gp) * w, 0.0));
    out.values = {wm, -wm, wp, -wp};
    out.hyperbolic = 2.0 * std::abs(gp) > w;
    return out;
}

Eigen::RowVector4cd united_mode_transform(const SystemConfig& cfg, double t) {
    cfg.validate();
    if (t < 0.0) throw std::invalid_argument("united_mode_transform: t must be >= 0");
    return united_row(cfg.omega, cfg.g_prime(), t);
}

BogoliubovTransform full_transform(const SystemConfig& cfg, double t) {
    cfg.validate();
    if (t < 0.0) throw std::invalid_argument("full_transform: t must be >= 0");
    const int n = cfg.n_modes();
    const double ksq = cfg.weight_norm_sq(), knorm = cfg.weight_norm();
    const Eigen::RowVector4cd r = united_row(cfg.omega, cfg.g_prime(), t);

    BogoliubovTransform out;
    out.time = t;
    out.u_a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    out.u_b = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        const double ki = cfg.weights[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double kk = ki * cfg.weights[static_cast<std::size_t>(j)] / ksq;
            out.u_a(i, j) = (i == j ? 1.0 : 0.0) + kk * (r(0) - 1.0);
            out.u_b(i, j) = kk * r(1);
        }
        out.u_a(i, n) = ki / knorm * r(2);
        out.u_b(i, n) = ki / knorm * r(3);
        out.u_a(n, i) = ki / knorm * r(2);
        out.u_b(n, i) = ki / knorm * r(3);
    }
    out.u_a(n, n) = r(0);
    out.u_b(n, n) = r(1);
    return out;
}

BogoliubovTransform rwa_transform(const SystemConfig& cfg, double t) {
    cfg.validate();
    if (t < 0.0) throw std::invalid_argument("rwa_transform: t must be >= 0");
    const int n = cfg.n_modes();
    const double ksq = cfg.weight_norm_sq(), knorm = cfg.weight_norm();
    const double gp = cfg.g_prime();
    const Complex c = std::cos(gp * t);
    const Complex s = -kI * std::sin(gp * t);

    BogoliubovTransform out;
    out.time = t;
    out.u_a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    out.u_b = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        const double ki = cfg.weights[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double kk = ki * cfg.weights[static_cast<std::size_t>(j)] / ksq;
            out.u_a(i, j) = (i == j ? 1.0 : 0.0) + kk * (c - 1.0);
        }
        out.u_a(i, n) = ki / knorm * s;
        out.u_a(n, i) = ki / knorm * s;
    }
    out.u_a(n, n) = c;
    return out;
}

std::array<double, 2> BogoliubovTransform::symplectic_residual() const {
    const Eigen::MatrixXcd comm =
        u_a * u_a.adjoint() - u_b * u_b.adjoint() -
        Eigen::MatrixXcd::Identity(u_a.rows(), u_a.cols());
    const Eigen::MatrixXcd sym = u_a * u_b.transpose();
    return {comm.cwiseAbs().maxCoeff(), (sym - sym.transpose()).cwiseAbs().maxCoeff()};
}

double TransferCoefficients::commutator_residual() const {
    return std::norm(k11) + std::norm(k21) + std::norm(kc1) - std::norm(k12) -
           std::norm(k22) - std::norm(kc2) - 1.0;
}

TransferCoefficients transfer_coefficients(const SystemConfig& cfg, double t) {
    cfg.validate();
    if (cfg.n_modes() != 2)
        throw std::invalid_argument("transfer_coefficients: defined for n_modes == 2");
    if (cfg.weights[0] != cfg.weights[1])
        throw std::invalid_argument("transfer_coefficients: requires equal weights k1 == k2");
    const BogoliubovTransform tr = full_transform(cfg, t);
    TransferCoefficients k;
    k.k11 = tr.u_a(0, 0);
    k.k21 = tr.u_a(0, 1);
    k.kc1 = tr.u_a(0, 2);
    k.k12 = tr.u_b(0, 0);
    k.k22 = tr.u_b(0, 1);
    k.kc2 = tr.u_b(0, 2);
    return k;
}

BogoliubovTransform compose(const SystemConfig& cfg, const BogoliubovTransform& first,
                            const BogoliubovTransform& second) {
    if (first.u_a.rows() != second.u_a.rows())
        throw std::invalid_argument("compose: transforms have different mode counts");
    const double w = cfg.omega;
    const Complex p1 = std::exp(-kI * w * first.time);
    const Complex p2 = std::exp(-kI * w * second.time);
    // Schrodinger-frame blocks; there the generator is time-independent and
    // the block map composes by matrix product.
    const Eigen::MatrixXcd a1 = p1 * first.u_a, b1 = p1 * first.u_b;
    const Eigen::MatrixXcd a2 = p2 * second.u_a, b2 = p2 * second.u_b;

    BogoliubovTransform out;
    out.time = first.time + second.time;
    const Complex back = std::exp(kI * w * out.time);
    out.u_a = back * (a2 * a1 + b2 * b1.conjugate());
    out.u_b = back * (a2 * b1 + b2 * a1.conjugate());
    return out;
}

}  // namespace bosonlink
