// analytic.hpp — exact Heisenberg-picture mode transforms for n boson modes
// coupled to one channel through an XX interaction, counterrotating terms kept.
//
// All quantities are reported in the interaction frame (the explicit e^{i w t}
// factor of the closed-form solution is included). Times are in 1/omega,
// couplings in units of omega.

#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace bosonlink {

using Complex = std::complex<double>;

/// Static description of the star-coupled system: n node modes a_1..a_n with
/// relative pulse weights k_j, one channel mode c, base coupling g.
struct SystemConfig {
    double omega = 1.0;
    double g = 0.0;
    std::vector<double> weights;

    int n_modes() const { return static_cast<int>(weights.size()); }
    double weight_norm_sq() const;
    double weight_norm() const;
    /// Effective united-mode coupling g' = g * sqrt(sum k_j^2).
    double g_prime() const { return g * weight_norm(); }

    /// Throws std::invalid_argument on omega <= 0, no modes, or all-zero weights.
    void validate() const;
};

/// Convenience factory: n equally weighted modes with effective coupling g'.
SystemConfig equal_weight_config(int n_modes, double g_prime, double omega = 1.0);

/// The four characteristic frequencies +-sqrt(w^2 -+ 2 g' w). On the
/// hyperbolic branch (2|g'| > w) the lower pair is purely imaginary,
/// i*sqrt(2 g' w - w^2) by the principal-root convention.
struct EigenFrequencies {
    std::array<Complex, 4> values;  // {+w-, -w-, +w+, -w+}
    bool hyperbolic = false;
};

EigenFrequencies eigen_frequencies(const SystemConfig& cfg);

/// Row of the united mode a(t) = sum_j k_j a_j(t) / sqrt(sum k_j^2) over the
/// initial operators (a(0), a^dag(0), c(0), c^dag(0)), interaction frame.
///
/// g' = 0 returns the free-evolution row (1,0,0,0). Near the singular point
/// zeta = w/g' = 2 the closed form is evaluated by its analytic limit
/// (|zeta-2| < 1e-8) or by a series in (zeta-2) (|zeta-2| < 1e-4), where the
/// direct radicals would lose precision.
Eigen::RowVector4cd united_mode_transform(const SystemConfig& cfg, double t);

/// Bogoliubov block pair: mode vector (a_1..a_n, c) evolves as
///   a_i(t) = sum_j u_a(i,j) a_j(0) + u_b(i,j) a_j^dag(0).
struct BogoliubovTransform {
    Eigen::MatrixXcd u_a;
    Eigen::MatrixXcd u_b;
    double time = 0.0;

    /// max-norm residuals of (u_a u_a^dag - u_b u_b^dag - I) and
    /// (u_a u_b^T - (u_a u_b^T)^T); both vanish for a valid transform.
    std::array<double, 2> symplectic_residual() const;
};

/// Exact (n+1)-mode transform, counterrotating terms included.
BogoliubovTransform full_transform(const SystemConfig& cfg, double t);

/// Number-conserving baseline generated by the RWA Hamiltonian (u_b == 0).
BogoliubovTransform rwa_transform(const SystemConfig& cfg, double t);

/// The six coefficients of a_1(t) for the two-node equal-weight system.
struct TransferCoefficients {
    Complex k11, k21, kc1;  // on a_1(0), a_2(0), c(0)
    Complex k12, k22, kc2;  // on a_1^dag(0), a_2^dag(0), c^dag(0)

    /// |k11|^2+|k21|^2+|kc1|^2-|k12|^2-|k22|^2-|kc2|^2 - 1 (commutator check).
    double commutator_residual() const;
};

/// Requires n_modes == 2 and k_1 == k_2; throws std::invalid_argument otherwise.
TransferCoefficients transfer_coefficients(const SystemConfig& cfg, double t);

/// Composition of two transforms of the same system. Interaction-frame phases
/// are stripped (the generator is time-independent only in the Schrodinger
/// frame), the blocks composed there, and the result rephased at t1+t2.
BogoliubovTransform compose(const SystemConfig& cfg, const BogoliubovTransform& first,
                            const BogoliubovTransform& second);

}  // namespace bosonlink
