// fock.hpp — truncated Fock-space oracle: states, the time-dependent
// interaction-frame Hamiltonian with counterrotating terms, RK4 evolution,
// reductions and entanglement/phase-space measures.
//
// Mode order everywhere: (a_1, ..., a_n, c) with the channel last.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "bosonlink/analytic.hpp"

namespace bosonlink {

struct FockBasis {
    static constexpr std::int64_t kDefaultBudget = std::int64_t(1) << 24;

    std::vector<int> dims;              // per-mode truncation, levels 0..d-1
    std::vector<std::int64_t> strides;  // last mode fastest
    std::int64_t dim = 0;

    FockBasis() = default;
    explicit FockBasis(std::vector<int> dims, std::int64_t budget = kDefaultBudget);

    int n_modes() const { return static_cast<int>(dims.size()); }
    int level(std::int64_t index, int mode) const {
        return static_cast<int>((index / strides[static_cast<std::size_t>(mode)]) %
                                dims[static_cast<std::size_t>(mode)]);
    }
    std::int64_t index(const std::vector<int>& occupations) const;
    bool operator==(const FockBasis& other) const { return dims == other.dims; }
};

/// Truncation policy: max(8, ceil(n_peak + 6 sqrt(n_peak + 1))) levels for a
/// mode whose largest expected occupancy is n_peak.
int suggested_dim(double n_peak);

struct Branch {
    double weight = 1.0;
    Eigen::VectorXcd psi;
};

/// Pure state or classical mixture of pure states over a truncated basis.
struct State {
    FockBasis basis;
    std::vector<Branch> branches;

    bool is_pure() const { return branches.size() == 1; }
    const Eigen::VectorXcd& pure() const;
    /// max over branches of | ||psi||_2 - 1 | combined with |sum weights - 1|.
    double norm_error() const;
    /// Probability mass sitting in the top Fock level of a mode.
    double top_level_mass(int mode) const;
};

// ---- state constructors -----------------------------------------------------

Eigen::VectorXcd fock_vec(int dim, int n);
/// Truncated coherent state; requires |alpha|^2 + 6|alpha| <= dim.
Eigen::VectorXcd coherent_vec(int dim, Complex alpha);
/// Even (parity=+1) or odd (parity=-1) cat state ~ |alpha> + parity*|-alpha>.
Eigen::VectorXcd cat_vec(int dim, Complex alpha, int parity = +1);

State product_state(const FockBasis& basis, const std::vector<Eigen::VectorXcd>& modes);
State fock_state(const FockBasis& basis, const std::vector<int>& occupations);

/// Boltzmann weights e^{-omega n / T}/Z over levels 0..max_level, cut where the
/// remaining tail drops below tail_cut and renormalized. T = 0 gives {1}.
/// Throws if the tail beyond max_level exceeds tail_cut.
std::vector<double> thermal_weights(double temperature, double omega, double tail_cut,
                                    int max_level);

/// Nodes in given pure states, channel in a thermal mixture: one branch per
/// retained channel Fock level.
State thermal_channel(const FockBasis& basis, const std::vector<Eigen::VectorXcd>& node_states,
                      double temperature, double omega = 1.0, double tail_cut = 1e-8);

double thermal_mean_occupation(double temperature, double omega = 1.0);

// ---- Hamiltonian and evolution ----------------------------------------------

class NonConvergenceError : public std::runtime_error {
  public:
    NonConvergenceError(int mode, double tail_mass, const std::string& message)
        : std::runtime_error(message), mode(mode), tail_mass(tail_mass) {}
    int mode;
    double tail_mass;
};

/// Interaction-frame H(t) = sum_j g k_j (a_j c^dag + c a_j^dag
///   + a_j c e^{-2 i w t} + a_j^dag c^dag e^{+2 i w t}), assembled once as
/// static sparse parts; Kind::rwa drops the counterrotating pair terms.
class Hamiltonian {
  public:
    enum class Kind { full, rwa };

    Hamiltonian(const SystemConfig& cfg, const FockBasis& basis, Kind kind = Kind::full);

    const FockBasis& basis() const { return basis_; }
    double omega() const { return omega_; }
    Kind kind() const { return kind_; }
    /// Fastest frequency in the dynamics, used for the step-size guard.
    double max_frequency() const { return max_frequency_; }

    /// out = H(t) x (interaction frame).
    void apply(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& out) const;
    /// Dense-of-the-moment sparse matrix, Hermitian at every t.
    Eigen::SparseMatrix<Complex> matrix(double t) const;
    /// Time-independent Schrodinger-frame generator w*N + XX coupling.
    Eigen::SparseMatrix<Complex> schrodinger_matrix() const;

  private:
    FockBasis basis_;
    double omega_;
    Kind kind_;
    double max_frequency_;
    Eigen::SparseMatrix<Complex> hop_;       // number-conserving part
    Eigen::SparseMatrix<Complex> pair_;      // sum_j g k_j a_j c
    Eigen::SparseMatrix<Complex> pair_dag_;
    Eigen::VectorXd total_number_;           // diagonal of N_tot
};

Eigen::SparseMatrix<Complex> build_hamiltonian(const SystemConfig& cfg, const FockBasis& basis,
                                               double t,
                                               Hamiltonian::Kind kind = Hamiltonian::Kind::full);

struct EvolveOptions {
    enum class Integrator { rk4, adaptive };
    enum class Frame { interaction, schrodinger };

    Integrator integrator = Integrator::rk4;
    Frame frame = Frame::interaction;
    double dt = 0.0;             // step; 0 selects (2 pi / omega)/200
    double adaptive_tol = 1e-10; // local error target per step (adaptive mode)
    double tail_epsilon = 1e-5;  // truncation sentinel after evolution; <= 0 disables

    double effective_dt(double omega) const;
};

/// Unitary evolution for duration tau; mixtures evolve branch-wise.
/// Throws NonConvergenceError if the truncation sentinel trips and
/// std::invalid_argument on a step-size violation (dt > 2 pi/(50 w_max)).
State evolve(const State& state, const Hamiltonian& h, double tau,
             const EvolveOptions& opts = {});
State evolve(const State& state, const SystemConfig& cfg, double tau,
             const EvolveOptions& opts = {}, Hamiltonian::Kind kind = Hamiltonian::Kind::full);

/// Evolve once, invoking observer(t, state) at each requested time
/// (ascending, all <= tau); the final state is returned.
State evolve_sampled(const State& state, const Hamiltonian& h,
                     const std::vector<double>& sample_times, const EvolveOptions& opts,
                     const std::function<void(double, const State&)>& observer);

// ---- reductions and measures ------------------------------------------------

struct DensityMatrix {
    FockBasis basis;  // basis of the kept modes
    Eigen::MatrixXcd rho;

    double trace_error() const;
};

DensityMatrix density_matrix(const State& state);
/// Reduced density matrix over the kept modes (indices into the state basis,
/// ascending). Throws std::invalid_argument on empty/improper subsets and if
/// the reduced dense matrix would overflow the budget.
DensityMatrix partial_trace(const State& state, const std::vector<int>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

/// <psi|rho|psi> for a pure reference; the paper's tr(rho_f rho_i) form.
double fidelity(const Eigen::VectorXcd& psi, const DensityMatrix& rho);
/// First argument must be pure (throws otherwise); second may be a mixture.
double fidelity(const State& pure_reference, const State& other);

double total_excitations(const State& state);

/// log2 of the trace norm of the partial transpose (second mode transposed);
/// requires a two-mode density matrix. Clamped at 0.
double log_negativity(const DensityMatrix& two_mode);

/// (1/2) || rho - sigma ||_1.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

State apply_local_rotation(const State& state, int mode, double angle);
DensityMatrix apply_local_rotation(const DensityMatrix& rho, int mode, double angle);

// ---- Wigner function ---------------------------------------------------------

/// Convention: a = (x + i p)/sqrt(2), [x, p] = i, integral of W over dx dp = 1;
/// vacuum peaks at W(0,0) = 1/pi.
struct PhaseSpaceGrid {
    double x_min = -5.0, x_max = 5.0;
    int nx = 101;
    double p_min = -5.0, p_max = 5.0;
    int np = 101;
};

struct WignerResult {
    PhaseSpaceGrid grid;
    Eigen::MatrixXd values;  // nx rows, np cols
    double integral = 0.0;   // Riemann sum over the grid
    bool grid_adequate = true;
};

WignerResult wigner(const DensityMatrix& single_mode, const PhaseSpaceGrid& grid);

}  // namespace bosonlink
