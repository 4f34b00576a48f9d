#include "bosonlink/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bosonlink {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

Eigen::SparseMatrix<Complex> lowering_op(const FockBasis& basis, int mode) {
    // a|n> = sqrt(n)|n-1>: one entry per basis state with level > 0
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(basis.dim));
    const std::int64_t stride = basis.strides[static_cast<std::size_t>(mode)];
    for (std::int64_t i = 0; i < basis.dim; ++i) {
        const int n = basis.level(i, mode);
        if (n > 0) trips.emplace_back(i - stride, i, std::sqrt(static_cast<double>(n)));
    }
    Eigen::SparseMatrix<Complex> a(basis.dim, basis.dim);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

}  // namespace

FockBasis::FockBasis(std::vector<int> d, std::int64_t budget) : dims(std::move(d)) {
    if (dims.empty()) throw std::invalid_argument("FockBasis: need at least one mode");
    strides.assign(dims.size(), 1);
    dim = 1;
    for (int m = static_cast<int>(dims.size()) - 1; m >= 0; --m) {
        if (dims[static_cast<std::size_t>(m)] < 2)
            throw std::invalid_argument("FockBasis: every mode needs at least 2 levels");
        strides[static_cast<std::size_t>(m)] = dim;
        dim *= dims[static_cast<std::size_t>(m)];
        if (dim > budget) throw std::invalid_argument("FockBasis: dimension exceeds budget");
    }
}

std::int64_t FockBasis::index(const std::vector<int>& occupations) const {
    if (occupations.size() != dims.size())
        throw std::invalid_argument("FockBasis::index: occupation count mismatch");
    std::int64_t idx = 0;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        if (occupations[m] < 0 || occupations[m] >= dims[m])
            throw std::invalid_argument("FockBasis::index: occupation outside truncation");
        idx += occupations[m] * strides[m];
    }
    return idx;
}

int suggested_dim(double n_peak) {
    if (n_peak < 0.0) n_peak = 0.0;
    const int d = static_cast<int>(std::ceil(n_peak + 6.0 * std::sqrt(n_peak + 1.0)));
    return std::max(8, d);
}

const Eigen::VectorXcd& State::pure() const {
    if (!is_pure()) throw std::invalid_argument("State::pure: state is a mixture");
    return branches.front().psi;
}

double State::norm_error() const {
    double err = 0.0, wsum = 0.0;
    for (const Branch& b : branches) {
        err = std::max(err, std::abs(b.psi.norm() - 1.0));
        wsum += b.weight;
    }
    return std::max(err, std::abs(wsum - 1.0));
}

double State::top_level_mass(int mode) const {
    const int top = basis.dims[static_cast<std::size_t>(mode)] - 1;
    double mass = 0.0;
    for (const Branch& b : branches) {
        double m = 0.0;
        for (std::int64_t i = 0; i < basis.dim; ++i)
            if (basis.level(i, mode) == top) m += std::norm(b.psi(i));
        mass += b.weight * m;
    }
    return mass;
}

Eigen::VectorXcd fock_vec(int dim, int n) {
    if (n < 0 || n >= dim) throw std::invalid_argument("fock_vec: level outside truncation");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(n) = 1.0;
    return v;
}

Eigen::VectorXcd coherent_vec(int dim, Complex alpha) {
    const double a = std::abs(alpha);
    if (a * a + 6.0 * a > static_cast<double>(dim))
        throw std::invalid_argument("coherent_vec: truncation too small for |alpha|");
    Eigen::VectorXcd v(dim);
    Complex amp = std::exp(-0.5 * a * a);
    for (int n = 0; n < dim; ++n) {
        v(n) = amp;
        amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    v.normalize();
    return v;
}

Eigen::VectorXcd cat_vec(int dim, Complex alpha, int parity) {
    if (parity != 1 && parity != -1) throw std::invalid_argument("cat_vec: parity must be +-1");
    Eigen::VectorXcd v =
        coherent_vec(dim, alpha) + static_cast<double>(parity) * coherent_vec(dim, -alpha);
    const double n = v.norm();
    if (n < 1e-12) throw std::invalid_argument("cat_vec: degenerate superposition");
    return v / n;
}

State product_state(const FockBasis& basis, const std::vector<Eigen::VectorXcd>& modes) {
    if (static_cast<int>(modes.size()) != basis.n_modes())
        throw std::invalid_argument("product_state: mode count mismatch");
    for (int m = 0; m < basis.n_modes(); ++m)
        if (modes[static_cast<std::size_t>(m)].size() != basis.dims[static_cast<std::size_t>(m)])
            throw std::invalid_argument("product_state: mode vector does not match truncation");
    Eigen::VectorXcd psi(basis.dim);
    for (std::int64_t i = 0; i < basis.dim; ++i) {
        Complex amp = 1.0;
        for (int m = 0; m < basis.n_modes(); ++m)
            amp *= modes[static_cast<std::size_t>(m)](basis.level(i, m));
        psi(i) = amp;
    }
    return State{basis, {Branch{1.0, std::move(psi)}}};
}

State fock_state(const FockBasis& basis, const std::vector<int>& occupations) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim);
    psi(basis.index(occupations)) = 1.0;
    return State{basis, {Branch{1.0, std::move(psi)}}};
}

std::vector<double> thermal_weights(double temperature, double omega, double tail_cut,
                                    int max_level) {
    if (temperature < 0.0) throw std::invalid_argument("thermal_weights: T must be >= 0");
    if (temperature == 0.0) return {1.0};
    const double q = std::exp(-omega / temperature);
    // geometric tail beyond level N is q^(N+1)
    if (std::pow(q, max_level + 1) > tail_cut)
        throw std::invalid_argument("thermal_weights: truncation too small for requested T");
    std::vector<double> w;
    double p = 1.0 - q, kept = 0.0;
    for (int n = 0; n <= max_level; ++n) {
        w.push_back(p);
        kept += p;
        p *= q;
        if (1.0 - kept < tail_cut) break;
    }
    for (double& x : w) x /= kept;
    return w;
}

State thermal_channel(const FockBasis& basis, const std::vector<Eigen::VectorXcd>& node_states,
                      double temperature, double omega, double tail_cut) {
    const int n = basis.n_modes() - 1;
    if (static_cast<int>(node_states.size()) != n)
        throw std::invalid_argument("thermal_channel: expected one state per node mode");
    const int d_c = basis.dims.back();
    const std::vector<double> w = thermal_weights(temperature, omega, tail_cut, d_c - 1);

    State out;
    out.basis = basis;
    std::vector<Eigen::VectorXcd> modes = node_states;
    modes.emplace_back();
    for (std::size_t nc = 0; nc < w.size(); ++nc) {
        modes.back() = fock_vec(d_c, static_cast<int>(nc));
        State branch = product_state(basis, modes);
        out.branches.push_back(Branch{w[nc], std::move(branch.branches.front().psi)});
    }
    return out;
}

double thermal_mean_occupation(double temperature, double omega) {
    if (temperature <= 0.0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

// ---- Hamiltonian --------------------------------------------------------------

Hamiltonian::Hamiltonian(const SystemConfig& cfg, const FockBasis& basis, Kind kind)
    : basis_(basis), omega_(cfg.omega), kind_(kind) {
    cfg.validate();
    if (basis.n_modes() != cfg.n_modes() + 1)
        throw std::invalid_argument("Hamiltonian: basis must have n_modes + 1 modes");

    const int ch = basis.n_modes() - 1;
    const Eigen::SparseMatrix<Complex> c = lowering_op(basis, ch);
    const Eigen::SparseMatrix<Complex> c_dag = c.adjoint();
    Eigen::SparseMatrix<Complex> hop(basis.dim, basis.dim), pair(basis.dim, basis.dim);
    for (int j = 0; j < cfg.n_modes(); ++j) {
        const double gk = cfg.g * cfg.weights[static_cast<std::size_t>(j)];
        if (gk == 0.0) continue;
        const Eigen::SparseMatrix<Complex> aj = lowering_op(basis, j);
        const Eigen::SparseMatrix<Complex> cross = aj * c_dag;
        hop = hop + gk * cross + gk * Eigen::SparseMatrix<Complex>(cross.adjoint());
        pair = pair + gk * Eigen::SparseMatrix<Complex>(aj * c);
    }
    hop_ = hop;
    if (kind_ == Kind::full) {
        pair_ = pair;
        pair_dag_ = pair.adjoint();
    }
    hop_.makeCompressed();
    pair_.makeCompressed();
    pair_dag_.makeCompressed();

    total_number_ = Eigen::VectorXd::Zero(basis.dim);
    for (std::int64_t i = 0; i < basis.dim; ++i) {
        int n = 0;
        for (int m = 0; m < basis.n_modes(); ++m) n += basis.level(i, m);
        total_number_(i) = n;
    }

    const double wp = omega_ * std::sqrt(1.0 + 2.0 * std::abs(cfg.g_prime()) / omega_);
    max_frequency_ = std::max(2.0 * omega_, wp);
}

void Hamiltonian::apply(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& out) const {
    out.noalias() = hop_ * x;
    if (kind_ == Kind::full) {
        const Complex ph = std::exp(-2.0 * kI * omega_ * t);
        out.noalias() += ph * (pair_ * x);
        out.noalias() += std::conj(ph) * (pair_dag_ * x);
    }
}

Eigen::SparseMatrix<Complex> Hamiltonian::matrix(double t) const {
    Eigen::SparseMatrix<Complex> h = hop_;
    if (kind_ == Kind::full) {
        const Complex ph = std::exp(-2.0 * kI * omega_ * t);
        h = h + Eigen::SparseMatrix<Complex>(ph * pair_) +
            Eigen::SparseMatrix<Complex>(std::conj(ph) * pair_dag_);
    }
    return h;
}

Eigen::SparseMatrix<Complex> Hamiltonian::schrodinger_matrix() const {
    Eigen::SparseMatrix<Complex> h = hop_;
    if (kind_ == Kind::full) h = h + pair_ + pair_dag_;
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(basis_.dim));
    for (std::int64_t i = 0; i < basis_.dim; ++i)
        trips.emplace_back(i, i, omega_ * total_number_(i));
    Eigen::SparseMatrix<Complex> num(basis_.dim, basis_.dim);
    num.setFromTriplets(trips.begin(), trips.end());
    return h + num;
}

Eigen::SparseMatrix<Complex> build_hamiltonian(const SystemConfig& cfg, const FockBasis& basis,
                                               double t, Hamiltonian::Kind kind) {
    return Hamiltonian(cfg, basis, kind).matrix(t);
}

// ---- evolution -----------------------------------------------------------------

double EvolveOptions::effective_dt(double omega) const {
    return dt > 0.0 ? dt : (2.0 * kPi / omega) / 200.0;
}

namespace {

// Right-hand side d psi/dt = -i H psi in the requested frame.
struct Rhs {
    const Hamiltonian& h;
    EvolveOptions::Frame frame;
    Eigen::SparseMatrix<Complex> h_schrodinger;  // assembled once if needed

    explicit Rhs(const Hamiltonian& ham, EvolveOptions::Frame f) : h(ham), frame(f) {
        if (frame == EvolveOptions::Frame::schrodinger) h_schrodinger = h.schrodinger_matrix();
    }

    void operator()(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& out) const {
        if (frame == EvolveOptions::Frame::interaction)
            h.apply(t, x, out);
        else
            out.noalias() = h_schrodinger * x;
        out *= -kI;
    }
};

struct Rk4Work {
    Eigen::VectorXcd k1, k2, k3, k4, tmp;
    explicit Rk4Work(std::int64_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step(const Rhs& rhs, double t, double dt, Eigen::VectorXcd& psi, Rk4Work& w) {
    rhs(t, psi, w.k1);
    w.tmp = psi + 0.5 * dt * w.k1;
    rhs(t + 0.5 * dt, w.tmp, w.k2);
    w.tmp = psi + 0.5 * dt * w.k2;
    rhs(t + 0.5 * dt, w.tmp, w.k3);
    w.tmp = psi + dt * w.k3;
    rhs(t + dt, w.tmp, w.k4);
    psi += (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

void integrate_fixed(const Rhs& rhs, double t0, double t1, double dt_target,
                     Eigen::VectorXcd& psi, Rk4Work& w) {
    const double span = t1 - t0;
    if (span <= 0.0) return;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_target - 1e-12)));
    const double dt = span / steps;
    for (int s = 0; s < steps; ++s) rk4_step(rhs, t0 + s * dt, dt, psi, w);
}

void integrate_adaptive(const Rhs& rhs, double t0, double t1, double dt0, double tol,
                        Eigen::VectorXcd& psi, Rk4Work& w) {
    double t = t0, dt = std::min(dt0, t1 - t0);
    Eigen::VectorXcd full(psi.size()), half(psi.size());
    while (t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
        dt = std::min(dt, t1 - t);
        full = psi;
        rk4_step(rhs, t, dt, full, w);
        half = psi;
        rk4_step(rhs, t, 0.5 * dt, half, w);
        rk4_step(rhs, t + 0.5 * dt, 0.5 * dt, half, w);
        const double err = (full - half).norm() / 15.0;
        if (err <= tol || dt <= 1e-12) {
            // accept with local extrapolation (5th order)
            psi = half + (half - full) / 15.0;
            t += dt;
            const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
            dt *= std::clamp(grow, 0.2, 2.0);
        } else {
            dt *= std::max(0.2, 0.9 * std::pow(tol / err, 0.25));
        }
    }
}

void check_step_size(const Hamiltonian& h, const EvolveOptions& opts) {
    if (opts.integrator != EvolveOptions::Integrator::rk4) return;
    const double dt = opts.effective_dt(h.omega());
    const double bound = 2.0 * kPi / (50.0 * h.max_frequency());
    if (dt > bound + 1e-15)
        throw std::invalid_argument(
            "evolve: step-size violation, dt must be <= 2*pi/(50*omega_max)");
}

void check_tail(const State& s, double epsilon) {
    if (epsilon <= 0.0) return;
    for (int m = 0; m < s.basis.n_modes(); ++m) {
        const double mass = s.top_level_mass(m);
        if (mass > epsilon)
            throw NonConvergenceError(
                m, mass,
                "evolve: truncation tail " + std::to_string(mass) + " in mode " +
                    std::to_string(m) + " exceeds sentinel " + std::to_string(epsilon));
    }
}

}  // namespace

State evolve_sampled(const State& state, const Hamiltonian& h,
                     const std::vector<double>& sample_times, const EvolveOptions& opts,
                     const std::function<void(double, const State&)>& observer) {
    check_step_size(h, opts);
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (sample_times[i] < sample_times[i - 1])
            throw std::invalid_argument("evolve_sampled: sample times must ascend");
    if (!sample_times.empty() && sample_times.front() < 0.0)
        throw std::invalid_argument("evolve_sampled: sample times must be >= 0");

    const Rhs rhs(h, opts.frame);
    const double dt = opts.effective_dt(h.omega());
    State current = state;
    Rk4Work work(state.basis.dim);

    double t = 0.0;
    for (double ts : sample_times) {
        for (Branch& b : current.branches) {
            if (opts.integrator == EvolveOptions::Integrator::rk4)
                integrate_fixed(rhs, t, ts, dt, b.psi, work);
            else
                integrate_adaptive(rhs, t, ts, dt, opts.adaptive_tol, b.psi, work);
        }
        t = ts;
        if (observer) observer(t, current);
    }
    check_tail(current, opts.tail_epsilon);
    return current;
}

State evolve(const State& state, const Hamiltonian& h, double tau, const EvolveOptions& opts) {
    if (tau < 0.0) throw std::invalid_argument("evolve: tau must be >= 0");
    if (tau == 0.0) return state;
    return evolve_sampled(state, h, {tau}, opts, nullptr);
}

State evolve(const State& state, const SystemConfig& cfg, double tau, const EvolveOptions& opts,
             Hamiltonian::Kind kind) {
    return evolve(state, Hamiltonian(cfg, state.basis, kind), tau, opts);
}

// ---- reductions and measures ----------------------------------------------------

double DensityMatrix::trace_error() const { return std::abs(rho.trace().real() - 1.0); }

DensityMatrix density_matrix(const State& state) {
    DensityMatrix out;
    out.basis = state.basis;
    out.rho = Eigen::MatrixXcd::Zero(state.basis.dim, state.basis.dim);
    for (const Branch& b : state.branches) out.rho += b.weight * (b.psi * b.psi.adjoint());
    return out;
}

namespace {

// Flat-index split into (kept, traced) coordinates for a mode subset.
struct TraceMaps {
    FockBasis kept_basis;
    std::vector<std::int64_t> kept_index, traced_index;
    std::int64_t traced_dim = 1;
};

TraceMaps trace_maps(const FockBasis& basis, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    for (std::size_t i = 1; i < keep.size(); ++i)
        if (keep[i] <= keep[i - 1])
            throw std::invalid_argument("partial_trace: keep indices must ascend");
    if (keep.front() < 0 || keep.back() >= basis.n_modes())
        throw std::invalid_argument("partial_trace: keep index out of range");

    std::vector<bool> kept(static_cast<std::size_t>(basis.n_modes()), false);
    std::vector<int> kdims;
    for (int m : keep) {
        kept[static_cast<std::size_t>(m)] = true;
        kdims.push_back(basis.dims[static_cast<std::size_t>(m)]);
    }

    TraceMaps maps;
    maps.kept_basis = FockBasis(kdims);
    for (int m = 0; m < basis.n_modes(); ++m)
        if (!kept[static_cast<std::size_t>(m)])
            maps.traced_dim *= basis.dims[static_cast<std::size_t>(m)];

    maps.kept_index.resize(static_cast<std::size_t>(basis.dim));
    maps.traced_index.resize(static_cast<std::size_t>(basis.dim));
    for (std::int64_t i = 0; i < basis.dim; ++i) {
        std::int64_t ki = 0, ti = 0;
        int kslot = 0;
        for (int m = 0; m < basis.n_modes(); ++m) {
            const int lev = basis.level(i, m);
            if (kept[static_cast<std::size_t>(m)])
                ki += lev * maps.kept_basis.strides[static_cast<std::size_t>(kslot++)];
            else
                ti = ti * basis.dims[static_cast<std::size_t>(m)] + lev;
        }
        maps.kept_index[static_cast<std::size_t>(i)] = ki;
        maps.traced_index[static_cast<std::size_t>(i)] = ti;
    }
    return maps;
}

}  // namespace

DensityMatrix partial_trace(const State& state, const std::vector<int>& keep) {
    if (static_cast<int>(keep.size()) >= state.basis.n_modes())
        throw std::invalid_argument("partial_trace: keep must be a proper subset");
    const TraceMaps maps = trace_maps(state.basis, keep);
    const std::int64_t kd = maps.kept_basis.dim;
    if (kd * kd > FockBasis::kDefaultBudget)
        throw std::invalid_argument("partial_trace: reduced density matrix exceeds budget");

    DensityMatrix out;
    out.basis = maps.kept_basis;
    out.rho = Eigen::MatrixXcd::Zero(kd, kd);
    Eigen::MatrixXcd slice(kd, maps.traced_dim);
    for (const Branch& b : state.branches) {
        slice.setZero();
        for (std::int64_t i = 0; i < state.basis.dim; ++i)
            slice(maps.kept_index[static_cast<std::size_t>(i)],
                  maps.traced_index[static_cast<std::size_t>(i)]) = b.psi(i);
        out.rho.noalias() += b.weight * (slice * slice.adjoint());
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    if (static_cast<int>(keep.size()) >= rho.basis.n_modes())
        throw std::invalid_argument("partial_trace: keep must be a proper subset");
    const TraceMaps maps = trace_maps(rho.basis, keep);
    DensityMatrix out;
    out.basis = maps.kept_basis;
    out.rho = Eigen::MatrixXcd::Zero(maps.kept_basis.dim, maps.kept_basis.dim);
    for (std::int64_t i = 0; i < rho.basis.dim; ++i)
        for (std::int64_t j = 0; j < rho.basis.dim; ++j)
            if (maps.traced_index[static_cast<std::size_t>(i)] ==
                maps.traced_index[static_cast<std::size_t>(j)])
                out.rho(maps.kept_index[static_cast<std::size_t>(i)],
                        maps.kept_index[static_cast<std::size_t>(j)]) += rho.rho(i, j);
    return out;
}

double fidelity(const Eigen::VectorXcd& psi, const DensityMatrix& rho) {
    if (psi.size() != rho.rho.rows())
        throw std::invalid_argument("fidelity: dimension mismatch");
    return std::real(Complex(psi.adjoint() * rho.rho * psi));
}

double fidelity(const State& pure_reference, const State& other) {
    if (!pure_reference.is_pure())
        throw std::invalid_argument("fidelity: tr(rho_f rho_i) requires a pure reference");
    if (!(pure_reference.basis == other.basis))
        throw std::invalid_argument("fidelity: basis mismatch");
    const Eigen::VectorXcd& psi = pure_reference.pure();
    double f = 0.0;
    for (const Branch& b : other.branches) f += b.weight * std::norm(Complex(psi.dot(b.psi)));
    return f;
}

double total_excitations(const State& state) {
    double total = 0.0;
    for (const Branch& b : state.branches) {
        double n = 0.0;
        for (std::int64_t i = 0; i < state.basis.dim; ++i) {
            int occ = 0;
            for (int m = 0; m < state.basis.n_modes(); ++m) occ += state.basis.level(i, m);
            n += occ * std::norm(b.psi(i));
        }
        total += b.weight * n;
    }
    return total;
}

double log_negativity(const DensityMatrix& two_mode) {
    if (two_mode.basis.n_modes() != 2)
        throw std::invalid_argument("log_negativity: expects a two-mode density matrix");
    const int d0 = two_mode.basis.dims[0], d1 = two_mode.basis.dims[1];
    Eigen::MatrixXcd pt(two_mode.rho.rows(), two_mode.rho.cols());
    for (int i = 0; i < d0; ++i)
        for (int j = 0; j < d1; ++j)
            for (int k = 0; k < d0; ++k)
                for (int l = 0; l < d1; ++l)
                    pt(i * d1 + l, k * d1 + j) = two_mode.rho(i * d1 + j, k * d1 + l);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (pt + pt.adjoint()));
    const double trace_norm = eig.eigenvalues().cwiseAbs().sum();
    return std::max(0.0, std::log2(trace_norm));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.rho.rows() != b.rho.rows())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    const Eigen::MatrixXcd d = a.rho - b.rho;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (d + d.adjoint()));
    return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

State apply_local_rotation(const State& state, int mode, double angle) {
    if (mode < 0 || mode >= state.basis.n_modes())
        throw std::invalid_argument("apply_local_rotation: mode out of range");
    if (!std::isfinite(angle))
        throw std::invalid_argument("apply_local_rotation: angle must be finite");
    State out = state;
    for (Branch& b : out.branches)
        for (std::int64_t i = 0; i < out.basis.dim; ++i)
            b.psi(i) *= std::exp(-kI * angle * static_cast<double>(out.basis.level(i, mode)));
    return out;
}

DensityMatrix apply_local_rotation(const DensityMatrix& rho, int mode, double angle) {
    if (mode < 0 || mode >= rho.basis.n_modes())
        throw std::invalid_argument("apply_local_rotation: mode out of range");
    DensityMatrix out = rho;
    Eigen::VectorXcd phases(rho.basis.dim);
    for (std::int64_t i = 0; i < rho.basis.dim; ++i)
        phases(i) = std::exp(-kI * angle * static_cast<double>(rho.basis.level(i, mode)));
    out.rho = phases.asDiagonal() * rho.rho * phases.conjugate().asDiagonal();
    return out;
}

// ---- Wigner function -------------------------------------------------------------

namespace {

// (1/pi) (-1)^m <n|D(2 alpha)|m> with alpha = (x + i p)/sqrt(2); the displaced
// parity kernel of the |m><n| matrix unit.
Complex wigner_kernel(int m, int n, Complex two_alpha, double abs2) {
    const int lo = std::min(m, n), hi = std::max(m, n), k = hi - lo;
    if (k > 0 && abs2 == 0.0) return 0.0;  // off-diagonal kernels vanish at the origin
    const double lg =
        0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) + (k > 0 ? k * std::log(std::abs(two_alpha)) : 0.0);
    const double mag = std::exp(lg - 0.5 * abs2);
    const Complex dir = (k > 0) ? std::pow(two_alpha / std::abs(two_alpha), k) : Complex(1.0);
    const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k),
                                           abs2);
    Complex d = mag * lag * dir;         // <n|D|m> for n >= m
    if (m > n) d = std::conj(d) * ((k % 2) ? -1.0 : 1.0);  // <n|D|m> = (-1)^k conj(<m|D|n>)
    const double parity = (m % 2) ? -1.0 : 1.0;
    return parity / kPi * d;
}

}  // namespace

WignerResult wigner(const DensityMatrix& single_mode, const PhaseSpaceGrid& grid) {
    if (single_mode.basis.n_modes() != 1)
        throw std::invalid_argument("wigner: expects a single-mode density matrix");
    if (grid.nx < 2 || grid.np < 2) throw std::invalid_argument("wigner: grid too small");

    const int d = single_mode.basis.dims[0];
    WignerResult out;
    out.grid = grid;
    out.values.resize(grid.nx, grid.np);

    const double dx = (grid.x_max - grid.x_min) / (grid.nx - 1);
    const double dp = (grid.p_max - grid.p_min) / (grid.np - 1);
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = grid.x_min + ix * dx;
        for (int ip = 0; ip < grid.np; ++ip) {
            const double p = grid.p_min + ip * dp;
            const Complex two_alpha = std::sqrt(2.0) * Complex(x, p);
            const double abs2 = std::norm(two_alpha);
            double w = 0.0;
            for (int m = 0; m < d; ++m) {
                w += std::real(single_mode.rho(m, m) * wigner_kernel(m, m, two_alpha, abs2));
                for (int n = m + 1; n < d; ++n)
                    w += 2.0 * std::real(single_mode.rho(m, n) *
                                         wigner_kernel(m, n, two_alpha, abs2));
            }
            out.values(ix, ip) = w;
        }
    }
    out.integral = out.values.sum() * dx * dp;
    out.grid_adequate = std::abs(out.integral - single_mode.rho.trace().real()) < 0.01;
    return out;
}

}  // namespace bosonlink
