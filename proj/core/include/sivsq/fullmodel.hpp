#pragma once

#include <span>
#include <vector>

#include "sivsq/density.hpp"
#include "sivsq/model.hpp"

namespace sivsq {

// Four-level SiV sites (|1>..|4>) of both segments plus one phonon mode, static interaction frame.
struct FullModelParams {
    double omega_b = 0.0;                         // Zeeman splitting; absorbed by the frame
    double delta_orbital = kTwoPi * 46e9;         // ground-state orbital splitting; absorbed by the frame
    DriveParams drives;
    int n_ph_max = 3;
    int n1 = 1;
    int n2 = 1;
    double gamma_m = 0.0;                         // phonon damping, D[a]

    void validate() const;
    int sites() const { return n1 + n2; }
    int spin_dim() const;   // 4^(n1+n2)
    int dim() const { return spin_dim() * (n_ph_max + 1); }
};

DenseMatrix build_full_hamiltonian(const FullModelParams& p);

// (-1)^(n_ph + N_|2> + N_|3>), conserved by the static-frame Hamiltonian
DenseMatrix full_parity_operator(const FullModelParams& p);
DenseMatrix phonon_number_operator(const FullModelParams& p);

// all spins in |1>, phonon vacuum
DenseMatrix full_ground_state(const FullModelParams& p);

struct FullTrajectory {
    std::vector<double> times;
    std::vector<DenseMatrix> states;
};

// exact eigendecomposition when gamma_m = 0, Taylor-substep Lindblad propagation otherwise
FullTrajectory evolve_full(const FullModelParams& p, const DenseMatrix& rho0, std::span<const double> t_grid);

struct ReducedState {
    DensityMatrix qubits;  // 2^(n1+n2), site-major, qubit 0 = |1>, 1 = |2>
    double leakage = 0.0;
    bool valid = true;     // leakage <= threshold
};

ReducedState reduce_to_spins(const DenseMatrix& rho_full, const FullModelParams& p, double leakage_threshold = 0.05);

// symmetric embedding of the product Dicke space (m ascending) into the qubit space
DenseMatrix dicke_isometry(int n1, int n2);

// exp(S) for the phonon-elimination generator built from c
DenseMatrix sw_transform(const FullModelParams& p, const CouplingSet& c);

struct OracleRow {
    double t = 0.0;
    double fidelity = 1.0;       // after undoing the phonon-elimination frame change
    double fidelity_bare = 1.0;  // direct projection of the full state
    double leakage = 0.0;
    double phonon_mean = 0.0;
};

struct OracleReport {
    CouplingSet couplings;
    double period = 0.0;  // pi / |G|
    std::vector<OracleRow> rows;
    double min_fidelity = 1.0;
    double min_fidelity_bare = 1.0;
    double max_leakage = 0.0;
    double max_phonon = 0.0;
    bool passed = true;
};

// pi / |G| with G the largest effective interaction coefficient
double effective_period(const CouplingSet& c);

// full model from the dressed all-|1> state versus the effective Hamiltonian from the all-down Dicke state
OracleReport compare_reduction(const FullModelParams& p, std::span<const double> t_grid,
                               double fidelity_threshold = 0.99, double leakage_threshold = 0.05);

struct DephasingRow {
    double t = 0.0;
    double jx_exact = 0.0;
    double jx_collective = 0.0;
    double var_exact = 0.0;        // minimum transverse variance
    double var_collective = 0.0;
};

// gamma_d sum_j D[sigma_z^j] in the 2^n space from a CSS along x, optional chi Jz^2
std::vector<DephasingRow> exact_dephasing_reference(int n, double gamma_d, std::span<const double> t_grid,
                                                    double chi = 0.0);

}  // namespace sivsq
