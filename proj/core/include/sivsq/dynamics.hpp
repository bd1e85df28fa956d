#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sivsq/density.hpp"
#include "sivsq/model.hpp"

namespace sivsq {

enum class DissipatorKind { decay, dephasing };

struct DissipatorSpec {
    SparseMatrix jump;
    double rate = 0.0;  // rad/s
    double n_th = 0.0;
    DissipatorKind kind = DissipatorKind::decay;
    std::string label;

    // (n_th+1) rate D[jump] + n_th rate D[jump^dagger]
    static DissipatorSpec decay(SparseMatrix jump, double rate, double n_th, std::string label);
    // rate D[jump], jump Hermitian
    static DissipatorSpec dephasing(SparseMatrix jump, double rate, std::string label);
};

enum class Placement { per_segment, total };
enum class DephasingMode { collective_approx, off };

// D[J1-] at rate1 and D[J2-] at rate2, or D[J1- + J2-] at rate1 for the total placement
std::vector<DissipatorSpec> decay_dissipators(const EnsemblePair& pair, double rate1, double rate2, double n_th,
                                              Placement placement);

// D[Jz1], D[Jz2] at 4 gamma_d
std::vector<DissipatorSpec> dephasing_dissipators(double gamma_d, const EnsemblePair& pair, DephasingMode mode);

DenseMatrix lindblad_rhs(const DensityMatrix& rho, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds);

enum class Storage { automatic, dense, sector };
enum class Method { rk4, adaptive };

struct IntegratorSettings {
    int steps_per_period = 64;
    Method method = Method::rk4;
    double rtol = 1e-8;
    double atol = 1e-12;
    // caps accumulated RK4 amplitude error of the fastest unitary mode over the window
    double drift_budget = 1e-10;
    Storage storage = Storage::automatic;
    bool retain_states = false;
    std::size_t memory_budget = std::size_t(2) << 30;  // bytes
    double trace_tolerance = 1e-8;
    double hermiticity_tolerance = 1e-9;
    bool final_min_eigenvalue = true;
};

struct SampleDiagnostics {
    double trace_error = 0.0;
    double purity = 1.0;
    double hermiticity_error = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;                // empty unless retained
    std::vector<std::vector<Complex>> observables;  // [sample][observable]
    std::vector<SampleDiagnostics> diagnostics;
    DensityMatrix final_state;
    double final_min_eigenvalue = 0.0;
    std::size_t steps = 0;
    std::string storage;  // dense, sector, pure
};

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds,
                  std::span<const double> t_grid, const IntegratorSettings& control = {},
                  std::span<const SparseMatrix> observables = {});

// closed evolution of a state vector; trace error is |<psi|psi> - 1|
Trajectory evolve_pure(const StateVector& psi0, const HamiltonianSpec& h, std::span<const double> t_grid,
                       const IntegratorSettings& control = {}, std::span<const SparseMatrix> observables = {});

// the storage evolve() would pick
Storage select_storage(const DensityMatrix& rho0, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds);

// fixed RK4 step bound for a window of length t_span
double max_step(const HamiltonianSpec& h, std::span<const DissipatorSpec> ds, double t_span,
                const IntegratorSettings& control);

std::vector<double> uniform_grid(double t_max, int samples);

}  // namespace sivsq
