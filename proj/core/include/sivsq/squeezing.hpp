#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sivsq/dynamics.hpp"

namespace sivsq {

struct SpinMoments {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();    // <Jx>, <Jy>, <Jz>
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();  // <{Ja, Jb}>/2
    Eigen::Matrix3d covariance() const { return second - mean * mean.transpose(); }
};

// Operators whose expectations determine SpinMoments: Jx, Jy, Jz, then
// Jx^2, Jy^2, Jz^2, {Jx,Jy}/2, {Jx,Jz}/2, {Jy,Jz}/2.
class SpinMomentOperators {
public:
    SpinMomentOperators(SparseMatrix jx, SparseMatrix jy, SparseMatrix jz);
    static SpinMomentOperators for_pair(const EnsemblePair& pair);  // total spin J1 + J2
    static SpinMomentOperators for_ensemble(int n);

    const std::vector<SparseMatrix>& operators() const { return ops_; }
    int dim() const { return static_cast<int>(ops_.front().rows()); }

    SpinMoments from_expectations(std::span<const Complex> values) const;
    SpinMoments measure(const DensityMatrix& rho) const;
    SpinMoments measure(const StateVector& psi) const;

private:
    std::vector<SparseMatrix> ops_;
};

struct SqueezingRecord {
    double time = 0.0;
    double xi_s2 = 1.0;
    double xi_r2 = 1.0;
    Eigen::Vector3d mean_spin = Eigen::Vector3d::Zero();
    double jx2 = 0.0;
    double trace_err = 0.0;
    double purity = 1.0;
};

// n1 = z x m / |z x m| (x if m || z), n2 = m x n1
std::pair<Eigen::Vector3d, Eigen::Vector3d> transverse_basis(const Eigen::Vector3d& mean);

Eigen::Vector3d mean_spin(const DensityMatrix& rho, const SpinMomentOperators& ops);
double min_transverse_variance(const SpinMoments& m);
double xi_s2(const SpinMoments& m, int n_tot);
double xi_r2(const SpinMoments& m, int n_tot);
double jx2(const SpinMoments& m);

double min_transverse_variance(const DensityMatrix& rho, const SpinMomentOperators& ops);
double xi_s2(const DensityMatrix& rho, const EnsemblePair& pair);
double xi_r2(const DensityMatrix& rho, const EnsemblePair& pair);
double jx2(const DensityMatrix& rho, const SpinMomentOperators& ops);

SqueezingRecord make_record(double t, const SpinMoments& m, int n_tot, const SampleDiagnostics& d);

// trajectory must carry the SpinMomentOperators expectations as its observables (in order)
std::vector<SqueezingRecord> squeezing_records(const Trajectory& tr, const SpinMomentOperators& ops, int n_tot);

// Kitagawa-Ueda closed form for one ensemble under chi Jz^2 from a CSS along x
double kitagawa_ueda_xi_s2(int n, double chi_t);

}  // namespace sivsq
