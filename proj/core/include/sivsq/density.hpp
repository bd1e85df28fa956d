#pragma once

#include "sivsq/spin_algebra.hpp"

namespace sivsq {

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(DenseMatrix m, double time = 0.0);

    static DensityMatrix from_pure(const StateVector& psi, double time = 0.0);
    static DensityMatrix maximally_mixed(int dim);

    const DenseMatrix& matrix() const { return m_; }
    DenseMatrix& matrix() { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double time() const { return t_; }
    void set_time(double t) { t_ = t; }

    double trace_error() const;        // |Tr rho - 1|
    double purity() const;             // Tr rho^2
    double hermiticity_error() const;  // max |rho - rho^dagger| / max(1, max|rho|)
    double min_eigenvalue() const;     // O(dim^3)

private:
    DenseMatrix m_;
    double t_ = 0.0;
};

Complex expectation(const DensityMatrix& rho, const CollectiveOperator& op);

}  // namespace sivsq
