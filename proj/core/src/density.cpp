#include "sivsq/density.hpp"

#include <algorithm>
#include <cmath>

#include "sivsq/errors.hpp"

namespace sivsq {

DensityMatrix::DensityMatrix(DenseMatrix m, double time) : m_(std::move(m)), t_(time) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw InvalidArgument("DensityMatrix: matrix must be square");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi, double time) {
    const Vector& v = psi.amplitudes();
    return DensityMatrix(v * v.adjoint(), time);
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    if (dim < 1) throw InvalidArgument("maximally_mixed: dim must be >= 1");
    return DensityMatrix(DenseMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - Complex(1.0)); }

double DensityMatrix::purity() const { return m_.squaredNorm(); }  // rho Hermitian

double DensityMatrix::hermiticity_error() const {
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double DensityMatrix::min_eigenvalue() const {
    const DenseMatrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Complex expectation(const DensityMatrix& rho, const CollectiveOperator& op) {
    return expectation(rho.matrix(), op.matrix);
}

}  // namespace sivsq
