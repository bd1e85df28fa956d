#include "sivsq/squeezing.hpp"

#include <cmath>

#include "sivsq/errors.hpp"

namespace sivsq {

namespace {
constexpr double kMeanThreshold = 1e-9;

SparseMatrix sym(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix s = 0.5 * (SparseMatrix(a * b) + SparseMatrix(b * a));
    s.prune(Complex(0.0));
    s.makeCompressed();
    return s;
}
}  // namespace

SpinMomentOperators::SpinMomentOperators(SparseMatrix jx, SparseMatrix jy, SparseMatrix jz) {
    if (jx.rows() != jy.rows() || jx.rows() != jz.rows() || jx.rows() != jx.cols())
        throw InvalidArgument("SpinMomentOperators: inconsistent operator dimensions");
    SparseMatrix xx = SparseMatrix(jx * jx), yy = SparseMatrix(jy * jy), zz = SparseMatrix(jz * jz);
    SparseMatrix xy = sym(jx, jy), xz = sym(jx, jz), yz = sym(jy, jz);
    ops_ = {std::move(jx), std::move(jy), std::move(jz), std::move(xx), std::move(yy),
            std::move(zz), std::move(xy), std::move(xz), std::move(yz)};
    for (auto& o : ops_) o.makeCompressed();
}

SpinMomentOperators SpinMomentOperators::for_pair(const EnsemblePair& pair) {
    return SpinMomentOperators(collective(pair, SpinComponent::Jx, Segment::total).matrix,
                               collective(pair, SpinComponent::Jy, Segment::total).matrix,
                               collective(pair, SpinComponent::Jz, Segment::total).matrix);
}

SpinMomentOperators SpinMomentOperators::for_ensemble(int n) {
    return SpinMomentOperators(collective_operator(SpinComponent::Jx, n).sparseView(),
                               collective_operator(SpinComponent::Jy, n).sparseView(),
                               collective_operator(SpinComponent::Jz, n).sparseView());
}

SpinMoments SpinMomentOperators::from_expectations(std::span<const Complex> v) const {
    if (v.size() < 9) throw InvalidArgument("SpinMomentOperators: need 9 expectation values");
    SpinMoments m;
    for (int a = 0; a < 3; ++a) m.mean(a) = v[a].real();
    m.second(0, 0) = v[3].real();
    m.second(1, 1) = v[4].real();
    m.second(2, 2) = v[5].real();
    m.second(0, 1) = m.second(1, 0) = v[6].real();
    m.second(0, 2) = m.second(2, 0) = v[7].real();
    m.second(1, 2) = m.second(2, 1) = v[8].real();
    return m;
}

SpinMoments SpinMomentOperators::measure(const DensityMatrix& rho) const {
    if (rho.dim() != dim()) throw InvalidArgument("measure: dimension mismatch");
    std::vector<Complex> v;
    for (const auto& o : ops_) v.push_back(expectation(rho.matrix(), o));
    return from_expectations(v);
}

SpinMoments SpinMomentOperators::measure(const StateVector& psi) const {
    if (psi.dim() != dim()) throw InvalidArgument("measure: dimension mismatch");
    std::vector<Complex> v;
    for (const auto& o : ops_) v.push_back(expectation(psi, o));
    return from_expectations(v);
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> transverse_basis(const Eigen::Vector3d& mean) {
    const double len = mean.norm();
    if (!(len > kMeanThreshold)) throw InvalidArgument("undefined direction: mean spin below 1e-9");
    const Eigen::Vector3d m = mean / len;
    Eigen::Vector3d n1 = Eigen::Vector3d::UnitZ().cross(m);
    if (n1.norm() < 1e-12)
        n1 = Eigen::Vector3d::UnitX();
    else
        n1.normalize();
    const Eigen::Vector3d n2 = m.cross(n1);
    return {n1, n2};
}

Eigen::Vector3d mean_spin(const DensityMatrix& rho, const SpinMomentOperators& ops) {
    if (rho.dim() != ops.dim()) throw InvalidArgument("mean_spin: dimension mismatch");
    Eigen::Vector3d m;
    for (int a = 0; a < 3; ++a) m(a) = expectation(rho.matrix(), ops.operators()[a]).real();
    return m;
}

double min_transverse_variance(const SpinMoments& m) {
    const auto [n1, n2] = transverse_basis(m.mean);
    const Eigen::Matrix3d c = m.covariance();
    const double c11 = n1.dot(c * n1), c22 = n2.dot(c * n2), c12 = n1.dot(c * n2);
    return 0.5 * (c11 + c22 - std::sqrt((c11 - c22) * (c11 - c22) + 4.0 * c12 * c12));
}

double xi_s2(const SpinMoments& m, int n_tot) { return 4.0 * min_transverse_variance(m) / n_tot; }

double xi_r2(const SpinMoments& m, int n_tot) {
    return n_tot * min_transverse_variance(m) / m.mean.squaredNorm();
}

double jx2(const SpinMoments& m) { return m.second(0, 0); }

double min_transverse_variance(const DensityMatrix& rho, const SpinMomentOperators& ops) {
    return min_transverse_variance(ops.measure(rho));
}

double xi_s2(const DensityMatrix& rho, const EnsemblePair& pair) {
    return xi_s2(SpinMomentOperators::for_pair(pair).measure(rho), pair.n_tot());
}

double xi_r2(const DensityMatrix& rho, const EnsemblePair& pair) {
    return xi_r2(SpinMomentOperators::for_pair(pair).measure(rho), pair.n_tot());
}

double jx2(const DensityMatrix& rho, const SpinMomentOperators& ops) {
    if (rho.dim() != ops.dim()) throw InvalidArgument("jx2: dimension mismatch");
    return expectation(rho.matrix(), ops.operators()[3]).real();
}

SqueezingRecord make_record(double t, const SpinMoments& m, int n_tot, const SampleDiagnostics& d) {
    SqueezingRecord r;
    r.time = t;
    r.xi_s2 = xi_s2(m, n_tot);
    r.xi_r2 = xi_r2(m, n_tot);
    r.mean_spin = m.mean;
    r.jx2 = jx2(m);
    r.trace_err = d.trace_error;
    r.purity = d.purity;
    return r;
}

std::vector<SqueezingRecord> squeezing_records(const Trajectory& tr, const SpinMomentOperators& ops, int n_tot) {
    std::vector<SqueezingRecord> out;
    out.reserve(tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        if (tr.observables[i].size() < 9) throw InvalidArgument("squeezing_records: trajectory lacks spin moments");
        out.push_back(make_record(tr.times[i], ops.from_expectations(tr.observables[i]), n_tot, tr.diagnostics[i]));
    }
    return out;
}

double kitagawa_ueda_xi_s2(int n, double chi_t) {
    if (n < 2) return 1.0;
    const double a = 1.0 - std::pow(std::cos(2.0 * chi_t), n - 2);
    const double b = 4.0 * std::sin(chi_t) * std::pow(std::cos(chi_t), n - 2);
    return 1.0 + 0.25 * (n - 1) * (a - std::sqrt(a * a + b * b));
}

}  // namespace sivsq
