#include <gtest/gtest.h>

#include "oracle.hpp"
#include "sivsq/density.hpp"
#include "sivsq/errors.hpp"
#include "sivsq/spin_algebra.hpp"

using namespace sivsq;

namespace {

double comm_norm(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& c) {
    return (a * b - b * a - c).norm();
}

}  // namespace

TEST(EnsemblePair, Dimensions) {
    EnsemblePair p(3, 5);
    EXPECT_EQ(p.dim1(), 4);
    EXPECT_EQ(p.dim2(), 6);
    EXPECT_EQ(p.dim(), 24);
    EXPECT_EQ(p.n_tot(), 8);
    EXPECT_EQ(p.index(2, 3), 15);
    EXPECT_EQ(p.seg1_index(15), 2);
    EXPECT_EQ(p.seg2_index(15), 3);
}

TEST(EnsemblePair, RejectsEmptySegments) {
    EXPECT_THROW(EnsemblePair(0, 2), InvalidArgument);
    EXPECT_THROW(EnsemblePair(2, 0), InvalidArgument);
}

TEST(EnsemblePair, SplitCeilFloor) {
    EXPECT_EQ(EnsemblePair::split(39), EnsemblePair(20, 19));
    EXPECT_EQ(EnsemblePair::split(40), EnsemblePair(20, 20));
    EXPECT_THROW(EnsemblePair::split(1), InvalidArgument);
}

TEST(CollectiveOperator, SingleSpinJz) {
    const DenseMatrix jz = collective_operator(SpinComponent::Jz, 1);
    EXPECT_NEAR(jz(0, 0).real(), -0.5, 1e-15);
    EXPECT_NEAR(jz(1, 1).real(), 0.5, 1e-15);
    EXPECT_EQ(jz(0, 1), Complex(0.0));
}

TEST(CollectiveOperator, LadderCoefficientsSpinOne) {
    const DenseMatrix jp = collective_operator(SpinComponent::Jplus, 2);
    EXPECT_NEAR(jp(1, 0).real(), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(jp(2, 1).real(), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(jp.cwiseAbs().sum(), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(CollectiveOperator, LadderCommutatorN4) {
    const auto jp = collective_operator(SpinComponent::Jplus, 4);
    const auto jm = collective_operator(SpinComponent::Jminus, 4);
    const auto jz = collective_operator(SpinComponent::Jz, 4);
    EXPECT_LT(comm_norm(jp, jm, 2.0 * jz), 1e-12);
    EXPECT_LT(comm_norm(jz, jp, jp), 1e-12);
    EXPECT_LT(comm_norm(jz, jm, -jm), 1e-12);
}

TEST(CollectiveOperator, AngularMomentumAlgebraUpTo12) {
    for (int n = 1; n <= 12; ++n) {
        const auto jx = collective_operator(SpinComponent::Jx, n);
        const auto jy = collective_operator(SpinComponent::Jy, n);
        const auto jz = collective_operator(SpinComponent::Jz, n);
        EXPECT_LE(comm_norm(jx, jy, I * jz), 1e-10) << n;
        EXPECT_LE(comm_norm(jy, jz, I * jx), 1e-10) << n;
        EXPECT_LE(comm_norm(jz, jx, I * jy), 1e-10) << n;
        const double j = 0.5 * n;
        const DenseMatrix cas = jx * jx + jy * jy + jz * jz;
        EXPECT_LE((cas - j * (j + 1) * DenseMatrix::Identity(n + 1, n + 1)).norm(), 1e-10) << n;
        EXPECT_LE((jx - jx.adjoint()).norm(), 1e-15);
        EXPECT_LE((collective_operator(SpinComponent::Jplus, n).adjoint() -
                   collective_operator(SpinComponent::Jminus, n)).norm(), 1e-15);
    }
}

TEST(CollectiveOperator, MatchesSymmetrizedQubitSpace) {
    for (int n : {1, 2, 3, 5}) {
        const auto b = oracle::dicke_basis(n);
        const std::pair<SpinComponent, char> comps[] = {
            {SpinComponent::Jx, 'x'}, {SpinComponent::Jy, 'y'}, {SpinComponent::Jz, 'z'}};
        for (const auto& [kind, c] : comps) {
            const oracle::M ref = b.adjoint() * oracle::collective_qubits(c, n) * b;
            EXPECT_LT((collective_operator(kind, n) - ref).norm(), 1e-12) << n << c;
        }
    }
}

TEST(CollectiveOperator, RejectsNonPositive) {
    EXPECT_THROW(collective_operator(SpinComponent::Jz, 0), InvalidArgument);
}

TEST(CollectiveOperator, ParseComponentNames) {
    EXPECT_EQ(parse_component("Jx"), SpinComponent::Jx);
    EXPECT_EQ(parse_component("J+"), SpinComponent::Jplus);
    EXPECT_EQ(component_name(SpinComponent::Jminus), "J-");
    EXPECT_THROW(parse_component("Jw"), InvalidArgument);
}

TEST(Embed, SegmentOneJzPairOneOne) {
    const DenseMatrix jz = DenseMatrix(embed(collective_operator(SpinComponent::Jz, 1), EnsemblePair(1, 1), Segment::one));
    const Eigen::Vector4d expect(-0.5, -0.5, 0.5, 0.5);
    EXPECT_LT((jz.diagonal().real() - expect).norm(), 1e-15);
    EXPECT_LT((jz - DenseMatrix(jz.diagonal().asDiagonal())).norm(), 1e-15);
}

TEST(Embed, SegmentsCommuteExhaustively) {
    const EnsemblePair p(2, 3);
    const SpinComponent all[] = {SpinComponent::Jx, SpinComponent::Jy, SpinComponent::Jz, SpinComponent::Jplus,
                                 SpinComponent::Jminus};
    for (auto a : all)
        for (auto b : all) {
            const DenseMatrix o1 = collective(p, a, Segment::one).dense();
            const DenseMatrix o2 = collective(p, b, Segment::two).dense();
            EXPECT_LT((o1 * o2 - o2 * o1).norm(), 1e-12);
        }
}

TEST(Embed, IdentityMapsToIdentity) {
    const EnsemblePair p(2, 3);
    const DenseMatrix id = DenseMatrix(embed(DenseMatrix::Identity(3, 3), p, Segment::one));
    EXPECT_LT((id - DenseMatrix::Identity(12, 12)).norm(), 1e-15);
}

TEST(Embed, PreservesSpectraWithMultiplicity) {
    const EnsemblePair p(2, 3);
    const DenseMatrix jx = collective_operator(SpinComponent::Jx, 2);
    const DenseMatrix e = DenseMatrix(embed(jx, p, Segment::one));
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(e), base(jx);
    std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + 12), want;
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < 4; ++r) want.push_back(base.eigenvalues()(k));
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Embed, TotalIsSumOfSegments) {
    const EnsemblePair p(3, 2);
    const SparseMatrix tot = collective(p, SpinComponent::Jy, Segment::total).matrix;
    const SparseMatrix sum =
        collective(p, SpinComponent::Jy, Segment::one).matrix + collective(p, SpinComponent::Jy, Segment::two).matrix;
    EXPECT_LT(DenseMatrix(tot - sum).norm(), 1e-15);
}

TEST(Embed, RejectsWrongShape) {
    EXPECT_THROW(embed(DenseMatrix::Identity(3, 3), EnsemblePair(1, 1), Segment::one), InvalidArgument);
    EXPECT_THROW(embed(DenseMatrix::Identity(3, 3), EnsemblePair(2, 2), Segment::total), InvalidArgument);
}

TEST(CoherentState, TopDickeAtThetaZero) {
    const auto s = coherent_spin_state(6, 0.0, 0.0);
    EXPECT_NEAR(std::abs(s.amplitudes()(6)), 1.0, 1e-15);
    EXPECT_NEAR(s.amplitudes().head(6).norm(), 0.0, 1e-15);
}

TEST(CoherentState, SingleSpinAlongX) {
    const auto s = coherent_spin_state(1, M_PI / 2, 0.0);
    EXPECT_NEAR(s.amplitudes()(0).real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.amplitudes()(1).real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(CoherentState, TwentySpinsAlongX) {
    const auto s = coherent_spin_state(20, M_PI / 2, 0.0);
    const auto op = [](SpinComponent k) { return SparseMatrix(collective_operator(k, 20).sparseView()); };
    EXPECT_NEAR(expectation(s, op(SpinComponent::Jx)).real(), 10.0, 1e-10);
    EXPECT_NEAR(expectation(s, op(SpinComponent::Jz)).real(), 0.0, 1e-10);
    const SparseMatrix jy = op(SpinComponent::Jy), jz = op(SpinComponent::Jz);
    EXPECT_NEAR(expectation(s, SparseMatrix(jy * jy)).real(), 5.0, 1e-10);
    EXPECT_NEAR(expectation(s, SparseMatrix(jz * jz)).real(), 5.0, 1e-10);
}

TEST(CoherentState, PointsAlongRequestedDirection) {
    const int n = 7;
    for (double th : {0.3, 1.1, 2.5})
        for (double ph : {0.0, 0.7, -2.0, 3.0}) {
            const auto s = coherent_spin_state(n, th, ph);
            const Eigen::Vector3d d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            const SparseMatrix jx = collective_operator(SpinComponent::Jx, n).sparseView();
            const SparseMatrix jy = collective_operator(SpinComponent::Jy, n).sparseView();
            const SparseMatrix jz = collective_operator(SpinComponent::Jz, n).sparseView();
            const Eigen::Vector3d m(expectation(s, jx).real(), expectation(s, jy).real(), expectation(s, jz).real());
            EXPECT_LT((m - 0.5 * n * d).norm(), 1e-10);
            // transverse variances n/4
            const Eigen::Vector3d a = std::abs(d.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
            const Eigen::Vector3d u = (a - a.dot(d) * d).normalized(), w = d.cross(u);
            for (const auto& v : {u, w}) {
                const SparseMatrix o = v.x() * jx + v.y() * jy + v.z() * jz;
                const double var = expectation(s, SparseMatrix(o * o)).real() - std::pow(expectation(s, o).real(), 2);
                EXPECT_NEAR(var, 0.25 * n, 1e-10);
            }
        }
}

TEST(CoherentState, MatchesQubitProductState) {
    const int n = 4;
    const double th = 0.9, ph = 0.4;
    oracle::V q(2);
    // index 0 = down; cos(th/2)|up> + e^{i ph} sin(th/2)|down>
    q << std::sin(th / 2) * std::exp(oracle::C(0, ph)), std::cos(th / 2);
    oracle::V prod = oracle::V::Ones(1);
    for (int k = 0; k < n; ++k) prod = Eigen::kroneckerProduct(prod, q).eval();
    const oracle::V ref = oracle::dicke_basis(n).adjoint() * prod;
    const auto s = coherent_spin_state(n, th, ph);
    EXPECT_NEAR(std::abs(ref.dot(s.amplitudes())), 1.0, 1e-12);
}

TEST(StateVector, NormalizesAndRejectsZero) {
    Vector v(2);
    v << 3.0, 4.0;
    EXPECT_NEAR(StateVector(v).norm(), 1.0, 1e-15);
    EXPECT_THROW(StateVector(Vector::Zero(3)), InvalidArgument);
}

TEST(Expectation, PairCssTotalJx) {
    const EnsemblePair p(20, 20);
    const auto psi = product_state(coherent_spin_state(20, M_PI / 2, 0), coherent_spin_state(20, M_PI / 2, 0));
    EXPECT_NEAR(expectation(psi, collective(p, SpinComponent::Jx, Segment::total).matrix).real(), 20.0, 1e-10);
}

TEST(Expectation, IdentityGivesOne) {
    const DensityMatrix rho = DensityMatrix::from_pure(coherent_spin_state(5, 0.4, 1.3));
    const SparseMatrix id = DenseMatrix::Identity(6, 6).sparseView();
    EXPECT_NEAR(expectation(rho.matrix(), id).real(), 1.0, 1e-14);
}

TEST(Expectation, TopDickeJz) {
    Vector v = Vector::Zero(7);
    v(6) = 1.0;
    const DensityMatrix rho = DensityMatrix::from_pure(StateVector(v));
    const SparseMatrix jz = collective_operator(SpinComponent::Jz, 6).sparseView();
    EXPECT_NEAR(expectation(rho.matrix(), jz).real(), 3.0, 1e-15);
}

TEST(Expectation, DimensionMismatchThrows) {
    const SparseMatrix jz = collective_operator(SpinComponent::Jz, 6).sparseView();
    EXPECT_THROW(expectation(coherent_spin_state(2, 0, 0), jz), InvalidArgument);
}

TEST(DensityMatrix, Diagnostics) {
    const auto rho = DensityMatrix::from_pure(coherent_spin_state(4, 1.0, 0.5));
    EXPECT_LT(rho.trace_error(), 1e-14);
    EXPECT_NEAR(rho.purity(), 1.0, 1e-14);
    EXPECT_LT(rho.hermiticity_error(), 1e-16);
    EXPECT_NEAR(rho.min_eigenvalue(), 0.0, 1e-14);
    const auto mm = DensityMatrix::maximally_mixed(5);
    EXPECT_NEAR(mm.purity(), 0.2, 1e-15);
    EXPECT_THROW(DensityMatrix(DenseMatrix::Zero(2, 3)), InvalidArgument);
}
