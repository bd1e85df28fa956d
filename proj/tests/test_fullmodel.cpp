#include <gtest/gtest.h>

#include "oracle.hpp"
#include "sivsq/dynamics.hpp"
#include "sivsq/errors.hpp"
#include "sivsq/fullmodel.hpp"

using namespace sivsq;

namespace {

constexpr double kMHz = kTwoPi * 1e6;

// one SiV per segment, mixed coupling, delta/Omega = Delta_s/lambda = 10
FullModelParams mixed_pair() {
    FullModelParams p;
    p.drives.omega = {40 * kMHz, 0.0, 0.0, 40 * kMHz};
    p.drives.delta = {400 * kMHz, 397 * kMHz, 400 * kMHz, 400 * kMHz};
    p.drives.nu = 398.5 * kMHz;
    p.drives.g_n = 5 * kMHz;
    return p;
}

}  // namespace

TEST(FullModel, Dimensions) {
    FullModelParams p;
    p.n1 = 1;
    p.n2 = 0;
    p.n_ph_max = 2;
    EXPECT_EQ(p.dim(), 12);
    EXPECT_EQ(build_full_hamiltonian(p).rows(), 12);
    p.n1 = 2;
    p.n2 = 2;
    p.n_ph_max = 3;
    EXPECT_EQ(p.dim(), 1024);
}

TEST(FullModel, Validation) {
    FullModelParams p;
    p.n1 = 3;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.n1 = 0;
    p.n2 = 0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.n1 = 1;
    p.n_ph_max = 1;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.n_ph_max = 3;
    p.gamma_m = -1;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.gamma_m = 0;
    p.n1 = p.n2 = 2;
    p.n_ph_max = 16;  // 256 * 17 > 4096
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.n_ph_max = 3;
    p.drives.g_n = -1.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(FullModel, DiagonalWithoutCouplings) {
    FullModelParams p;
    p.drives.delta = {1.0, 2.0, 3.0, 4.0};
    p.drives.nu = 5.0;
    const DenseMatrix h = build_full_hamiltonian(p);
    EXPECT_TRUE(h.isApprox(DenseMatrix(h.diagonal().asDiagonal()), 1e-15));
    // site-1 |4>, site-2 |2> (nu - delta4), any phonon number
    const int dph = p.n_ph_max + 1;
    EXPECT_DOUBLE_EQ(h((3 * 4 + 1) * dph + 2, (3 * 4 + 1) * dph + 2).real(), 1.0 + (5.0 - 4.0));
}

TEST(FullModel, SingleSiteMatrixElements) {
    FullModelParams p;
    p.n1 = 1;
    p.n2 = 0;
    p.n_ph_max = 2;
    p.drives.omega = {2.0, 4.0, 0, 0};
    p.drives.g_n = 0.5;
    const DenseMatrix h = build_full_hamiltonian(p);
    const int dph = 3;
    auto idx = [&](int level, int n) { return (level - 1) * dph + n; };
    EXPECT_DOUBLE_EQ(h(idx(1, 0), idx(4, 0)).real(), 1.0);  // Omega1/2
    EXPECT_DOUBLE_EQ(h(idx(2, 1), idx(3, 1)).real(), 2.0);  // Omega2/2
    // g (|3><1| a + h.c.): |1, n=1> -> |3, n=0>
    EXPECT_DOUBLE_EQ(h(idx(3, 0), idx(1, 1)).real(), 0.5);
    EXPECT_NEAR(h(idx(4, 1), idx(2, 2)).real(), 0.5 * std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(h.isApprox(h.adjoint()));
}

TEST(FullModel, ParityIsConserved) {
    auto p = mixed_pair();
    for (auto [n1, n2] : {std::pair{1, 1}, {2, 1}, {1, 0}}) {
        p.n1 = n1;
        p.n2 = n2;
        const DenseMatrix h = build_full_hamiltonian(p), par = full_parity_operator(p);
        EXPECT_LT((h * par - par * h).norm(), 1e-6 * h.norm());
        EXPECT_TRUE((par * par).isIdentity(1e-15));
    }
}

TEST(FullModel, LeakageIsPopulationOutsideQubitLevels) {
    FullModelParams p;
    p.n2 = 0;
    p.n_ph_max = 2;
    DenseMatrix rho = DenseMatrix::Zero(12, 12);
    rho(0 * 3 + 1, 0 * 3 + 1) = 0.5;  // |1>, n=1
    rho(1 * 3 + 0, 1 * 3 + 0) = 0.3;  // |2>, n=0
    rho(3 * 3 + 2, 3 * 3 + 2) = 0.2;  // |4>, n=2
    const auto r = reduce_to_spins(rho, p, 0.1);
    EXPECT_NEAR(r.leakage, 0.2, 1e-15);
    EXPECT_FALSE(r.valid);
    EXPECT_NEAR(r.qubits.matrix()(0, 0).real(), 0.625, 1e-15);
    EXPECT_NEAR(r.qubits.matrix()(1, 1).real(), 0.375, 1e-15);
    EXPECT_TRUE(reduce_to_spins(rho, p, 0.25).valid);
}

TEST(FullModel, DickeIsometry) {
    const DenseMatrix iso = dicke_isometry(2, 1);
    EXPECT_EQ(iso.rows(), 8);
    EXPECT_EQ(iso.cols(), 6);
    EXPECT_TRUE((iso.adjoint() * iso).isIdentity(1e-14));
    const EnsemblePair pair(2, 1);
    // J1z on the qubit space restricted to the symmetric subspace equals the Dicke operator
    const oracle::M jz_q = Eigen::kroneckerProduct(oracle::collective_qubits('z', 2), oracle::M::Identity(2, 2));
    EXPECT_LT((iso.adjoint() * jz_q * iso - collective(pair, SpinComponent::Jz, Segment::one).dense()).norm(), 1e-12);
    EXPECT_THROW(dicke_isometry(0, 1), InvalidArgument);
}

TEST(FullModel, ClosedEvolutionMatchesExponential) {
    auto p = mixed_pair();
    p.drives.g_n = 50 * kMHz;
    p.n2 = 0;
    const DenseMatrix h = build_full_hamiltonian(p);
    const DenseMatrix rho0 = full_ground_state(p);
    const std::vector<double> grid{0.0, 1e-9, 7e-9};
    const auto tr = evolve_full(p, rho0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const oracle::M u = oracle::expm_h(h / kMHz, grid[i] * kMHz);
        EXPECT_LT((tr.states[i] - u * rho0 * u.adjoint()).norm(), 1e-9);
    }
}

TEST(FullModel, PhononDampingDecaysNumber) {
    FullModelParams p;
    p.n2 = 0;
    p.n_ph_max = 3;
    p.gamma_m = 2.0;
    DenseMatrix rho = DenseMatrix::Zero(p.dim(), p.dim());
    rho(1, 1) = 1.0;  // |1>, n=1
    const std::vector<double> grid{0.0, 0.1, 0.5, 1.0};
    const auto tr = evolve_full(p, rho, grid);
    const DenseMatrix num = phonon_number_operator(p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR((num * tr.states[i]).trace().real(), std::exp(-2.0 * grid[i]), 1e-8);
        EXPECT_NEAR(tr.states[i].trace().real(), 1.0, 1e-10);
    }
}

TEST(FullModel, OracleAgreesInDispersiveRegime) {
    const auto p = mixed_pair();
    const auto rep = compare_reduction(p, uniform_grid(20e-6, 101));
    EXPECT_TRUE(rep.passed);
    EXPECT_GE(rep.min_fidelity, 0.99);
    EXPECT_LE(rep.max_leakage, 0.05);
    EXPECT_LT(rep.max_phonon, 0.05);
    EXPECT_GE(rep.min_fidelity, rep.min_fidelity_bare - 1e-3);
    EXPECT_NEAR(rep.period, 20e-6, 1e-7);
    EXPECT_EQ(classify(rep.couplings), InteractionKind::mixed);
}

TEST(FullModel, OracleFailsOutsideDispersiveRegime) {
    auto p = mixed_pair();
    p.drives.omega = {400 * kMHz, 0.0, 0.0, 400 * kMHz};
    const auto rep = compare_reduction(p, uniform_grid(2e-6, 101));
    EXPECT_FALSE(rep.passed);
}

TEST(FullModel, NoPhononCouplingMeansNoDynamics) {
    auto p = mixed_pair();
    p.drives.g_n = 0.0;
    const auto rep = compare_reduction(p, uniform_grid(1e-6, 11));
    for (const auto& r : rep.rows) {
        EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
        EXPECT_NEAR(r.phonon_mean, 0.0, 1e-15);
    }
}

TEST(FullModel, RequiresBothSegments) {
    auto p = mixed_pair();
    p.n2 = 0;
    EXPECT_THROW(compare_reduction(p, uniform_grid(1e-6, 3)), InvalidArgument);
}

TEST(DephasingReference, SingleSpinIsExact) {
    const auto rows = exact_dephasing_reference(1, 3.0, uniform_grid(0.5, 11));
    for (const auto& r : rows) {
        EXPECT_NEAR(r.jx_exact, r.jx_collective, 1e-10);
        EXPECT_NEAR(r.jx_exact, 0.5 * std::exp(-6.0 * r.t), 1e-10);
        EXPECT_NEAR(r.var_exact, r.var_collective, 1e-10);
    }
}

TEST(DephasingReference, MeanSpinDecayForTwoSpins) {
    const auto rows = exact_dephasing_reference(2, 1.5, uniform_grid(0.5, 11));
    for (const auto& r : rows) {
        EXPECT_NEAR(r.jx_exact, std::exp(-3.0 * r.t), 1e-10);
        EXPECT_NEAR(r.jx_collective, std::exp(-3.0 * r.t), 1e-10);
    }
}

TEST(DephasingReference, CollectiveApproximationDiffersInVariance) {
    const auto rows = exact_dephasing_reference(3, 2.0, uniform_grid(0.5, 11), 1.0);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_GT(std::abs(rows.back().var_exact - rows.back().var_collective), 1e-6);
    EXPECT_THROW(exact_dephasing_reference(5, 1.0, uniform_grid(1.0, 3)), InvalidArgument);
}
