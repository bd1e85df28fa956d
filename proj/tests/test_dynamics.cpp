#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "sivsq/dynamics.hpp"
#include "sivsq/errors.hpp"
#include "sivsq/model.hpp"
#include "sivsq/squeezing.hpp"

using namespace sivsq;

namespace {

DenseMatrix random_density(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n;
    DenseMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex(n(rng), n(rng));
    DenseMatrix r = a * a.adjoint();
    return r / r.trace();
}

StateVector all_down(const EnsemblePair& p) {
    Vector v = Vector::Zero(p.dim());
    v(0) = 1.0;
    return StateVector(v);
}

StateVector x_css(const EnsemblePair& p) {
    return product_state(coherent_spin_state(p.n1(), M_PI / 2, 0), coherent_spin_state(p.n2(), M_PI / 2, 0));
}

std::vector<DissipatorSpec> mixed_bag(const EnsemblePair& p, Placement pl = Placement::per_segment) {
    auto ds = decay_dissipators(p, 300.0, 200.0, 0.3, pl);
    const auto dp = dephasing_dissipators(50.0, p, DephasingMode::collective_approx);
    ds.insert(ds.end(), dp.begin(), dp.end());
    return ds;
}

// fine enough that the RK4 error sits below the comparison tolerances
IntegratorSettings precise() {
    IntegratorSettings c;
    c.steps_per_period = 1024;
    c.retain_states = true;
    return c;
}

}  // namespace

TEST(Dissipators, Construction) {
    const EnsemblePair p(2, 3);
    EXPECT_TRUE(dephasing_dissipators(0.0, p, DephasingMode::collective_approx).empty());
    EXPECT_TRUE(dephasing_dissipators(5.0, p, DephasingMode::off).empty());
    const auto dp = dephasing_dissipators(5.0, p, DephasingMode::collective_approx);
    ASSERT_EQ(dp.size(), 2u);
    EXPECT_EQ(dp[0].rate, 20.0);
    EXPECT_EQ(decay_dissipators(p, 1.0, 2.0, 0.0, Placement::per_segment).size(), 2u);
    EXPECT_EQ(decay_dissipators(p, 1.0, 0.0, 0.0, Placement::per_segment).size(), 1u);
    EXPECT_EQ(decay_dissipators(p, 1.0, 1.0, 0.0, Placement::total).size(), 1u);
    EXPECT_THROW(DissipatorSpec::decay(collective(p, SpinComponent::Jminus, Segment::one).matrix, -1.0, 0.0, "x"),
                 InvalidArgument);
    EXPECT_THROW(DissipatorSpec::dephasing(collective(p, SpinComponent::Jminus, Segment::one).matrix, 1.0, "x"),
                 InvalidArgument);
    EXPECT_THROW(dephasing_dissipators(-1.0, p, DephasingMode::collective_approx), InvalidArgument);
}

TEST(LindbladRhs, StationaryDiagonal) {
    const auto h = HamiltonianSpec::from_matrix(SparseMatrix(DenseMatrix(Eigen::Vector3cd(1.0, 2.0, 3.0).asDiagonal()).sparseView()));
    const DensityMatrix rho(DenseMatrix(Eigen::Vector3cd(0.2, 0.3, 0.5).asDiagonal()));
    EXPECT_LT(lindblad_rhs(rho, h, {}).norm(), 1e-15);
}

TEST(LindbladRhs, TopDickeDecayRate) {
    const double gamma = 7.0;
    const SparseMatrix jm = collective_operator(SpinComponent::Jminus, 2).sparseView();
    const SparseMatrix jz = collective_operator(SpinComponent::Jz, 2).sparseView();
    const auto h = HamiltonianSpec::from_matrix(SparseMatrix(3, 3));
    DenseMatrix top = DenseMatrix::Zero(3, 3);
    top(2, 2) = 1.0;
    const std::vector<DissipatorSpec> ds{DissipatorSpec::decay(jm, gamma, 0.0, "J-")};
    const DenseMatrix r = lindblad_rhs(DensityMatrix(top), h, ds);
    EXPECT_NEAR(expectation(r, jz).real(), -gamma * 2.0, 1e-12);
}

TEST(LindbladRhs, TracelessAndMatchesSuperoperator) {
    const EnsemblePair p(2, 1);
    const auto h = build_mixed(p, 0.7, 0.3, 0.1);
    const auto ds = mixed_bag(p);
    std::vector<std::pair<oracle::M, double>> jumps;
    for (const auto& d : ds) {
        const DenseMatrix l(d.jump);
        if (d.kind == DissipatorKind::dephasing) {
            jumps.push_back({l, d.rate});
        } else {
            jumps.push_back({l, (d.n_th + 1) * d.rate});
            jumps.push_back({l.adjoint(), d.n_th * d.rate});
        }
    }
    const oracle::M liou = oracle::liouvillian(h.dense(), jumps);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const DenseMatrix rho = random_density(p.dim(), seed);
        const DenseMatrix r = lindblad_rhs(DensityMatrix(rho), h, ds);
        EXPECT_LT(std::abs(r.trace()), 1e-12);
        const oracle::V v = liou * Eigen::Map<const oracle::V>(rho.data(), rho.size());
        EXPECT_LT((r - Eigen::Map<const oracle::M>(v.data(), p.dim(), p.dim())).norm(), 1e-10);
    }
}

TEST(Evolve, ClosedPairMatchesExactDiagonalization) {
    const EnsemblePair p(1, 1);
    const auto h = build_tats(p, 2.0, 0.7, 0.2);
    const DensityMatrix rho0 = DensityMatrix::from_pure(x_css(p));
    const auto grid = uniform_grid(3.0, 50);
    const auto tr = evolve(rho0, h, {}, grid, precise());
    ASSERT_EQ(tr.states.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const oracle::M u = oracle::expm_h(h.dense(), grid[i]);
        const oracle::M want = u * rho0.matrix() * u.adjoint();
        EXPECT_LT((tr.states[i].matrix() - want).norm(), 1e-8) << grid[i];
    }
}

TEST(Evolve, OpenSystemMatchesSuperoperatorExponential) {
    const EnsemblePair p(2, 2);
    const auto h = build_tats(p, 1.0, 0.0, 0.0);
    auto ds = decay_dissipators(p, 0.2, 0.3, 0.1, Placement::per_segment);
    const auto dp = dephasing_dissipators(0.05, p, DephasingMode::collective_approx);
    ds.insert(ds.end(), dp.begin(), dp.end());
    std::vector<std::pair<oracle::M, double>> jumps;
    for (const auto& d : ds) {
        const DenseMatrix l(d.jump);
        jumps.push_back({l, d.kind == DissipatorKind::dephasing ? d.rate : (d.n_th + 1) * d.rate});
        if (d.kind == DissipatorKind::decay && d.n_th > 0) jumps.push_back({l.adjoint(), d.n_th * d.rate});
    }
    const auto liou = oracle::liouvillian(h.dense(), jumps);
    const DensityMatrix rho0 = DensityMatrix::from_pure(all_down(p));
    const auto grid = uniform_grid(2.0, 11);
    for (Storage st : {Storage::dense, Storage::sector}) {
        IntegratorSettings c = precise();
        c.storage = st;
        const auto tr = evolve(rho0, h, ds, grid, c);
        EXPECT_EQ(tr.storage, st == Storage::dense ? "dense" : "sector");
        for (std::size_t i = 0; i < grid.size(); ++i)
            EXPECT_LT((tr.states[i].matrix() - oracle::evolve_lindblad(rho0.matrix(), liou, grid[i])).norm(), 1e-8);
    }
}

TEST(Evolve, SectorAgreesWithDenseOnObservables) {
    const EnsemblePair p(4, 3);
    const auto h = build_mixed(p, -1.0, 0.5, 0.5);
    const auto ds = mixed_bag(p);
    const auto ops = SpinMomentOperators::for_pair(p);
    const DensityMatrix rho0 = DensityMatrix::from_pure(all_down(p));
    EXPECT_EQ(select_storage(rho0, h, ds), Storage::sector);
    const auto grid = uniform_grid(1.5, 31);
    IntegratorSettings dense, sector;
    dense.storage = Storage::dense;
    sector.storage = Storage::sector;
    const auto a = evolve(rho0, h, ds, grid, dense, ops.operators());
    const auto b = evolve(rho0, h, ds, grid, sector, ops.operators());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t k = 0; k < a.observables[i].size(); ++k)
            EXPECT_NEAR(std::abs(a.observables[i][k] - b.observables[i][k]), 0.0, 1e-10);
    EXPECT_LT((a.final_state.matrix() - b.final_state.matrix()).norm(), 1e-10);
    EXPECT_NEAR(a.final_min_eigenvalue, b.final_min_eigenvalue, 1e-10);
}

TEST(Evolve, StorageSelection) {
    const EnsemblePair p(2, 2);
    const auto tats = build_tats(p, 1.0, 0.0, 0.0);
    const DensityMatrix down = DensityMatrix::from_pure(all_down(p));
    const DensityMatrix x = DensityMatrix::from_pure(x_css(p));
    EXPECT_EQ(select_storage(down, tats, {}), Storage::sector);
    EXPECT_EQ(select_storage(x, tats, {}), Storage::dense);  // coherences across sectors
    EXPECT_EQ(select_storage(down, tats, mixed_bag(p, Placement::total)), Storage::dense);
    IntegratorSettings c;
    c.storage = Storage::sector;
    EXPECT_THROW(evolve(x, tats, {}, uniform_grid(1.0, 3), c), InvalidArgument);
}

TEST(Evolve, PureAgreesWithDensity) {
    const EnsemblePair p(5, 4);
    const auto h = co_rotating(build_oat(p, 0.8, 0.6, 2.0, 1.0));
    const auto ops = SpinMomentOperators::for_pair(p);
    const auto psi0 = x_css(p);
    const auto grid = uniform_grid(1.0, 21);
    const auto a = evolve_pure(psi0, h, grid, precise(), ops.operators());
    const auto b = evolve(DensityMatrix::from_pure(psi0), h, {}, grid, precise(), ops.operators());
    EXPECT_EQ(a.storage, "pure");
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t k = 0; k < ops.operators().size(); ++k)
            EXPECT_NEAR(std::abs(a.observables[i][k] - b.observables[i][k]), 0.0, 1e-8);
}

TEST(Evolve, ClosedEvolutionKeepsPurity) {
    const EnsemblePair p(3, 3);
    const auto tr =
        evolve(DensityMatrix::from_pure(x_css(p)), build_tats(p, 1.0, 0.2, 0.2), {}, uniform_grid(4.0, 41), precise());
    for (const auto& d : tr.diagnostics) {
        EXPECT_NEAR(d.purity, 1.0, 1e-8);
        EXPECT_LE(d.trace_error, 1e-8);
        EXPECT_LE(d.hermiticity_error, 1e-9);
    }
    EXPECT_GE(tr.final_min_eigenvalue, -1e-8);
}

TEST(Evolve, ParityConservedWithoutDissipation) {
    const EnsemblePair p(4, 3);
    const SparseMatrix par = parity_operator(p);
    const std::vector<SparseMatrix> obs{par};
    for (const auto& h : {build_oat(p, 1.0, -0.5, 0.3, 0.1), build_tats(p, 1.0, 0.3, 0.1),
                          build_mixed(p, -1.0, 0.3, 0.3)}) {
        const auto tr = evolve_pure(x_css(p), h, uniform_grid(2.0, 41), {}, obs);
        for (const auto& o : tr.observables) EXPECT_LT(std::abs(o[0] - tr.observables[0][0]), 1e-8);
    }
}

TEST(Evolve, TraceAndHermiticityUnderDissipation) {
    const EnsemblePair p(6, 6);
    const auto tr = evolve(DensityMatrix::from_pure(x_css(p)), build_tats(p, 1.0, 0.0, 0.0), mixed_bag(p),
                           uniform_grid(0.01, 21));
    for (const auto& d : tr.diagnostics) {
        EXPECT_LE(d.trace_error, 1e-8);
        EXPECT_LE(d.hermiticity_error, 1e-9);
    }
    EXPECT_GE(tr.final_min_eigenvalue, -1e-8);
}

TEST(Evolve, AdaptiveAgreesWithRk4) {
    const EnsemblePair p(3, 2);
    const auto h = build_mixed(p, -1.0, 0.0, 0.0);
    const auto ds = mixed_bag(p);
    const auto ops = SpinMomentOperators::for_pair(p);
    IntegratorSettings a;
    a.method = Method::adaptive;
    a.rtol = 1e-10;
    a.atol = 1e-13;
    const auto grid = uniform_grid(1.0, 11);
    const auto ra = evolve(DensityMatrix::from_pure(x_css(p)), h, ds, grid, a, ops.operators());
    const auto rb = evolve(DensityMatrix::from_pure(x_css(p)), h, ds, grid, {}, ops.operators());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t k = 0; k < ops.operators().size(); ++k)
            EXPECT_NEAR(std::abs(ra.observables[i][k] - rb.observables[i][k]), 0.0, 1e-7);
}

TEST(Evolve, HalvingStepBarelyMovesObservables) {
    const EnsemblePair p(5, 5);
    const auto h = build_tats(p, 1.0, 0.0, 0.0);
    const auto ops = SpinMomentOperators::for_pair(p);
    IntegratorSettings fine;
    fine.steps_per_period = 128;
    fine.drift_budget /= 32.0;  // the drift bound scales as budget^(1/5)
    const auto grid = uniform_grid(0.5, 26);
    const auto a = evolve_pure(all_down(p), h, grid, {}, ops.operators());
    const auto b = evolve_pure(all_down(p), h, grid, fine, ops.operators());
    EXPECT_GT(b.steps, a.steps);
    const auto ra = squeezing_records(a, ops, p.n_tot());
    const auto rb = squeezing_records(b, ops, p.n_tot());
    for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_NEAR(ra[i].xi_s2, rb[i].xi_s2, 1e-8);
}

TEST(Evolve, ThermalDecayReachesDetailedBalance) {
    // single spin-1/2 with n_th: stationary up population n_th / (2 n_th + 1)
    const SparseMatrix jm = collective_operator(SpinComponent::Jminus, 1).sparseView();
    const std::vector<DissipatorSpec> ds{DissipatorSpec::decay(jm, 1.0, 0.5, "J-")};
    const auto h = HamiltonianSpec::from_matrix(SparseMatrix(2, 2));
    DenseMatrix up = DenseMatrix::Zero(2, 2);
    up(1, 1) = 1.0;
    IntegratorSettings c;
    c.retain_states = true;
    const auto tr = evolve(DensityMatrix(up), h, ds, uniform_grid(40.0, 5), c);
    EXPECT_NEAR(tr.final_state.matrix()(1, 1).real(), 0.25, 1e-8);
}

TEST(Evolve, GridAndShapeValidation) {
    const EnsemblePair p(1, 1);
    const auto h = build_tats(p, 1.0, 0.0, 0.0);
    const DensityMatrix rho = DensityMatrix::from_pure(all_down(p));
    const std::vector<double> bad1{0.0}, bad2{0.1, 0.2}, bad3{0.0, 0.2, 0.2};
    EXPECT_THROW(evolve(rho, h, {}, bad1), InvalidArgument);
    EXPECT_THROW(evolve(rho, h, {}, bad2), InvalidArgument);
    EXPECT_THROW(evolve(rho, h, {}, bad3), InvalidArgument);
    EXPECT_THROW(evolve(DensityMatrix::maximally_mixed(3), h, {}, uniform_grid(1.0, 2)), InvalidArgument);
    EXPECT_THROW(uniform_grid(0.0, 3), InvalidArgument);
    EXPECT_THROW(uniform_grid(1.0, 1), InvalidArgument);
    IntegratorSettings c;
    c.steps_per_period = 0;
    EXPECT_THROW(evolve(rho, h, {}, uniform_grid(1.0, 2), c), InvalidArgument);
}

TEST(Evolve, InvariantViolationIsNumericalError) {
    const EnsemblePair p(1, 1);
    DenseMatrix bad = DenseMatrix::Zero(4, 4);
    bad(0, 0) = 1.5;
    EXPECT_THROW(evolve(DensityMatrix(bad), build_tats(p, 1.0, 0.0, 0.0), {}, uniform_grid(1.0, 3)), NumericalError);
}

TEST(Evolve, DeterministicBitForBit) {
    const EnsemblePair p(3, 3);
    const auto ops = SpinMomentOperators::for_pair(p);
    const auto run = [&] {
        return evolve(DensityMatrix::from_pure(all_down(p)), build_tats(p, 1.0, 0.0, 0.0), mixed_bag(p),
                      uniform_grid(0.3, 11), {}, ops.operators());
    };
    const auto a = run(), b = run();
    for (std::size_t i = 0; i < a.observables.size(); ++i)
        for (std::size_t k = 0; k < a.observables[i].size(); ++k) EXPECT_EQ(a.observables[i][k], b.observables[i][k]);
}

TEST(Evolve, StepBoundTracksSpectrum) {
    const EnsemblePair p(4, 4);
    const auto slow = build_tats(p, 1.0, 0.0, 0.0), fast = build_tats(p, 10.0, 0.0, 0.0);
    EXPECT_NEAR(max_step(slow, {}, 1.0, {}) / max_step(fast, {}, 1.0, {}), 10.0, 1e-9);
}

TEST(Evolve, TwoSpinCountertwistingIsDetunedRabi) {
    // |dd> <-> |uu> with coupling G and detuning Delta_s1 - Delta_s2
    const EnsemblePair p(1, 1);
    const double g = 1.0, d1 = 0.7, d2 = 0.3, det = d1 - d2;
    SparseMatrix proj(4, 4);
    proj.insert(3, 3) = 1.0;
    const std::vector<SparseMatrix> obs{proj};
    const auto grid = uniform_grid(6.0, 61);
    const auto tr = evolve_pure(all_down(p), build_tats(p, g, d1, d2), grid, precise(), obs);
    const double w = std::sqrt(4 * g * g + det * det);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_NEAR(tr.observables[i][0].real(), 4 * g * g / (w * w) * std::pow(std::sin(0.5 * w * grid[i]), 2), 1e-8);
}
