#include "sivsq/fullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sivsq/dynamics.hpp"
#include "sivsq/errors.hpp"
#include "sivsq/squeezing.hpp"

namespace sivsq {

namespace {

using Mat4 = Eigen::Matrix4cd;

Mat4 lvl(int a, int b) {
    Mat4 m = Mat4::Zero();
    m(a - 1, b - 1) = 1.0;
    return m;
}

int ipow(int base, int e) {
    int r = 1;
    while (e-- > 0) r *= base;
    return r;
}

// O on one site, P on the phonon, identity elsewhere
SparseMatrix site_op(const FullModelParams& p, int site, const Mat4& o, const DenseMatrix& ph) {
    const int dph = p.n_ph_max + 1, S = p.sites(), sd = p.spin_dim();
    const int stride = ipow(4, S - 1 - site);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int s = 0; s < sd; ++s) {
        const int level = (s / stride) % 4;
        for (int lo = 0; lo < 4; ++lo) {
            const Complex v = o(lo, level);
            if (v == Complex(0.0)) continue;
            const int s2 = s + (lo - level) * stride;
            for (int n = 0; n < dph; ++n)
                for (int m = 0; m < dph; ++m)
                    if (ph(m, n) != Complex(0.0)) trips.emplace_back(s2 * dph + m, s * dph + n, v * ph(m, n));
        }
    }
    SparseMatrix out(p.dim(), p.dim());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

DenseMatrix annihilation(int n_max) {
    DenseMatrix a = DenseMatrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

SparseMatrix phonon_op(const FullModelParams& p, const DenseMatrix& ph) {
    // identity on the spins: any site with identity works
    return site_op(p, 0, Mat4::Identity(), ph);
}

// J+ (x) 1 summed over one segment's sites, J+ = |2><1|
SparseMatrix segment_raise(const FullModelParams& p, int seg) {
    const DenseMatrix id = DenseMatrix::Identity(p.n_ph_max + 1, p.n_ph_max + 1);
    SparseMatrix out(p.dim(), p.dim());
    const int first = seg == 1 ? 0 : p.n1, last = seg == 1 ? p.n1 : p.sites();
    for (int s = first; s < last; ++s) out += site_op(p, s, lvl(2, 1), id);
    return out;
}

double binom(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

struct Eig {
    Eigen::VectorXd e;
    DenseMatrix v;
};

Eig hermitian_eig(const DenseMatrix& h) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

DenseMatrix propagate(const Eig& eig, const DenseMatrix& rho0_eigbasis, double t) {
    const int d = static_cast<int>(eig.e.size());
    DenseMatrix r(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) r(i, j) = rho0_eigbasis(i, j) * std::polar(1.0, -(eig.e(i) - eig.e(j)) * t);
    return eig.v * r * eig.v.adjoint();
}

}  // namespace

void FullModelParams::validate() const {
    drives.validate();
    if (n1 < 0 || n2 < 0 || n1 > 2 || n2 > 2 || n1 + n2 < 1)
        throw InvalidArgument("full model supports 0..2 spins per segment and at least one spin");
    if (n_ph_max < 2) throw InvalidArgument("n_ph_max must be >= 2");
    if (static_cast<long long>(spin_dim()) * (n_ph_max + 1) > 4096)
        throw InvalidArgument("full model dimension " + std::to_string(dim()) + " exceeds the 4096 cap");
    if (!(gamma_m >= 0.0)) throw InvalidArgument("gamma_m must be >= 0");
}

int FullModelParams::spin_dim() const { return ipow(4, sites()); }

DenseMatrix build_full_hamiltonian(const FullModelParams& p) {
    p.validate();
    const auto& d = p.drives;
    const DenseMatrix id = DenseMatrix::Identity(p.n_ph_max + 1, p.n_ph_max + 1);
    const DenseMatrix a = annihilation(p.n_ph_max);
    const Mat4 c = lvl(3, 1) + lvl(4, 2);
    SparseMatrix h(p.dim(), p.dim());
    for (int s = 0; s < p.sites(); ++s) {
        const bool seg1 = s < p.n1;
        const double om_a = seg1 ? d.omega[0] : d.omega[2];
        const double om_b = seg1 ? d.omega[1] : d.omega[3];
        const double de_a = seg1 ? d.delta[0] : d.delta[2];
        const double de_b = seg1 ? d.delta[1] : d.delta[3];
        Mat4 hs = (d.nu - de_b) * lvl(2, 2) + d.nu * lvl(3, 3) + de_a * lvl(4, 4) +
                  0.5 * om_a * (lvl(1, 4) + lvl(4, 1)) + 0.5 * om_b * (lvl(2, 3) + lvl(3, 2));
        h += site_op(p, s, hs, id);
        const SparseMatrix coup = site_op(p, s, c, a);
        h += d.g_n * (coup + SparseMatrix(coup.adjoint()));
    }
    return DenseMatrix(h);
}

DenseMatrix full_parity_operator(const FullModelParams& p) {
    p.validate();
    const int dph = p.n_ph_max + 1;
    DenseMatrix out = DenseMatrix::Zero(p.dim(), p.dim());
    for (int s = 0; s < p.spin_dim(); ++s) {
        int odd = 0, rest = s;
        for (int k = 0; k < p.sites(); ++k, rest /= 4) {
            const int level = rest % 4;
            if (level == 1 || level == 2) ++odd;  // |2>, |3>
        }
        for (int n = 0; n < dph; ++n) out(s * dph + n, s * dph + n) = ((odd + n) % 2 == 0) ? 1.0 : -1.0;
    }
    return out;
}

DenseMatrix phonon_number_operator(const FullModelParams& p) {
    p.validate();
    const DenseMatrix a = annihilation(p.n_ph_max);
    return DenseMatrix(phonon_op(p, a.adjoint() * a));
}

DenseMatrix full_ground_state(const FullModelParams& p) {
    p.validate();
    DenseMatrix r = DenseMatrix::Zero(p.dim(), p.dim());
    r(0, 0) = 1.0;  // all sites |1>, n = 0
    return r;
}

FullTrajectory evolve_full(const FullModelParams& p, const DenseMatrix& rho0, std::span<const double> t_grid) {
    p.validate();
    if (rho0.rows() != p.dim() || rho0.cols() != p.dim()) throw InvalidArgument("evolve_full: state dimension mismatch");
    if (t_grid.empty() || t_grid[0] != 0.0) throw InvalidArgument("evolve_full: time grid must start at 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("evolve_full: time grid must be increasing");

    const DenseMatrix h = build_full_hamiltonian(p);
    FullTrajectory out;
    out.times.assign(t_grid.begin(), t_grid.end());

    if (p.gamma_m == 0.0) {
        const Eig eig = hermitian_eig(h);
        const DenseMatrix r0 = eig.v.adjoint() * rho0 * eig.v;
        for (double t : t_grid) out.states.push_back(propagate(eig, r0, t));
        return out;
    }

    const SparseMatrix hs = h.sparseView();
    const SparseMatrix a = phonon_op(p, annihilation(p.n_ph_max));
    const SparseMatrix ad = a.adjoint();
    const SparseMatrix num = ad * a;
    const double g = p.gamma_m;
    auto lind = [&](const DenseMatrix& r) -> DenseMatrix {
        DenseMatrix x = hs * r;
        DenseMatrix out_m = -I * (x - x.adjoint());
        DenseMatrix y = a * r;
        DenseMatrix z = a * y.adjoint();
        DenseMatrix nr = num * r;
        out_m += g * (z.adjoint() - 0.5 * (nr + nr.adjoint()));
        return out_m;
    };
    const double norm_l = 2.0 * h.cwiseAbs().rowwise().sum().maxCoeff() + 2.0 * g * p.n_ph_max;
    DenseMatrix r = rho0;
    out.states.push_back(r);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double dt = t_grid[i] - t_grid[i - 1];
        const auto n_sub = static_cast<long long>(std::max(1.0, std::ceil(dt * norm_l / 0.5)));
        if (n_sub > 100000000LL) throw NumericalError("evolve_full: damped propagation needs too many substeps");
        const double tau = dt / static_cast<double>(n_sub);
        for (long long s = 0; s < n_sub; ++s) {
            DenseMatrix term = r, acc = r;
            for (int k = 1; k <= 60; ++k) {
                term = (tau / k) * lind(term);
                acc += term;
                if (term.cwiseAbs().maxCoeff() < 1e-18) break;
            }
            r = std::move(acc);
        }
        out.states.push_back(r);
    }
    return out;
}

ReducedState reduce_to_spins(const DenseMatrix& rho_full, const FullModelParams& p, double leakage_threshold) {
    p.validate();
    if (rho_full.rows() != p.dim()) throw InvalidArgument("reduce_to_spins: dimension mismatch");
    const int dph = p.n_ph_max + 1, S = p.sites(), nq = 1 << S;
    std::vector<int> spin_index(nq);
    for (int q = 0; q < nq; ++q) {
        int s = 0;
        for (int k = 0; k < S; ++k) {
            const int bit = (q >> (S - 1 - k)) & 1;  // 0 = |1>, 1 = |2>
            s = 4 * s + bit;
        }
        spin_index[q] = s;
    }
    DenseMatrix rq = DenseMatrix::Zero(nq, nq);
    for (int a = 0; a < nq; ++a)
        for (int b = 0; b < nq; ++b)
            for (int n = 0; n < dph; ++n) rq(a, b) += rho_full(spin_index[a] * dph + n, spin_index[b] * dph + n);
    const double tr = rq.trace().real();
    const double total = rho_full.trace().real();
    if (!(tr > 0.0)) throw NumericalError("reduce_to_spins: no population in the spin subspace");
    ReducedState out;
    out.leakage = total - tr;
    out.valid = out.leakage <= leakage_threshold;
    out.qubits = DensityMatrix(rq / tr);
    return out;
}

DenseMatrix dicke_isometry(int n1, int n2) {
    if (n1 < 1 || n2 < 1 || n1 + n2 > 12) throw InvalidArgument("dicke_isometry: unsupported spin counts");
    const int S = n1 + n2, nq = 1 << S;
    DenseMatrix q = DenseMatrix::Zero(nq, (n1 + 1) * (n2 + 1));
    for (int b = 0; b < nq; ++b) {
        int k1 = 0, k2 = 0;
        for (int k = 0; k < S; ++k) {
            const int bit = (b >> (S - 1 - k)) & 1;
            (k < n1 ? k1 : k2) += bit;
        }
        q(b, k1 * (n2 + 1) + k2) = 1.0 / std::sqrt(binom(n1, k1) * binom(n2, k2));
    }
    return q;
}

DenseMatrix sw_transform(const FullModelParams& p, const CouplingSet& c) {
    p.validate();
    if (c.delta_s == 0.0) throw InvalidArgument("sw_transform: delta_s = 0");
    const SparseMatrix a = phonon_op(p, annihilation(p.n_ph_max));
    const SparseMatrix ad = a.adjoint();
    const SparseMatrix j1p = segment_raise(p, 1), j2p = segment_raise(p, 2);
    const SparseMatrix j1m = j1p.adjoint(), j2m = j2p.adjoint();
    const double ds = c.delta_s;
    SparseMatrix s = (c.lam1 / ds) * SparseMatrix(a * j1p - ad * j1m);
    s += (c.Lam1 / ds) * SparseMatrix(ad * j1p - a * j1m);
    s += (c.lam2 / ds) * SparseMatrix(ad * j2m - a * j2p);
    s += (c.Lam2 / ds) * SparseMatrix(a * j2m - ad * j2p);
    // S anti-Hermitian: exp(S) = W exp(-i D) W^dagger with iS = W D W^dagger
    const Eig eig = hermitian_eig(I * DenseMatrix(s));
    Eigen::VectorXcd ph(eig.e.size());
    for (Eigen::Index i = 0; i < eig.e.size(); ++i) ph(i) = std::polar(1.0, -eig.e(i));
    return eig.v * ph.asDiagonal() * eig.v.adjoint();
}

double effective_period(const CouplingSet& c) {
    if (c.delta_s == 0.0) throw InvalidArgument("effective_period: delta_s = 0");
    const double g = std::max({std::abs(c.tats_cross()), c.lam1 * c.lam1, c.Lam1 * c.Lam1, c.lam2 * c.lam2,
                               c.Lam2 * c.Lam2}) /
                     std::abs(c.delta_s);
    return g > 0.0 ? kTwoPi * 0.5 / g : 0.0;
}

OracleReport compare_reduction(const FullModelParams& p, std::span<const double> t_grid, double fidelity_threshold,
                               double leakage_threshold) {
    p.validate();
    if (p.n1 < 1 || p.n2 < 1) throw InvalidArgument("compare_reduction needs spins in both segments");
    OracleReport rep;
    rep.couplings = effective_couplings(p.drives);
    rep.period = effective_period(rep.couplings);
    const EnsemblePair pair(p.n1, p.n2);

    const Eig eff = hermitian_eig(build_h_eff(rep.couplings, pair).dense());
    Vector e0 = Vector::Zero(pair.dim());
    e0(0) = 1.0;  // all down
    const Vector c0 = eff.v.adjoint() * e0;
    const DenseMatrix iso = dicke_isometry(p.n1, p.n2);

    const DenseMatrix u = sw_transform(p, rep.couplings);
    const DenseMatrix rho0 = u.adjoint() * full_ground_state(p) * u;
    const auto traj = evolve_full(p, rho0, t_grid);
    const DenseMatrix num = phonon_number_operator(p);

    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        Vector ct(c0.size());
        for (Eigen::Index k = 0; k < c0.size(); ++k) ct(k) = c0(k) * std::polar(1.0, -eff.e(k) * t);
        const Vector target = iso * (eff.v * ct);
        const DenseMatrix& r = traj.states[i];
        const auto bare = reduce_to_spins(r, p, leakage_threshold);
        const auto dressed = reduce_to_spins(u * r * u.adjoint(), p, leakage_threshold);
        OracleRow row;
        row.t = t;
        row.fidelity = target.dot(dressed.qubits.matrix() * target).real();
        row.fidelity_bare = target.dot(bare.qubits.matrix() * target).real();
        row.leakage = bare.leakage;
        row.phonon_mean = (num.cwiseProduct(r.transpose())).sum().real();
        rep.min_fidelity = std::min(rep.min_fidelity, row.fidelity);
        rep.min_fidelity_bare = std::min(rep.min_fidelity_bare, row.fidelity_bare);
        rep.max_leakage = std::max(rep.max_leakage, row.leakage);
        rep.max_phonon = std::max(rep.max_phonon, row.phonon_mean);
        rep.rows.push_back(row);
    }
    rep.passed = rep.min_fidelity >= fidelity_threshold && rep.max_leakage <= leakage_threshold;
    return rep;
}

std::vector<DephasingRow> exact_dephasing_reference(int n, double gamma_d, std::span<const double> t_grid,
                                                    double chi) {
    if (n < 1 || n > 4) throw InvalidArgument("exact_dephasing_reference supports 1..4 spins");
    if (!(gamma_d >= 0.0)) throw InvalidArgument("gamma_d must be >= 0");
    const int nq = 1 << n;
    // single-site Pauli halves, qubit bit 1 = up
    auto site = [&](int k, const Eigen::Matrix2cd& o) {
        std::vector<Eigen::Triplet<Complex>> trips;
        const int shift = n - 1 - k;
        for (int b = 0; b < nq; ++b) {
            const int bit = (b >> shift) & 1;
            for (int nb = 0; nb < 2; ++nb) {
                const Complex v = o(nb, bit);
                if (v != Complex(0.0)) trips.emplace_back(b + ((nb - bit) << shift), b, v);
            }
        }
        SparseMatrix m(nq, nq);
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    };
    Eigen::Matrix2cd sx, sy, sz;  // basis (down, up)
    sx << 0, 1, 1, 0;
    sy << 0, I, -I, 0;
    sz << -1, 0, 0, 1;
    SparseMatrix jx(nq, nq), jy(nq, nq), jz(nq, nq);
    std::vector<DissipatorSpec> exact_ds;
    for (int k = 0; k < n; ++k) {
        jx += 0.5 * site(k, sx);
        jy += 0.5 * site(k, sy);
        const SparseMatrix z = site(k, sz);
        jz += 0.5 * z;
        if (gamma_d > 0.0) exact_ds.push_back(DissipatorSpec::dephasing(z, gamma_d, "sz" + std::to_string(k)));
    }
    const SpinMomentOperators exact_ops(jx, jy, jz);
    IntegratorSettings ctl;
    ctl.final_min_eigenvalue = false;
    ctl.steps_per_period = 512;
    const DensityMatrix rho_exact(DenseMatrix::Constant(nq, nq, 1.0 / nq));  // CSS along x
    const auto h_exact = HamiltonianSpec::from_matrix(SparseMatrix(chi * SparseMatrix(jz * jz)));
    const auto tr_exact = evolve(rho_exact, h_exact, exact_ds, t_grid, ctl, exact_ops.operators());

    const auto coll_ops = SpinMomentOperators::for_ensemble(n);
    const SparseMatrix jz_d = collective_operator(SpinComponent::Jz, n).sparseView();
    std::vector<DissipatorSpec> coll_ds;
    if (gamma_d > 0.0) coll_ds.push_back(DissipatorSpec::dephasing(jz_d, 4.0 * gamma_d, "Jz"));
    const auto h_coll = HamiltonianSpec::from_matrix(SparseMatrix(chi * SparseMatrix(jz_d * jz_d)));
    const auto tr_coll = evolve(DensityMatrix::from_pure(coherent_spin_state(n, 0.25 * kTwoPi, 0.0)), h_coll,
                                coll_ds, t_grid, ctl, coll_ops.operators());

    std::vector<DephasingRow> rows;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const auto me = exact_ops.from_expectations(tr_exact.observables[i]);
        const auto mc = coll_ops.from_expectations(tr_coll.observables[i]);
        DephasingRow r;
        r.t = t_grid[i];
        r.jx_exact = me.mean(0);
        r.jx_collective = mc.mean(0);
        r.var_exact = min_transverse_variance(me);
        r.var_collective = min_transverse_variance(mc);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace sivsq
