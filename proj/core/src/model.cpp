#include "sivsq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sivsq/errors.hpp"

namespace sivsq {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(name) + " is not finite");
}

double guarded_inverse(double den, double ref, const char* what) {
    if (std::abs(den) <= 1e-12 * std::max(1.0, ref))
        throw InvalidArgument(std::string("resonant denominator: ") + what + " = 0");
    return 1.0 / den;
}

struct SegmentOps {
    SparseMatrix jp, jm, jz, pm, mp;  // J+, J-, Jz, J+J-, J-J+
};

SegmentOps segment_ops(const EnsemblePair& pair, Segment seg) {
    const int n = seg == Segment::one ? pair.n1() : pair.n2();
    SegmentOps s;
    const DenseMatrix jp = collective_operator(SpinComponent::Jplus, n);
    const DenseMatrix jm = collective_operator(SpinComponent::Jminus, n);
    s.jp = embed(jp, pair, seg);
    s.jm = embed(jm, pair, seg);
    s.jz = embed(collective_operator(SpinComponent::Jz, n), pair, seg);
    s.pm = embed(jp * jm, pair, seg);
    s.mp = embed(jm * jp, pair, seg);
    return s;
}

HamiltonianSpec finish(InteractionKind kind, const EnsemblePair& pair, SparseMatrix m,
                       std::map<std::string, double> coeffs) {
    HamiltonianSpec h;
    h.kind = kind;
    h.pair = pair;
    m.prune(Complex(0.0));
    m.makeCompressed();
    h.matrix = std::move(m);
    h.coefficients = std::move(coeffs);
    return h;
}

}  // namespace

void DriveParams::validate() const {
    for (int i = 0; i < 4; ++i) {
        require_finite(omega[i], "omega");
        require_finite(delta[i], "delta");
    }
    require_finite(nu, "nu");
    require_finite(g_n, "g_n");
    if (g_n < 0.0) throw InvalidArgument("g_n must be non-negative");
    if (w1 != 0.0 || w2 != 0.0) throw InvalidArgument("only static drives (w1 = w2 = 0) are supported");
}

std::vector<std::string> DriveParams::regime_warnings() const {
    std::vector<std::string> out;
    for (int i = 0; i < 4; ++i) {
        if (omega[i] == 0.0) continue;
        const double r = std::abs(delta[i] / omega[i]);
        if (r < 5.0) {
            std::ostringstream os;
            os << "delta" << i + 1 << "/omega" << i + 1 << " = " << r << " < 5";
            out.push_back(os.str());
        }
    }
    return out;
}

double CouplingSet::scale() const {
    return std::max({std::abs(lam1), std::abs(lam2), std::abs(Lam1), std::abs(Lam2)});
}

std::vector<std::string> CouplingSet::regime_warnings() const {
    std::vector<std::string> out;
    const double s = scale();
    if (s > 0.0 && std::abs(delta_s) / s < 5.0) {
        std::ostringstream os;
        os << "delta_s/max|lambda| = " << std::abs(delta_s) / s << " < 5";
        out.push_back(os.str());
    }
    if (!balanced) out.push_back("eps1 != -eps2 (unbalanced detunings)");
    return out;
}

CouplingSet effective_couplings(const DriveParams& d) {
    d.validate();
    const double ref = std::max({std::abs(d.nu), std::abs(d.delta[0]), std::abs(d.delta[1]), std::abs(d.delta[2]),
                                 std::abs(d.delta[3])});
    // segment triple from (Omega_a on |1><4|, Omega_b on |2><3|, delta_a, delta_b)
    auto triple = [&](double om_a, double om_b, double de_a, double de_b, double& eps, double& lam, double& Lam) {
        eps = d.nu - de_b;
        lam = 0.0;
        Lam = 0.0;
        if (om_b != 0.0) {
            const double inv_b = guarded_inverse(de_b, ref, "delta (|2>-|3> drive)");
            const double inv_nu = guarded_inverse(d.nu, ref, "nu");
            eps -= om_b * om_b * 0.25 * inv_b;
            lam = -(inv_nu + inv_b) * om_b * d.g_n * 0.25;
        }
        if (om_a != 0.0) {
            const double inv_a = guarded_inverse(de_a, ref, "delta (|1>-|4> drive)");
            const double inv_s = guarded_inverse(de_a + de_b - d.nu, ref, "delta_a + delta_b - nu");
            eps += om_a * om_a * 0.25 * inv_a;
            Lam = -(inv_a + inv_s) * om_a * d.g_n * 0.25;
        }
    };
    CouplingSet c;
    triple(d.omega[0], d.omega[1], d.delta[0], d.delta[1], c.eps1, c.lam1, c.Lam1);
    triple(d.omega[2], d.omega[3], d.delta[2], d.delta[3], c.eps2, c.lam2, c.Lam2);
    c.delta_s = c.eps1;
    c.balanced = std::abs(c.eps1 + c.eps2) <= 1e-9 * std::max(std::abs(c.eps1), std::abs(c.eps2));
    return c;
}

std::string_view kind_name(InteractionKind k) {
    switch (k) {
        case InteractionKind::general: return "general";
        case InteractionKind::oat: return "oat";
        case InteractionKind::tats: return "tats";
        case InteractionKind::mixed: return "mixed";
    }
    return "?";
}

InteractionKind classify(const CouplingSet& c, double tol) {
    const double s = c.scale();
    if (!(s > 0.0)) return InteractionKind::general;
    const double s2 = s * s;
    const double cross = std::abs(c.tats_cross());
    const double d1 = std::abs(c.lam1 * c.lam1 - c.Lam1 * c.Lam1);
    const double d2 = std::abs(c.lam2 * c.lam2 - c.Lam2 * c.Lam2);
    if (std::abs(c.lam1) <= tol * s && std::abs(c.Lam2) <= tol * s && std::abs(c.lam2 - c.Lam1) <= tol * s)
        return InteractionKind::mixed;
    if (cross <= tol * s2 && (d1 > tol * s2 || d2 > tol * s2)) return InteractionKind::oat;
    if (d1 <= tol * s2 && d2 <= tol * s2 && cross > tol * s2) return InteractionKind::tats;
    return InteractionKind::general;
}

double HamiltonianSpec::coefficient(const std::string& name) const {
    auto it = coefficients.find(name);
    return it == coefficients.end() ? 0.0 : it->second;
}

HamiltonianSpec HamiltonianSpec::from_matrix(SparseMatrix m) {
    if (m.rows() != m.cols()) throw InvalidArgument("Hamiltonian matrix must be square");
    HamiltonianSpec h;
    m.makeCompressed();
    h.matrix = std::move(m);
    return h;
}

HamiltonianSpec build_h_eff(const CouplingSet& c, const EnsemblePair& pair) {
    if (c.delta_s == 0.0) throw InvalidArgument("build_h_eff: delta_s = 0");
    const auto s1 = segment_ops(pair, Segment::one);
    const auto s2 = segment_ops(pair, Segment::two);
    const double ds = c.delta_s;
    SparseMatrix h = ds * (s1.jz - s2.jz);
    h += (1.0 / ds) * (c.lam1 * c.lam1 * s1.pm - c.lam2 * c.lam2 * s2.pm - c.Lam1 * c.Lam1 * s1.mp +
                       c.Lam2 * c.Lam2 * s2.mp);
    const SparseMatrix pp = s1.jp * s2.jp;
    h += (c.tats_cross() / ds) * (pp + SparseMatrix(pp.adjoint()));
    return finish(InteractionKind::general, pair, std::move(h), {{"Delta_s1", ds}, {"Delta_s2", ds}});
}

HamiltonianSpec build_oat(const EnsemblePair& pair, double g_oat1, double g_oat2, double delta_s1, double delta_s2) {
    const auto s1 = segment_ops(pair, Segment::one);
    const auto s2 = segment_ops(pair, Segment::two);
    SparseMatrix h = delta_s1 * s1.jz - delta_s2 * s2.jz + g_oat1 * s1.pm + g_oat2 * s2.pm;
    return finish(InteractionKind::oat, pair, std::move(h),
                  {{"G_OAT1", g_oat1}, {"G_OAT2", g_oat2}, {"Delta_s1", delta_s1}, {"Delta_s2", delta_s2}});
}

HamiltonianSpec build_tats(const EnsemblePair& pair, double g_tats, double delta_s1, double delta_s2) {
    const auto s1 = segment_ops(pair, Segment::one);
    const auto s2 = segment_ops(pair, Segment::two);
    const SparseMatrix pp = s1.jp * s2.jp;
    SparseMatrix h = delta_s1 * s1.jz - delta_s2 * s2.jz;
    h += g_tats * (pp + SparseMatrix(pp.adjoint()));
    return finish(InteractionKind::tats, pair, std::move(h),
                  {{"G_TATS", g_tats}, {"Delta_s1", delta_s1}, {"Delta_s2", delta_s2}});
}

HamiltonianSpec build_mixed(const EnsemblePair& pair, double g_mix, double delta_s1, double delta_s2) {
    const auto s1 = segment_ops(pair, Segment::one);
    const auto s2 = segment_ops(pair, Segment::two);
    const SparseMatrix pp = s1.jp * s2.jp;
    SparseMatrix h = delta_s1 * s1.jz - delta_s2 * s2.jz;
    h += g_mix * (s1.mp + s2.pm + pp + SparseMatrix(pp.adjoint()));
    return finish(InteractionKind::mixed, pair, std::move(h),
                  {{"G_mix", g_mix}, {"Delta_s1", delta_s1}, {"Delta_s2", delta_s2}});
}

namespace {
void require_kind(const CouplingSet& c, InteractionKind want) {
    if (c.delta_s == 0.0) throw InvalidArgument("delta_s = 0");
    const auto got = classify(c);
    if (got != want)
        throw InvalidArgument("coupling set classifies as " + std::string(kind_name(got)) + ", not " +
                              std::string(kind_name(want)));
}
double shift(const CouplingSet& c, double lam, double Lam) {
    return c.delta_s + 2.0 * std::min(lam * lam, Lam * Lam) / c.delta_s;
}
}  // namespace

HamiltonianSpec build_oat(const CouplingSet& c, const EnsemblePair& pair) {
    require_kind(c, InteractionKind::oat);
    const double ds = c.delta_s;
    // segment 2 enters the effective Hamiltonian with the opposite sign
    return build_oat(pair, (c.lam1 * c.lam1 - c.Lam1 * c.Lam1) / ds, -(c.lam2 * c.lam2 - c.Lam2 * c.Lam2) / ds,
                     shift(c, c.lam1, c.Lam1), shift(c, c.lam2, c.Lam2));
}

HamiltonianSpec build_tats(const CouplingSet& c, const EnsemblePair& pair) {
    require_kind(c, InteractionKind::tats);
    const double ds = c.delta_s;
    return build_tats(pair, c.tats_cross() / ds, ds + 2.0 * c.lam1 * c.lam1 / ds, ds + 2.0 * c.lam2 * c.lam2 / ds);
}

HamiltonianSpec build_mixed(const CouplingSet& c, const EnsemblePair& pair) {
    require_kind(c, InteractionKind::mixed);
    return build_mixed(pair, -c.lam2 * c.lam2 / c.delta_s, shift(c, c.lam1, c.Lam1), shift(c, c.lam2, c.Lam2));
}

double effective_decay(double gamma_m, double lam, double delta_s) {
    if (delta_s == 0.0) throw InvalidArgument("effective_decay: delta_s = 0");
    if (gamma_m < 0.0) throw InvalidArgument("effective_decay: gamma_m must be >= 0");
    const double r = lam / delta_s;
    return gamma_m * r * r;
}

HamiltonianSpec co_rotating(const HamiltonianSpec& h) {
    if (!h.pair) throw InvalidArgument("co_rotating: Hamiltonian has no ensemble pair");
    const double dbar = 0.5 * (h.coefficient("Delta_s1") + h.coefficient("Delta_s2"));
    HamiltonianSpec out = h;
    if (dbar == 0.0) return out;
    const auto& p = *h.pair;
    out.matrix -= dbar * (embed(collective_operator(SpinComponent::Jz, p.n1()), p, Segment::one) -
                          embed(collective_operator(SpinComponent::Jz, p.n2()), p, Segment::two));
    out.matrix.prune(Complex(0.0));
    out.matrix.makeCompressed();
    out.coefficients["Delta_frame"] = dbar;
    return out;
}

SparseMatrix parity_operator(const EnsemblePair& pair) {
    SparseMatrix p(pair.dim(), pair.dim());
    p.reserve(Eigen::VectorXi::Constant(pair.dim(), 1));
    const double j = 0.5 * pair.n_tot();
    for (int i = 0; i < pair.dim(); ++i) {
        const double m = pair.seg1_index(i) + pair.seg2_index(i) - j;
        p.insert(i, i) = std::polar(1.0, kTwoPi * 0.5 * m);
    }
    p.makeCompressed();
    return p;
}

}  // namespace sivsq
