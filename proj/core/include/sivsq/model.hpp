#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sivsq/spin_algebra.hpp"

namespace sivsq {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// All quantities in rad/s.
struct DriveParams {
    std::array<double, 4> omega{};  // Omega_1..Omega_4
    std::array<double, 4> delta{};  // delta_1..delta_4
    double nu = 0.0;
    double g_n = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;

    void validate() const;                      // throws InvalidArgument
    std::vector<std::string> regime_warnings() const;  // delta_i / Omega_i < 5
};

struct CouplingSet {
    double eps1 = 0.0, eps2 = 0.0;
    double lam1 = 0.0, lam2 = 0.0;
    double Lam1 = 0.0, Lam2 = 0.0;
    double delta_s = 0.0;
    bool balanced = true;  // eps1 == -eps2 == delta_s

    double scale() const;  // max |lambda|, |Lambda|
    double tats_cross() const { return lam1 * Lam2 - lam2 * Lam1; }
    std::vector<std::string> regime_warnings() const;  // delta_s / scale < 5
};

CouplingSet effective_couplings(const DriveParams& d);

enum class InteractionKind { general, oat, tats, mixed };
std::string_view kind_name(InteractionKind k);

InteractionKind classify(const CouplingSet& c, double tol = 1e-6);

struct HamiltonianSpec {
    InteractionKind kind = InteractionKind::general;
    std::optional<EnsemblePair> pair;  // empty for single-ensemble or custom matrices
    SparseMatrix matrix;
    std::map<std::string, double> coefficients;  // G_OAT1, G_OAT2, G_TATS, G_mix, Delta_s1, Delta_s2

    int dim() const { return static_cast<int>(matrix.rows()); }
    DenseMatrix dense() const { return DenseMatrix(matrix); }
    double coefficient(const std::string& name) const;  // 0 if absent

    static HamiltonianSpec from_matrix(SparseMatrix m);
};

// Delta_s (Jz1 - Jz2) + (1/Delta_s)[l1^2 J1+J1- - l2^2 J2+J2- - L1^2 J1-J1+ + L2^2 J2-J2+
//                                  + (l1 L2 - l2 L1)(J1+J2+ + J1-J2-)]
HamiltonianSpec build_h_eff(const CouplingSet& c, const EnsemblePair& pair);

HamiltonianSpec build_oat(const EnsemblePair& pair, double g_oat1, double g_oat2, double delta_s1, double delta_s2);
HamiltonianSpec build_tats(const EnsemblePair& pair, double g_tats, double delta_s1, double delta_s2);
HamiltonianSpec build_mixed(const EnsemblePair& pair, double g_mix, double delta_s1, double delta_s2);

// coefficient maps taken from a coupling set that satisfies the matching classify condition
HamiltonianSpec build_oat(const CouplingSet& c, const EnsemblePair& pair);
HamiltonianSpec build_tats(const CouplingSet& c, const EnsemblePair& pair);
HamiltonianSpec build_mixed(const CouplingSet& c, const EnsemblePair& pair);

double effective_decay(double gamma_m, double lam, double delta_s);

// Removes Dbar (Jz1 - Jz2), Dbar = (Delta_s1 + Delta_s2)/2; commutes with every other term.
HamiltonianSpec co_rotating(const HamiltonianSpec& h);

// exp(i pi (Jz1 + Jz2)), diagonal and unitary
SparseMatrix parity_operator(const EnsemblePair& pair);

}  // namespace sivsq
