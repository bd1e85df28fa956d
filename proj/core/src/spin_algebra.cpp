#include "sivsq/spin_algebra.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sivsq/errors.hpp"

namespace sivsq {

EnsemblePair::EnsemblePair(int n1, int n2) : n1_(n1), n2_(n2) {
    if (n1 < 1 || n2 < 1)
        throw InvalidArgument("ensemble spin counts must be >= 1, got (" + std::to_string(n1) + ", " +
                              std::to_string(n2) + ")");
}

EnsemblePair EnsemblePair::split(int n_tot) {
    if (n_tot < 2) throw InvalidArgument("N_tot must be >= 2 to split into two ensembles");
    return EnsemblePair((n_tot + 1) / 2, n_tot / 2);
}

SpinComponent parse_component(std::string_view name) {
    if (name == "Jx") return SpinComponent::Jx;
    if (name == "Jy") return SpinComponent::Jy;
    if (name == "Jz") return SpinComponent::Jz;
    if (name == "J+" || name == "Jp") return SpinComponent::Jplus;
    if (name == "J-" || name == "Jm") return SpinComponent::Jminus;
    throw InvalidArgument("unknown spin operator kind '" + std::string(name) + "'");
}

std::string_view component_name(SpinComponent c) {
    switch (c) {
        case SpinComponent::Jx: return "Jx";
        case SpinComponent::Jy: return "Jy";
        case SpinComponent::Jz: return "Jz";
        case SpinComponent::Jplus: return "J+";
        case SpinComponent::Jminus: return "J-";
    }
    return "?";
}

DenseMatrix collective_operator(SpinComponent kind, int n) {
    if (n < 1) throw InvalidArgument("collective_operator: n must be >= 1");
    const int d = n + 1;
    const double j = 0.5 * n;
    DenseMatrix jp = DenseMatrix::Zero(d, d);
    for (int k = 0; k + 1 < d; ++k) {
        const double m = -j + k;
        jp(k + 1, k) = std::sqrt((j - m) * (j + m + 1.0));
    }
    switch (kind) {
        case SpinComponent::Jplus: return jp;
        case SpinComponent::Jminus: return jp.adjoint();
        case SpinComponent::Jx: return 0.5 * (jp + jp.adjoint());
        case SpinComponent::Jy: return (jp - jp.adjoint()) / (2.0 * I);
        case SpinComponent::Jz: {
            DenseMatrix jz = DenseMatrix::Zero(d, d);
            for (int k = 0; k < d; ++k) jz(k, k) = -j + k;
            return jz;
        }
    }
    throw InvalidArgument("collective_operator: unknown kind");
}

SparseMatrix embed(const DenseMatrix& op, const EnsemblePair& pair, Segment segment) {
    const int d1 = pair.dim1(), d2 = pair.dim2();
    std::vector<Eigen::Triplet<Complex>> trips;
    if (segment == Segment::one) {
        if (op.rows() != d1 || op.cols() != d1)
            throw InvalidArgument("embed: operator dimension " + std::to_string(op.rows()) +
                                  " does not match segment-1 dimension " + std::to_string(d1));
        for (int a = 0; a < d1; ++a)
            for (int b = 0; b < d1; ++b)
                if (op(a, b) != Complex(0))
                    for (int k = 0; k < d2; ++k) trips.emplace_back(pair.index(a, k), pair.index(b, k), op(a, b));
    } else if (segment == Segment::two) {
        if (op.rows() != d2 || op.cols() != d2)
            throw InvalidArgument("embed: operator dimension " + std::to_string(op.rows()) +
                                  " does not match segment-2 dimension " + std::to_string(d2));
        for (int k = 0; k < d1; ++k)
            for (int a = 0; a < d2; ++a)
                for (int b = 0; b < d2; ++b)
                    if (op(a, b) != Complex(0)) trips.emplace_back(pair.index(k, a), pair.index(k, b), op(a, b));
    } else {
        throw InvalidArgument("embed: segment must be 1 or 2");
    }
    SparseMatrix out(pair.dim(), pair.dim());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

CollectiveOperator collective(const EnsemblePair& pair, SpinComponent kind, Segment segment) {
    CollectiveOperator op;
    op.component = kind;
    op.segment = segment;
    if (segment == Segment::total) {
        op.matrix = embed(collective_operator(kind, pair.n1()), pair, Segment::one) +
                    embed(collective_operator(kind, pair.n2()), pair, Segment::two);
    } else {
        const int n = segment == Segment::one ? pair.n1() : pair.n2();
        op.matrix = embed(collective_operator(kind, n), pair, segment);
    }
    op.matrix.makeCompressed();
    return op;
}

StateVector::StateVector(Vector amplitudes) : amp_(std::move(amplitudes)) {
    const double nrm = amp_.norm();
    if (!(nrm > 0.0)) throw InvalidArgument("StateVector: zero vector");
    amp_ /= nrm;
}

StateVector coherent_spin_state(int n, double theta, double phi) {
    if (n < 1) throw InvalidArgument("coherent_spin_state: n must be >= 1");
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    Vector amp(n + 1);
    for (int k = 0; k <= n; ++k) {
        // k = j + m spins up, n - k down
        const int up = k, down = n - k;
        const double log_binom = std::lgamma(n + 1.0) - std::lgamma(up + 1.0) - std::lgamma(down + 1.0);
        const double mag = std::exp(0.5 * log_binom) * std::pow(c, up) * std::pow(s, down);
        amp(k) = mag * std::polar(1.0, down * phi);
    }
    return StateVector(std::move(amp));
}

StateVector product_state(const StateVector& s1, const StateVector& s2) {
    const Vector& a = s1.amplitudes();
    const Vector& b = s2.amplitudes();
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return StateVector(std::move(out));
}

Complex expectation(const DenseMatrix& rho, const SparseMatrix& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols() || rho.rows() != rho.cols())
        throw InvalidArgument("expectation: dimension mismatch");
    Complex acc = 0.0;
    for (int col = 0; col < op.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(op, col); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

Complex expectation(const StateVector& psi, const SparseMatrix& op) {
    if (psi.dim() != op.rows()) throw InvalidArgument("expectation: dimension mismatch");
    return psi.amplitudes().dot(op * psi.amplitudes());
}

}  // namespace sivsq
