#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sivsq {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;  // column major
using Vector = Eigen::VectorXcd;

inline constexpr Complex I{0.0, 1.0};

// Two spin ensembles S1, S2; product basis is segment-1 major, m ascending in each segment.
class EnsemblePair {
public:
    EnsemblePair(int n1, int n2);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int n_tot() const { return n1_ + n2_; }
    int dim1() const { return n1_ + 1; }
    int dim2() const { return n2_ + 1; }
    int dim() const { return dim1() * dim2(); }

    // i1, i2 are Dicke indices (0 = m = -j)
    int index(int i1, int i2) const { return i1 * dim2() + i2; }
    int seg1_index(int i) const { return i / dim2(); }
    int seg2_index(int i) const { return i % dim2(); }

    // N_tot split as (ceil, floor)
    static EnsemblePair split(int n_tot);

    bool operator==(const EnsemblePair&) const = default;

private:
    int n1_;
    int n2_;
};

enum class SpinComponent { Jx, Jy, Jz, Jplus, Jminus };
enum class Segment { one, two, total };

SpinComponent parse_component(std::string_view name);
std::string_view component_name(SpinComponent c);

// spin-j representation, j = n/2, basis m = -j..j
DenseMatrix collective_operator(SpinComponent kind, int n);

struct CollectiveOperator {
    SparseMatrix matrix;
    SpinComponent component = SpinComponent::Jz;
    Segment segment = Segment::total;

    int dim() const { return static_cast<int>(matrix.rows()); }
    DenseMatrix dense() const { return DenseMatrix(matrix); }
};

// op (x) 1 for segment one, 1 (x) op for segment two
SparseMatrix embed(const DenseMatrix& op, const EnsemblePair& pair, Segment segment);

CollectiveOperator collective(const EnsemblePair& pair, SpinComponent kind, Segment segment);

class StateVector {
public:
    StateVector() = default;
    explicit StateVector(Vector amplitudes);  // normalizes

    const Vector& amplitudes() const { return amp_; }
    int dim() const { return static_cast<int>(amp_.size()); }
    double norm() const { return amp_.norm(); }

private:
    Vector amp_;
};

// all spins along (theta, phi); theta = 0 is the top Dicke state
StateVector coherent_spin_state(int n, double theta, double phi);

StateVector product_state(const StateVector& s1, const StateVector& s2);

// Tr(rho op) as sum over nonzeros of op
Complex expectation(const DenseMatrix& rho, const SparseMatrix& op);
Complex expectation(const StateVector& psi, const SparseMatrix& op);

}  // namespace sivsq
