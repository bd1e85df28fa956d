#include "sivsq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "sivsq/errors.hpp"

namespace sivsq {

// ---------------------------------------------------------------- dissipators

DissipatorSpec DissipatorSpec::decay(SparseMatrix jump, double rate, double n_th, std::string label) {
    if (!(rate >= 0.0)) throw InvalidArgument("dissipator rate must be >= 0");
    if (!(n_th >= 0.0)) throw InvalidArgument("n_th must be >= 0");
    if (jump.rows() != jump.cols()) throw InvalidArgument("jump operator must be square");
    jump.makeCompressed();
    return {std::move(jump), rate, n_th, DissipatorKind::decay, std::move(label)};
}

DissipatorSpec DissipatorSpec::dephasing(SparseMatrix jump, double rate, std::string label) {
    if (!(rate >= 0.0)) throw InvalidArgument("dissipator rate must be >= 0");
    if (jump.rows() != jump.cols()) throw InvalidArgument("jump operator must be square");
    const SparseMatrix diff = jump - SparseMatrix(jump.adjoint());
    if (diff.norm() > 1e-12 * std::max(1.0, jump.norm()))
        throw InvalidArgument("dephasing jump operator must be Hermitian");
    jump.makeCompressed();
    return {std::move(jump), rate, 0.0, DissipatorKind::dephasing, std::move(label)};
}

std::vector<DissipatorSpec> decay_dissipators(const EnsemblePair& pair, double rate1, double rate2, double n_th,
                                              Placement placement) {
    std::vector<DissipatorSpec> out;
    const auto jm1 = collective(pair, SpinComponent::Jminus, Segment::one).matrix;
    const auto jm2 = collective(pair, SpinComponent::Jminus, Segment::two).matrix;
    if (placement == Placement::per_segment) {
        if (rate1 > 0.0) out.push_back(DissipatorSpec::decay(jm1, rate1, n_th, "J1-"));
        if (rate2 > 0.0) out.push_back(DissipatorSpec::decay(jm2, rate2, n_th, "J2-"));
    } else if (rate1 > 0.0) {
        out.push_back(DissipatorSpec::decay(jm1 + jm2, rate1, n_th, "J-"));
    }
    return out;
}

std::vector<DissipatorSpec> dephasing_dissipators(double gamma_d, const EnsemblePair& pair, DephasingMode mode) {
    if (!(gamma_d >= 0.0)) throw InvalidArgument("gamma_d must be >= 0");
    std::vector<DissipatorSpec> out;
    if (mode == DephasingMode::off || gamma_d == 0.0) return out;
    out.push_back(DissipatorSpec::dephasing(collective(pair, SpinComponent::Jz, Segment::one).matrix, 4.0 * gamma_d,
                                            "Jz1"));
    out.push_back(DissipatorSpec::dephasing(collective(pair, SpinComponent::Jz, Segment::two).matrix, 4.0 * gamma_d,
                                            "Jz2"));
    return out;
}

namespace {

struct Jump {
    SparseMatrix L;
    double rate;
};

std::vector<Jump> expand_jumps(std::span<const DissipatorSpec> ds, int dim) {
    std::vector<Jump> out;
    for (const auto& d : ds) {
        if (d.jump.rows() != dim) throw InvalidArgument("dissipator dimension does not match the Hamiltonian");
        if (d.rate == 0.0) continue;
        if (d.kind == DissipatorKind::dephasing) {
            out.push_back({d.jump, d.rate});
        } else {
            out.push_back({d.jump, (d.n_th + 1.0) * d.rate});
            if (d.n_th > 0.0) out.push_back({SparseMatrix(d.jump.adjoint()), d.n_th * d.rate});
        }
    }
    return out;
}

double row_sum_norm(const SparseMatrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::VectorXd rs = Eigen::VectorXd::Zero(m.rows());
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) rs(it.row()) += std::abs(it.value());
    return rs.maxCoeff();
}

// spectral spread bound of H, shifted to centre its diagonal
double hamiltonian_scale(const SparseMatrix& h) {
    if (h.rows() == 0) return 0.0;
    const Eigen::VectorXcd diag = h.diagonal();
    const double centre = 0.5 * (diag.real().maxCoeff() + diag.real().minCoeff());
    SparseMatrix shifted = h;
    for (int i = 0; i < h.rows(); ++i) shifted.coeffRef(i, i) -= centre;
    return row_sum_norm(shifted);
}

double generator_scale(const SparseMatrix& h, const std::vector<Jump>& jumps, bool density) {
    double w = hamiltonian_scale(h) * (density ? 2.0 : 1.0);
    // |spectrum of rate D[L]| <= 2 rate |L^dagger L|
    for (const auto& j : jumps) w += 2.0 * j.rate * row_sum_norm(SparseMatrix(j.L.adjoint() * j.L));
    return w;
}

// the drift term bounds norm loss of RK4 on a unitary flow; Lindblad RK4 keeps the trace exactly
double step_bound(double omega, double t_span, const IntegratorSettings& c, bool pure) {
    if (c.steps_per_period < 1) throw InvalidArgument("steps_per_period must be >= 1");
    if (!(omega > 0.0) || !(t_span > 0.0)) return std::max(t_span, 0.0);
    double h = kTwoPi / (c.steps_per_period * omega);
    if (pure && c.drift_budget > 0.0) {
        const double h_drift = std::pow(72.0 * c.drift_budget / (t_span * std::pow(omega, 6)), 0.2);
        h = std::min(h, h_drift);
    }
    if (t_span / h > 1e9) throw NumericalError("step-size underflow: more than 1e9 steps required");
    return h;
}

bool is_diagonal(const SparseMatrix& m) {
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it)
            if (it.row() != it.col() && it.value() != Complex(0.0)) return false;
    return true;
}

SparseMatrix nonhermitian_h(const SparseMatrix& h, const std::vector<Jump>& jumps) {
    SparseMatrix out = h;
    for (const auto& j : jumps) out -= (0.5 * I * j.rate) * SparseMatrix(j.L.adjoint() * j.L);
    out.makeCompressed();
    return out;
}

// ---------------------------------------------------------------- state algebra

struct BlockState {
    std::vector<DenseMatrix> b;
};

template <class M>
void lin_comb(M& out, const M& y, double a, const M& k) {
    out = y + a * k;
}
template <class M>
void add_scaled(M& acc, double a, const M& k) {
    acc += a * k;
}
template <class M>
double err_ratio(const M& e, const M& y0, const M& y1, double atol, double rtol) {
    const Eigen::ArrayXXd scale = atol + rtol * y0.array().abs().max(y1.array().abs());
    return (e.array().abs() / scale).maxCoeff();
}

void lin_comb(BlockState& out, const BlockState& y, double a, const BlockState& k) {
    out.b.resize(y.b.size());
    for (std::size_t i = 0; i < y.b.size(); ++i) out.b[i] = y.b[i] + a * k.b[i];
}
void add_scaled(BlockState& acc, double a, const BlockState& k) {
    for (std::size_t i = 0; i < acc.b.size(); ++i) acc.b[i] += a * k.b[i];
}
double err_ratio(const BlockState& e, const BlockState& y0, const BlockState& y1, double atol, double rtol) {
    double r = 0.0;
    for (std::size_t i = 0; i < e.b.size(); ++i) r = std::max(r, err_ratio(e.b[i], y0.b[i], y1.b[i], atol, rtol));
    return r;
}

template <class State, class F>
void rk4_step(State& y, double h, const F& f, State& k, State& tmp, State& acc) {
    f(y, k);
    acc = k;
    lin_comb(tmp, y, 0.5 * h, k);
    f(tmp, k);
    add_scaled(acc, 2.0, k);
    lin_comb(tmp, y, 0.5 * h, k);
    f(tmp, k);
    add_scaled(acc, 2.0, k);
    lin_comb(tmp, y, h, k);
    f(tmp, k);
    add_scaled(acc, 1.0, k);
    add_scaled(y, h / 6.0, acc);
}

// Dormand-Prince 5(4); returns error ratio, y1 holds the 5th order solution
template <class State, class F>
double dopri_step(const State& y, double h, const F& f, std::vector<State>& k, State& tmp, State& y1,
                  const IntegratorSettings& c) {
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double e[7] = {71.0 / 57600,  0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                                    22.0 / 525, -1.0 / 40};
    k.resize(7);
    f(y, k[0]);
    for (int s = 1; s < 7; ++s) {
        tmp = y;
        for (int q = 0; q < s; ++q)
            if (a[s][q] != 0.0) add_scaled(tmp, h * a[s][q], k[q]);
        f(tmp, k[s]);
        if (s == 6) y1 = tmp;  // stage 7 node equals the 5th order solution
    }
    State err;
    lin_comb(err, k[0], h * e[0] - 1.0, k[0]);  // h e0 k0
    for (int s = 1; s < 7; ++s)
        if (e[s] != 0.0) add_scaled(err, h * e[s], k[s]);
    return err_ratio(err, y, y1, c.atol, c.rtol);
}

template <class State, class F, class Sampler>
std::size_t integrate(State& y, const F& f, std::span<const double> grid, double hmax, const IntegratorSettings& c,
                      Sampler&& sample) {
    std::size_t steps = 0;
    sample(0, y);
    State k, tmp, acc, y1;
    std::vector<State> ks;
    double h_adapt = hmax;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t0 = grid[i - 1], dt = grid[i] - t0;
        if (c.method == Method::rk4) {
            const auto n = static_cast<long long>(std::max(1.0, std::ceil(dt / hmax - 1e-9)));
            const double h = dt / static_cast<double>(n);
            for (long long s = 0; s < n; ++s) rk4_step(y, h, f, k, tmp, acc);
            steps += static_cast<std::size_t>(n);
        } else {
            double done = 0.0;
            while (done < dt) {
                double h = std::min(h_adapt, dt - done);
                if (h < 1e-14 * std::max(dt, 1e-300)) throw NumericalError("step-size underflow in adaptive integrator");
                const double r = dopri_step(y, h, f, ks, tmp, y1, c);
                ++steps;
                if (r <= 1.0) {
                    y = y1;
                    done += h;
                    if (dt - done < 1e-12 * dt) done = dt;
                }
                const double fac = r > 0.0 ? 0.9 * std::pow(r, -0.2) : 5.0;
                h_adapt = std::min(hmax * 16.0, h * std::clamp(fac, 0.2, 5.0));
            }
        }
        sample(i, y);
    }
    return steps;
}

// ---------------------------------------------------------------- dense generator

class DenseGenerator {
public:
    DenseGenerator(const HamiltonianSpec& h, const std::vector<Jump>& jumps) : dim_(h.dim()) {
        heff_ = nonhermitian_h(h.matrix, jumps);
        weights_ = DenseMatrix::Zero(dim_, dim_);
        for (const auto& j : jumps) {
            if (is_diagonal(j.L)) {
                const Eigen::VectorXcd l = j.L.diagonal();
                weights_ += j.rate * (l * l.adjoint());
                has_diag_ = true;
            } else {
                general_.push_back(j);
            }
        }
    }

    void operator()(const DenseMatrix& rho, DenseMatrix& out) const {
        out.noalias() = heff_ * rho;
        tmp_ = out.adjoint();
        out -= tmp_;
        out *= -I;
        if (has_diag_) out += weights_.cwiseProduct(rho);
        if (general_.empty()) return;
        acc_.setZero(dim_, dim_);
        for (const auto& j : general_) {
            y_.noalias() = j.L * rho;
            tmp_ = y_.adjoint();
            z_.noalias() = j.L * tmp_;
            acc_ += j.rate * z_;
        }
        // L rho L^dag rounded to exact Hermiticity
        out += 0.5 * (acc_ + acc_.adjoint());
    }

private:
    int dim_;
    SparseMatrix heff_;
    DenseMatrix weights_;
    bool has_diag_ = false;
    std::vector<Jump> general_;
    mutable DenseMatrix tmp_, y_, z_, acc_;
};

// ---------------------------------------------------------------- block sector generator

// label d = i1 - i2 is conserved by all supported terms; rho stays block diagonal in d
struct SectorLayout {
    std::vector<int> block_of;
    std::vector<int> pos;
    std::vector<std::vector<int>> members;
};

SectorLayout make_layout(const EnsemblePair& p) {
    SectorLayout s;
    s.block_of.resize(p.dim());
    s.pos.resize(p.dim());
    s.members.resize(p.n1() + p.n2() + 1);
    for (int i = 0; i < p.dim(); ++i) {
        const int b = p.seg1_index(i) - p.seg2_index(i) + p.n2();
        s.block_of[i] = b;
        s.pos[i] = static_cast<int>(s.members[b].size());
        s.members[b].push_back(i);
    }
    return s;
}

std::optional<int> uniform_shift(const SparseMatrix& m, const SectorLayout& s) {
    std::optional<int> shift;
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (it.value() == Complex(0.0)) continue;
            const int d = s.block_of[it.row()] - s.block_of[it.col()];
            if (shift && *shift != d) return std::nullopt;
            shift = d;
        }
    return shift ? shift : std::optional<int>(0);
}

bool block_diagonal_state(const DenseMatrix& rho, const SectorLayout& s) {
    const double tol = 1e-14 * std::max(1.0, rho.cwiseAbs().maxCoeff());
    for (int j = 0; j < rho.cols(); ++j)
        for (int i = 0; i < rho.rows(); ++i)
            if (s.block_of[i] != s.block_of[j] && std::abs(rho(i, j)) > tol) return false;
    return true;
}

DenseMatrix extract(const SparseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    DenseMatrix out = DenseMatrix::Zero(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    // m is small in each block; look up by coefficient
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (SparseMatrix::InnerIterator it(m, cols[c]); it; ++it) {
            const auto r = std::find(rows.begin(), rows.end(), static_cast<int>(it.row()));
            if (r != rows.end()) out(r - rows.begin(), static_cast<int>(c)) = it.value();
        }
    return out;
}

// block operator stored by diagonals, offset = row - col
struct Banded {
    Eigen::Index rows = 0, cols = 0;
    std::vector<std::pair<Eigen::Index, Eigen::VectorXcd>> diags;

    static Banded from(const DenseMatrix& m) {
        Banded b{m.rows(), m.cols(), {}};
        for (Eigen::Index o = -(m.cols() - 1); o < m.rows(); ++o) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m.rows());
            bool any = false;
            for (Eigen::Index r = std::max<Eigen::Index>(0, o); r < std::min(m.rows(), m.cols() + o); ++r) {
                v(r) = m(r, r - o);
                any = any || v(r) != Complex(0.0);
            }
            if (any) b.diags.emplace_back(o, std::move(v));
        }
        return b;
    }
    Eigen::Index lo(Eigen::Index o) const { return std::max<Eigen::Index>(0, o); }
    Eigen::Index len(Eigen::Index o) const { return std::min(rows, cols + o) - lo(o); }

    // out += this * x
    void apply(const DenseMatrix& x, DenseMatrix& out) const {
        for (const auto& [o, v] : diags) {
            const auto r0 = lo(o), n = len(o);
            if (n <= 0) continue;
            out.middleRows(r0, n).array() += x.middleRows(r0 - o, n).array().colwise() * v.segment(r0, n).array();
        }
    }
};

// rate * L x L^dag as a sum of weighted shifted copies of x
struct Sandwich {
    int src = 0, dst = 0;
    struct Term {
        Eigen::Index o, p, r0, c0, nr, nc;
        DenseMatrix w;
    };
    std::vector<Term> terms;

    Sandwich(int s, int d, const Banded& l, double rate) : src(s), dst(d) {
        for (const auto& [o, a] : l.diags)
            for (const auto& [p, b] : l.diags) {
                const auto r0 = l.lo(o), c0 = l.lo(p), nr = l.len(o), nc = l.len(p);
                if (nr <= 0 || nc <= 0) continue;
                DenseMatrix w = rate * (a.segment(r0, nr) * b.segment(c0, nc).adjoint());
                terms.push_back({o, p, r0, c0, nr, nc, std::move(w)});
            }
    }
    void apply(const DenseMatrix& x, DenseMatrix& out) const {
        for (const auto& t : terms)
            out.block(t.r0, t.c0, t.nr, t.nc).array() +=
                t.w.array() * x.block(t.r0 - t.o, t.c0 - t.p, t.nr, t.nc).array();
    }
};

class SectorGenerator {
public:
    SectorGenerator(const SectorLayout& s, const SparseMatrix& h, const std::vector<Jump>& jumps) {
        const int nb = static_cast<int>(s.members.size());
        const SparseMatrix heff = nonhermitian_h(h, jumps);
        heff_.reserve(nb);
        weights_.resize(nb);
        for (int b = 0; b < nb; ++b) {
            heff_.push_back(Banded::from(extract(heff, s.members[b], s.members[b])));
            const auto n = static_cast<Eigen::Index>(s.members[b].size());
            weights_[b] = DenseMatrix::Zero(n, n);
        }
        for (const auto& j : jumps) {
            if (is_diagonal(j.L)) {
                for (int b = 0; b < nb; ++b) {
                    Eigen::VectorXcd l(s.members[b].size());
                    for (std::size_t k = 0; k < s.members[b].size(); ++k)
                        l(static_cast<Eigen::Index>(k)) = j.L.coeff(s.members[b][k], s.members[b][k]);
                    weights_[b] += j.rate * (l * l.adjoint());
                }
                has_diag_ = true;
                continue;
            }
            const int shift = *uniform_shift(j.L, s);
            for (int b = 0; b < nb; ++b) {
                const int dst = b + shift;
                if (dst < 0 || dst >= nb) continue;
                const DenseMatrix l = extract(j.L, s.members[dst], s.members[b]);
                if (l.cwiseAbs().maxCoeff() == 0.0) continue;
                maps_.emplace_back(b, dst, Banded::from(l), j.rate);
            }
        }
        std::stable_sort(maps_.begin(), maps_.end(), [](const Sandwich& x, const Sandwich& y) { return x.dst < y.dst; });
    }

    void operator()(const BlockState& rho, BlockState& out) const {
        out.b.resize(rho.b.size());
        acc_.resize(rho.b.size());
        for (std::size_t b = 0; b < rho.b.size(); ++b) {
            DenseMatrix& o = out.b[b];
            o.setZero(rho.b[b].rows(), rho.b[b].cols());
            heff_[b].apply(rho.b[b], o);
            tmp_ = o.adjoint();
            o -= tmp_;
            o *= -I;
            if (has_diag_) o.array() += weights_[b].array() * rho.b[b].array();
            if (!maps_.empty()) acc_[b].setZero(o.rows(), o.cols());
        }
        if (maps_.empty()) return;
        for (const auto& m : maps_) m.apply(rho.b[m.src], acc_[m.dst]);
        // rounded to exact Hermiticity
        for (std::size_t b = 0; b < rho.b.size(); ++b) {
            tmp_ = acc_[b].adjoint();
            out.b[b] += 0.5 * (acc_[b] + tmp_);
        }
    }

private:
    std::vector<Banded> heff_;
    std::vector<DenseMatrix> weights_;
    bool has_diag_ = false;
    std::vector<Sandwich> maps_;
    mutable std::vector<DenseMatrix> acc_;
    mutable DenseMatrix tmp_;
};

struct SectorObservable {
    struct Entry {
        int block, row, col;
        Complex v;
    };
    std::vector<Entry> entries;
};

SectorObservable sector_observable(const SparseMatrix& op, const SectorLayout& s) {
    SectorObservable o;
    for (int c = 0; c < op.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(op, c); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (s.block_of[i] != s.block_of[j]) continue;  // zero against a block-diagonal rho
            o.entries.push_back({s.block_of[j], s.pos[j], s.pos[i], it.value()});
        }
    return o;
}

Complex sector_expectation(const SectorObservable& o, const BlockState& rho) {
    Complex acc = 0.0;
    for (const auto& e : o.entries) acc += e.v * rho.b[e.block](e.row, e.col);
    return acc;
}

// ---------------------------------------------------------------- diagnostics

double herm_error(const DenseMatrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

void check_sample(const SampleDiagnostics& d, double t, const IntegratorSettings& c) {
    if (d.trace_error > c.trace_tolerance || d.hermiticity_error > c.hermiticity_tolerance || !std::isfinite(d.purity)) {
        std::ostringstream os;
        os.precision(6);
        os << "invariant violation at t = " << t << " s: trace error " << d.trace_error << " (limit "
           << c.trace_tolerance << "), hermiticity error " << d.hermiticity_error << " (limit "
           << c.hermiticity_tolerance << "), purity " << d.purity;
        throw NumericalError(os.str());
    }
}

void validate_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw InvalidArgument("time grid needs at least two samples");
    if (grid[0] != 0.0) throw InvalidArgument("time grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
}

bool fits_budget(std::size_t samples, int dim, const IntegratorSettings& c) {
    const double bytes = static_cast<double>(samples) * dim * dim * sizeof(Complex);
    return c.retain_states && bytes <= static_cast<double>(c.memory_budget);
}

}  // namespace

// ---------------------------------------------------------------- public API

DenseMatrix lindblad_rhs(const DensityMatrix& rho, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds) {
    if (rho.dim() != h.dim()) throw InvalidArgument("lindblad_rhs: dimension mismatch");
    const auto jumps = expand_jumps(ds, h.dim());
    DenseGenerator gen(h, jumps);
    DenseMatrix out;
    gen(rho.matrix(), out);
    return out;
}

double max_step(const HamiltonianSpec& h, std::span<const DissipatorSpec> ds, double t_span,
                const IntegratorSettings& control) {
    const auto jumps = expand_jumps(ds, h.dim());
    return step_bound(generator_scale(h.matrix, jumps, true), t_span, control, false);
}

std::vector<double> uniform_grid(double t_max, int samples) {
    if (!(t_max > 0.0)) throw InvalidArgument("t_max must be > 0");
    if (samples < 2) throw InvalidArgument("samples must be >= 2");
    std::vector<double> g(samples);
    for (int i = 0; i < samples; ++i) g[i] = t_max * i / (samples - 1);
    return g;
}

Storage select_storage(const DensityMatrix& rho0, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds) {
    if (!h.pair || h.pair->dim() != h.dim() || rho0.dim() != h.dim()) return Storage::dense;
    const auto layout = make_layout(*h.pair);
    const auto hs = uniform_shift(h.matrix, layout);
    if (!hs || *hs != 0) return Storage::dense;
    for (const auto& d : ds) {
        if (!uniform_shift(d.jump, layout)) return Storage::dense;
    }
    return block_diagonal_state(rho0.matrix(), layout) ? Storage::sector : Storage::dense;
}

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianSpec& h, std::span<const DissipatorSpec> ds,
                  std::span<const double> t_grid, const IntegratorSettings& control,
                  std::span<const SparseMatrix> observables) {
    validate_grid(t_grid);
    if (rho0.dim() != h.dim()) throw InvalidArgument("evolve: state and Hamiltonian dimensions differ");
    for (const auto& o : observables)
        if (o.rows() != h.dim()) throw InvalidArgument("evolve: observable dimension mismatch");

    const auto jumps = expand_jumps(ds, h.dim());
    const double hmax = step_bound(generator_scale(h.matrix, jumps, true), t_grid.back(), control, false);

    Storage storage = control.storage;
    const Storage possible = select_storage(rho0, h, ds);
    if (storage == Storage::automatic) storage = possible;
    if (storage == Storage::sector && possible != Storage::sector)
        throw InvalidArgument("evolve: sector storage requested but the problem does not conserve i1 - i2");

    Trajectory tr;
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.observables.resize(t_grid.size());
    tr.diagnostics.resize(t_grid.size());
    const bool keep = fits_budget(t_grid.size(), h.dim(), control);

    if (storage == Storage::dense) {
        tr.storage = "dense";
        DenseGenerator gen(h, jumps);
        DenseMatrix y = rho0.matrix();
        tr.steps = integrate(y, gen, t_grid, hmax, control, [&](std::size_t i, const DenseMatrix& r) {
            SampleDiagnostics d;
            d.trace_error = std::abs(r.trace() - Complex(1.0));
            d.purity = r.squaredNorm();
            d.hermiticity_error = herm_error(r);
            tr.diagnostics[i] = d;
            for (const auto& o : observables) tr.observables[i].push_back(expectation(r, o));
            if (keep) tr.states.emplace_back(r, t_grid[i]);
            check_sample(d, t_grid[i], control);
        });
        tr.final_state = DensityMatrix(std::move(y), t_grid.back());
        tr.final_min_eigenvalue = control.final_min_eigenvalue ? tr.final_state.min_eigenvalue() : 0.0;
        return tr;
    }

    tr.storage = "sector";
    const auto layout = make_layout(*h.pair);
    SectorGenerator gen(layout, h.matrix, jumps);
    std::vector<SectorObservable> sobs;
    for (const auto& o : observables) sobs.push_back(sector_observable(o, layout));
    BlockState y;
    for (const auto& m : layout.members) {
        DenseMatrix b(m.size(), m.size());
        for (std::size_t r = 0; r < m.size(); ++r)
            for (std::size_t c = 0; c < m.size(); ++c) b(r, c) = rho0.matrix()(m[r], m[c]);
        y.b.push_back(std::move(b));
    }
    auto assemble = [&](const BlockState& s) {
        DenseMatrix full = DenseMatrix::Zero(h.dim(), h.dim());
        for (std::size_t b = 0; b < layout.members.size(); ++b) {
            const auto& m = layout.members[b];
            for (std::size_t r = 0; r < m.size(); ++r)
                for (std::size_t c = 0; c < m.size(); ++c) full(m[r], m[c]) = s.b[b](r, c);
        }
        return full;
    };
    tr.steps = integrate(y, gen, t_grid, hmax, control, [&](std::size_t i, const BlockState& s) {
        SampleDiagnostics d;
        Complex trace = 0.0;
        double purity = 0.0, herm = 0.0, scale = 1.0;
        for (const auto& b : s.b) {
            trace += b.trace();
            purity += b.squaredNorm();
            scale = std::max(scale, b.cwiseAbs().maxCoeff());
        }
        for (const auto& b : s.b) herm = std::max(herm, (b - b.adjoint()).cwiseAbs().maxCoeff());
        d.trace_error = std::abs(trace - Complex(1.0));
        d.purity = purity;
        d.hermiticity_error = herm / scale;
        tr.diagnostics[i] = d;
        for (const auto& o : sobs) tr.observables[i].push_back(sector_expectation(o, s));
        if (keep) tr.states.emplace_back(assemble(s), t_grid[i]);
        check_sample(d, t_grid[i], control);
    });
    double min_eig = 0.0;
    bool first = true;
    for (const auto& b : y.b) {
        if (b.size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
        const double e = es.eigenvalues().minCoeff();
        min_eig = first ? e : std::min(min_eig, e);
        first = false;
    }
    tr.final_min_eigenvalue = min_eig;
    tr.final_state = DensityMatrix(assemble(y), t_grid.back());
    return tr;
}

Trajectory evolve_pure(const StateVector& psi0, const HamiltonianSpec& h, std::span<const double> t_grid,
                       const IntegratorSettings& control, std::span<const SparseMatrix> observables) {
    validate_grid(t_grid);
    if (psi0.dim() != h.dim()) throw InvalidArgument("evolve_pure: state and Hamiltonian dimensions differ");
    for (const auto& o : observables)
        if (o.rows() != h.dim()) throw InvalidArgument("evolve_pure: observable dimension mismatch");
    const double hmax = step_bound(generator_scale(h.matrix, {}, false), t_grid.back(), control, true);

    Trajectory tr;
    tr.storage = "pure";
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.observables.resize(t_grid.size());
    tr.diagnostics.resize(t_grid.size());
    const bool keep = fits_budget(t_grid.size(), h.dim(), control);
    const SparseMatrix gen_m = (-I) * h.matrix;
    auto gen = [&](const Vector& v, Vector& out) { out.noalias() = gen_m * v; };

    Vector y = psi0.amplitudes();
    tr.steps = integrate(y, gen, t_grid, hmax, control, [&](std::size_t i, const Vector& v) {
        SampleDiagnostics d;
        const double n2 = v.squaredNorm();
        d.trace_error = std::abs(n2 - 1.0);
        d.purity = n2 * n2;
        d.hermiticity_error = 0.0;
        tr.diagnostics[i] = d;
        for (const auto& o : observables) tr.observables[i].push_back(v.dot(o * v));
        if (keep) tr.states.emplace_back(v * v.adjoint(), t_grid[i]);
        check_sample(d, t_grid[i], control);
    });
    tr.final_state = DensityMatrix(y * y.adjoint(), t_grid.back());
    tr.final_min_eigenvalue = 0.0;  // rank one
    return tr;
}

}  // namespace sivsq
