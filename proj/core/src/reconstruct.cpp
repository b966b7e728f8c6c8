#include "cqlab/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace cqlab {

namespace {

using Eigen::MatrixXcd;
using Triplet = Eigen::Triplet<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

const Complex kI{0.0, 1.0};

MatrixXcd matrix_polynomial(const MatrixXcd& X, const std::vector<double>& c) {
  const auto n = X.rows();
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (std::size_t k = c.size(); k-- > 0;) {
    out = (out * X).eval();
    out.diagonal().array() += c[k];
  }
  return out;
}

std::vector<double> derivative_coefficients(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

// Real coordinates of a Hermitian (m+1)-square matrix whose corner (m, m) is
// left out: the commutators on the leading m x m block never reach it.
class HermitianCoordinates {
 public:
  explicit HermitianCoordinates(int m) : m_(m), n_(m + 1) {}

  int size() const { return n_ * n_ - 1; }

  // Calls f(variable, coefficient) for the entry H(u, v).
  template <class F>
  void entry(int u, int v, F&& f) const {
    if (u == v) {
      f(u, Complex(1.0));
    } else if (u < v) {
      const int base = pair_base(u, v);
      f(base, Complex(1.0));
      f(base + 1, kI);
    } else {
      const int base = pair_base(v, u);
      f(base, Complex(1.0));
      f(base + 1, -kI);
    }
  }

  MatrixXcd assemble(const Eigen::VectorXd& x) const {
    MatrixXcd H = MatrixXcd::Zero(n_, n_);
    for (int i = 0; i < m_; ++i) H(i, i) = x[i];
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        const int base = pair_base(i, j);
        H(i, j) = Complex(x[base], x[base + 1]);
        H(j, i) = std::conj(H(i, j));
      }
    }
    return H;
  }

 private:
  int pair_base(int i, int j) const { return m_ + 2 * (i * n_ - i * (i + 1) / 2 + (j - i - 1)); }

  int m_;
  int n_;
};

struct LinearSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
};

// Rows: real and imaginary parts of the interior entries of i[H,X] and i[H,P],
// optionally followed by the trace gauge row.
LinearSystem constraint_system(const OperatorTriple& ops, bool with_gauge) {
  const int m = ops.interior();
  const int n = m + 1;
  const HermitianCoordinates coords(m);
  const MatrixXcd targets[2] = {(ops.hbar / ops.mass) * ops.P.topLeftCorner(m, m),
                                ops.hbar * ops.F.topLeftCorner(m, m)};
  const MatrixXcd* generators[2] = {&ops.X, &ops.P};

  std::vector<Triplet> triplets;
  const long long mm = static_cast<long long>(m) * m;
  const long long rows = 4 * mm + (with_gauge ? 1 : 0);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);

  for (int block = 0; block < 2; ++block) {
    const MatrixXcd& G = *generators[block];
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) {
        const long long re_row = 2 * block * mm + static_cast<long long>(a) * m + c;
        const long long im_row = re_row + mm;
        auto emit = [&](Complex scale) {
          return [&, scale](int var, Complex coef) {
            const Complex g = scale * coef;
            if (g.real() != 0.0) triplets.emplace_back(re_row, var, g.real());
            if (g.imag() != 0.0) triplets.emplace_back(im_row, var, g.imag());
          };
        };
        // i (H G)_{ac} = i sum_k H_{ak} G_{kc};  -i (G H)_{ac} = -i sum_k G_{ak} H_{kc}
        for (int k = 0; k < n; ++k) {
          if (G(k, c) != 0.0) coords.entry(a, k, emit(kI * G(k, c)));
          if (G(a, k) != 0.0) coords.entry(k, c, emit(-kI * G(a, k)));
        }
        b[re_row] = targets[block](a, c).real();
        b[im_row] = targets[block](a, c).imag();
      }
    }
  }
  if (with_gauge) {
    for (int i = 0; i < m; ++i) triplets.emplace_back(rows - 1, i, 1.0);
    b[rows - 1] = ops.reference_hamiltonian().topLeftCorner(m, m).trace().real();
  }

  LinearSystem sys;
  sys.A.resize(rows, coords.size());
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  sys.b = std::move(b);
  return sys;
}

bool is_superdiagonal(const MatrixXcd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (j != i + 1 && std::abs(a(i, j)) > 1e-12 * scale) return false;
  return true;
}

constexpr double kRankTolerance = 1e-9;

}  // namespace

MatrixXcd OperatorTriple::reference_hamiltonian() const { return P * P / (2.0 * mass) + VX; }

OperatorTriple build_operators(int N, const PhysicsParams& phys, const PotentialSpec& V, int buffer, double omega0) {
  phys.validate();
  if (N < 16) throw std::invalid_argument("build_operators: N must be at least 16");
  if (!(omega0 > 0.0)) throw std::invalid_argument("build_operators: omega0 must be positive");
  if (V.time_dependent()) throw std::invalid_argument("build_operators: potential must be static");
  auto coeffs = V.polynomial_coefficients();
  if (!coeffs) throw std::invalid_argument("build_operators: potential must be a polynomial");
  while (coeffs->size() > 1 && coeffs->back() == 0.0) coeffs->pop_back();
  const int degree = static_cast<int>(coeffs->size()) - 1;
  if (degree > 4) throw std::invalid_argument("build_operators: polynomial degree above 4");
  if (buffer < 0) buffer = 4 + 2 * degree;
  if (buffer < 2 * degree) throw std::invalid_argument("build_operators: buffer smaller than 2 deg(V)");
  if (N - buffer < 2) throw std::invalid_argument("build_operators: buffer leaves no interior");

  OperatorTriple ops;
  ops.dimension = N;
  ops.buffer = buffer;
  ops.omega0 = omega0;
  ops.hbar = phys.hbar;
  ops.mass = phys.mass;
  ops.position_scale = std::sqrt(phys.hbar / (2.0 * phys.mass * omega0));
  ops.momentum_scale = phys.hbar / (2.0 * ops.position_scale);

  MatrixXcd a = MatrixXcd::Zero(N, N);
  for (int j = 0; j + 1 < N; ++j) a(j, j + 1) = std::sqrt(static_cast<double>(j + 1));
  const MatrixXcd ad = a.adjoint();
  ops.X = ops.position_scale * (a + ad);
  ops.P = kI * ops.momentum_scale * (ad - a);
  ops.VX = matrix_polynomial(ops.X, *coeffs);
  ops.F = -matrix_polynomial(ops.X, derivative_coefficients(*coeffs));
  return ops;
}

double canonical_defect(const OperatorTriple& ops) {
  const int m = ops.interior();
  const MatrixXcd c = ops.X * ops.P - ops.P * ops.X;
  MatrixXcd d = c.topLeftCorner(m, m);
  d.diagonal().array() -= kI * ops.hbar;
  return d.cwiseAbs().maxCoeff();
}

ConstraintResiduals constraint_residuals(const OperatorTriple& ops, const MatrixXcd& H) {
  const int m = ops.interior();
  const int n = m + 1;
  if (H.rows() != n || H.cols() != n) throw std::invalid_argument("constraint_residuals: H must be interior + 1 square");
  const MatrixXcd Xn = ops.X.topLeftCorner(n, n);
  const MatrixXcd Pn = ops.P.topLeftCorner(n, n);
  const MatrixXcd rx = (kI * (H * Xn - Xn * H)).topLeftCorner(m, m) - (ops.hbar / ops.mass) * Pn.topLeftCorner(m, m);
  const MatrixXcd rp = (kI * (H * Pn - Pn * H)).topLeftCorner(m, m) - ops.hbar * ops.F.topLeftCorner(m, m);
  return {rx.norm(), rp.norm()};
}

ReconstructionResult solve_hamiltonian(const OperatorTriple& ops, const PhysicsParams& phys) {
  phys.validate();
  if (phys.hbar != ops.hbar || phys.mass != ops.mass)
    throw std::invalid_argument("solve_hamiltonian: physics parameters differ from the operator construction");
  const int m = ops.interior();
  const LinearSystem sys = constraint_system(ops, true);

  const SparseMatrix normal = sys.A.transpose() * sys.A;
  const Eigen::VectorXd rhs = sys.A.transpose() * sys.b;
  Eigen::SimplicialLDLT<SparseMatrix> solver(normal);
  if (solver.info() != Eigen::Success) throw std::domain_error("solve_hamiltonian: factorization failed");
  const Eigen::VectorXd pivots = solver.vectorD().cwiseAbs();
  if (!(pivots.minCoeff() > 1e-13 * pivots.maxCoeff()))
    throw std::domain_error("solve_hamiltonian: normal equations are singular");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) throw std::domain_error("solve_hamiltonian: solve failed");

  ReconstructionResult r;
  r.H_extended = HermitianCoordinates(m).assemble(x);
  r.H_solved = r.H_extended.topLeftCorner(m, m);
  r.H_reference = ops.reference_hamiltonian().topLeftCorner(m, m);
  const ConstraintResiduals res = constraint_residuals(ops, r.H_extended);
  r.residual_x = res.residual_x;
  r.residual_p = res.residual_p;
  r.gauge_constant = (r.H_solved - r.H_reference).trace().real() / m;
  r.block_error = (r.H_solved - r.H_reference).norm() / r.H_reference.norm();
  return r;
}

std::size_t kernel_of_constraints(const OperatorTriple& ops) {
  const int m = ops.interior();
  const int n = m + 1;
  const MatrixXcd lowering = 0.5 * (ops.X / ops.position_scale + kI * ops.P / ops.momentum_scale);

  if (!is_superdiagonal(lowering)) {
    // Generic path: eigenvalues of the dense normal matrix.
    const LinearSystem sys = constraint_system(ops, false);
    const Eigen::MatrixXd normal = Eigen::MatrixXd(sys.A.transpose() * sys.A);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(normal, Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .cwiseMax(0.0)
                                   .cwiseSqrt();
    const double cut = kRankTolerance * ev.maxCoeff();
    return static_cast<std::size_t>((ev.array() <= cut).count());
  }

  // With a strictly superdiagonal, [H,a] and [H,a^dagger] on the interior couple
  // only entries of H on a single diagonal, so the kernel splits by diagonal.
  // The equations are an invertible recombination of the X and P ones, and the
  // complex kernel is closed under adjoints, so its complex dimension equals the
  // real dimension of the Hermitian kernel.
  auto up = [&](int k) { return lowering(k, k + 1); };  // a_{k,k+1}
  struct Block {
    int unknowns;
    Eigen::VectorXd singular_values;
  };
  std::vector<Block> blocks;
  double smax = 0.0;
  for (int e = -(n - 1); e <= n - 1; ++e) {
    std::vector<int> rows_of;  // unknown i stands for H(i, i + e)
    for (int i = std::max(0, -e); i < n && i + e < n; ++i)
      if (!(e == 0 && i == m)) rows_of.push_back(i);
    const int u = static_cast<int>(rows_of.size());
    if (u == 0) continue;
    auto col = [&](int i) -> int {
      auto it = std::lower_bound(rows_of.begin(), rows_of.end(), i);
      return (it != rows_of.end() && *it == i) ? static_cast<int>(it - rows_of.begin()) : -1;
    };
    std::vector<Eigen::VectorXcd> eqs;
    // [H,a]_{ij} = H_{i,j-1} a_{j-1,j} - a_{i,i+1} H_{i+1,j}, j = i + e + 1
    for (int i = 0; i < m; ++i) {
      const int j = i + e + 1;
      if (j < 0 || j >= m) continue;
      Eigen::VectorXcd row = Eigen::VectorXcd::Zero(u);
      if (j >= 1 && col(i) >= 0) row[col(i)] += up(j - 1);
      if (col(i + 1) >= 0) row[col(i + 1)] -= up(i);
      eqs.push_back(row);
    }
    // [H,a^dagger]_{ij} = H_{i,j+1} conj(a_{j,j+1}) - conj(a_{i-1,i}) H_{i-1,j}, j = i + e - 1
    for (int i = 0; i < m; ++i) {
      const int j = i + e - 1;
      if (j < 0 || j >= m) continue;
      Eigen::VectorXcd row = Eigen::VectorXcd::Zero(u);
      if (col(i) >= 0) row[col(i)] += std::conj(up(j));
      if (i >= 1 && col(i - 1) >= 0) row[col(i - 1)] -= std::conj(up(i - 1));
      eqs.push_back(row);
    }
    Eigen::VectorXd sv;
    if (!eqs.empty()) {
      MatrixXcd M(static_cast<Eigen::Index>(eqs.size()), u);
      for (std::size_t r = 0; r < eqs.size(); ++r) M.row(static_cast<Eigen::Index>(r)) = eqs[r].transpose();
      sv = Eigen::JacobiSVD<MatrixXcd>(M).singularValues();
      if (sv.size() > 0) smax = std::max(smax, sv.maxCoeff());
    }
    blocks.push_back({u, sv});
  }
  const double cut = kRankTolerance * smax;
  std::size_t nullity = 0;
  for (const Block& b : blocks) {
    const auto rank = static_cast<int>((b.singular_values.array() > cut).count());
    nullity += static_cast<std::size_t>(b.unknowns - rank);
  }
  return nullity;
}

std::vector<double> coherent_position_trajectory(const OperatorTriple& ops, const MatrixXcd& H, double a0, double p0,
                                                 const std::vector<double>& times) {
  const int m = ops.interior();
  if (H.rows() != m || H.cols() != m) throw std::invalid_argument("coherent_position_trajectory: H must be interior size");
  const Complex alpha(a0 / (2.0 * ops.position_scale), p0 / (2.0 * ops.momentum_scale));
  Eigen::VectorXcd psi0(m);
  Complex term(1.0);
  for (int k = 0; k < m; ++k) {
    if (k > 0) term *= alpha / std::sqrt(static_cast<double>(k));
    psi0[k] = term;
  }
  psi0.normalize();

  const MatrixXcd Hs = 0.5 * (H + H.adjoint());
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(Hs);
  const MatrixXcd& U = eig.eigenvectors();
  const Eigen::VectorXcd c0 = U.adjoint() * psi0;
  const MatrixXcd Xm = ops.X.topLeftCorner(m, m);

  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    Eigen::VectorXcd c = c0;
    for (int k = 0; k < m; ++k) c[k] *= std::polar(1.0, -eig.eigenvalues()[k] * t / ops.hbar);
    const Eigen::VectorXcd psi = U * c;
    out.push_back(psi.dot(Xm * psi).real());
  }
  return out;
}

}  // namespace cqlab
