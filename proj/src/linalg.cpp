#include "pebk/linalg.hpp"

#include "pebk/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>

namespace pebk {

// ---------------------------------------------------------------------------
// SparseOperator
// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(Index n, std::vector<Index> row_offsets,
                               std::vector<Index> col_indices,
                               std::vector<double> values, StructureHint hint)
    : n_(n),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      hint_(hint) {
  if (n_ < 0) throw InvalidArgument("SparseOperator: negative dimension");
  if (static_cast<Index>(row_offsets_.size()) != n_ + 1) {
    throw InvalidArgument("SparseOperator: row_offsets must have length n+1");
  }
  if (col_indices_.size() != values_.size()) {
    throw InvalidArgument("SparseOperator: col_indices and values differ in length");
  }
  // Sort each row by column so lookups and pattern merges can walk in order.
  for (Index i = 0; i < n_; ++i) {
    const Index b = row_offsets_[i];
    const Index e = row_offsets_[i + 1];
    if (b > e || e > static_cast<Index>(values_.size()) || b < 0) break;  // caught by validate()
    std::vector<Index> perm(static_cast<std::size_t>(e - b));
    std::iota(perm.begin(), perm.end(), b);
    std::sort(perm.begin(), perm.end(),
              [&](Index x, Index y) { return col_indices_[x] < col_indices_[y]; });
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index p : perm) {
      cols.push_back(col_indices_[p]);
      vals.push_back(values_[p]);
    }
    std::copy(cols.begin(), cols.end(), col_indices_.begin() + b);
    std::copy(vals.begin(), vals.end(), values_.begin() + b);
  }
  validate();
}

void SparseOperator::validate() const {
  if (row_offsets_.front() != 0) throw InvalidArgument("SparseOperator: row_offsets[0] != 0");
  for (Index i = 0; i < n_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) {
      throw InvalidArgument("SparseOperator: row_offsets must be nondecreasing");
    }
  }
  if (row_offsets_.back() != static_cast<Index>(values_.size())) {
    throw InvalidArgument("SparseOperator: row_offsets[n] != nnz");
  }
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const Index c = col_indices_[p];
      if (c < 0 || c >= n_) throw InvalidArgument("SparseOperator: column index out of range");
      if (p > row_offsets_[i] && col_indices_[p - 1] == c) {
        throw InvalidArgument("SparseOperator: duplicate entry in row " + std::to_string(i));
      }
      if (!std::isfinite(values_[p])) throw InvalidArgument("SparseOperator: non-finite value");
      if (hint_ == StructureHint::tridiagonal_periodic) {
        const Index d = (c - i + n_) % n_;
        if (!(d == 0 || d == 1 || d == n_ - 1)) {
          throw InvalidArgument("SparseOperator: entry (" + std::to_string(i) + "," +
                                std::to_string(c) + ") breaks the tridiagonal_periodic hint");
        }
      }
    }
  }
}

SparseOperator SparseOperator::from_triplets(Index n, std::vector<Triplet> entries,
                                             StructureHint hint) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw InvalidArgument("SparseOperator::from_triplets: index out of range");
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  // merge duplicates
  std::vector<Index> mo(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> mc;
  std::vector<double> mv;
  for (Index i = 0; i < n; ++i) {
    for (Index p = offsets[i]; p < offsets[i + 1]; ++p) {
      if (static_cast<Index>(mc.size()) > mo[i] && mc.back() == cols[p]) {
        mv.back() += vals[p];
      } else {
        mc.push_back(cols[p]);
        mv.push_back(vals[p]);
      }
    }
    mo[i + 1] = static_cast<Index>(mc.size());
  }
  return SparseOperator(n, std::move(mo), std::move(mc), std::move(mv), hint);
}

SparseOperator SparseOperator::periodic_tridiagonal(std::span<const double> lower,
                                                    std::span<const double> diag,
                                                    std::span<const double> upper) {
  const auto n = static_cast<Index>(diag.size());
  if (static_cast<Index>(lower.size()) != n || static_cast<Index>(upper.size()) != n) {
    throw InvalidArgument("periodic_tridiagonal: band lengths differ");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Index j = 0; j < n; ++j) {
    t.push_back({j, (j - 1 + n) % n, lower[j]});
    t.push_back({j, j, diag[j]});
    t.push_back({j, (j + 1) % n, upper[j]});
  }
  return from_triplets(n, std::move(t), StructureHint::tridiagonal_periodic);
}

SparseOperator SparseOperator::zero(Index n, StructureHint hint) {
  if (hint == StructureHint::tridiagonal_periodic) {
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    return periodic_tridiagonal(z, z, z);
  }
  return SparseOperator(n, std::vector<Index>(static_cast<std::size_t>(n + 1), 0), {}, {},
                        hint);
}

SparseOperator SparseOperator::identity(Index n) {
  std::vector<Index> offsets(static_cast<std::size_t>(n + 1));
  std::vector<Index> cols(static_cast<std::size_t>(n));
  std::iota(offsets.begin(), offsets.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  return SparseOperator(n, std::move(offsets), std::move(cols),
                        std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

void SparseOperator::apply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const {
  if (x.size() != n_ || y.size() != n_) {
    throw InvalidArgument("matvec: dimension mismatch (operator is " + std::to_string(n_) +
                          ", vector is " + std::to_string(x.size()) + ")");
  }
  for (Index i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      acc += values_[p] * x[col_indices_[p]];
    }
    y[i] = acc;
  }
}

Vector SparseOperator::apply(const Vector& x) const {
  Vector y(n_);
  apply(x, y);
  return y;
}

Matrix SparseOperator::apply(const Matrix& x) const {
  if (x.rows() != n_) throw InvalidArgument("matvec: dimension mismatch");
  Matrix y(n_, x.cols());
  for (Index c = 0; c < x.cols(); ++c) apply(x.col(c), y.col(c));
  return y;
}

double SparseOperator::coeff(Index row, Index col) const {
  const auto b = col_indices_.begin() + row_offsets_[row];
  const auto e = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(b, e, col);
  if (it == e || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

SparseOperator SparseOperator::combine(double alpha, const SparseOperator& other,
                                       double beta) const {
  if (other.n_ != n_) throw InvalidArgument("SparseOperator::combine: dimension mismatch");
  std::vector<Index> offsets(static_cast<std::size_t>(n_ + 1), 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(nnz() + other.nnz());
  vals.reserve(nnz() + other.nnz());
  for (Index i = 0; i < n_; ++i) {
    Index p = row_offsets_[i];
    Index q = other.row_offsets_[i];
    const Index pe = row_offsets_[i + 1];
    const Index qe = other.row_offsets_[i + 1];
    while (p < pe || q < qe) {
      const Index cp = p < pe ? col_indices_[p] : n_;
      const Index cq = q < qe ? other.col_indices_[q] : n_;
      if (cp == cq) {
        cols.push_back(cp);
        vals.push_back(alpha * values_[p++] + beta * other.values_[q++]);
      } else if (cp < cq) {
        cols.push_back(cp);
        vals.push_back(alpha * values_[p++]);
      } else {
        cols.push_back(cq);
        vals.push_back(beta * other.values_[q++]);
      }
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  const bool tri = hint_ == StructureHint::tridiagonal_periodic &&
                   other.hint_ == StructureHint::tridiagonal_periodic;
  return SparseOperator(n_, std::move(offsets), std::move(cols), std::move(vals),
                        tri ? StructureHint::tridiagonal_periodic : StructureHint::general);
}

SparseOperator SparseOperator::scaled(double alpha) const {
  SparseOperator out = *this;
  for (double& v : out.values_) v *= alpha;
  return out;
}

bool SparseOperator::same_pattern(const SparseOperator& other) const {
  return n_ == other.n_ && row_offsets_ == other.row_offsets_ &&
         col_indices_ == other.col_indices_;
}

SparseOperator SparseOperator::weighted_sum(std::span<const SparseOperator> ops,
                                            std::span<const double> weights) {
  if (ops.empty() || ops.size() != weights.size()) {
    throw InvalidArgument("weighted_sum: need one weight per operator");
  }
  SparseOperator out = ops.front();
  std::fill(out.values_.begin(), out.values_.end(), 0.0);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (!ops[k].same_pattern(out)) {
      throw InvalidArgument("weighted_sum: operators must share a sparsity pattern");
    }
    const double w = weights[k];
    const auto& v = ops[k].values_;
    for (std::size_t p = 0; p < v.size(); ++p) out.values_[p] += w * v[p];
  }
  return out;
}

Matrix SparseOperator::to_dense() const {
  Matrix d = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      d(i, col_indices_[p]) += values_[p];
    }
  }
  return d;
}

Eigen::SparseMatrix<double> SparseOperator::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz());
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      t.emplace_back(static_cast<int>(i), static_cast<int>(col_indices_[p]), values_[p]);
    }
  }
  Eigen::SparseMatrix<double> m(n_, n_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void SparseOperator::tridiagonal_bands(std::vector<double>& lower, std::vector<double>& diag,
                                       std::vector<double>& upper) const {
  if (hint_ != StructureHint::tridiagonal_periodic || n_ < 3) {
    throw InvalidArgument("tridiagonal_bands: needs a periodic tridiagonal operator with n >= 3");
  }
  const auto n = static_cast<std::size_t>(n_);
  lower.assign(n, 0.0);
  diag.assign(n, 0.0);
  upper.assign(n, 0.0);
  for (Index j = 0; j < n_; ++j) {
    lower[j] = coeff(j, (j - 1 + n_) % n_);
    diag[j] = coeff(j, j);
    upper[j] = coeff(j, (j + 1) % n_);
  }
}

Vector matvec(const SparseOperator& a, const Vector& x) { return a.apply(x); }

// ---------------------------------------------------------------------------
// ShiftedFactorization
// ---------------------------------------------------------------------------

// Thomas factors of the tridiagonal part T of M = T + u v^T, where the two
// corner entries of the cyclic matrix are moved into the rank-one term.
struct ShiftedFactorization::Banded {
  std::vector<double> sub;    // multipliers l_j
  std::vector<double> pivot;  // U diagonal
  std::vector<double> super;  // U superdiagonal
  Vector z;                   // T^{-1} u
  Vector v;                   // Sherman-Morrison right vector
  double denom = 1.0;         // 1 + v^T z

  void forward_back(Eigen::Ref<Vector> x) const {
    const auto n = static_cast<Index>(pivot.size());
    for (Index j = 1; j < n; ++j) x[j] -= sub[j] * x[j - 1];
    x[n - 1] /= pivot[n - 1];
    for (Index j = n - 2; j >= 0; --j) x[j] = (x[j] - super[j] * x[j + 1]) / pivot[j];
  }
};

namespace {

long trailing_index(const std::string& msg) {
  static const std::regex num(R"((\d+)\s*$)");
  std::smatch m;
  if (std::regex_search(msg, m, num)) return std::stol(m[1]);
  return -1;
}

}  // namespace

ShiftedFactorization::ShiftedFactorization(SparseOperator base, double gamma)
    : base_(std::move(base)), gamma_(gamma) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw InvalidArgument("factor_shifted: shift must be positive and finite");
  }
  const Index n = base_.n();
  if (base_.structure_hint() == StructureHint::tridiagonal_periodic && n >= 3) {
    std::vector<double> lo, di, up;
    base_.tridiagonal_bands(lo, di, up);
    // M = I - gamma*A
    for (Index j = 0; j < n; ++j) {
      lo[j] *= -gamma_;
      up[j] *= -gamma_;
      di[j] = 1.0 - gamma_ * di[j];
    }
    auto b = std::make_shared<Banded>();
    const double corner_top = lo[0];       // M(0, n-1)
    const double corner_bottom = up[n - 1];  // M(n-1, 0)
    const double sm = -di[0];
    std::vector<double> d = di;
    d[0] -= sm;
    d[n - 1] -= corner_top * corner_bottom / sm;
    b->sub.assign(static_cast<std::size_t>(n), 0.0);
    b->pivot.assign(static_cast<std::size_t>(n), 0.0);
    b->super.assign(up.begin(), up.end());
    const double scale = std::max(1.0, std::abs(sm));
    b->pivot[0] = d[0];
    for (Index j = 0; j < n; ++j) {
      if (j > 0) {
        b->sub[j] = lo[j] / b->pivot[j - 1];
        b->pivot[j] = d[j] - b->sub[j] * up[j - 1];
      }
      if (!(std::abs(b->pivot[j]) > 1e-14 * scale) || !std::isfinite(b->pivot[j])) {
        throw SingularPivot("factor_shifted: singular pivot at index " + std::to_string(j), j);
      }
    }
    Vector u = Vector::Zero(n);
    u[0] = sm;
    u[n - 1] = corner_bottom;
    b->v = Vector::Zero(n);
    b->v[0] = 1.0;
    b->v[n - 1] = corner_top / sm;
    b->z = u;
    b->forward_back(b->z);
    b->denom = 1.0 + b->v.dot(b->z);
    if (!(std::abs(b->denom) > 1e-14)) {
      throw SingularPivot("factor_shifted: singular cyclic correction", n - 1);
    }
    banded_ = std::move(b);
    return;
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setIdentity();
  m -= gamma_ * base_.to_eigen();
  m.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(m);
  lu_->factorize(m);
  if (lu_->info() != Eigen::Success) {
    const std::string msg = lu_->lastErrorMessage();
    throw SingularPivot("factor_shifted: sparse LU failed: " + msg, trailing_index(msg));
  }
}

Vector ShiftedFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != n()) throw InvalidArgument("ShiftedFactorization::solve: dimension mismatch");
  if (banded_) {
    Vector y = rhs;
    banded_->forward_back(y);
    const double coef = banded_->v.dot(y) / banded_->denom;
    y -= coef * banded_->z;
    return y;
  }
  return lu_->solve(rhs);
}

Matrix ShiftedFactorization::solve(const Matrix& rhs) const {
  Matrix out(rhs.rows(), rhs.cols());
  for (Index c = 0; c < rhs.cols(); ++c) out.col(c) = solve(Vector(rhs.col(c)));
  return out;
}

ShiftedFactorization factor_shifted(const SparseOperator& a, double gamma) {
  return ShiftedFactorization(a, gamma);
}

// ---------------------------------------------------------------------------
// QR / SVD
// ---------------------------------------------------------------------------

ThinQR thin_qr(const Matrix& m) {
  const Index n = m.rows();
  const Index s = m.cols();
  if (s > n) throw InvalidArgument("thin_qr: more columns than rows");
  Eigen::HouseholderQR<Matrix> qr(m);
  ThinQR out;
  out.q = qr.householderQ() * Matrix::Identity(n, s);
  out.r = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
  for (Index i = 0; i < s; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

namespace {

// Hestenes one-sided Jacobi: orthogonalises the columns of w in place and
// accumulates the rotations in v.
void one_sided_jacobi(Matrix& w, Matrix& v) {
  const Index s = w.cols();
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < s - 1; ++p) {
      for (Index q = p + 1; q < s; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double sn = c * t;
        for (Index i = 0; i < w.rows(); ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - sn * wq;
          w(i, q) = sn * wp + c * wq;
        }
        for (Index i = 0; i < v.rows(); ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - sn * vq;
          v(i, q) = sn * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
}

}  // namespace

ThinSVD thin_svd(const Matrix& m) {
  const Index s = m.cols();
  ThinQR qr = thin_qr(m);
  Matrix w = qr.r;
  Matrix v = Matrix::Identity(s, s);
  one_sided_jacobi(w, v);

  Vector sigma(s);
  for (Index j = 0; j < s; ++j) sigma[j] = w.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return sigma[a] > sigma[b]; });

  ThinSVD out;
  out.singular_values.resize(s);
  out.v.resize(s, s);
  Matrix ur = Matrix::Zero(s, s);
  const double smax = s > 0 ? sigma[order[0]] : 0.0;
  std::vector<bool> filled(static_cast<std::size_t>(s), false);
  for (Index k = 0; k < s; ++k) {
    const Index j = order[k];
    out.singular_values[k] = sigma[j];
    out.v.col(k) = v.col(j);
    if (sigma[j] > 0.0 && sigma[j] > 1e-300 * std::max(smax, 1.0)) {
      ur.col(k) = w.col(j) / sigma[j];
      filled[k] = true;
    }
  }
  // Complete the basis for exactly-zero singular values.
  for (Index k = 0; k < s; ++k) {
    if (filled[k]) continue;
    for (Index e = 0; e < s; ++e) {
      Vector cand = Vector::Unit(s, e);
      for (int pass = 0; pass < 2; ++pass) {
        for (Index c = 0; c < s; ++c) {
          if (filled[c]) cand -= ur.col(c).dot(cand) * ur.col(c);
        }
      }
      const double nrm = cand.norm();
      if (nrm > 0.5) {
        ur.col(k) = cand / nrm;
        filled[k] = true;
        break;
      }
    }
  }
  out.u = qr.q * ur;
  return out;
}

// ---------------------------------------------------------------------------
// Matrix exponential and phi-functions
// ---------------------------------------------------------------------------

namespace {

Matrix pade_expm(const Matrix& a, int degree) {
  const Index k = a.rows();
  const Matrix ident = Matrix::Identity(k, k);
  const Matrix a2 = a * a;
  Matrix u, v;
  switch (degree) {
    case 3: {
      constexpr std::array<double, 4> b{120., 60., 12., 1.};
      u = a * (b[3] * a2 + b[1] * ident);
      v = b[2] * a2 + b[0] * ident;
      break;
    }
    case 5: {
      constexpr std::array<double, 6> b{30240., 15120., 3360., 420., 30., 1.};
      const Matrix a4 = a2 * a2;
      u = a * (b[5] * a4 + b[3] * a2 + b[1] * ident);
      v = b[4] * a4 + b[2] * a2 + b[0] * ident;
      break;
    }
    case 7: {
      constexpr std::array<double, 8> b{17297280., 8648640., 1995840., 277200.,
                                        25200.,    1512.,    56.,      1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
      v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
      break;
    }
    case 9: {
      constexpr std::array<double, 10> b{17643225600., 8821612800., 2075673600., 302702400.,
                                         30270240.,    2162160.,    110880.,     3960.,
                                         90.,          1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      const Matrix a8 = a6 * a2;
      u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
      v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
      break;
    }
    default: {
      constexpr std::array<double, 14> b{
          64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
          129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
          1323241920.,        40840800.,          960960.,           16380.,
          182.,               1.};
      const Matrix a4 = a2 * a2;
      const Matrix a6 = a4 * a2;
      u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
               b[3] * a2 + b[1] * ident);
      v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
          b[0] * ident;
      break;
    }
  }
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix dense_expm(const Matrix& h) {
  if (h.rows() != h.cols()) throw InvalidArgument("dense_expm: matrix must be square");
  const Index k = h.rows();
  if (k == 0) return h;
  const double norm1 = h.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw InvalidArgument("dense_expm: non-finite input");
  constexpr std::array<std::pair<double, int>, 4> thresholds{{{1.495585217958292e-2, 3},
                                                              {2.539398330063230e-1, 5},
                                                              {9.504178996162932e-1, 7},
                                                              {2.097847961257068e0, 9}}};
  for (const auto& [theta, degree] : thresholds) {
    if (norm1 <= theta) return pade_expm(h, degree);
  }
  constexpr double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  Matrix e = pade_expm(h / std::ldexp(1.0, squarings), 13);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

std::vector<Matrix> phi_functions(const Matrix& h, int up_to) {
  if (h.rows() != h.cols()) throw InvalidArgument("phi_functions: matrix must be square");
  if (up_to < 1 || up_to > 4) throw InvalidArgument("phi_functions: order must be in 1..4");
  const Index k = h.rows();
  const Index blocks = up_to + 1;
  Matrix aug = Matrix::Zero(blocks * k, blocks * k);
  aug.topLeftCorner(k, k) = h;
  for (Index b = 0; b + 1 < blocks; ++b) {
    aug.block(b * k, (b + 1) * k, k, k).setIdentity();
  }
  const Matrix e = dense_expm(aug);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(blocks));
  for (Index b = 0; b < blocks; ++b) out.emplace_back(e.block(0, b * k, k, k));
  return out;
}

}  // namespace pebk
