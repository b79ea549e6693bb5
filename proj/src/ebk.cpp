#include "pebk/ebk.hpp"

#include "pebk/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace pebk {

namespace {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

constexpr double kDropTolerance = 1e-12;
constexpr double kMaxEigenvectorCondition = 1e8;
constexpr std::array<double, 5> kFactorial = {1.0, 1.0, 2.0, 6.0, 24.0};

// phi_0..phi_4 of a scalar.
std::array<Complex, 5> phi_scalar(Complex z) {
  std::array<Complex, 5> out;
  if (std::abs(z) < 2.0) {
    for (int k = 0; k < 5; ++k) {
      Complex term = 1.0 / kFactorial[k];
      Complex sum = term;
      for (int j = 1; j < 60; ++j) {
        term *= z / static_cast<double>(j + k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      out[k] = sum;
    }
    return out;
  }
  out[0] = std::exp(z);
  for (int k = 0; k < 4; ++k) out[k + 1] = (out[k] - 1.0 / kFactorial[k]) / z;
  return out;
}

double norm1(const CMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------

void EbkConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("EbkConfig: tol must be > 0");
  if (restart_length < 1) throw InvalidArgument("EbkConfig: restart_length must be >= 1");
  if (gamma < 0.0) throw InvalidArgument("EbkConfig: gamma must be >= 0");
  if (gamma == 0.0 && !(gamma_factor > 0.0)) {
    throw InvalidArgument("EbkConfig: gamma_factor must be > 0");
  }
  if (max_krylov_dim < 1) throw InvalidArgument("EbkConfig: max_krylov_dim must be >= 1");
}

double EbkConfig::shift_for(double interval_length) const {
  if (gamma > 0.0) return gamma;
  return gamma_factor * interval_length;
}

// ---------------------------------------------------------------------------

BlockKrylovState::BlockKrylovState(const ShiftedFactorization& fac, const Matrix& start,
                                   int max_blocks)
    : fac_(&fac), max_blocks_(max_blocks) {
  if (start.rows() != fac.n()) throw InvalidArgument("BlockKrylovState: start block has wrong height");
  if (max_blocks < 1) throw InvalidArgument("BlockKrylovState: max_blocks must be >= 1");
  const Index k = start.cols();
  const Index cap = std::min<Index>(fac.n(), (static_cast<Index>(max_blocks) + 1) * k);
  v_.resize(fac.n(), cap);
  h_ = Matrix::Zero(cap, cap);
  Matrix r = Matrix::Zero(cap, k);
  offsets_ = {0};
  for (Index c = 0; c < k; ++c) {
    Vector coef = Vector::Zero(cap);
    Vector w = start.col(c);
    const double norm0 = w.norm();
    if (norm0 > 0.0) {
      for (int pass = 0; pass < 2 && cols_ > 0; ++pass) {
        const Vector proj = v_.leftCols(cols_).transpose() * w;
        w.noalias() -= v_.leftCols(cols_) * proj;
        coef.head(cols_) += proj;
      }
      const double eta = w.norm();
      if (eta > kDropTolerance * norm0 && cols_ < cap) {
        v_.col(cols_) = w / eta;
        coef[cols_] = eta;
        ++cols_;
      }
    }
    r.col(c) = coef;
  }
  r0_ = r.topRows(cols_);
  offsets_.push_back(cols_);
}

void BlockKrylovState::orthogonalize_into(const Matrix& w_block, Index target_col_begin,
                                          bool record) {
  const Index cap = v_.cols();
  for (Index c = 0; c < w_block.cols(); ++c) {
    Vector w = w_block.col(c);
    const double norm0 = w.norm();
    Vector coef = Vector::Zero(cap);
    if (norm0 > 0.0) {
      for (int pass = 0; pass < 2; ++pass) {
        const Vector proj = v_.leftCols(cols_).transpose() * w;
        w.noalias() -= v_.leftCols(cols_) * proj;
        coef.head(cols_) += proj;
      }
      const double eta = w.norm();
      if (eta > kDropTolerance * norm0 && cols_ < cap) {
        v_.col(cols_) = w / eta;
        coef[cols_] = eta;
        ++cols_;
      }
    }
    if (record) h_.col(target_col_begin + c) = coef;
  }
}

void BlockKrylovState::expand() {
  if (invariant()) throw SolverError("BlockKrylovState::expand: basis is already invariant");
  if (blocks() >= max_blocks_) throw SolverError("BlockKrylovState::expand: block limit reached");
  const int b = blocks();
  const Index begin = offsets_[b];
  const Index width = offsets_[b + 1] - begin;
  const Matrix w = fac_->solve(Matrix(v_.middleCols(begin, width)));
  orthogonalize_into(w, begin, true);
  offsets_.push_back(cols_);
}

Matrix BlockKrylovState::coupling() const {
  const int l = blocks();
  if (l == 0) return Matrix(next_width(), 0);
  return h_.block(dim(), offsets_[l - 1], next_width(), block_width(l - 1));
}

const Matrix& BlockKrylovState::residual_block() const {
  if (residual_block_for_ != blocks()) {
    const Matrix nb = next_block();
    residual_block_ = nb - gamma() * fac_->base().apply(nb);
    residual_block_for_ = blocks();
  }
  return residual_block_;
}

double BlockKrylovState::orthogonality_error() const {
  if (cols_ == 0) return 0.0;
  const Matrix g = v_.leftCols(cols_).transpose() * v_.leftCols(cols_);
  return (g - Matrix::Identity(cols_, cols_)).cwiseAbs().maxCoeff();
}

double BlockKrylovState::arnoldi_error() const {
  if (dim() == 0) return 0.0;
  const Matrix mv = fac_->solve(Matrix(basis()));
  const Matrix rel = mv - v_.leftCols(cols_) * extended_hessenberg();
  const double scale = mv.norm();
  return scale > 0.0 ? rel.norm() / scale : rel.norm();
}

// ---------------------------------------------------------------------------

ProjectedSolution integrate_projected(const BlockKrylovState& state, const Vector& z0,
                                      const Matrix& f, const CubicSpline* q,
                                      const std::vector<double>& nodes) {
  const Index d = state.dim();
  const double gamma = state.gamma();
  const auto s = static_cast<Index>(nodes.size());
  if (d == 0) throw InvalidArgument("integrate_projected: empty Krylov basis");
  if (z0.size() != d) throw InvalidArgument("integrate_projected: z0 has wrong size");
  if (q != nullptr && (f.rows() != d || f.cols() != q->components() ||
                       q->nodes().size() != nodes.size())) {
    throw InvalidArgument("integrate_projected: source shapes do not match");
  }

  const Matrix h = state.sai_hessenberg();
  const int l = state.blocks();
  const Index last_begin = d - state.block_width(l - 1);
  const Index last_width = state.block_width(l - 1);
  const Matrix coupling = state.coupling();

  ProjectedSolution out;
  out.z.resize(d, s);
  out.rho.resize(state.next_width(), s);
  out.z.col(0) = z0;

  // Eigenbasis route.
  Eigen::EigenSolver<Matrix> es(h);
  bool eigen_ok = es.info() == Eigen::Success;
  CMatrix x;
  CMatrix x_inv;
  CVector mu;
  if (eigen_ok) {
    x = es.eigenvectors();
    mu = es.eigenvalues();
    Eigen::PartialPivLU<CMatrix> lu(x);
    x_inv = lu.inverse();
    const double cond = norm1(x) * norm1(x_inv);
    const double mu_max = mu.cwiseAbs().maxCoeff();
    eigen_ok = std::isfinite(cond) && cond <= kMaxEigenvectorCondition &&
               mu.cwiseAbs().minCoeff() > 1e-14 * mu_max;
  }

  if (eigen_ok) {
    CVector lambda(d);
    for (Index i = 0; i < d; ++i) lambda[i] = (1.0 - 1.0 / mu[i]) / gamma;
    CVector w = x_inv * z0.cast<Complex>();
    CMatrix g;
    if (q != nullptr) g = x_inv * f.cast<Complex>();
    auto record_rho = [&](Index col, const CVector& wc) {
      if (out.rho.rows() == 0) return;
      const CVector hinv_z = x.middleRows(last_begin, last_width) * wc.cwiseQuotient(mu);
      out.rho.col(col) = coupling * hinv_z.real() / gamma;
    };
    record_rho(0, w);
    std::vector<CVector> b(4);
    for (Index p = 0; p + 1 < s; ++p) {
      const double step = nodes[p + 1] - nodes[p];
      if (q != nullptr) {
        const Matrix c = q->piece_coefficients(p);
        for (int j = 0; j < 4; ++j) b[j] = g * c.col(j).cast<Complex>();
      }
      for (Index i = 0; i < d; ++i) {
        const auto phi = phi_scalar(step * lambda[i]);
        Complex next = phi[0] * w[i];
        if (q != nullptr) {
          double hp = step;
          for (int j = 0; j < 4; ++j) {
            next += kFactorial[j] * hp * phi[j + 1] * b[j][i];
            hp *= step;
          }
        }
        w[i] = next;
      }
      out.z.col(p + 1) = (x * w).real();
      record_rho(p + 1, w);
    }
    return out;
  }

  // Augmented matrix exponential per piece.
  out.used_fallback = true;
  const Eigen::PartialPivLU<Matrix> hlu(h);
  const Matrix h_inv = hlu.solve(Matrix::Identity(d, d));
  const Matrix a_proj = (Matrix::Identity(d, d) - h_inv) / gamma;
  auto record_rho = [&](Index col) {
    if (out.rho.rows() == 0) return;
    const Vector hinv_z = h_inv.middleRows(last_begin, last_width) * out.z.col(col);
    out.rho.col(col) = coupling * hinv_z / gamma;
  };
  record_rho(0);
  for (Index p = 0; p + 1 < s; ++p) {
    const double step = nodes[p + 1] - nodes[p];
    if (q == nullptr) {
      out.z.col(p + 1) = dense_expm(step * a_proj) * out.z.col(p);
    } else {
      // d/ds [z; s^3/6; s^2/2; s; 1] with s = tau/step in [0, 1].
      const Matrix c = q->piece_coefficients(p);
      Matrix aug = Matrix::Zero(d + 4, d + 4);
      aug.topLeftCorner(d, d) = step * a_proj;
      double hp = step;
      for (int j = 0; j < 4; ++j) {
        aug.col(d + 3 - j).head(d) = (kFactorial[j] * hp) * (f * c.col(j));
        hp *= step;
      }
      aug(d, d + 1) = 1.0;
      aug(d + 1, d + 2) = 1.0;
      aug(d + 2, d + 3) = 1.0;
      const Matrix e = dense_expm(aug);
      out.z.col(p + 1) = e.topLeftCorner(d, d) * out.z.col(p) + e.col(d + 3).head(d);
    }
    record_rho(p + 1);
  }
  return out;
}

double krylov_residual(const BlockKrylovState& state, const ProjectedSolution& sol,
                       double scale) {
  if (state.next_width() == 0 || sol.rho.rows() == 0) return 0.0;
  const Matrix& c = state.residual_block();
  const Matrix gram = c.transpose() * c;
  double worst = 0.0;
  for (Index i = 0; i < sol.rho.cols(); ++i) {
    const double sq = sol.rho.col(i).dot(gram * sol.rho.col(i));
    worst = std::max(worst, std::sqrt(std::max(sq, 0.0)));
  }
  if (!std::isfinite(worst)) return std::numeric_limits<double>::infinity();
  return scale > 0.0 ? worst / scale : worst;
}

// ---------------------------------------------------------------------------

namespace {

// y' = A y + start q(t), y(t_0) = start * initial, sampled at `nodes`.
struct KrylovProblem {
  Matrix start;
  Vector initial;                     // empty means zero
  std::optional<CubicSpline> source;  // empty means no source
};

struct FactoredSolution {
  std::shared_ptr<const Matrix> basis;
  Matrix coeffs;
  EbkStats stats;
};

FactoredSolution run_krylov(const ShiftedFactorization& fac, KrylovProblem prob,
                            const std::vector<double>& nodes, double scale,
                            const EbkConfig& cfg) {
  const Index n = fac.n();
  const auto s = static_cast<Index>(nodes.size());
  std::vector<Matrix> bases;
  std::vector<Matrix> coeffs;
  FactoredSolution out;
  EbkStats& stats = out.stats;
  double best = std::numeric_limits<double>::infinity();

  for (bool done = false; !done;) {
    ++stats.cycles;
    BlockKrylovState st(fac, prob.start, cfg.restart_length);
    if (st.next_width() == 0) {
      stats.invariant = true;
      stats.residual = 0.0;
      stats.cycle_end_residual.push_back(0.0);
      break;
    }
    const Matrix& r0 = st.start_coefficients();
    const Index k = prob.start.cols();
    ProjectedSolution sol;
    double res = std::numeric_limits<double>::infinity();
    for (;;) {
      if (stats.basis_vectors + st.next_width() > cfg.max_krylov_dim) {
        throw KrylovBudgetExceeded("ebk: Krylov budget of " + std::to_string(cfg.max_krylov_dim) +
                                       " basis vectors exhausted; best relative residual " +
                                       std::to_string(best),
                                   best);
      }
      stats.basis_vectors += st.next_width();
      st.expand();
      ++stats.blocks;
      const Index d = st.dim();
      Vector z0 = Vector::Zero(d);
      if (prob.initial.size() > 0) z0.head(r0.rows()) = r0 * prob.initial;
      Matrix f;
      if (prob.source) {
        f = Matrix::Zero(d, k);
        f.topRows(r0.rows()) = r0;
      }
      sol = integrate_projected(st, z0, f, prob.source ? &*prob.source : nullptr, nodes);
      if (sol.used_fallback) ++stats.fallback_integrations;
      res = krylov_residual(st, sol, scale);
      if (!std::isfinite(res)) throw SolverError("ebk: non-finite residual");
      stats.residual_history.push_back(res);
      best = std::min(best, res);
      if (res <= cfg.tol || st.invariant()) {
        stats.invariant = st.invariant();
        done = true;
        break;
      }
      if (st.blocks() >= cfg.restart_length) break;
    }
    bases.emplace_back(st.basis());
    coeffs.push_back(std::move(sol.z));
    stats.cycle_end_residual.push_back(res);
    stats.residual = res;
    if (done) break;

    // Restart from the residual r(t) = C rho(t).
    Matrix c = st.residual_block();
    double restart_res = 0.0;
    for (Index i = 0; i < s; ++i) restart_res = std::max(restart_res, (c * sol.rho.col(i)).norm());
    stats.restart_residual.push_back(scale > 0.0 ? restart_res / scale : restart_res);
    prob.source.emplace(nodes, sol.rho);
    prob.start = std::move(c);
    prob.initial = Vector();
  }

  Index total = 0;
  for (const auto& b : bases) total += b.cols();
  auto basis = std::make_shared<Matrix>(n, total);
  out.coeffs = Matrix::Zero(total, s);
  Index at = 0;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    basis->middleCols(at, bases[i].cols()) = bases[i];
    out.coeffs.middleRows(at, bases[i].cols()) = coeffs[i];
    at += bases[i].cols();
  }
  out.basis = std::move(basis);
  return out;
}

// Nodes of contiguous grids with shared endpoints merged, plus the index of
// each grid's first node.
std::vector<double> merge_nodes(const std::vector<SampleGrid>& grids, std::vector<Index>& first) {
  std::vector<double> nodes;
  first.clear();
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const auto& gn = grids[g].nodes();
    if (g == 0) {
      first.push_back(0);
      nodes = gn;
      continue;
    }
    const double end = nodes.back();
    if (std::abs(gn.front() - end) > 1e-12 * std::max(1.0, std::abs(end))) {
      throw InvalidArgument("propagate_homogeneous: grids must be contiguous");
    }
    first.push_back(static_cast<Index>(nodes.size()) - 1);
    nodes.insert(nodes.end(), gn.begin() + 1, gn.end());
  }
  return nodes;
}

void append_split(Waveform& w, const FactoredSolution& sol, const std::vector<SampleGrid>& grids,
                  const std::vector<Index>& first) {
  for (std::size_t g = 0; g < grids.size(); ++g) {
    w.append_factored(grids[g], sol.basis, sol.coeffs.middleCols(first[g], grids[g].size()));
  }
}

void merge_stats(EbkStats& into, const EbkStats& from) {
  into.cycles += from.cycles;
  into.blocks += from.blocks;
  into.basis_vectors += from.basis_vectors;
  into.residual = std::max(into.residual, from.residual);
  into.invariant = into.invariant && from.invariant;
  into.fallback_integrations += from.fallback_integrations;
  auto cat = [](std::vector<double>& a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
  };
  cat(into.residual_history, from.residual_history);
  cat(into.cycle_end_residual, from.cycle_end_residual);
  cat(into.restart_residual, from.restart_residual);
}

}  // namespace

EbkResult ebk_solve(const SparseOperator& a, const LowRankSource& src, const EbkConfig& cfg) {
  cfg.validate();
  if (a.n() != src.n()) throw InvalidArgument("ebk_solve: operator and source sizes differ");
  const ShiftedFactorization fac(a, cfg.shift_for(src.grid().length()));
  return ebk_solve(fac, src, cfg);
}

EbkResult ebk_solve(const ShiftedFactorization& fac, const LowRankSource& src,
                    const EbkConfig& cfg) {
  cfg.validate();
  if (fac.n() != src.n()) throw InvalidArgument("ebk_solve: operator and source sizes differ");
  const SampleGrid& grid = src.grid();
  EbkResult result{Waveform(fac.n()), {}};
  result.stats.invariant = true;

  double scale = 0.0;
  if (src.rank() > 0) {
    const Matrix values = src.node_values();
    scale = values.colwise().norm().maxCoeff();
  }
  if (scale == 0.0) {
    result.waveform.append_factored(grid, std::make_shared<Matrix>(fac.n(), 0),
                                    Matrix(0, grid.size()));
    return result;
  }
  KrylovProblem prob{src.basis(), Vector(), src.coefficients()};
  const FactoredSolution sol = run_krylov(fac, std::move(prob), grid.nodes(), scale, cfg);
  result.waveform.append_factored(grid, sol.basis, sol.coeffs);
  result.stats = sol.stats;
  return result;
}

EbkResult propagate_homogeneous(std::span<const HomogeneousLeg> legs, const Vector& v,
                                const EbkConfig& cfg) {
  cfg.validate();
  EbkResult result{Waveform(v.size()), {}};
  result.stats.invariant = true;
  Vector state = v;
  for (const auto& leg : legs) {
    if (leg.fac == nullptr || leg.fac->n() != v.size()) {
      throw InvalidArgument("propagate_homogeneous: operator size does not match the state");
    }
    if (leg.grids.empty()) continue;
    std::vector<Index> first;
    const std::vector<double> nodes = merge_nodes(leg.grids, first);
    const double norm = state.norm();
    if (norm == 0.0) {
      FactoredSolution zero{std::make_shared<Matrix>(v.size(), 0),
                            Matrix(0, static_cast<Index>(nodes.size())), {}};
      append_split(result.waveform, zero, leg.grids, first);
      continue;
    }
    const double span = nodes.back() - nodes.front();
    KrylovProblem prob{state, Vector::Ones(1), std::nullopt};
    const FactoredSolution sol = run_krylov(*leg.fac, std::move(prob), nodes, norm / span, cfg);
    append_split(result.waveform, sol, leg.grids, first);
    merge_stats(result.stats, sol.stats);
    state = (*sol.basis) * sol.coeffs.col(sol.coeffs.cols() - 1);
  }
  return result;
}

EbkResult propagate_homogeneous(const ShiftedFactorization& fac, const Vector& v,
                                const std::vector<SampleGrid>& grids, const EbkConfig& cfg) {
  const HomogeneousLeg leg{&fac, grids};
  return propagate_homogeneous(std::span<const HomogeneousLeg>(&leg, 1), v, cfg);
}

EbkResult propagate_homogeneous(const SparseOperator& a, const Vector& v,
                                const std::vector<SampleGrid>& grids, const EbkConfig& cfg) {
  cfg.validate();
  if (grids.empty()) return {Waveform(v.size()), {}};
  const ShiftedFactorization fac(a, cfg.shift_for(grids.front().length()));
  return propagate_homogeneous(fac, v, grids, cfg);
}

}  // namespace pebk
