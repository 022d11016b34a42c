#pragma once

#include <map>
#include <utility>
#include <vector>

#include "bmf/arnoldi.hpp"
#include "bmf/kernels.hpp"

namespace bmf {

/**
 * @brief Options for the adaptive tensorized Krylov loop.
 *
 * `tol` is the stopping tolerance on the heuristic estimate e_{k,l,h},
 * scaled internally by ||c||_2 ||d||_2. `h` is the look-ahead window; `step`
 * the basis growth per round (0 means step = h, which lets look-ahead cores
 * be reused as next-round cores). `k_max`/`l_max` cap the basis sizes
 * (0 means the full dimension). `balance` enables one-sided growth.
 */
struct DriverOptions {
  double tol = 1e-8;
  Index h = 2;
  Index k_max = 0;
  Index l_max = 0;
  Index step = 0;
  bool balance = false;
};

enum class Termination { converged, budget_exhausted, breakdown };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::budget_exhausted: return "budget-exhausted";
    case Termination::breakdown: return "breakdown";
  }
  return "?";
}

struct EstimateRecord {
  Index k = 0;
  Index l = 0;
  double estimate = 0.0;
};

/**
 * @brief Factored approximation U X V^T with the estimate trace.
 *
 * U (m x k) and V (n x l) have orthonormal columns; X is the compressed
 * core. estimate_trace records (k, l, e_{k,l,h}) per round.
 */
struct ApproximationResult {
  Matrix U;
  Matrix X;
  Matrix V;
  std::vector<EstimateRecord> estimate_trace;
  Termination termination = Termination::budget_exhausted;

  Matrix assemble() const { return U * X * V.transpose(); }
};

/**
 * @brief e_{k,l,h}: Frobenius norm of core_big minus zero-padded core_small.
 *
 * By orthonormal-basis invariance this equals the full-space difference
 * || U_{k+h} X_{k+h,l+h} V_{l+h}^T - U_k X_{k,l} V_l^T ||_F.
 */
inline double error_estimate(const Matrix& core_small, const Matrix& core_big) {
  if (core_small.rows() > core_big.rows() || core_small.cols() > core_big.cols()) {
    throw ShapeMismatchError("error_estimate: small core exceeds big core");
  }
  Matrix diff = core_big;
  diff.topLeftCorner(core_small.rows(), core_small.cols()) -= core_small;
  return diff.norm();
}

enum class GrowthSide { a, b, both };

/**
 * @brief Decide which basis to enlarge from one-sided look-ahead cores.
 *
 * Grows the A side iff the row-padded difference dominates the column-padded
 * one; ties within 1e-14 grow both.
 */
inline GrowthSide side_selection(const Matrix& core_grow_k, const Matrix& core_grow_l,
                                 const Matrix& core) {
  double dk = error_estimate(core, core_grow_k);
  double dl = error_estimate(core, core_grow_l);
  if (std::abs(dk - dl) <= 1e-14) return GrowthSide::both;
  return dk >= dl ? GrowthSide::a : GrowthSide::b;
}

namespace detail {

struct KrylovSide {
  ArnoldiState state;
  Index cap = 0;

  Index built() const { return state.k(); }
  bool frozen() const { return state.broken_down || built() >= cap; }

  void ensure(const LinearOperator& op, Index target) {
    target = std::min(target, cap);
    if (state.broken_down || built() >= target) return;
    state = arnoldi_extend(op, state, target - built());
  }
};

}  // namespace detail

/**
 * @brief Rank-one tensorized Krylov approximation of f{A,B}(c d^T).
 *
 * Runs the two Arnoldi processes, evaluates the compressed problem each
 * round and stops once e_{k,l,h} <= tol ||c|| ||d|| holds for two consecutive
 * rounds. Lucky breakdown freezes a side (its Krylov space is invariant);
 * caps freeze it likewise. When no side can grow the result is returned with
 * the corresponding termination reason.
 */
inline ApproximationResult approximate_rank1(const BivariateFunctionSpec& f,
                                             const LinearOperator& a, const LinearOperator& b,
                                             const Vector& c, const Vector& d,
                                             const DriverOptions& opts = {}) {
  if (opts.h < 1) throw InvalidArgumentError("DriverOptions: h >= 1 required");
  const Index m = a.dimension(), n = b.dimension();
  const Index h = opts.h;
  const Index step = opts.step > 0 ? opts.step : h;
  const Index k_cap = opts.k_max > 0 ? std::min(opts.k_max, m) : m;
  const Index l_cap = opts.l_max > 0 ? std::min(opts.l_max, n) : n;

  const double scale = c.norm() * d.norm();
  const double threshold = opts.tol * scale;

  // Identical problems on both sides share one Arnoldi process.
  const bool shared = a.same_as(b) && c.size() == d.size() && c == d && k_cap == l_cap;

  detail::KrylovSide sa{arnoldi_init(a, c), k_cap};
  detail::KrylovSide sb = shared ? sa : detail::KrylovSide{arnoldi_init(b, d), l_cap};

  auto sync = [&]() {
    if (shared) sb = sa;
  };
  sync();

  std::map<std::pair<Index, Index>, Matrix> cores;
  auto core_at = [&](Index k, Index l) -> const Matrix& {
    auto key = std::make_pair(k, l);
    auto it = cores.find(key);
    if (it != cores.end()) return it->second;
    Matrix g = sa.state.hess.topLeftCorner(k, k);
    Matrix hh = sb.state.hess.topLeftCorner(l, l);
    Vector ct = sa.state.basis.leftCols(k).adjoint() * c;
    Vector dt = sb.state.basis.leftCols(l).adjoint() * d;
    return cores.emplace(key, eval_compressed(f, g, hh, ct, dt)).first->second;
  };

  ApproximationResult res;
  Index cur_k = std::min(step, k_cap);
  Index cur_l = std::min(step, l_cap);
  sa.ensure(a, cur_k + h);
  sync();
  sb.ensure(b, cur_l + h);
  sync();
  cur_k = std::min(cur_k, sa.built());
  cur_l = std::min(cur_l, sb.built());

  int streak = 0;
  for (;;) {
    const Index ahead_k = std::min(cur_k + h, sa.built());
    const Index ahead_l = std::min(cur_l + h, sb.built());
    const Matrix& x_cur = core_at(cur_k, cur_l);

    auto finish = [&](Termination t) {
      res.U = sa.state.basis.leftCols(cur_k);
      res.V = sb.state.basis.leftCols(cur_l);
      res.X = x_cur;
      res.termination = t;
      return res;
    };

    if (ahead_k == cur_k && ahead_l == cur_l) {
      // no look-ahead possible: both sides exhausted at the current sizes
      bool broke = sa.state.broken_down || sb.state.broken_down;
      return finish(broke ? Termination::breakdown : Termination::budget_exhausted);
    }

    const Matrix& x_ahead = core_at(ahead_k, ahead_l);
    double e = error_estimate(x_cur, x_ahead);
    res.estimate_trace.push_back({cur_k, cur_l, e});
    streak = (e <= threshold) ? streak + 1 : 0;
    if (streak >= 2) return finish(Termination::converged);

    bool can_a = !sa.frozen();
    bool can_b = !sb.frozen();
    if (!can_a && !can_b) {
      // look-ahead columns exist but no further growth: promote to built sizes
      if (cur_k == ahead_k && cur_l == ahead_l) {
        bool broke = sa.state.broken_down || sb.state.broken_down;
        return finish(broke ? Termination::breakdown : Termination::budget_exhausted);
      }
      cur_k = ahead_k;
      cur_l = ahead_l;
      continue;
    }

    bool grow_a = can_a;
    bool grow_b = can_b;
    if (opts.balance && can_a && can_b) {
      GrowthSide side = side_selection(core_at(ahead_k, cur_l), core_at(cur_k, ahead_l), x_cur);
      grow_a = side != GrowthSide::b;
      grow_b = side != GrowthSide::a;
      if (shared) grow_a = grow_b = true;
    }

    if (grow_a) {
      cur_k = std::min(cur_k + step, k_cap);
      sa.ensure(a, cur_k + h);
      sync();
      cur_k = std::min(cur_k, sa.built());
    }
    if (grow_b && !shared) {
      cur_l = std::min(cur_l + step, l_cap);
      sb.ensure(b, cur_l + h);
      cur_l = std::min(cur_l, sb.built());
    }
    if (shared) cur_l = cur_k;

    // retain only cores still reusable at the new sizes
    std::erase_if(cores, [&](const auto& kv) {
      return kv.first.first < cur_k || kv.first.second < cur_l;
    });
  }
}

namespace detail {

// Split a rank-r right-hand side into orthogonal rank-1 terms via a thin SVD
// of the stacked factors; negligible singular values are dropped.
inline std::vector<std::pair<Vector, Vector>> split_rank1_terms(const LowRankRhs& rhs) {
  Eigen::HouseholderQR<Matrix> qr_l(rhs.left);
  Eigen::HouseholderQR<Matrix> qr_r(rhs.right);
  const Index r = rhs.rank();
  Matrix rl = qr_l.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  Matrix rr = qr_r.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  Matrix ql = qr_l.householderQ() * Matrix::Identity(rhs.left.rows(), r);
  Matrix qr = qr_r.householderQ() * Matrix::Identity(rhs.right.rows(), r);

  Eigen::JacobiSVD<Matrix> svd(rl * rr.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? sv(0) * 1e-14 : 0.0;

  std::vector<std::pair<Vector, Vector>> terms;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cutoff) break;
    Vector ci = ql * (svd.matrixU().col(i) * sv(i));
    Vector di = qr * svd.matrixV().col(i).conjugate();
    terms.emplace_back(std::move(ci), std::move(di));
  }
  if (terms.empty()) throw InvalidArgumentError("approximate: right-hand side is zero");
  return terms;
}

}  // namespace detail

/**
 * @brief Approximate f{A,B}(C) for a low-rank C.
 *
 * Rank one runs the adaptive loop directly. Higher rank splits C into
 * orthogonal rank-1 terms (thin SVD of the stacked factors), runs each with
 * the same per-term budget, and block-concatenates the factors; the
 * concatenated bases are re-orthonormalized with the R factors folded into
 * the core so the result invariant (orthonormal U, V) holds.
 */
inline ApproximationResult approximate(const BivariateFunctionSpec& f, const LinearOperator& a,
                                       const LinearOperator& b, const LowRankRhs& rhs,
                                       const DriverOptions& opts = {}) {
  if (rhs.left.rows() != a.dimension() || rhs.right.rows() != b.dimension()) {
    throw ShapeMismatchError("approximate: right-hand side dimensions mismatch");
  }
  if (rhs.rank() == 1) {
    return approximate_rank1(f, a, b, rhs.left.col(0), rhs.right.col(0), opts);
  }

  auto terms = detail::split_rank1_terms(rhs);
  std::vector<ApproximationResult> parts;
  parts.reserve(terms.size());
  Index ku = 0, kv = 0;
  for (const auto& [ci, di] : terms) {
    parts.push_back(approximate_rank1(f, a, b, ci, di, opts));
    ku += parts.back().U.cols();
    kv += parts.back().V.cols();
  }

  Matrix u_cat(a.dimension(), ku), v_cat(b.dimension(), kv);
  Matrix x_cat = Matrix::Zero(ku, kv);
  Index ro = 0, co = 0;
  ApproximationResult res;
  res.termination = Termination::converged;
  for (const auto& p : parts) {
    u_cat.middleCols(ro, p.U.cols()) = p.U;
    v_cat.middleCols(co, p.V.cols()) = p.V;
    x_cat.block(ro, co, p.X.rows(), p.X.cols()) = p.X;
    ro += p.U.cols();
    co += p.V.cols();
    for (const auto& rec : p.estimate_trace) res.estimate_trace.push_back(rec);
    if (p.termination != Termination::converged) res.termination = p.termination;
  }

  Eigen::HouseholderQR<Matrix> qu(u_cat);
  Eigen::HouseholderQR<Matrix> qv(v_cat);
  Matrix ru = qu.matrixQR().topRows(ku).triangularView<Eigen::Upper>();
  Matrix rv = qv.matrixQR().topRows(kv).triangularView<Eigen::Upper>();
  res.U = Matrix(qu.householderQ()).leftCols(ku);
  res.V = Matrix(qv.householderQ()).leftCols(kv);
  res.X = ru * x_cat * rv.transpose();
  return res;
}

}  // namespace bmf
