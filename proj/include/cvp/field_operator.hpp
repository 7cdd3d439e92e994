#ifndef CVP_FIELD_OPERATOR_HPP
#define CVP_FIELD_OPERATOR_HPP

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "cvp/errors.hpp"
#include "cvp/jets.hpp"
#include "cvp/kernels.hpp"
#include "cvp/measure.hpp"

namespace cvp {

/// Dense-storage cap on the number of degrees of freedom; overridable via
/// the CVP_MAX_DOF environment variable.
inline int max_dof() {
  if (const char* env = std::getenv("CVP_MAX_DOF")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<int>(v);
  }
  return 8192;
}

/// ell(x) = int L(x, y) dmu(y) - s, evaluated by quadrature. x may lie on
/// or off the discrete support.
inline double compute_ell(const KernelSpec& k, const DiscreteMeasure& m, const Point& x) {
  double acc = 0.0;
  for (int j = 0; j < m.size(); ++j) {
    const Point y = m.point(j);
    acc += m.weight(j) * k.eval_delta(x, y, m.separation(x.line(), y.line()));
  }
  return acc - k.s_param();
}

struct ElResidual {
  Eigen::VectorXd per_node;       // |ell(x_i)| at every node
  std::vector<bool> interior;     // nodes inside the truncation-safe band
  double max_abs = 0.0;           // max over interior nodes
};

/// True when node-level continuum identities are unspoiled by domain
/// truncation at x: the kernel mass around the relevant integration
/// center stays inside the grid.
inline bool interior_node(const KernelSpec& k, const DiscreteMeasure& m, double x) {
  if (m.periodic()) return true;
  const double margin = k.interior_margin();
  const double center = k.probe_stretch() * x;
  return center >= m.domain_a() + margin && center <= m.domain_b() - margin;
}

inline ElResidual el_residual(const KernelSpec& k, const DiscreteMeasure& m) {
  const int n = m.size();
  ElResidual r;
  r.per_node.resize(n);
  r.interior.resize(n);
  for (int i = 0; i < n; ++i) {
    r.per_node[i] = std::abs(compute_ell(k, m, m.point(i)));
    r.interior[i] = interior_node(k, m, m.coord(i));
    if (r.interior[i]) r.max_abs = std::max(r.max_abs, r.per_node[i]);
  }
  return r;
}

/// Adapted weight h(x) = 1 + int ||second variation of L(x, .)|| dmu.
inline Eigen::VectorXd compute_weight(const KernelSpec& k, const DiscreteMeasure& m) {
  const int n = m.size();
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) {
    const Point x = m.point(i);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const Point y = m.point(j);
      acc += m.weight(j) * k.bound_delta(x, y, m.separation(x.line(), y.line()));
    }
    h[i] = 1.0 + acc;
  }
  return h;
}

/// The discrete bilinear form of the linearized field operator:
/// u^T A v = discrete <u, Delta v>_N with the dof layout
/// index = node * d + component (component 0 = scalar).
struct AssembledOperator {
  Eigen::MatrixXd A;
  int fiber_dim = 1;
  int nodes = 0;
};

/// Assembles A from the symmetric quadratic-form representation
///   <u, Delta v>_N = 1/2 sum_ij w_i w_j [u_i; u_j]^T B(x_i, x_j) [v_i; v_j]
///                    - s sum_i w_i a_i b_i.
/// Every unordered pair is evaluated once at canonical node order, so A is
/// exactly symmetric and bit-identical for any worker count (each worker
/// fills a disjoint set of rows; per-row accumulation runs in ascending
/// column order).
inline AssembledOperator assemble_bilinear(const KernelSpec& k, const DiscreteMeasure& m,
                                           int workers = 1) {
  const int n = m.size();
  const int d = k.fiber_dim();
  const int n_dof = n * d;
  if (n_dof > max_dof())
    throw ResourceLimitError("n_dof = " + std::to_string(n_dof) +
                             " exceeds the dense-storage cap " + std::to_string(max_dof()) +
                             " (override with CVP_MAX_DOF)");

  AssembledOperator op;
  op.fiber_dim = d;
  op.nodes = n;
  op.A.setZero(n_dof, n_dof);

  auto fill_rows = [&](int row_begin, int row_end) {
    for (int i = row_begin; i < row_end; ++i) {
      const Point xi = m.point(i);
      const double wi = m.weight(i);
      Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int p = std::min(i, j);
        const int q = std::max(i, j);
        const Point xp = m.point(p);
        const Point xq = m.point(q);
        const Eigen::MatrixXd b =
            k.block_delta(xp, xq, m.separation(m.coord(p), m.coord(q)));
        const double wij = wi * m.weight(j);
        if (i < j) {
          // own fiber is the x-slot of the canonical block
          op.A.block(i * d, j * d, d, d) = wij * b.block(0, d, d, d);
          diag += m.weight(j) * b.block(0, 0, d, d);
        } else {
          // own fiber is the y-slot; transpose of the partner's entry
          op.A.block(i * d, j * d, d, d) = wij * b.block(0, d, d, d).transpose();
          diag += m.weight(j) * b.block(d, d, d, d);
        }
      }
      // self pair (i, i): all four quadrants collapse onto the diagonal
      const Eigen::MatrixXd bs = k.block_delta(xi, xi, 0.0);
      diag += 0.5 * wi *
              (bs.block(0, 0, d, d) + bs.block(0, d, d, d) + bs.block(d, 0, d, d) +
               bs.block(d, d, d, d));
      diag *= wi;
      diag(0, 0) -= k.s_param() * wi;
      op.A.block(i * d, i * d, d, d) = diag;
    }
  };

  if (workers <= 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(fill_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return op;
}

/// The adapted weighted inner product <<u, v>> = int <u, v>_x h dmu.
/// Its Gram matrix is diagonal in the dof layout because the fiber metric
/// is pointwise: scalar entry h_i w_i, vector entry h_i w_i g_i.
struct AdaptedSpace {
  Eigen::VectorXd h;       // weight per node
  Eigen::VectorXd H_diag;  // Gram diagonal per dof
  int fiber_dim = 1;

  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(H_diag.cwiseProduct(v));
  }
  double norm(const Eigen::VectorXd& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }
};

inline AdaptedSpace assemble_gram(const DiscreteMeasure& m, const Eigen::VectorXd& h,
                                  const FiberMetric& g, int fiber_dim) {
  const int n = m.size();
  if (h.size() != n) throw ConfigError("weight field length does not match grid");
  AdaptedSpace sp;
  sp.fiber_dim = fiber_dim;
  sp.h = h;
  sp.H_diag.resize(n * fiber_dim);
  for (int i = 0; i < n; ++i) {
    if (!(h[i] >= 1.0))
      throw NumericalError("adapted weight must satisfy h >= 1 (got " + std::to_string(h[i]) + ")");
    sp.H_diag[i * fiber_dim] = h[i] * m.weight(i);
    if (fiber_dim == 2) {
      if (!(g.g[i] > 0.0)) throw NumericalError("fiber metric must be positive at every node");
      sp.H_diag[i * fiber_dim + 1] = h[i] * m.weight(i) * g.g[i];
    }
  }
  return sp;
}

}  // namespace cvp

#endif  // CVP_FIELD_OPERATOR_HPP
