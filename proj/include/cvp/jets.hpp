#ifndef CVP_JETS_HPP
#define CVP_JETS_HPP

#include <vector>

#include <Eigen/Dense>

#include "cvp/errors.hpp"
#include "cvp/measure.hpp"

namespace cvp {

/// A jet (b, v): per-node scalar multiplier and per-node vector component
/// in a fixed fiber of dimension d (d = 1 means scalar-only, empty vector).
struct Jet {
  Eigen::VectorXd scalar;  // b_i
  Eigen::VectorXd vector;  // v_i (one component per node when d = 2; empty when d = 1)
  int fiber_dim = 1;

  static Jet zero(int n, int fiber_dim) {
    Jet j;
    j.fiber_dim = fiber_dim;
    j.scalar = Eigen::VectorXd::Zero(n);
    j.vector = fiber_dim == 2 ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd();
    return j;
  }

  int nodes() const { return static_cast<int>(scalar.size()); }

  /// Degrees-of-freedom vector in the layout used by the assembled
  /// matrices: index = node * d + component, component 0 = scalar.
  Eigen::VectorXd to_dof() const {
    const int n = nodes();
    if (fiber_dim == 1) return scalar;
    Eigen::VectorXd dof(2 * n);
    for (int i = 0; i < n; ++i) {
      dof[2 * i] = scalar[i];
      dof[2 * i + 1] = vector[i];
    }
    return dof;
  }

  static Jet from_dof(const Eigen::VectorXd& dof, int fiber_dim) {
    Jet j;
    j.fiber_dim = fiber_dim;
    if (fiber_dim == 1) {
      j.scalar = dof;
      return j;
    }
    const int n = static_cast<int>(dof.size()) / 2;
    j.scalar.resize(n);
    j.vector.resize(n);
    for (int i = 0; i < n; ++i) {
      j.scalar[i] = dof[2 * i];
      j.vector[i] = dof[2 * i + 1];
    }
    return j;
  }
};

/// Pointwise Riemannian metric on the vector fiber: one positive number
/// per node (the fibers of all built-in examples are one-dimensional).
struct FiberMetric {
  Eigen::VectorXd g;

  static FiberMetric identity(int n) {
    FiberMetric m;
    m.g = Eigen::VectorXd::Ones(n);
    return m;
  }

  void validate() const {
    for (int i = 0; i < g.size(); ++i)
      if (!(g[i] > 0.0)) throw NumericalError("fiber metric must be positive-definite at every node");
  }
};

/// Per-node values of <u, v>_x = b b~ + g(v, v~).
inline Eigen::VectorXd jet_pointwise_inner(const Jet& u, const Jet& v, const FiberMetric& g) {
  if (u.nodes() != v.nodes() || u.fiber_dim != v.fiber_dim)
    throw ConfigError("jet_pointwise_inner: mismatched jets");
  Eigen::VectorXd out = u.scalar.cwiseProduct(v.scalar);
  if (u.fiber_dim == 2) out += g.g.cwiseProduct(u.vector.cwiseProduct(v.vector));
  return out;
}

/// Divergence adapted to the measure density: div v = (1/h) d/dx (h v).
/// Second-order central stencil at interior nodes, second-order one-sided
/// stencils at truncated boundaries, wrapped stencil on periodic grids.
inline Eigen::VectorXd divergence(const DiscreteMeasure& m, const Eigen::VectorXd& v) {
  const int n = m.size();
  if (n < 3) throw ConfigError("divergence needs at least 3 nodes");
  if (v.size() != n) throw ConfigError("divergence: field length does not match grid");
  const double dx = m.spacing();
  Eigen::VectorXd hv(n);
  for (int i = 0; i < n; ++i) hv[i] = m.density(i) * v[i];
  Eigen::VectorXd out(n);
  if (m.periodic()) {
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n;
      const int im = (i + n - 1) % n;
      out[i] = (hv[ip] - hv[im]) / (2.0 * dx);
    }
  } else {
    for (int i = 1; i + 1 < n; ++i) out[i] = (hv[i + 1] - hv[i - 1]) / (2.0 * dx);
    out[0] = (-3.0 * hv[0] + 4.0 * hv[1] - hv[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * hv[n - 1] - 4.0 * hv[n - 2] + hv[n - 3]) / (2.0 * dx);
  }
  for (int i = 0; i < n; ++i) out[i] /= m.density(i);
  return out;
}

/// Cumulative trapezoid antiderivative A with A(leftmost node) = 0.
inline Eigen::VectorXd antiderivative_field(const DiscreteMeasure& m, const Eigen::VectorXd& a) {
  const int n = m.size();
  if (a.size() != n) throw ConfigError("antiderivative_field: field length does not match grid");
  const double dx = m.spacing();
  Eigen::VectorXd out(n);
  out[0] = 0.0;
  for (int i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * dx * (a[i - 1] + a[i]);
  return out;
}

/// Inner-solution jet (div v, v) generated by a vector field.
inline Jet inner_solution_from_vector(const DiscreteMeasure& m, const Eigen::VectorXd& v) {
  Jet j;
  j.fiber_dim = 2;
  j.scalar = divergence(m, v);
  j.vector = v;
  return j;
}

}  // namespace cvp

#endif  // CVP_JETS_HPP
