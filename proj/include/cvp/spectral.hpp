#ifndef CVP_SPECTRAL_HPP
#define CVP_SPECTRAL_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvp/errors.hpp"
#include "cvp/field_operator.hpp"

namespace cvp {

/// Full eigensystem of the symmetric-definite pencil A e = lambda H e.
/// Eigenvalues ascending; eigenvectors orthonormal in the adapted inner
/// product (columns of E). Modes with lambda <= epsilon form the
/// numerical kernel of the operator.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd E;        // column k = e_k, H-orthonormal
  Eigen::VectorXd H_diag;   // Gram diagonal, kept for coefficient maps
  double epsilon = 0.0;     // resolved absolute kernel cutoff
  int fiber_dim = 1;

  int n_dof() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues[n_dof() - 1]; }
  bool is_kernel(int k) const { return eigenvalues[k] <= epsilon; }
  int retained_modes() const {
    int c = 0;
    for (int k = 0; k < n_dof(); ++k)
      if (!is_kernel(k)) ++c;
    return c;
  }

  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(H_diag.cwiseProduct(v));
  }
  double norm(const Eigen::VectorXd& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

  /// Adapted-product coefficients <<e_k, u>> for all modes.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& u) const {
    return E.transpose() * H_diag.cwiseProduct(u);
  }

  /// Spectral application of the operator over the full mode set
  /// (no cutoff): Delta_N u = sum_k lambda_k <<e_k, u>> e_k.
  Eigen::VectorXd apply_operator(const Eigen::VectorXd& u) const {
    return E * eigenvalues.cwiseProduct(coefficients(u));
  }
};

/// Eigendecomposition of the pencil. Because the Gram matrix is diagonal,
/// the pencil reduces exactly to the symmetric eigenproblem of
/// H^{-1/2} A H^{-1/2}; eigenvectors are back-transformed and given one
/// deterministic modified-Gram-Schmidt pass in the adapted product.
/// A negative epsilon selects the default relative cutoff 1e-8 * lambda_max.
inline SpectralDecomposition decompose(const AssembledOperator& op, const AdaptedSpace& sp,
                                       double epsilon = -1.0) {
  const int n_dof = static_cast<int>(op.A.rows());
  if (sp.H_diag.size() != n_dof)
    throw ConfigError("operator and adapted space have different dof counts");
  for (int i = 0; i < n_dof; ++i)
    if (!(sp.H_diag[i] > 0.0))
      throw NumericalError("adapted Gram matrix is not positive-definite");

  const Eigen::VectorXd d_inv_sqrt = sp.H_diag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd B = d_inv_sqrt.asDiagonal() * op.A * d_inv_sqrt.asDiagonal();
  B = 0.5 * (B + B.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the operator pencil failed");

  SpectralDecomposition dec;
  dec.eigenvalues = es.eigenvalues();
  dec.E = d_inv_sqrt.asDiagonal() * es.eigenvectors();
  dec.H_diag = sp.H_diag;
  dec.fiber_dim = sp.fiber_dim;

  // One MGS pass in the adapted product to pin H-orthonormality.
  for (int k = 0; k < n_dof; ++k) {
    Eigen::VectorXd v = dec.E.col(k);
    for (int j = 0; j < k; ++j) {
      const double c = dec.inner(dec.E.col(j), v);
      v -= c * dec.E.col(j);
    }
    const double nrm = dec.norm(v);
    if (!(nrm > 0.0)) throw NumericalError("degenerate eigenvector during re-orthonormalization");
    dec.E.col(k) = v / nrm;
  }

  const double lmax = dec.eigenvalues.cwiseAbs().maxCoeff();
  dec.epsilon = epsilon < 0.0 ? 1e-8 * lmax : epsilon;
  return dec;
}

/// Functional calculus: f(Delta_N) w over the retained modes. Throws when
/// f is not finite on a retained eigenvalue, or when f blows up on a
/// kernel eigenvalue that carries more than 1e-10 of the adapted norm of w.
inline Eigen::VectorXd apply_function(const SpectralDecomposition& dec,
                                      const std::function<double(double)>& f,
                                      const Eigen::VectorXd& w) {
  const Eigen::VectorXd c = dec.coefficients(w);
  const double wn = dec.norm(w);
  Eigen::VectorXd scaled = Eigen::VectorXd::Zero(dec.n_dof());
  for (int k = 0; k < dec.n_dof(); ++k) {
    const double fk = f(dec.eigenvalues[k]);
    if (dec.is_kernel(k)) {
      if (!std::isfinite(fk) && std::abs(c[k]) > 1e-10 * wn)
        throw NumericalError("apply_function: input has mass on modes where f is singular");
      continue;
    }
    if (!std::isfinite(fk))
      throw NumericalError("apply_function: f is not finite on a retained eigenvalue");
    scaled[k] = fk * c[k];
  }
  return dec.E * scaled;
}

/// Component of u in the span of kernel modes (lambda <= epsilon).
inline Eigen::VectorXd kernel_projection(const SpectralDecomposition& dec,
                                         const Eigen::VectorXd& u) {
  const Eigen::VectorXd c = dec.coefficients(u);
  Eigen::VectorXd masked = Eigen::VectorXd::Zero(dec.n_dof());
  for (int k = 0; k < dec.n_dof(); ++k)
    if (dec.is_kernel(k)) masked[k] = c[k];
  return dec.E * masked;
}

/// Sobolev-type norm sqrt(sum_{lambda > eps} lambda^{-k} <<e, u>>^2).
/// For k >= 1 the input must be orthogonal to the kernel modes.
inline double sobolev_norm(const SpectralDecomposition& dec, const Eigen::VectorXd& u, int k) {
  if (k < 0) throw ConfigError("sobolev_norm: order k must be non-negative");
  const Eigen::VectorXd c = dec.coefficients(u);
  if (k >= 1) {
    double kernel_mass = 0.0;
    for (int j = 0; j < dec.n_dof(); ++j)
      if (dec.is_kernel(j)) kernel_mass += c[j] * c[j];
    const double un = dec.norm(u);
    if (std::sqrt(kernel_mass) > 1e-8 * std::max(un, 1e-300))
      throw NumericalError("sobolev_norm with k >= 1 requires kernel-orthogonal input");
  }
  double s = 0.0;
  for (int j = 0; j < dec.n_dof(); ++j) {
    if (dec.is_kernel(j)) continue;
    s += std::pow(dec.eigenvalues[j], -static_cast<double>(k)) * c[j] * c[j];
  }
  return std::sqrt(s);
}

struct SolveResult {
  Eigen::VectorXd solution;       // dof-vector u
  double residual_rel = 0.0;      // ||Delta_N u - w_hat_retained|| / ||w_hat_retained||
  double discarded_fraction = 0.0;  // adapted-norm fraction of w_hat cut off
  int retained_modes = 0;
};

/// Weak-solution operator: forms w_hat = w / h pointwise, discards kernel
/// modes, and inverts the retained spectrum,
///   u = sum_{lambda > eps} lambda^{-1} <<e, w_hat>> e.
inline SolveResult solve_linearized(const SpectralDecomposition& dec, const AdaptedSpace& sp,
                                    const Eigen::VectorXd& w) {
  const int n_dof = dec.n_dof();
  if (w.size() != n_dof) throw ConfigError("solve_linearized: dof-vector length mismatch");
  const int d = dec.fiber_dim;
  Eigen::VectorXd w_hat(n_dof);
  for (int i = 0; i < n_dof; ++i) w_hat[i] = w[i] / sp.h[i / d];

  const Eigen::VectorXd c = dec.coefficients(w_hat);
  double kept = 0.0, cut = 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(n_dof);
  Eigen::VectorXd ret = Eigen::VectorXd::Zero(n_dof);
  int retained = 0;
  for (int k = 0; k < n_dof; ++k) {
    if (dec.is_kernel(k)) {
      cut += c[k] * c[k];
      continue;
    }
    kept += c[k] * c[k];
    inv[k] = c[k] / dec.eigenvalues[k];
    ret[k] = c[k];
    ++retained;
  }
  // roundoff leaves ~1e-16 coefficients on every mode, so "entirely in the
  // kernel" is a relative statement about the retained mass
  if (!(kept > 1e-24 * (kept + cut)))
    throw NumericalError("solve_linearized: inhomogeneity lies entirely in the operator kernel");

  SolveResult res;
  res.solution = dec.E * inv;
  res.retained_modes = retained;
  res.discarded_fraction = std::sqrt(cut / (cut + kept));
  const Eigen::VectorXd w_ret = dec.E * ret;
  const Eigen::VectorXd r = dec.apply_operator(res.solution) - w_ret;
  res.residual_rel = dec.norm(r) / dec.norm(w_ret);
  return res;
}

}  // namespace cvp

#endif  // CVP_SPECTRAL_HPP
