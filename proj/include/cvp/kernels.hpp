#ifndef CVP_KERNELS_HPP
#define CVP_KERNELS_HPP

#include <array>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "cvp/errors.hpp"

namespace cvp {

/// A point of the ambient manifold, in a fixed chart. Only the first
/// `dim` coordinates are meaningful.
struct Point {
  std::array<double, 2> coords{0.0, 0.0};
  int dim = 1;
  int chart_id = 0;

  static Point on_line(double x) { return Point{{x, 0.0}, 1, 0}; }
  static Point in_plane(double x, double y) { return Point{{x, y}, 2, 0}; }

  double line() const { return coords[0]; }
  double normal() const { return coords[1]; }
};

enum class KernelFamily {
  Gauss1d,
  Exp1d,
  Hyperplane2d,
  NontrivialWeight2d,
  Inhomogeneous1d,
};

enum class SupportDescriptor {
  FullLine,      // the support of the minimizing measure is all of R
  EmbeddedAxis,  // the x-axis {y = 0} inside R^2
};

/// A Lagrangian kernel together with the closed-form derivative data the
/// discretization needs: the kernel value, the symmetric second-variation
/// block on the jet fibers, and a bound for the fiber-norm of the second
/// variation. Immutable after construction; evaluation is pure.
///
/// Fiber convention: fiber_dim d = 1 means scalar-only jets, d = 2 means
/// scalar plus one vector direction (tangential for the 1d families,
/// normal to the axis for the hyperplane families).
class KernelSpec {
 public:
  using Params = std::map<std::string, double>;

  /// Factory for the built-in families. Recognized names:
  /// gauss1d, exp1d, hyperplane2d, nontrivial_weight2d, inhomogeneous1d.
  ///
  /// Optional params: "s" overrides the Lagrange parameter (must be > 0);
  /// "fiber_dim" (gauss1d only) selects d = 2, enabling the full
  /// scalar+vector fiber; "alpha" (inhomogeneous1d) selects the family
  /// member, alpha < 1. The derived constants beta and c of the
  /// non-homogeneous family are computed eagerly and exposed via param().
  static KernelSpec builtin(const std::string& name, const Params& params = {});

  const std::string& name() const { return name_; }
  KernelFamily family() const { return family_; }
  int ambient_dim() const { return ambient_dim_; }
  int fiber_dim() const { return fiber_dim_; }
  double s_param() const { return s_; }
  SupportDescriptor support() const { return support_; }
  bool translation_invariant() const { return family_ != KernelFamily::Inhomogeneous1d; }

  bool has_param(const std::string& key) const { return params_.count(key) > 0; }
  double param(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw ConfigError("kernel '" + name_ + "' has no parameter '" + key + "'");
    return it->second;
  }
  const Params& params() const { return params_; }

  /// L(x, y). Symmetric by construction: the value is computed from the
  /// separation and from commutative products only, so eval(x,y) and
  /// eval(y,x) are bit-identical.
  double eval(const Point& x, const Point& y) const {
    check_point(x);
    check_point(y);
    return eval_delta(x, y, x.line() - y.line());
  }

  /// Same as eval() with the line separation supplied by the caller
  /// (periodic grids pass the wrapped separation).
  double eval_delta(const Point& x, const Point& y, double delta) const;

  /// The symmetric (2d)x(2d) second-variation block B(x,y) with
  ///   (D_u D_v L)(x,y) = [u(x); u(y)]^T B [v(x); v(y)],
  /// rows/cols ordered as (scalar at x, vector at x, scalar at y, vector at y).
  /// Defined on the support N only.
  Eigen::MatrixXd second_variation_block(const Point& x, const Point& y) const {
    check_on_support(x);
    check_on_support(y);
    return block_delta(x, y, x.line() - y.line());
  }

  Eigen::MatrixXd block_delta(const Point& x, const Point& y, double delta) const;

  /// Bound for the fiber-operator norm of the second variation at (x,y).
  /// Closed form where the family provides one (the scalar-only families,
  /// where the supremum equals L(x,y), and the hyperplane families);
  /// otherwise the spectral norm of B under the pair norm
  /// ||u(x)|| + ||u(y)||, which overestimates the supremum by at most a
  /// factor 2.
  double curvature_norm_bound(const Point& x, const Point& y) const {
    check_on_support(x);
    check_on_support(y);
    return bound_delta(x, y, x.line() - y.line());
  }

  double bound_delta(const Point& x, const Point& y, double delta) const;

  /// Half-width of the boundary band on truncated grids inside which the
  /// continuum identities (EL equation, constancy of the weight) are
  /// spoiled by domain truncation. Nodes farther than this from every
  /// boundary see truncation errors below 1e-9.
  double interior_margin() const;

  /// Stretch factor for the interior band: the y-integrals of the
  /// non-homogeneous family are centered at (1-alpha)*x rather than x.
  double probe_stretch() const {
    return family_ == KernelFamily::Inhomogeneous1d ? 1.0 - param("alpha") : 1.0;
  }

 private:
  void check_point(const Point& p) const {
    if (p.dim != ambient_dim_)
      throw ConfigError("point dimension " + std::to_string(p.dim) +
                        " does not match kernel ambient dimension " + std::to_string(ambient_dim_));
  }
  void check_on_support(const Point& p) const {
    check_point(p);
    if (support_ == SupportDescriptor::EmbeddedAxis && p.normal() != 0.0)
      throw ConfigError("point is off the support axis {y = 0} of kernel '" + name_ + "'");
  }

  std::string name_;
  KernelFamily family_ = KernelFamily::Gauss1d;
  int ambient_dim_ = 1;
  int fiber_dim_ = 1;
  double s_ = 1.0;
  SupportDescriptor support_ = SupportDescriptor::FullLine;
  Params params_;
};

namespace detail {
inline const double kInvSqrtPi = 1.0 / std::sqrt(M_PI);

/// Scalar-only block: D_u D_v L = (a(x)+a(y))(b(x)+b(y)) L(x,y).
inline Eigen::MatrixXd scalar_only_block(double lag) {
  Eigen::MatrixXd b(2, 2);
  b << lag, lag, lag, lag;
  return b;
}
}  // namespace detail

inline KernelSpec KernelSpec::builtin(const std::string& name, const Params& params) {
  KernelSpec k;
  k.name_ = name;
  k.params_ = params;

  auto take = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };

  if (name == "gauss1d") {
    k.family_ = KernelFamily::Gauss1d;
    k.ambient_dim_ = 1;
    k.fiber_dim_ = static_cast<int>(take("fiber_dim", 1));
    k.s_ = take("s", 1.0);
    k.support_ = SupportDescriptor::FullLine;
  } else if (name == "exp1d") {
    k.family_ = KernelFamily::Exp1d;
    k.ambient_dim_ = 1;
    k.fiber_dim_ = 1;
    k.s_ = take("s", 2.0);  // int exp(-|x-y|) dy = 2
    k.support_ = SupportDescriptor::FullLine;
    if (params.count("fiber_dim") && take("fiber_dim", 1) != 1)
      throw ConfigError("exp1d supports scalar-only jets (the kernel is not C^2 at coincidence)");
  } else if (name == "hyperplane2d") {
    k.family_ = KernelFamily::Hyperplane2d;
    k.ambient_dim_ = 2;
    k.fiber_dim_ = 2;
    k.s_ = take("s", 1.0);
    k.support_ = SupportDescriptor::EmbeddedAxis;
  } else if (name == "nontrivial_weight2d") {
    k.family_ = KernelFamily::NontrivialWeight2d;
    k.ambient_dim_ = 2;
    k.fiber_dim_ = 2;
    k.s_ = take("s", 1.0);
    k.support_ = SupportDescriptor::EmbeddedAxis;
  } else if (name == "inhomogeneous1d") {
    k.family_ = KernelFamily::Inhomogeneous1d;
    k.ambient_dim_ = 1;
    k.fiber_dim_ = 1;
    k.s_ = take("s", 1.0);
    k.support_ = SupportDescriptor::FullLine;
    const double alpha = take("alpha", 0.5);
    if (alpha >= 1.0)
      throw ConfigError("inhomogeneous1d requires alpha < 1");
    const double beta = -alpha * (2.0 - alpha) / (1.0 - alpha);
    const double c = std::sqrt((1.0 - alpha - beta) / M_PI);
    k.params_["alpha"] = alpha;
    k.params_["beta"] = beta;
    k.params_["c"] = c;
  } else {
    throw ConfigError("unknown kernel '" + name + "'");
  }

  if (k.s_ <= 0.0) throw ConfigError("the parameter s must be positive");
  if (k.fiber_dim_ != 1 && k.fiber_dim_ != 2)
    throw ConfigError("fiber_dim must be 1 or 2");
  if (name == "gauss1d" && k.fiber_dim_ == 2) k.name_ = "gauss1d(full fiber)";
  return k;
}

inline double KernelSpec::eval_delta(const Point& x, const Point& y, double delta) const {
  switch (family_) {
    case KernelFamily::Gauss1d:
      return detail::kInvSqrtPi * std::exp(-delta * delta);
    case KernelFamily::Exp1d:
      return std::exp(-std::abs(delta));
    case KernelFamily::Hyperplane2d: {
      const double g = detail::kInvSqrtPi * std::exp(-delta * delta);
      return g * ((1.0 + x.normal() * x.normal()) * (1.0 + y.normal() * y.normal()));
    }
    case KernelFamily::NontrivialWeight2d: {
      const double g = detail::kInvSqrtPi * std::exp(-delta * delta);
      const double px = 1.0 + (x.line() * x.normal()) * (x.line() * x.normal());
      const double py = 1.0 + (y.line() * y.normal()) * (y.line() * y.normal());
      return g * std::exp(2.0 * (x.normal() * y.normal())) * (px * py);
    }
    case KernelFamily::Inhomogeneous1d: {
      const double alpha = params_.at("alpha");
      // f(x) f(y) is a commutative product, keeping eval exactly symmetric.
      const double ff = std::exp(alpha * x.line() * x.line()) * std::exp(alpha * y.line() * y.line());
      return ff * std::exp(-delta * delta);
    }
  }
  return 0.0;
}

inline Eigen::MatrixXd KernelSpec::block_delta(const Point& x, const Point& y, double delta) const {
  const double lag = eval_delta(x, y, delta);
  switch (family_) {
    case KernelFamily::Exp1d:
    case KernelFamily::Inhomogeneous1d:
      return detail::scalar_only_block(lag);
    case KernelFamily::Gauss1d: {
      if (fiber_dim_ == 1) return detail::scalar_only_block(lag);
      // Full fiber on the line: derivatives of L = pi^{-1/2} e^{-d^2}
      // with d = x - y.  L_x = -2d L, L_y = 2d L, L_xx = L_yy = (4d^2-2) L,
      // L_xy = (2-4d^2) L.
      const double lx = -2.0 * delta * lag;
      const double ly = 2.0 * delta * lag;
      const double lxx = (4.0 * delta * delta - 2.0) * lag;
      const double lxy = (2.0 - 4.0 * delta * delta) * lag;
      Eigen::MatrixXd b(4, 4);
      // order: (scalar_x, vector_x, scalar_y, vector_y)
      b << lag, lx, lag, ly,
           lx, lxx, lx, lxy,
           lag, lx, lag, ly,
           ly, lxy, ly, lxx;
      return b;
    }
    case KernelFamily::Hyperplane2d: {
      const double g = detail::kInvSqrtPi * std::exp(-delta * delta);
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
      b(0, 0) = b(0, 2) = b(2, 0) = b(2, 2) = g;
      b(1, 1) = b(3, 3) = 2.0 * g;
      return b;
    }
    case KernelFamily::NontrivialWeight2d: {
      const double g = detail::kInvSqrtPi * std::exp(-delta * delta);
      const double x2 = x.line() * x.line();
      const double y2 = y.line() * y.line();
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
      b(0, 0) = b(0, 2) = b(2, 0) = b(2, 2) = g;
      b(1, 1) = 2.0 * g * x2;
      b(3, 3) = 2.0 * g * y2;
      // cross term from the e^{2 y y'} factor of the Lagrangian
      b(1, 3) = b(3, 1) = 2.0 * g;
      return b;
    }
  }
  return Eigen::MatrixXd();
}

inline double KernelSpec::bound_delta(const Point& x, const Point& y, double delta) const {
  switch (family_) {
    case KernelFamily::Exp1d:
    case KernelFamily::Inhomogeneous1d:
      return eval_delta(x, y, delta);
    case KernelFamily::Gauss1d: {
      if (fiber_dim_ == 1) return eval_delta(x, y, delta);
      // Generic surrogate for the full fiber: spectral norm of B.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_delta(x, y, delta),
                                                        Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    case KernelFamily::Hyperplane2d: {
      // Scalar block norm 2G, vector block norm 2G; no coupling.
      return 2.0 * detail::kInvSqrtPi * std::exp(-delta * delta);
    }
    case KernelFamily::NontrivialWeight2d: {
      const double g = detail::kInvSqrtPi * std::exp(-delta * delta);
      const double x2 = x.line() * x.line();
      const double y2 = y.line() * y.line();
      // Vector block [[2x^2, 2], [2, 2y^2]] * g: largest |eigenvalue|.
      const double tr = x2 + y2;
      const double rad = std::sqrt((x2 - y2) * (x2 - y2) + 4.0);
      const double vec_norm = g * (tr + rad);  // = g*(x2+y2+sqrt((x2-y2)^2+4))
      return std::max(2.0 * g, vec_norm);
    }
  }
  return 0.0;
}

inline double KernelSpec::interior_margin() const {
  switch (family_) {
    case KernelFamily::Gauss1d:
    case KernelFamily::Hyperplane2d:
    case KernelFamily::NontrivialWeight2d:
      return 4.6;  // erfc(4.6)/2 ~ 4e-11
    case KernelFamily::Exp1d:
      return 21.0;  // e^{-21} ~ 8e-10
    case KernelFamily::Inhomogeneous1d: {
      // The y-integrand is a Gaussian of decay rate 1/(1-alpha) centered
      // at (1-alpha)x; require the boundary tail below ~e^{-21}.
      const double alpha = params_.at("alpha");
      return std::sqrt(21.0 * (1.0 - alpha));
    }
  }
  return 4.6;
}

/// Minimizer density of the non-homogeneous family: h(x) = c e^{beta x^2}.
inline double minimizer_density(const KernelSpec& k, double x) {
  if (k.family() != KernelFamily::Inhomogeneous1d)
    throw ConfigError("minimizer_density is defined for the inhomogeneous1d family only");
  return k.param("c") * std::exp(k.param("beta") * x * x);
}

}  // namespace cvp

#endif  // CVP_KERNELS_HPP
