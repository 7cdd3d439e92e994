#ifndef CVP_MEASURE_HPP
#define CVP_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvp/errors.hpp"
#include "cvp/kernels.hpp"

namespace cvp {

enum class GridTopology {
  TruncatedLine,  // uniform grid on [a, b]
  PeriodicLine,   // n equispaced nodes on [0, T), distances modulo T
};

enum class QuadratureRule { Trapezoid, Midpoint };

/// Quadrature representation of the support measure: ordered nodes on a
/// line (possibly embedded on the axis {y = 0} of the plane) with
/// positive masses. Immutable after construction.
class DiscreteMeasure {
 public:
  /// Uniform grid on [a, b] with composite trapezoid or midpoint weights.
  static DiscreteMeasure line_grid(double a, double b, int n,
                                   QuadratureRule rule = QuadratureRule::Trapezoid,
                                   int ambient_dim = 1) {
    if (n < 2) throw ConfigError("line grid needs n >= 2");
    if (!(a < b)) throw ConfigError("line grid needs a < b");
    DiscreteMeasure m;
    m.topology_ = GridTopology::TruncatedLine;
    m.domain_a_ = a;
    m.domain_b_ = b;
    m.ambient_dim_ = ambient_dim;
    if (rule == QuadratureRule::Trapezoid) {
      const double dx = (b - a) / (n - 1);
      m.spacing_ = dx;
      m.x_.resize(n);
      m.w_.resize(n);
      for (int i = 0; i < n; ++i) {
        m.x_[i] = a + dx * i;
        m.w_[i] = (i == 0 || i == n - 1) ? 0.5 * dx : dx;
      }
    } else {
      const double dx = (b - a) / n;
      m.spacing_ = dx;
      m.x_.resize(n);
      m.w_.resize(n);
      for (int i = 0; i < n; ++i) {
        m.x_[i] = a + dx * (i + 0.5);
        m.w_[i] = dx;
      }
    }
    return m;
  }

  /// n equispaced nodes on [0, T), each of mass T/n; distances wrap.
  static DiscreteMeasure periodic_grid(double period, int n, int ambient_dim = 1) {
    if (n < 2) throw ConfigError("periodic grid needs n >= 2");
    if (!(period > 0.0)) throw ConfigError("periodic grid needs T > 0");
    DiscreteMeasure m;
    m.topology_ = GridTopology::PeriodicLine;
    m.period_ = period;
    m.ambient_dim_ = ambient_dim;
    const double dx = period / n;
    m.spacing_ = dx;
    m.x_.resize(n);
    m.w_.assign(n, dx);
    for (int i = 0; i < n; ++i) m.x_[i] = dx * i;
    return m;
  }

  /// New measure with weights multiplied pointwise by a strictly positive
  /// density. The base quadrature masses and the accumulated density are
  /// kept separate and combined lazily, so stacking densities is exactly
  /// associative: applying d1 then d2 gives bit-identical weights to
  /// applying the pointwise product d1*d2 once.
  DiscreteMeasure with_density(const std::vector<double>& density,
                               const std::string& tag) const {
    if (static_cast<int>(density.size()) != size())
      throw ConfigError("density field length does not match grid size");
    DiscreteMeasure m = *this;
    m.ensure_density_storage();
    for (int i = 0; i < size(); ++i) {
      if (!(density[i] > 0.0))
        throw ConfigError("density must be strictly positive at every node");
      m.density_[i] *= density[i];
    }
    m.density_tag_ = density_tag_.empty() ? tag : density_tag_ + "*" + tag;
    return m;
  }

  DiscreteMeasure with_density(const std::function<double(double)>& density,
                               const std::string& tag) const {
    std::vector<double> vals(size());
    for (int i = 0; i < size(); ++i) vals[i] = density(x_[i]);
    return with_density(vals, tag);
  }

  int size() const { return static_cast<int>(x_.size()); }
  GridTopology topology() const { return topology_; }
  bool periodic() const { return topology_ == GridTopology::PeriodicLine; }
  double period() const { return period_; }
  double domain_a() const { return domain_a_; }
  double domain_b() const { return domain_b_; }
  double spacing() const { return spacing_; }
  int ambient_dim() const { return ambient_dim_; }
  const std::string& density_tag() const { return density_tag_; }

  double coord(int i) const { return x_[i]; }
  double weight(int i) const { return density_.empty() ? w_[i] : w_[i] * density_[i]; }
  double density(int i) const { return density_.empty() ? 1.0 : density_[i]; }
  const std::vector<double>& coords() const { return x_; }

  std::vector<double> weights() const {
    std::vector<double> out(x_.size());
    for (int i = 0; i < size(); ++i) out[i] = weight(i);
    return out;
  }

  Point point(int i) const {
    return ambient_dim_ == 1 ? Point::on_line(x_[i]) : Point::in_plane(x_[i], 0.0);
  }

  double total_mass() const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += weight(i);
    return s;
  }

  /// Signed separation x - y, wrapped to (-T/2, T/2] on periodic grids.
  double separation(double x, double y) const {
    double d = x - y;
    if (periodic()) {
      d = std::remainder(d, period_);
    }
    return d;
  }

  /// Quadrature sum. The per-node products are summed in sorted order,
  /// which makes the result independent of any permutation of equal-mass
  /// nodes (e.g. cyclic rotation of an integrand on a periodic grid).
  double integrate(const std::vector<double>& values) const {
    if (static_cast<int>(values.size()) != size())
      throw ConfigError("integrand length does not match grid size");
    std::vector<double> terms(values.size());
    for (int i = 0; i < size(); ++i) terms[i] = values[i] * weight(i);
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }

  double integrate(const Eigen::VectorXd& values) const {
    if (values.size() != size())
      throw ConfigError("integrand length does not match grid size");
    return integrate(std::vector<double>(values.data(), values.data() + values.size()));
  }

  /// Distance from node i to the nearest truncated boundary (infinite on
  /// periodic grids, where there is no boundary).
  double boundary_distance(int i) const {
    if (periodic()) return std::numeric_limits<double>::infinity();
    return std::min(x_[i] - domain_a_, domain_b_ - x_[i]);
  }

 private:
  DiscreteMeasure() = default;

  GridTopology topology_ = GridTopology::TruncatedLine;
  double domain_a_ = 0.0, domain_b_ = 1.0, period_ = 0.0, spacing_ = 0.0;
  int ambient_dim_ = 1;
  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<double> density_;
  std::string density_tag_;

  // density_ starts empty (interpreted as 1); with_density needs a
  // materialized copy to multiply into.
  void ensure_density_storage() {
    if (density_.empty()) density_.assign(x_.size(), 1.0);
  }
};

}  // namespace cvp

#endif  // CVP_MEASURE_HPP
