#ifndef CVP_VERIFY_HPP
#define CVP_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvp/errors.hpp"
#include "cvp/field_operator.hpp"
#include "cvp/spectral.hpp"

namespace cvp {

struct OracleReport {
  std::string name;
  double max_rel_err = 0.0;
  std::vector<double> probe_location;
  std::vector<double> probe_error;
  bool passed = true;
};

/// Continuum Fourier symbol g(p) of the operator of a translation-invariant
/// scalar kernel: the transform of L(x - y) divided by the constant weight h.
inline double continuum_symbol(const KernelSpec& k, double p) {
  switch (k.family()) {
    case KernelFamily::Gauss1d:
      // transform of pi^{-1/2} e^{-x^2} is e^{-p^2/4}; h = 2
      return 0.5 * std::exp(-p * p / 4.0);
    case KernelFamily::Exp1d:
      // transform of e^{-|x|} is 2/(1+p^2); h = 3
      return 2.0 / (3.0 * (1.0 + p * p));
    default:
      throw ConfigError("no continuum symbol for kernel '" + k.name() + "'");
  }
}

struct FourierOracle {
  Eigen::VectorXd eigenvalues;      // sorted ascending
  Eigen::VectorXd continuum;        // g(2*pi*j/T), sorted ascending
  Eigen::VectorXd first_row;        // circulant row the DFT acted on
};

/// Circulant oracle for the spectrum of Delta_N: on a periodic grid the
/// operator matrix of a translation-invariant scalar kernel is circulant
/// with first row r_j = (w L(x_0, x_j) + delta_{0j} ell_0) / h_0, so its
/// eigenvalues are the DFT of that row. Everything here is built from
/// kernel evaluations only — no assembly, no eigensolver — by direct
/// O(n^2) cosine summation.
inline FourierOracle fourier_spectrum_oracle(const KernelSpec& k, const DiscreteMeasure& m) {
  if (!k.translation_invariant())
    throw ConfigError("fourier_spectrum_oracle requires a translation-invariant kernel");
  if (!m.periodic())
    throw ConfigError("fourier_spectrum_oracle requires a periodic grid");
  if (k.fiber_dim() != 1)
    throw ConfigError("fourier_spectrum_oracle handles scalar-only fibers");

  const int n = m.size();
  const double T = m.period();
  const Point x0 = m.point(0);

  double ell0 = -k.s_param();
  double h0 = 1.0;
  Eigen::VectorXd row(n);
  for (int j = 0; j < n; ++j) {
    const Point xj = m.point(j);
    const double delta = m.separation(m.coord(0), m.coord(j));
    const double lag = k.eval_delta(x0, xj, delta);
    ell0 += m.weight(j) * lag;
    h0 += m.weight(j) * k.bound_delta(x0, xj, delta);
    row[j] = m.weight(j) * lag;
  }
  row[0] += ell0;
  row /= h0;

  FourierOracle out;
  out.first_row = row;
  out.eigenvalues.resize(n);
  out.continuum.resize(n);
  for (int q = 0; q < n; ++q) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += row[j] * std::cos(2.0 * M_PI * static_cast<double>(q) * j / n);
    out.eigenvalues[q] = acc;
    // mode q corresponds to momentum 2*pi*min(q, n-q)/T
    const int qq = std::min(q, n - q);
    out.continuum[q] = continuum_symbol(k, 2.0 * M_PI * qq / T);
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  std::sort(out.continuum.begin(), out.continuum.end());
  return out;
}

/// Positivity and boundedness certificate for the assembled pencil.
inline OracleReport positivity_report(const AssembledOperator& op, const AdaptedSpace& sp) {
  SpectralDecomposition dec = decompose(op, sp, 0.0);
  OracleReport rep;
  rep.name = "positivity";
  const double lmin = dec.eigenvalues[0];
  const double lmax = dec.eigenvalues[dec.n_dof() - 1];
  rep.probe_location = {0.0, 1.0};
  rep.probe_error = {lmin, lmax};
  rep.max_rel_err = lmax > 0.0 ? std::max(0.0, -lmin / lmax) : std::abs(lmin);
  rep.passed = lmin >= -1e-10 * std::abs(lmax) && lmax <= 2.0 + 1e-10;
  return rep;
}

/// Checks the minimizer identity of the non-homogeneous Gaussian family:
/// with dmu = h drho, h(x) = c e^{beta x^2}, the integral of L(x, .) dmu
/// equals 1 for every x. Probes all interior grid nodes plus 10 seeded
/// off-grid points inside the truncation-safe band.
inline OracleReport minimizer_identity_check(double alpha, const DiscreteMeasure& rho) {
  const KernelSpec k = KernelSpec::builtin("inhomogeneous1d", {{"alpha", alpha}});
  const DiscreteMeasure mu =
      rho.with_density([&](double x) { return minimizer_density(k, x); }, "minimizer");

  OracleReport rep;
  rep.name = "minimizer_identity(alpha=" + std::to_string(alpha) + ")";

  std::vector<double> probes;
  for (int i = 0; i < mu.size(); ++i)
    if (interior_node(k, mu, mu.coord(i))) probes.push_back(mu.coord(i));
  if (probes.empty())
    throw ConfigError("grid too narrow for the decay rate of alpha = " + std::to_string(alpha));

  const double lo = probes.front();
  const double hi = probes.back();
  std::mt19937 rng(0);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (int t = 0; t < 10; ++t) probes.push_back(dist(rng));

  for (double x : probes) {
    const double err = std::abs(compute_ell(k, mu, Point::on_line(x)));
    rep.probe_location.push_back(x);
    rep.probe_error.push_back(err);
    rep.max_rel_err = std::max(rep.max_rel_err, err);
  }
  return rep;
}

/// Least-squares log-log slope of h(x) - h(0) against x over nodes with
/// lo <= x <= hi; measures the polynomial growth order of the weight.
inline double weight_growth_slope(const Eigen::VectorXd& h, const DiscreteMeasure& m,
                                  double lo, double hi) {
  int i0 = 0;
  for (int i = 1; i < m.size(); ++i)
    if (std::abs(m.coord(i)) < std::abs(m.coord(i0))) i0 = i;
  const double h0 = h[i0];

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int cnt = 0;
  for (int i = 0; i < m.size(); ++i) {
    const double x = m.coord(i);
    if (x < lo || x > hi) continue;
    const double dh = h[i] - h0;
    if (!(dh > 0.0)) continue;
    const double lx = std::log(x);
    const double ly = std::log(dh);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt < 2) throw ConfigError("weight_growth_slope: fewer than 2 usable nodes in range");
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace cvp

#endif  // CVP_VERIFY_HPP
