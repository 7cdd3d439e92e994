#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cvp/verify.hpp"

using namespace cvp;

TEST_CASE("circulant oracle: Gaussian spectrum hits the continuum law") {
  const KernelSpec g = KernelSpec::builtin("gauss1d");
  const DiscreteMeasure m = DiscreteMeasure::periodic_grid(32.0, 256);
  const FourierOracle o = fourier_spectrum_oracle(g, m);

  // top eigenvalue is g(0) = 1/2
  CHECK(std::abs(o.eigenvalues[m.size() - 1] - 0.5) < 1e-10);

  // sorted discrete eigenvalues against sorted continuum symbol values
  for (int i = 0; i < m.size(); ++i)
    CHECK(std::abs(o.eigenvalues[i] - o.continuum[i]) < 1e-10);
}

TEST_CASE("circulant oracle: exponential kernel has a strictly positive symbol") {
  const KernelSpec e = KernelSpec::builtin("exp1d");
  const DiscreteMeasure m = DiscreteMeasure::periodic_grid(32.0, 256);
  const FourierOracle o = fourier_spectrum_oracle(e, m);
  for (int i = 0; i < m.size(); ++i) {
    CHECK(o.eigenvalues[i] > 0.0);
    CHECK(o.continuum[i] > 0.0);
  }
  // the kink at coincidence costs O(dx^2) absolute, visible mostly at high
  // momenta; the top of the spectrum tracks the continuum symbol closely
  CHECK(o.continuum[m.size() - 1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(o.eigenvalues[m.size() - 1] - 2.0 / 3.0) < 0.01);
}

TEST_CASE("oracle preconditions") {
  const KernelSpec g = KernelSpec::builtin("gauss1d");
  CHECK_THROWS_AS(fourier_spectrum_oracle(g, DiscreteMeasure::line_grid(-8.0, 8.0, 32)),
                  ConfigError);
  const KernelSpec inh = KernelSpec::builtin("inhomogeneous1d", {{"alpha", 0.5}});
  CHECK_THROWS_AS(fourier_spectrum_oracle(inh, DiscreteMeasure::periodic_grid(32.0, 32)),
                  ConfigError);
  CHECK_THROWS_AS(continuum_symbol(KernelSpec::builtin("hyperplane2d"), 0.0), ConfigError);
}

TEST_CASE("positivity report: certificate and negative control") {
  const KernelSpec g = KernelSpec::builtin("gauss1d");
  const DiscreteMeasure m = DiscreteMeasure::periodic_grid(32.0, 96);
  const AssembledOperator op = assemble_bilinear(g, m);
  const AdaptedSpace sp =
      assemble_gram(m, compute_weight(g, m), FiberMetric::identity(m.size()), 1);

  const OracleReport good = positivity_report(op, sp);
  CHECK(good.passed);

  AssembledOperator flipped = op;
  flipped.A = -flipped.A;
  const OracleReport bad = positivity_report(flipped, sp);
  CHECK_FALSE(bad.passed);
}

TEST_CASE("minimizer identity: alpha = 0 reduces to the plain Gaussian") {
  const DiscreteMeasure rho = DiscreteMeasure::line_grid(-8.0, 8.0, 512);
  const OracleReport rep = minimizer_identity_check(0.0, rho);
  CHECK(rep.max_rel_err < 1e-8);
}

TEST_CASE("minimizer identity: alpha = 0.5 on an adequate grid") {
  const DiscreteMeasure rho = DiscreteMeasure::line_grid(-8.0, 8.0, 1024);
  const OracleReport rep = minimizer_identity_check(0.5, rho);
  CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("minimizer identity error decreases under refinement") {
  // coarse grids, where the quadrature error is visible above roundoff
  auto err = [](int n) {
    const DiscreteMeasure rho =
        DiscreteMeasure::line_grid(-8.0, 8.0, n, QuadratureRule::Midpoint);
    return minimizer_identity_check(0.5, rho).max_rel_err;
  };
  const double coarse = err(16), fine = err(32);
  CHECK(coarse > 1e-6);
  CHECK(fine < 0.1 * coarse);
}

TEST_CASE("Mehler correspondence: alpha = 1 - rho") {
  const double rho = 0.5;
  const double alpha = 1.0 - rho;
  const KernelSpec k = KernelSpec::builtin("inhomogeneous1d", {{"alpha", alpha}});
  CHECK(k.param("beta") == doctest::Approx((rho * rho - 1.0) / rho).epsilon(1e-14));
}

TEST_CASE("weight growth slope recovers a quadratic") {
  const DiscreteMeasure m = DiscreteMeasure::line_grid(-8.0, 8.0, 257);
  Eigen::VectorXd h(m.size());
  for (int i = 0; i < m.size(); ++i) h[i] = 1.0 + 2.0 * m.coord(i) * m.coord(i);
  CHECK(weight_growth_slope(h, m, 2.0, 6.0) == doctest::Approx(2.0).epsilon(1e-10));
}
