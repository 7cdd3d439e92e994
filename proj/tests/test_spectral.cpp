#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvp/spectral.hpp"
#include "cvp/verify.hpp"

using namespace cvp;

namespace {

struct Setup {
  DiscreteMeasure measure;
  AssembledOperator op;
  AdaptedSpace space;
  SpectralDecomposition dec;
};

Setup gauss_setup(int n, double epsilon = -1.0) {
  const KernelSpec g = KernelSpec::builtin("gauss1d");
  DiscreteMeasure m = DiscreteMeasure::periodic_grid(32.0, n);
  AssembledOperator op = assemble_bilinear(g, m);
  AdaptedSpace sp =
      assemble_gram(m, compute_weight(g, m), FiberMetric::identity(m.size()), 1);
  SpectralDecomposition dec = decompose(op, sp, epsilon);
  return Setup{std::move(m), std::move(op), std::move(sp), std::move(dec)};
}

Eigen::VectorXd random_vec(std::mt19937& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("scaled identity pencils") {
  const DiscreteMeasure m = DiscreteMeasure::line_grid(-1.0, 1.0, 16);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(16, 1.5);
  const AdaptedSpace sp = assemble_gram(m, h, FiberMetric::identity(16), 1);

  AssembledOperator op;
  op.fiber_dim = 1;
  op.nodes = 16;
  op.A = Eigen::MatrixXd(sp.H_diag.asDiagonal());
  SpectralDecomposition dec = decompose(op, sp, 0.0);
  for (int i = 0; i < 16; ++i) CHECK(dec.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-12));

  op.A *= 2.0;
  dec = decompose(op, sp, 0.0);
  for (int i = 0; i < 16; ++i) CHECK(dec.eigenvalues[i] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("decompose rejects an indefinite Gram matrix") {
  const DiscreteMeasure m = DiscreteMeasure::line_grid(-1.0, 1.0, 8);
  AdaptedSpace sp = assemble_gram(m, Eigen::VectorXd::Ones(8), FiberMetric::identity(8), 1);
  sp.H_diag[2] = -sp.H_diag[2];
  AssembledOperator op;
  op.A = Eigen::MatrixXd::Identity(8, 8);
  CHECK_THROWS_AS(decompose(op, sp, 0.0), NumericalError);
}

TEST_CASE("eigenpairs: H-orthonormal, small pencil residual, bounded spectrum") {
  const Setup s = gauss_setup(96);
  const int n = s.dec.n_dof();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j <= k; ++j) {
      const double ip = s.dec.inner(s.dec.E.col(j), s.dec.E.col(k));
      CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-10);
    }
    const Eigen::VectorXd r =
        s.op.A * s.dec.E.col(k) -
        s.dec.eigenvalues[k] * s.dec.H_diag.cwiseProduct(s.dec.E.col(k));
    CHECK(r.norm() <= 1e-10 * s.op.A.norm());
  }
  CHECK(s.dec.eigenvalues[0] >= -1e-10 * s.dec.lambda_max());
  CHECK(s.dec.lambda_max() <= 2.0 + 1e-10);
}

TEST_CASE("spectrum matches the circulant oracle") {
  const Setup s = gauss_setup(128);
  const KernelSpec g = KernelSpec::builtin("gauss1d");
  const FourierOracle o = fourier_spectrum_oracle(g, s.measure);
  const double lmax = s.dec.lambda_max();
  for (int i = 0; i < s.dec.n_dof(); ++i)
    CHECK(std::abs(s.dec.eigenvalues[i] - o.eigenvalues[i]) <= 1e-8 * lmax);
  CHECK(std::abs(lmax - 0.5) < 1e-10);
}

TEST_CASE("functional calculus") {
  const Setup s = gauss_setup(64);
  std::mt19937 rng(17);
  const Eigen::VectorXd w = random_vec(rng, s.dec.n_dof());

  // identity function reproduces H^{-1} A w up to the kernel cutoff
  const Eigen::VectorXd via_f = apply_function(s.dec, [](double l) { return l; }, w);
  const Eigen::VectorXd direct = s.dec.H_diag.cwiseInverse().cwiseProduct(s.op.A * w);
  // remove the (tiny) kernel component the cutoff suppresses
  const Eigen::VectorXd direct_ret = direct - kernel_projection(s.dec, direct);
  CHECK(s.dec.norm(via_f - direct_ret) <= 1e-10 * std::max(1.0, s.dec.norm(w)));

  // constant one is the orthogonal projection onto the retained span
  const Eigen::VectorXd proj = apply_function(s.dec, [](double) { return 1.0; }, w);
  const Eigen::VectorXd expect = w - kernel_projection(s.dec, w);
  CHECK(s.dec.norm(proj - expect) <= 1e-10 * s.dec.norm(w));

  // f(lambda) = lambda^2 on an eigenvector
  const int k = s.dec.n_dof() - 1;
  const double lk = s.dec.eigenvalues[k];
  const Eigen::VectorXd sq =
      apply_function(s.dec, [](double l) { return l * l; }, s.dec.E.col(k));
  CHECK(s.dec.norm(sq - lk * lk * s.dec.E.col(k)) < 1e-10);
}

TEST_CASE("functional calculus guards its domain") {
  const Setup s = gauss_setup(128);
  // a kernel eigenvector carries all its mass where 1/lambda blows up
  int k0 = 0;
  REQUIRE(s.dec.is_kernel(k0));
  auto inv = [](double l) { return 1.0 / l; };
  // eigenvalues near zero may be tiny negative; force an exact singularity
  auto sing = [](double l) { return l <= 1e-8 ? std::numeric_limits<double>::infinity() : 1.0 / l; };
  CHECK_THROWS_AS(apply_function(s.dec, sing, s.dec.E.col(k0)), NumericalError);
  (void)inv;
}

TEST_CASE("resolution of identity") {
  const Setup s = gauss_setup(64, 0.0);  // epsilon = 0: keep every positive mode
  std::mt19937 rng(29);
  const Eigen::VectorXd w = random_vec(rng, s.dec.n_dof());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(s.dec.n_dof());
  const Eigen::VectorXd c = s.dec.coefficients(w);
  for (int k = 0; k < s.dec.n_dof(); ++k) acc += c[k] * s.dec.E.col(k);
  CHECK(s.dec.norm(acc - w) <= 1e-9 * s.dec.norm(w));
}

TEST_CASE("sobolev norms") {
  const Setup s = gauss_setup(96);
  std::mt19937 rng(31);
  Eigen::VectorXd u = random_vec(rng, s.dec.n_dof());
  u -= kernel_projection(s.dec, u);

  // k = 0 is the adapted norm
  CHECK(sobolev_norm(s.dec, u, 0) == doctest::Approx(s.dec.norm(u)).epsilon(1e-9));

  // single mode: k = 2 gives 1/lambda
  const int k = s.dec.n_dof() - 1;
  CHECK(sobolev_norm(s.dec, s.dec.E.col(k), 2) ==
        doctest::Approx(1.0 / s.dec.eigenvalues[k]).epsilon(1e-10));

  // all eigenvalues <= 1/2 < 1: norms grow with the order
  const double n0 = sobolev_norm(s.dec, u, 0);
  const double n1 = sobolev_norm(s.dec, u, 1);
  const double n2 = sobolev_norm(s.dec, u, 2);
  CHECK(n0 <= n1);
  CHECK(n1 <= n2);

  // kernel mass forbids k >= 1
  const Eigen::VectorXd dirty = u + 0.5 * s.dec.E.col(0);
  REQUIRE(s.dec.is_kernel(0));
  CHECK_THROWS_AS(sobolev_norm(s.dec, dirty, 1), NumericalError);
  CHECK_THROWS_AS(sobolev_norm(s.dec, u, -1), ConfigError);
}

TEST_CASE("solve_linearized inverts single modes") {
  // explicit cutoff well inside the spectral gap: retained modes are then
  // uniformly well-conditioned and 1/lambda does not amplify roundoff
  const Setup s = gauss_setup(96, 1e-6);
  const int k = s.dec.n_dof() - 3;
  REQUIRE(!s.dec.is_kernel(k));
  // w = lambda_k * h .* e_k, so w_hat = lambda_k e_k and the solution is e_k
  Eigen::VectorXd w(s.dec.n_dof());
  for (int i = 0; i < s.dec.n_dof(); ++i)
    w[i] = s.dec.eigenvalues[k] * s.space.h[i] * s.dec.E.col(k)[i];
  const SolveResult res = solve_linearized(s.dec, s.space, w);
  CHECK(res.residual_rel <= 1e-10);
  CHECK(s.dec.norm(res.solution - s.dec.E.col(k)) < 1e-9);
  CHECK(res.discarded_fraction < 1e-12);
}

TEST_CASE("solve then apply returns the retained inhomogeneity") {
  const Setup s = gauss_setup(96, 1e-6);
  std::mt19937 rng(41);
  // random w_hat supported on retained modes; feed w = h .* w_hat
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(s.dec.n_dof());
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int k = 0; k < s.dec.n_dof(); ++k)
    if (!s.dec.is_kernel(k)) coeffs[k] = dist(rng);
  const Eigen::VectorXd w_hat = s.dec.E * coeffs;
  Eigen::VectorXd w(s.dec.n_dof());
  for (int i = 0; i < s.dec.n_dof(); ++i) w[i] = s.space.h[i] * w_hat[i];

  const SolveResult res = solve_linearized(s.dec, s.space, w);
  CHECK(res.residual_rel < 1e-9);
  CHECK(res.retained_modes == s.dec.retained_modes());

  const Eigen::VectorXd back = s.dec.apply_operator(res.solution);
  CHECK(s.dec.norm(back - w_hat) <= 1e-9 * s.dec.norm(w_hat));

  // solution is orthogonal to the kernel
  CHECK(s.dec.norm(kernel_projection(s.dec, res.solution)) <=
        1e-10 * s.dec.norm(res.solution));

  // regularity transfer: |u|_{h^k} = |w_hat|_{h^{k+2}}
  for (int k : {0, 1, 2}) {
    const double lhs = sobolev_norm(s.dec, res.solution, k);
    const double rhs = sobolev_norm(s.dec, w_hat, k + 2);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
  }
}

TEST_CASE("solve refuses an inhomogeneity inside the kernel") {
  const Setup s = gauss_setup(128);
  REQUIRE(s.dec.is_kernel(0));
  Eigen::VectorXd w(s.dec.n_dof());
  for (int i = 0; i < s.dec.n_dof(); ++i) w[i] = s.space.h[i] * s.dec.E.col(0)[i];
  CHECK_THROWS_AS(solve_linearized(s.dec, s.space, w), NumericalError);
}

TEST_CASE("kernel projection") {
  const Setup s = gauss_setup(128);
  const int top = s.dec.n_dof() - 1;
  CHECK(s.dec.norm(kernel_projection(s.dec, s.dec.E.col(top))) < 1e-10);
  const Eigen::VectorXd k0 = s.dec.E.col(0);
  REQUIRE(s.dec.is_kernel(0));
  CHECK(s.dec.norm(kernel_projection(s.dec, k0) - k0) < 1e-10);
}
