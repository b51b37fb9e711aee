#include <doctest.h>

#include <cmath>

#include "bayesqp/kernel.hpp"
#include "bayesqp/rng.hpp"
#include "support/fd.hpp"

using namespace bayesqp;
using bayesqp::testing::fd_gradient;
using bayesqp::testing::fd_hessian;
using bayesqp::testing::fd_jacobian;

namespace {

Vector random_point(Index d, Rng& rng) {
  Vector x(d);
  for (Index i = 0; i < d; ++i) x[i] = rng.uniform();
  return x;
}

KernelHyperparameters random_hyper(Index d, Rng& rng) {
  KernelHyperparameters hyper;
  hyper.lengthscales.resize(d);
  for (Index i = 0; i < d; ++i) hyper.lengthscales[i] = rng.uniform(0.2, 1.5);
  hyper.output_scale = rng.uniform(0.5, 2.0);
  hyper.noise_variance = 1e-4;
  return hyper;
}

}  // namespace

TEST_CASE("eval_k closed-form values") {
  const auto h1 = KernelHyperparameters::isotropic(1, 1.0);
  Vector x0 = Vector::Zero(1), x1 = Vector::Ones(1);
  CHECK(eval_k(x0, x0, h1) == doctest::Approx(1.0));
  CHECK(eval_k(x0, x1, h1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  const auto h2 = KernelHyperparameters::isotropic(2, 1.0);
  Vector a = Vector::Zero(2);
  Vector b(2);
  b << 3.0, 4.0;
  CHECK(eval_k(a, b, h2) ==
        doctest::Approx(std::exp(-12.5)).epsilon(1e-12));
}

TEST_CASE("eval_k symmetry and dimension check") {
  Rng rng(1);
  const auto hyper = random_hyper(3, rng);
  const Vector x = random_point(3, rng), y = random_point(3, rng);
  CHECK(eval_k(x, y, hyper) == eval_k(y, x, hyper));
  CHECK_THROWS_AS(eval_k(Vector::Zero(2), Vector::Zero(3), hyper),
                  std::invalid_argument);
}

TEST_CASE("grad_k closed form and sign") {
  const auto h1 = KernelHyperparameters::isotropic(1, 1.0);
  Vector x0 = Vector::Zero(1), x1 = Vector::Ones(1);
  CHECK(grad_k(x0, x0, h1)[0] == 0.0);
  // gradient with respect to the first argument points toward x2
  CHECK(grad_k(x0, x1, h1)[0] ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  Rng rng(2);
  const auto hyper = random_hyper(4, rng);
  const Vector x = random_point(4, rng), y = random_point(4, rng);
  const Vector g = grad_k(x, y, hyper);
  for (Index i = 0; i < 4; ++i) {
    if (y[i] != x[i]) CHECK(g[i] * (y[i] - x[i]) > 0.0);
  }
}

TEST_CASE("hess_k closed form") {
  const auto h1 = KernelHyperparameters::isotropic(1, 1.0);
  Vector x0 = Vector::Zero(1);
  Vector x2(1);
  x2 << 2.0;
  CHECK(hess_k(x0, x2, h1)(0, 0) ==
        doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(hess_k(x0, x0, h1)(0, 0) == doctest::Approx(-1.0));

  // at coincident points, hess = -cross_hess and cross_hess = diag(1/l_i^2)
  Rng rng(3);
  const auto hyper = random_hyper(3, rng);
  const Vector x = random_point(3, rng);
  const Matrix ch = cross_hess_k(x, x, hyper);
  CHECK((hess_k(x, x, hyper) + ch).norm() == doctest::Approx(0.0));
  for (Index i = 0; i < 3; ++i) {
    const double expected = hyper.output_scale /
                            (hyper.lengthscales[i] * hyper.lengthscales[i]);
    CHECK(ch(i, i) == doctest::Approx(expected).epsilon(1e-12));
    for (Index j = 0; j < 3; ++j) {
      if (i != j) CHECK(ch(i, j) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("cross_hess_k vanishes at unit separation with unit lengthscale") {
  const auto h1 = KernelHyperparameters::isotropic(1, 1.0);
  Vector x0 = Vector::Zero(1), x1 = Vector::Ones(1);
  CHECK(cross_hess_k(x0, x1, h1)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("derivative consistency chain against finite differences") {
  Rng rng(42);
  for (Index d : {1, 2, 4, 8}) {
    const auto hyper = random_hyper(d, rng);
    for (int rep = 0; rep < 5; ++rep) {
      const Vector x = random_point(d, rng), y = random_point(d, rng);

      // grad_k = FD(eval_k) in the first argument
      const Vector g_fd = fd_gradient(
          [&](const Vector& p) { return eval_k(p, y, hyper); }, x, 1e-5);
      const Vector g = grad_k(x, y, hyper);
      CHECK((g - g_fd).lpNorm<Eigen::Infinity>() <=
            1e-4 * std::max(1.0, g.lpNorm<Eigen::Infinity>()));

      // cross_hess_k = FD_{x2}(grad_k)
      const Matrix ch_fd = fd_jacobian(
          [&](const Vector& p) { return grad_k(x, p, hyper); }, y, 1e-5);
      const Matrix ch = cross_hess_k(x, y, hyper);
      CHECK((ch - ch_fd).lpNorm<Eigen::Infinity>() <=
            1e-4 * std::max(1.0, ch.lpNorm<Eigen::Infinity>()));

      // hess_k = FD_x(grad_k) = FD Hessian of eval_k
      const Matrix h_fd = fd_hessian(
          [&](const Vector& p) { return eval_k(p, y, hyper); }, x, 1e-4);
      const Matrix h = hess_k(x, y, hyper);
      CHECK((h - h_fd).lpNorm<Eigen::Infinity>() <= 1e-4);
    }
  }
}

TEST_CASE("stationarity: blocks depend only on x - x2") {
  Rng rng(9);
  const auto hyper = random_hyper(3, rng);
  const Vector x = random_point(3, rng), y = random_point(3, rng);
  const Vector shift = random_point(3, rng);
  CHECK(eval_k(x, y, hyper) ==
        doctest::Approx(eval_k(x + shift, y + shift, hyper)).epsilon(1e-14));
  CHECK((grad_k(x, y, hyper) - grad_k(x + shift, y + shift, hyper)).norm() <=
        1e-14);
  CHECK((hess_k(x, y, hyper) - hess_k(x + shift, y + shift, hyper)).norm() <=
        1e-13);
}

TEST_CASE("gram matrix is PSD down to the noise floor") {
  Rng rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index n = 2 + static_cast<Index>(rng.uniform() * 30);
    auto hyper = random_hyper(d, rng);
    hyper.noise_variance = 1e-6;
    Matrix X(d, n);
    for (Index j = 0; j < n; ++j) X.col(j) = random_point(d, rng);
    const Matrix K = gram_matrix(X, hyper);
    CHECK((K - K.transpose()).lpNorm<Eigen::Infinity>() <= 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
    CHECK(eig.eigenvalues().minCoeff() >= hyper.noise_variance - 1e-10);
  }
}

TEST_CASE("batch kernel row matches pointwise evaluation") {
  Rng rng(13);
  const Index d = 5, n = 23;
  const auto hyper = random_hyper(d, rng);
  Matrix X(d, n);
  for (Index j = 0; j < n; ++j) X.col(j) = random_point(d, rng);
  const Vector x = random_point(d, rng);
  const Vector row = kernel_row(x, X, hyper);
  const Matrix G = grad_k_stack(x, X, hyper);
  for (Index j = 0; j < n; ++j) {
    CHECK(row[j] == doctest::Approx(eval_k(x, X.col(j), hyper)).epsilon(1e-13));
    CHECK((G.col(j) - grad_k(x, X.col(j), hyper)).norm() <= 1e-13);
  }
}

TEST_CASE("hyperparameter validation") {
  auto hyper = KernelHyperparameters::isotropic(2, 0.5);
  CHECK_NOTHROW(hyper.validate());
  hyper.lengthscales[0] = 1e-5;
  CHECK_THROWS_AS(hyper.validate(), std::invalid_argument);
  hyper = KernelHyperparameters::isotropic(2, 0.5);
  hyper.output_scale = 0.0;
  CHECK_THROWS_AS(hyper.validate(), std::invalid_argument);
  hyper = KernelHyperparameters::isotropic(2, 0.5);
  hyper.noise_variance = -1.0;
  CHECK_THROWS_AS(hyper.validate(), std::invalid_argument);
}
