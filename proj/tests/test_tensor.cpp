// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "anlm/tensor.hpp"
#include "doctest.h"
#include "support/check.hpp"
#include "support/gen.hpp"

using namespace anlm;
using anlm::testgen::Gen;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix triple_loop(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Standard-normal CDF by composite Simpson integration of the density from 0.
double phi_by_quadrature(double x) {
  const int n = 20000;
  const double h = x / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846); };
  double s = pdf(0.0) + pdf(x);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return 0.5 + s * h / 3.0;
}

}  // namespace

TEST_CASE("matmul") {
  Gen g(1);
  const Matrix m = g.matrix(3, 4);
  CHECK(matmul(Matrix::identity(3), m) == m);
  CHECK(matmul(Matrix(2, 3), g.matrix(3, 4)) == Matrix(2, 4));
  const Matrix a = g.matrix(4, 5), b = g.matrix(5, 2);
  CHECK(testgen::max_abs_diff(matmul(a, b), triple_loop(a, b)) == 0.0);
  CHECK_ERROR_CODE(matmul(Matrix(2, 3), Matrix(2, 3)), ErrorCode::shape);
}

TEST_CASE("matmul shape error names both shapes") {
  try {
    matmul(Matrix(2, 3), Matrix(4, 5));
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x5") != std::string::npos);
  }
}

TEST_CASE("matmul associativity") {
  Gen g(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t p = g.integer(1, 5), q = g.integer(1, 5), r = g.integer(1, 5), s = g.integer(1, 5);
    const Matrix a = g.matrix(p, q), b = g.matrix(q, r), c = g.matrix(r, s);
    const Matrix left = matmul(matmul(a, b), c), right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.rows(); ++i)
      for (std::size_t j = 0; j < left.cols(); ++j)
        CHECK(std::abs(left(i, j) - right(i, j)) <= 1e-9 * std::max(1.0, std::abs(left(i, j))));
  }
}

TEST_CASE("softmax examples") {
  const Vector third = softmax({0, 0, 0});
  for (double v : third) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Vector q = softmax({0, std::log(3.0)});
  CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-15));
  const Vector masked = softmax({0, -kInf});
  CHECK(masked[0] == 1.0);
  CHECK(masked[1] == 0.0);
  CHECK_ERROR_CODE(softmax({-kInf, -kInf}), ErrorCode::undefined_distribution);
}

TEST_CASE("softmax normalisation and shift invariance") {
  Gen g(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = t < 3 ? 100000 : g.integer(1, 200);
    const Vector v = g.vector(n, 50.0);
    const Vector p = softmax(v);
    CHECK(std::abs(testgen::sum(p) - 1.0) <= 1e-12);
    for (double x : p) CHECK(x >= 0.0);
    if (n > 1000) continue;
    const double c = g.real(-100, 100);
    Vector shifted = v;
    for (double& x : shifted) x += c;
    CHECK(testgen::max_abs_diff(softmax(shifted), p.storage()) <= 1e-12);
  }
}

TEST_CASE("gelu") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(0.0, GeluMode::exact) == 0.0);
  CHECK(std::abs(gelu(10.0) - 10.0) <= 1e-6);
  CHECK(std::abs(gelu(10.0, GeluMode::exact) - 10.0) <= 1e-6);
  CHECK(std::abs(gelu(1.0, GeluMode::exact) - phi_by_quadrature(1.0)) <= 1e-12);
  CHECK(std::abs(gelu(1.0, GeluMode::exact) - 0.841345) <= 1e-5);
}

TEST_CASE("gelu tanh approximation stays within 5e-3 of the exact form") {
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = -5.0 + 10.0 * i / 9999.0;
    worst = std::max(worst, std::abs(gelu(x) - gelu(x, GeluMode::exact)));
  }
  CHECK(worst <= 5e-3);
}

TEST_CASE("layer_norm") {
  const Vector flat = layer_norm({5, 5, 5, 5}, Vector(4, 1.0), Vector(4));
  for (double v : flat) CHECK(std::abs(v) <= 1e-9);
  const Vector unit = layer_norm({1, -1}, {1, 1}, {0, 0});
  CHECK(unit[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(unit[1] == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK_ERROR_CODE(layer_norm({1, 2}, {1}, {0, 0}), ErrorCode::shape);

  Gen g(4);
  for (int t = 0; t < 100; ++t) {
    const Vector z = layer_norm(g.vector(8, 10.0), Vector(8, 1.0), Vector(8));
    double mean = 0.0, var = 0.0;
    for (double v : z) mean += v;
    mean /= 8;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= 8;
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(std::abs(var - 1.0) <= 1e-4);
  }
}

TEST_CASE("layer_norm is invariant to positive affine rescaling") {
  Gen g(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = g.integer(2, 16);
    // Spread wide enough that the eps regulariser moves outputs by < 1e-6.
    const Vector x = g.vector(n, 30.0), gain = g.vector(n), bias = g.vector(n);
    const double a = g.real(0.5, 4.0), b = g.real(-10, 10);
    Vector y = x;
    for (double& v : y) v = a * v + b;
    CHECK(testgen::max_abs_diff(layer_norm(x, gain, bias), layer_norm(y, gain, bias).storage()) <= 1e-6);
    CHECK(testgen::max_abs_diff(layer_norm(x, gain, bias, 0.0), layer_norm(y, gain, bias, 0.0).storage()) <= 1e-12);
  }
}

TEST_CASE("sigmoid and tanh") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::tanh(0.0) == 0.0);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  Gen g(6);
  for (int t = 0; t < 1000; ++t) {
    const double x = g.real(-40, 40);
    CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-15);
    const double s = sigmoid(g.real(-30, 30));
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    const double th = std::tanh(g.real(-15, 15));
    CHECK(th > -1.0);
    CHECK(th < 1.0);
  }
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  const Vector v{0.2, 0.5, 0.5, 0.1};
  CHECK(argmax(v.values()) == 1);
  CHECK(argmax(Vector(4, 0.25).values()) == 0);
}
