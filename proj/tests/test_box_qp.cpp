#include "trocar/solver.hpp"

#include <Eigen/Eigenvalues>

#include <gtest/gtest.h>

#include <random>

namespace trocar {
namespace {

// Projected gradient descent with step 1/L run to a fixed point.
Eigen::VectorXd projectedGradientOracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const BoxBounds& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  Eigen::VectorXd x = b.clamp(Eigen::VectorXd::Zero(g.size()));
  for (int it = 0; it < 1000000; ++it) {
    const Eigen::VectorXd next = b.clamp(x - (H * x + g) / L);
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (change < 1e-15) break;
  }
  return x;
}

struct Instance {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  BoxBounds bounds;
};

Instance randomInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 7);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int n = dim(rng);
  Instance in;
  // Keep the spectrum in [0.1, 10] so the oracle converges well inside its budget.
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nrm(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd lam(n);
  std::uniform_real_distribution<double> spec(-1.0, 1.0);
  for (int i = 0; i < n; ++i) lam[i] = std::pow(10.0, spec(rng));
  in.H = Q * lam.asDiagonal() * Q.transpose();
  in.H = 0.5 * (in.H + in.H.transpose());
  in.g.resize(n);
  in.bounds.lower.resize(n);
  in.bounds.upper.resize(n);
  for (int i = 0; i < n; ++i) {
    in.g[i] = 3.0 * nrm(rng);
    const double a = u(rng), b = u(rng);
    in.bounds.lower[i] = std::min(a, b);
    in.bounds.upper[i] = std::max(a, b);
  }
  return in;
}

TEST(BoxQp, InteriorMinimizer) {
  BoxBounds b{Eigen::Vector2d(-10, -10), Eigen::Vector2d(10, 10)};
  const auto r = solveBoxQp(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-1, -1), b, Eigen::Vector2d::Zero());
  EXPECT_NEAR((r.x - Eigen::Vector2d(1, 1)).norm(), 0.0, 1e-15);
}

TEST(BoxQp, ActiveBound) {
  BoxBounds b{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  const auto r = solveBoxQp(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, -5.0), b,
                            Eigen::VectorXd::Zero(1));
  EXPECT_EQ(r.x[0], 1.0);
}

TEST(BoxQp, RejectsIndefiniteHessian) {
  BoxBounds b{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)};
  Eigen::Matrix2d H;
  H << 1, 0, 0, -1;
  try {
    solveBoxQp(H, Eigen::Vector2d::Zero(), b, Eigen::Vector2d::Zero());
    FAIL() << "expected an exception";
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "subproblem not convex");
  }
}

TEST(BoxQp, RejectsDimensionMismatch) {
  BoxBounds b{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)};
  EXPECT_THROW(solveBoxQp(Eigen::Matrix3d::Identity(), Eigen::Vector2d::Zero(), b, Eigen::Vector2d::Zero()),
               std::invalid_argument);
}

TEST(BoxQp, SingularHessianWalksToBound) {
  // Zero curvature in x[1] with a linear pull: the solution sits on the bound.
  BoxBounds b{Eigen::Vector2d(-1, -2), Eigen::Vector2d(1, 3)};
  Eigen::Matrix2d H;
  H << 2, 0, 0, 0;
  const auto r = solveBoxQp(H, Eigen::Vector2d(-1, -1), b, Eigen::Vector2d::Zero());
  EXPECT_NEAR((r.x - Eigen::Vector2d(0.5, 3.0)).norm(), 0.0, 1e-14);
}

TEST(BoxQp, FixedCoordinatesStayPut) {
  BoxBounds b{Eigen::Vector2d(0.3, -5), Eigen::Vector2d(0.3, 5)};
  const auto r = solveBoxQp(Eigen::Matrix2d::Identity(), Eigen::Vector2d(4, -2), b, Eigen::Vector2d(0.3, 0));
  EXPECT_EQ(r.x[0], 0.3);
  EXPECT_NEAR(r.x[1], 2.0, 1e-15);
}

TEST(BoxQp, MatchesProjectedGradientOracle) {
  std::mt19937_64 rng(41);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Instance in = randomInstance(rng);
    const auto r = solveBoxQp(in.H, in.g, in.bounds, in.bounds.clamp(Eigen::VectorXd::Zero(in.g.size())));
    const Eigen::VectorXd oracle = projectedGradientOracle(in.H, in.g, in.bounds);
    EXPECT_TRUE(in.bounds.contains(r.x));
    EXPECT_LE(r.kkt_residual, 1e-9);
    worst = std::max(worst, (r.x - oracle).norm());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(BoxQp, IsDeterministic) {
  std::mt19937_64 rng(42);
  const Instance in = randomInstance(rng);
  const Eigen::VectorXd start = in.bounds.clamp(Eigen::VectorXd::Zero(in.g.size()));
  const auto a = solveBoxQp(in.H, in.g, in.bounds, start);
  const auto b = solveBoxQp(in.H, in.g, in.bounds, start);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

}  // namespace
}  // namespace trocar
