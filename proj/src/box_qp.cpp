#include "trocar/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace trocar {

namespace {

enum class Status : unsigned char { kFree, kLower, kUpper, kFixed };

}  // namespace

bool BoxBounds::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != lower.size()) return false;
  return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
}

Eigen::VectorXd BoxBounds::clamp(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

double projectedGradientNorm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const BoxBounds& bounds) {
  return (x - bounds.clamp(x - grad)).norm();
}

BoxQpResult solveBoxQp(const Eigen::MatrixXd& H_in, const Eigen::VectorXd& g, const BoxBounds& bounds,
                       const Eigen::VectorXd& start, int max_iterations) {
  const Eigen::Index n = g.size();
  if (H_in.rows() != n || H_in.cols() != n || bounds.lower.size() != n || bounds.upper.size() != n ||
      start.size() != n) {
    throw std::invalid_argument("box QP: dimension mismatch");
  }
  if ((bounds.lower.array() > bounds.upper.array()).any()) {
    throw std::invalid_argument("box QP: lower bound above upper bound");
  }
  const Eigen::MatrixXd H = 0.5 * (H_in + H_in.transpose());

  BoxQpResult result;
  result.x = bounds.clamp(start);
  if (n == 0) return result;

  const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * h_scale) {
      throw std::domain_error("subproblem not convex");
    }
  }

  std::vector<Status> status(static_cast<std::size_t>(n), Status::kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (bounds.lower[i] == bounds.upper[i]) status[static_cast<std::size_t>(i)] = Status::kFixed;
  }

  Eigen::VectorXd& x = result.x;
  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));

  // Set after an unblocked Newton step: x minimizes over the current face.
  bool face_optimal = false;

  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    const Eigen::VectorXd grad = H * x + g;
    const double mult_tol = 1e-13 * (1.0 + grad.cwiseAbs().maxCoeff());

    free_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (status[static_cast<std::size_t>(i)] == Status::kFree) free_idx.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());

    Eigen::VectorXd d = Eigen::VectorXd::Zero(nf);
    bool zero_curvature = false;
    if (nf > 0 && !face_optimal) {
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = grad[free_idx[static_cast<std::size_t>(a)]];
        for (Eigen::Index b = 0; b < nf; ++b) {
          hff(a, b) = H(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hff);
      const auto& lam = eig.eigenvalues();
      const auto& vec = eig.eigenvectors();
      const double lam_cut = 1e-14 * std::max(h_scale, lam.cwiseAbs().maxCoeff());
      Eigen::VectorXd null_part = Eigen::VectorXd::Zero(nf);
      for (Eigen::Index k = 0; k < nf; ++k) {
        const double c = vec.col(k).dot(gf);
        if (lam[k] > lam_cut) {
          d -= (c / lam[k]) * vec.col(k);
        } else {
          null_part += c * vec.col(k);
        }
      }
      if (null_part.norm() > mult_tol) {
        // Objective is linear and decreasing along -null_part: walk to a bound.
        d = -null_part;
        zero_curvature = true;
      }
    }

    const double d_scale = 1e-15 * (1.0 + x.cwiseAbs().maxCoeff());
    if (nf == 0 || face_optimal || d.cwiseAbs().maxCoeff() <= d_scale) {
      // Stationary on the current face: release the worst bound, if any.
      Eigen::Index worst = -1;
      double worst_mult = -mult_tol;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = status[static_cast<std::size_t>(i)];
        double mult = 0.0;
        if (s == Status::kLower) mult = grad[i];
        else if (s == Status::kUpper) mult = -grad[i];
        else continue;
        if (mult < worst_mult) {
          worst_mult = mult;
          worst = i;
        }
      }
      if (worst < 0) break;
      status[static_cast<std::size_t>(worst)] = Status::kFree;
      face_optimal = false;
      continue;
    }

    double alpha_max = std::numeric_limits<double>::infinity();
    Eigen::Index blocking = -1;
    Status blocking_side = Status::kFree;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free_idx[static_cast<std::size_t>(a)];
      double step = std::numeric_limits<double>::infinity();
      Status side = Status::kFree;
      if (d[a] < 0.0) {
        step = (bounds.lower[i] - x[i]) / d[a];
        side = Status::kLower;
      } else if (d[a] > 0.0) {
        step = (bounds.upper[i] - x[i]) / d[a];
        side = Status::kUpper;
      }
      if (step < alpha_max) {
        alpha_max = std::max(step, 0.0);
        blocking = i;
        blocking_side = side;
      }
    }

    double alpha = zero_curvature ? alpha_max : std::min(1.0, alpha_max);
    if (!std::isfinite(alpha)) {
      throw std::domain_error("box QP: unbounded along a zero-curvature direction");
    }
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free_idx[static_cast<std::size_t>(a)];
      x[i] = std::clamp(x[i] + alpha * d[a], bounds.lower[i], bounds.upper[i]);
    }
    if (blocking >= 0 && alpha == alpha_max) {
      x[blocking] = blocking_side == Status::kLower ? bounds.lower[blocking] : bounds.upper[blocking];
      status[static_cast<std::size_t>(blocking)] = blocking_side;
    } else {
      face_optimal = !zero_curvature;
    }
  }

  result.kkt_residual = projectedGradientNorm(x, H * x + g, bounds);
  return result;
}

}  // namespace trocar
