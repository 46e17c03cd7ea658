#include "quadfx/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace quadfx {

namespace {

enum BoundFlag : int { kFree = 0, kAtLower = -1, kAtUpper = 1 };

}  // namespace

QpSolution solve_box_qp(const BoxQp& qp, const Eigen::VectorXd& x0, int max_iterations) {
  const Eigen::Index n = qp.size();
  if (qp.hessian.rows() != n || qp.hessian.cols() != n || qp.lower.size() != n ||
      qp.upper.size() != n) {
    throw std::invalid_argument("solve_box_qp: dimension mismatch");
  }

  QpSolution sol;
  sol.x = x0.size() == n ? x0 : Eigen::VectorXd::Zero(n);

  std::vector<int> flag(static_cast<size_t>(n), kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sol.x[i] <= qp.lower[i]) {
      sol.x[i] = qp.lower[i];
      flag[i] = kAtLower;
    } else if (sol.x[i] >= qp.upper[i]) {
      sol.x[i] = qp.upper[i];
      flag[i] = kAtUpper;
    }
  }

  Eigen::VectorXd grad = qp.hessian * sol.x + qp.gradient;
  const double mult_tol = 1e-10 * (1.0 + grad.cwiseAbs().maxCoeff());

  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<size_t>(n));

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    grad = qp.hessian * sol.x + qp.gradient;

    free_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (flag[i] == kFree) {
        free_idx.push_back(i);
      }
    }

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (!free_idx.empty()) {
      const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd h_ff(f, f);
      Eigen::VectorXd g_f(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        g_f[a] = grad[free_idx[a]];
        for (Eigen::Index b = 0; b < f; ++b) {
          h_ff(a, b) = qp.hessian(free_idx[a], free_idx[b]);
        }
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h_ff);
      if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        throw std::invalid_argument("solve_box_qp: reduced Hessian not positive definite");
      }
      const Eigen::VectorXd d_f = ldlt.solve(-g_f);
      for (Eigen::Index a = 0; a < f; ++a) {
        d[free_idx[a]] = d_f[a];
      }
    }

    const double step_norm = d.cwiseAbs().maxCoeff();
    const double step_tol = 1e-13 * (1.0 + sol.x.cwiseAbs().maxCoeff());
    if (step_norm <= step_tol) {
      // Subproblem solved; test multipliers of the active bounds.
      Eigen::Index release = -1;
      for (Eigen::Index i = 0; i < n && release < 0; ++i) {
        if (flag[i] == kAtLower && grad[i] < -mult_tol) {
          release = i;
        } else if (flag[i] == kAtUpper && grad[i] > mult_tol) {
          release = i;
        }
      }
      if (release < 0) {
        break;  // KKT satisfied
      }
      flag[release] = kFree;
      continue;
    }

    // Ratio test toward the nearest bound; smallest index wins ties.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    int blocking_side = kFree;
    for (Eigen::Index i : free_idx) {
      if (d[i] > 0.0 && std::isfinite(qp.upper[i])) {
        const double a = (qp.upper[i] - sol.x[i]) / d[i];
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = kAtUpper;
        }
      } else if (d[i] < 0.0 && std::isfinite(qp.lower[i])) {
        const double a = (qp.lower[i] - sol.x[i]) / d[i];
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = kAtLower;
        }
      }
    }

    sol.x += alpha * d;
    if (blocking >= 0) {
      flag[blocking] = blocking_side;
      sol.x[blocking] = blocking_side == kAtUpper ? qp.upper[blocking] : qp.lower[blocking];
    }
  }

  sol.iterations = iter;
  sol.status = iter >= max_iterations ? QpStatus::kMaxIterations : QpStatus::kOptimal;

  grad = qp.hessian * sol.x + qp.gradient;
  sol.multipliers = grad;

  double stationarity = 0.0;
  double dual = 0.0;
  double primal = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    primal = std::max({primal, qp.lower[i] - sol.x[i], sol.x[i] - qp.upper[i]});
    if (flag[i] == kFree) {
      stationarity = std::max(stationarity, std::abs(grad[i]));
    } else if (flag[i] == kAtLower) {
      dual = std::max(dual, -grad[i]);
    } else {
      dual = std::max(dual, grad[i]);
    }
  }
  sol.kkt_residual = std::max({stationarity, dual, primal});
  return sol;
}

}  // namespace quadfx
