#ifndef QUADFX_QP_SOLVER_HPP
#define QUADFX_QP_SOLVER_HPP

#include <Eigen/Dense>

namespace quadfx {

/// Dense strictly convex box-constrained QP:
///   min 0.5 x^T H x + g^T x   s.t.  lower <= x <= upper
/// Unbounded components use +-infinity.
struct BoxQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return gradient.size(); }
};

enum class QpStatus { kOptimal, kMaxIterations };

struct QpSolution {
  Eigen::VectorXd x;
  /// Bound multipliers: gradient of the objective at the solution. Positive
  /// at active lower bounds, negative at active upper bounds, ~0 elsewhere.
  Eigen::VectorXd multipliers;
  double kkt_residual{0.0};  // max of stationarity / feasibility / complementarity
  QpStatus status{QpStatus::kOptimal};
  int iterations{0};
};

/// Primal active-set method. Starts from x0 clamped into the box, fixes the
/// active bounds, and solves the equality-constrained subproblem on the free
/// variables with an LDLT factorization. Bounds enter and leave by the
/// smallest-index rule, which makes the iteration deterministic. Throws
/// std::invalid_argument when a free-variable block of the Hessian is not
/// positive definite.
QpSolution solve_box_qp(const BoxQp& qp, const Eigen::VectorXd& x0, int max_iterations = 200);

}  // namespace quadfx

#endif  // QUADFX_QP_SOLVER_HPP
