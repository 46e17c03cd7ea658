#ifndef QUADFX_BASELINES_HPP
#define QUADFX_BASELINES_HPP

#include <Eigen/Dense>

#include "quadfx/mpc.hpp"
#include "quadfx/plant.hpp"
#include "quadfx/reference.hpp"

namespace quadfx {

/// Thrust plus angular-velocity command, the interface every outer-loop
/// controller produces at 100 Hz.
struct OuterCommand {
  double thrust{0.0};            // N
  Vec3 omega_cmd{Vec3::Zero()};  // rad/s, body
};

struct PidGains {
  Vec3 position_p{10.0, 10.0, 12.0};  // 1/s^2
  Vec3 position_i{0.5, 0.5, 1.0};     // 1/s^3
  Vec3 position_d{6.0, 6.0, 7.0};     // 1/s
  double attitude_p{8.0};             // 1/s
  double integrator_limit{2.0};       // m/s^2 equivalent
};

/// Cascaded PID: position errors to a desired acceleration (with reference
/// acceleration feedforward), acceleration to thrust and attitude through
/// the flatness map, attitude error to a rate command.
class PidController {
 public:
  PidController(const PidGains& gains, const QuadParams& params, const MpcConfig& limits,
                double sample_time);

  OuterCommand step(const QuadState& state, const ReferencePoint& ref);
  void reset();

 private:
  PidGains gains_;
  QuadParams params_;
  MpcConfig limits_;
  double sample_time_;
  Vec3 integrator_{Vec3::Zero()};
};

/// Discrete algebraic Riccati equation by fixed-point iteration. Returns
/// the cost-to-go P and gain K with rho(A - B K) < 1. Throws
/// std::runtime_error when the iteration does not converge.
struct DareSolution {
  Eigen::MatrixXd p;
  Eigen::MatrixXd k;
  double residual{0.0};
  int iterations{0};
};

DareSolution dare_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                        double tolerance = 1e-10, int max_iterations = 10000);

/// Tube configuration: hover-linearized 9-state error model (position,
/// velocity, small-angle attitude) discretized at the control period, with
/// the ancillary gain from the Riccati equation.
struct TubeConfig {
  Eigen::MatrixXd a;  // 9x9
  Eigen::MatrixXd b;  // 9x4
  Eigen::MatrixXd k;  // 4x9 ancillary gain (u = u_n - K e)
  double initial_state_penalty{1e4};
};

/// Builds the hover tube model and gain from the MPC weights (restricted to
/// the 9 error states) and input weights.
TubeConfig make_hover_tube_config(const QuadParams& params, const MpcWeights& weights,
                                  double dt, double initial_state_penalty = 1e4);

/// Tube-based MPC: a nominal solve that ignores the disturbance estimate
/// and softly optimizes its initial state, plus linear ancillary feedback
/// on the measured deviation from the nominal initial state.
class RtMpcController {
 public:
  RtMpcController(const MpcWeights& weights, const MpcConfig& config, const QuadParams& params,
                  double initial_state_penalty = 1e4);

  OuterCommand step(const QuadState& state, const std::vector<ReferencePoint>& refs);
  void reset();
  bool degraded() const { return degraded_; }
  const MpcController& nominal() const { return nominal_; }
  const TubeConfig& tube() const { return tube_; }

 private:
  MpcController nominal_;
  TubeConfig tube_;
  MpcConfig config_;
  bool degraded_{false};
};

/// Observer-selection wrappers over the shared RTI controller: the plain
/// variant pins the disturbance estimate to zero, the observer-based
/// variants forward f_d_hat unchanged.
OuterCommand plain_mpc_step(MpcController& mpc, const QuadState& state,
                            const std::vector<ReferencePoint>& refs, bool* degraded = nullptr);
OuterCommand observer_mpc_step(MpcController& mpc, const QuadState& state, const Vec3& fd_hat,
                               const std::vector<ReferencePoint>& refs, bool* degraded = nullptr);

}  // namespace quadfx

#endif  // QUADFX_BASELINES_HPP
