#ifndef QUADFX_MPC_HPP
#define QUADFX_MPC_HPP

#include <vector>

#include "quadfx/core_math.hpp"
#include "quadfx/plant.hpp"
#include "quadfx/qp_solver.hpp"
#include "quadfx/reference.hpp"

namespace quadfx {

// Prediction state x = [p, v, q] and input u = [T_c, omega_c]. The inner
// loop tracks omega_c, so angular velocity is an input here, not a state.
using StateVec = Eigen::Matrix<double, 10, 1>;
using InputVec = Eigen::Matrix<double, 4, 1>;
using StateMat = Eigen::Matrix<double, 10, 10>;
using InputJacMat = Eigen::Matrix<double, 10, 4>;

StateVec pack_state(const QuadState& s);
StateVec pack_reference_state(const ReferencePoint& r);
InputVec pack_reference_input(const ReferencePoint& r);

/// Diagonal stage weights. Terminal weights default to the stage values.
struct MpcWeights {
  Vec3 q_position{1500.0, 1500.0, 1500.0};
  Vec3 q_velocity{400.0, 400.0, 400.0};
  Vec4 q_attitude{500.0, 500.0, 500.0, 500.0};
  Vec4 r_input{1.0, 10.0, 10.0, 10.0};
  Vec3 p_position{1500.0, 1500.0, 1500.0};
  Vec3 p_velocity{400.0, 400.0, 400.0};
  Vec4 p_attitude{500.0, 500.0, 500.0, 500.0};

  StateVec stage_state_diag() const;
  StateVec terminal_state_diag() const;
};

struct MpcConfig {
  int horizon{10};
  double dt{0.1};
  double thrust_min{0.2 * 9.81};  // N; harness scales these with the mass
  double thrust_max{4.0 * 9.81};
  double omega_max{3.0};  // rad/s, per axis
  int iterations{1};      // Gauss-Newton iterations per control period
  double kkt_tolerance{1e-6};
  int integrator_substeps{1};
  int qp_max_iterations{200};
  /// Controller calls per horizon-node advance: the warm start shifts one
  /// node every this many steps (1 = classic node-rate operation; the
  /// harness sets dt * control rate when solving faster than the nodes).
  int steps_per_shift{1};
};

struct OcpSolution {
  std::vector<StateVec> states;  // horizon + 1
  std::vector<InputVec> inputs;  // horizon
  double kkt_residual{0.0};
  double objective{0.0};
  QpStatus status{QpStatus::kOptimal};
};

/// Continuous-time prediction model: translational dynamics driven by the
/// collective thrust plus the (horizon-constant) disturbance estimate, and
/// quaternion kinematics driven directly by the commanded rate.
StateVec prediction_derivative(const StateVec& x, const InputVec& u, const Vec3& fd_hat,
                               double mass);

/// Analytic Jacobians of prediction_derivative.
void prediction_jacobians(const StateVec& x, const InputVec& u, double mass,
                          StateMat& jac_state, InputJacMat& jac_input);

struct ShootResult {
  StateVec x_next;
  StateMat a;      // d x_next / d x0
  InputJacMat b;   // d x_next / d u
};

/// RK4 integration of the prediction model over dt with forward sensitivity
/// propagation through the stages.
ShootResult shoot(const StateVec& x0, const InputVec& u, const Vec3& fd_hat, double dt,
                  double mass, int substeps = 1);

/// Condensed Gauss-Newton QP around a linearization trajectory. States are
/// eliminated through the linearized shooting dynamics, leaving a dense
/// box-constrained QP over the input deviations (plus the initial-state
/// deviation when initial_state_penalty > 0, which adds a soft tie of x0 to
/// x_init instead of the hard equality).
struct CondensedQp {
  BoxQp qp;
  std::vector<StateMat> a_mats;
  std::vector<InputJacMat> b_mats;
  std::vector<StateVec> free_response;  // state deviations at zero QP step
  bool free_initial_state{false};
};

CondensedQp build_qp(const StateVec& x_init, const std::vector<ReferencePoint>& refs,
                     const Vec3& fd_hat, const MpcWeights& weights, const MpcConfig& config,
                     const OcpSolution& linearization, double mass,
                     double initial_state_penalty = 0.0);

/// Shifts states/inputs one node, duplicates the last input and
/// re-integrates the terminal state.
OcpSolution shift_warm_start(const OcpSolution& sol, const Vec3& fd_hat, double dt, double mass,
                             int substeps = 1);

/// Eq.-(26)-style objective of a trajectory against references (no 1/2
/// factor; quaternion errors taken after sign alignment inside the refs).
double trajectory_objective(const OcpSolution& traj, const std::vector<ReferencePoint>& refs,
                            const MpcWeights& weights);

/// Real-time-iteration controller: a fixed number of Gauss-Newton
/// iterations per call (default one) on a shifted warm start.
class MpcController {
 public:
  MpcController(const MpcWeights& weights, const MpcConfig& config, double mass);

  /// Enables the free-initial-state mode used by the tube variant.
  void set_initial_state_penalty(double penalty) { initial_state_penalty_ = penalty; }

  struct StepResult {
    InputVec u0{InputVec::Zero()};
    bool degraded{false};
  };

  StepResult step(const QuadState& measured, const Vec3& fd_hat,
                  const std::vector<ReferencePoint>& refs);

  void reset();
  bool initialized() const { return initialized_; }
  const OcpSolution& solution() const { return solution_; }
  const MpcConfig& config() const { return config_; }
  double mass() const { return mass_; }

 private:
  MpcWeights weights_;
  MpcConfig config_;
  double mass_;
  double initial_state_penalty_{0.0};
  OcpSolution solution_;
  bool initialized_{false};
  int steps_since_shift_{0};
  InputVec fallback_u0_{InputVec::Zero()};
};

}  // namespace quadfx

#endif  // QUADFX_MPC_HPP
