#ifndef QUADFX_CONFIG_HPP
#define QUADFX_CONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "quadfx/baselines.hpp"
#include "quadfx/disturbance.hpp"
#include "quadfx/inner_loop.hpp"
#include "quadfx/mpc.hpp"
#include "quadfx/observers.hpp"
#include "quadfx/plant.hpp"
#include "quadfx/reference.hpp"

namespace quadfx {

/// Configuration error with the offending file line (0 when not tied to a
/// specific line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_{0};
};

/// Full experiment description. Defaults reproduce the simulation study
/// setup; every key can be overridden from the config file or the CLI.
struct ExperimentConfig {
  // [harness]
  std::string scenario{"eight"};        // eight | hover
  std::string controller{"fxtdo-mpc"};  // pid | mpc | rtmpc | hgdo-mpc | fxtdo-mpc
  std::string disturbance{"sinusoid"};  // sinusoid | constant | none
  double duration{60.0};                // s
  double activation_time{-1.0};         // s; <0 picks the scenario default (10 eight / 20 hover)
  int plant_rate_hz{1000};
  int mpc_rate_hz{100};
  double rmse_start_time{5.0};  // s
  std::uint64_t seed{1};
  double disturbance_scale{1.0};  // Monte Carlo force scale k
  bool measurement_noise{false};
  double noise_position_std{0.0};  // m
  double noise_velocity_std{0.0};  // m/s

  // [plant]
  QuadParams plant{};

  // [eight] / [hover]
  EightTrajectoryParams eight{};
  Vec3 hover_position{0.0, 0.0, -1.0};

  // [disturbance]
  Vec3 constant_force{1.0, -0.5, 0.0};

  // [fxtdo] / [hgdo]
  FxtdoGains fxtdo{};
  HgdoGains hgdo{};

  // [mpc] / [weights]
  MpcConfig mpc{};
  MpcWeights weights{};
  bool thrust_min_set{false};  // explicit bound overrides win over mass-derived ones
  bool thrust_max_set{false};

  // [indi]
  IndiGains indi{};
  double indi_cutoff_hz{50.0};

  // [pid]
  PidGains pid{};

  // [tube]
  double tube_initial_state_penalty{1e4};

  /// Scenario-resolved activation time.
  double resolved_activation_time() const {
    if (activation_time >= 0.0) {
      return activation_time;
    }
    return scenario == "hover" ? 20.0 : 10.0;
  }

  /// Thrust bounds follow the vehicle mass unless explicitly overridden.
  void finalize();

  DisturbanceProfile make_disturbance() const;
  FlatTrajectory make_trajectory() const;
};

/// Parses an INI-style file (sections per module, key = value, # or ;
/// comments) over the defaults. Throws ConfigError with a line diagnostic.
ExperimentConfig load_config(const std::string& path);

/// Applies one "section.key=value" override (the CLI's --set form).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Validates cross-field invariants (rates divide, durations positive, gain
/// positivity). Throws ConfigError.
void validate(const ExperimentConfig& cfg);

}  // namespace quadfx

#endif  // QUADFX_CONFIG_HPP
