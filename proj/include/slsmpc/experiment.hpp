#ifndef SLSMPC_EXPERIMENT_HPP
#define SLSMPC_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slsmpc/model.hpp"
#include "slsmpc/polytope.hpp"
#include "slsmpc/robust.hpp"
#include "slsmpc/sampling.hpp"
#include "slsmpc/tube.hpp"

namespace slsmpc {

enum class Method { Sls, TubeUnit, TubeZinv };

std::string to_string(Method m);

/// Parsed experiment configuration (JSON schema; see README and
/// configs/double_integrator.json). Dimension consistency is validated on
/// load.
struct ExperimentConfig {
  LtvModel model;  // horizon-length A_t/B_t sequences (LTI repeated)
  bool lti = true;
  MatrixXd Fx, Fu;
  VectorXd bx, bu;
  enum class TerminalMode { DpComputed, Explicit };
  TerminalMode terminal_mode = TerminalMode::DpComputed;
  MatrixXd FT;  // explicit mode only
  VectorXd bT;
  CostWeights weights;
  int horizon = 0;

  SearchRanges ranges;
  double eps_tol = 0.01;
  std::array<int, 3> grid_dims = {3, 3, 3};
  double alpha = 0.5;

  int episodes = 10;
  uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::Mixed;
  int sim_steps = 0;  // 0: use the horizon
  VectorXd x0;

  std::vector<Method> methods;
  double tube_truncation_tol = 1e-4;
  bool tube_include_zero_term = false;
  double feasmap_spacing = 0.5;
  int invariant_iteration_cap = 200;
  std::string rng_name = "mt19937_64";

  std::string config_hash;  // FNV-1a over the canonical dump

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(const std::string& json_text);

  LtvModel model_at_horizon(int T) const;
  CostWeights weights_at_horizon(int T) const;
  Polytope state_set() const { return Polytope::from_hrep(Fx, bx); }
  Polytope input_set() const { return Polytope::from_hrep(Fu, bu); }
};

/// Terminal-set resolution: either the explicit (F_T, b_T) or the DP fixed
/// point, plus the polytope itself for membership tests.
struct TerminalInfo {
  ConstraintSet constraints;
  Polytope XT;
  InvariantSetResult dp;  // populated in DP mode
  bool from_dp = false;
};

TerminalInfo resolve_terminal(const ExperimentConfig& config, int horizon);

struct CliOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> method;
  std::optional<int> horizon;
  int jobs = 1;
};

/// Exit codes: 0 success, 2 certified infeasibility of the requested task,
/// 1 error. Output files land under out_dir.
int cmd_invset(const ExperimentConfig& config, const std::string& out_dir,
               const CliOverrides& ov = {});
int cmd_simulate(const ExperimentConfig& config, const std::string& out_dir,
                 const CliOverrides& ov = {});
int cmd_feasmap(const ExperimentConfig& config, const std::string& out_dir,
                const CliOverrides& ov = {});
int cmd_bench(const ExperimentConfig& config, const std::string& out_dir,
              const std::vector<int>& horizons, const CliOverrides& ov = {});

/// Closed-loop receding-horizon simulation support (shared with tests).
struct EpisodeStep {
  VectorXd x;
  VectorXd u;
  std::string status;
  Hyperparameters hyper;
  double objective = 0.0;
  double margin_state = 0.0;  // min over rows of b - Fx
  double margin_input = 0.0;
  double bisect_s = 0.0, grid_s = 0.0;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;
  bool completed = false;
  bool terminal_membership = false;
  std::string abort_reason;
};

EpisodeRecord run_episode(const ExperimentConfig& config, Method method,
                          const TerminalInfo& terminal, int horizon,
                          const VectorXd& x0, int steps, Rng rng,
                          const OfflineBounds* offline);

double fnv1a_hash(const std::string& text);
std::string format_double(double v);

}  // namespace slsmpc

#endif  // SLSMPC_EXPERIMENT_HPP
