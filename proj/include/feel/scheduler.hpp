#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "feel/radio.hpp"
#include "feel/rng.hpp"
#include "feel/types.hpp"

namespace feel {

/// Raised when a scheduling problem has no feasible answer (too few
/// schedulable devices, zero-rate device in a selection, ...).
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SchedulerConfig {
  double lambda_e = 0.25; ///< weight on (normalized) upload energy
  double lambda_t = 0.25; ///< weight on (normalized) completion time
  double lambda_i = 0.50; ///< weight on the diversity index
  double rho = 0.5;       ///< bandwidth step: rho*T + (1-rho)*sum E
  int min_devices = 1;    ///< N, lower bound on the selection size
  int max_devices = 0;    ///< optional cap; 0 means unlimited
  double tolerance = 1e-6;

  void validate() const;
};

/// One device as the scheduler sees it. Training time arrives precomputed
/// so the selection and bandwidth solvers stay independent of epoch and
/// sample-encoding settings.
struct SchedDevice {
  int id = 0;
  double gain_sq = 0;      ///< |g|^2 for this round
  double power_w = 0;      ///< transmit power P
  double cpu_hz = 0;       ///< f (kept for instance round-trips)
  double cycles_per_bit = 0;
  std::int64_t dataset_size = 0;
  double train_time_s = 0; ///< local computation time this round
  double index = 0;        ///< diversity index I, expected in [0,1]

  bool schedulable() const { return gain_sq > 0 && power_w > 0; }
};

/// Bandwidth split for a fixed selection.
struct BandwidthAllocation {
  std::vector<double> alpha;    ///< per selected device, in (0,1]
  std::vector<double> energy_j; ///< upload energy per selected device
  double duration_s = 0;        ///< max completion time under this split
  double objective = 0;         ///< rho*duration + (1-rho)*sum energy
};

/// Full per-round decision over all K devices.
struct ScheduleDecision {
  std::vector<int> selection;   ///< 0/1 per device
  std::vector<double> alpha;    ///< 0 for unselected devices
  std::vector<double> energy_j; ///< 0 for unselected devices
  double predicted_duration_s = 0;
  double objective_value = 0; ///< joint scalarization, see joint_objective
};

/// Equal-share cost estimates (alpha = 1/|candidates|) used to score
/// candidates before any bandwidth optimization has run.
struct CostEstimates {
  std::vector<double> upload_energy_j;
  std::vector<double> completion_s;
};

CostEstimates equal_share_estimates(const std::vector<SchedDevice> &candidates,
                                    const RadioParams &params);

/// Smallest alpha in (0, alpha_cap] such that train + upload fits inside
/// `deadline_s`, found by bisection (the rate is strictly increasing in
/// alpha, so the inverse is unique). Empty when even alpha_cap misses the
/// deadline or training alone exceeds it.
std::optional<double> min_bandwidth_for_deadline(const SchedDevice &device,
                                                 const RadioParams &params,
                                                 double deadline_s,
                                                 double alpha_cap = 1.0);

/// Bandwidth allocation for a fixed selection: minimizes
///   rho * T + (1 - rho) * sum_k E_k
/// over sum alpha <= bandwidth_budget, alpha_k in (0,1], subject to every
/// selected device finishing within T. Outer golden-section search over the
/// deadline; inner step pins each device at its minimum feasible share and
/// spreads the residual so marginal energy savings are equal (KKT), via
/// bisection on the multiplier. `bandwidth_budget` exists for relaxation
/// experiments; the operational value is 1.
BandwidthAllocation solve_sub2(const std::vector<SchedDevice> &selected,
                               const RadioParams &params, double rho,
                               double tolerance, double bandwidth_budget = 1.0);

/// Score-and-threshold device selection on precomputed inputs:
///   score_k = lambda_i * index_k - lambda_e * Ehat_k - lambda_t * that_k
/// with Ehat/that max-normalized over the candidate population. Selects all
/// positive scores, at least min_devices (padding with the best-scored
/// remainder) and at most max_devices; ties break toward the lower
/// position. Returns positions into the candidate arrays, ascending.
std::vector<int> sub1_select(const std::vector<double> &indices,
                             const std::vector<double> &energy_estimates,
                             const std::vector<double> &time_estimates,
                             const SchedulerConfig &cfg);

/// Filters unschedulable devices, builds equal-share estimates, and runs
/// sub1_select. Returns positions into `devices`, ascending.
std::vector<int> solve_sub1(const std::vector<SchedDevice> &devices,
                            const RadioParams &params,
                            const SchedulerConfig &cfg);

/// Instance-level normalizers for the joint objective: the max-normalized
/// per-device upload-energy and completion estimates, the same Ehat_k and
/// that_k the selection score uses. Both derive from equal-share estimates
/// over the schedulable devices, so the objective is dimensionless and
/// invariant to common rescaling of the cost populations.
struct ObjectiveScales {
  std::vector<double> energy_hat; ///< per device position, 0 if unschedulable
  std::vector<double> time_hat;   ///< per device position, 0 if unschedulable
};

ObjectiveScales objective_scales(const std::vector<SchedDevice> &devices,
                                 const RadioParams &params);

/// Joint scalarization shared by the heuristic and the exhaustive oracle --
/// the aggregate of the per-device selection scores:
///   sum_{selected} (lambda_i * I_k - lambda_e * Ehat_k - lambda_t * that_k).
/// Subsets are still evaluated through solve_sub2 (feasibility plus the
/// decision's bandwidth, duration and energy), but the scalar ranks subsets
/// exactly the way the selection step ranks devices.
double joint_objective(const std::vector<SchedDevice> &devices,
                       const std::vector<int> &selected_positions,
                       const ObjectiveScales &scales,
                       const SchedulerConfig &cfg);

/// Runs solve_sub2 on the given positions and assembles the K-wide decision
/// (with the joint objective attached).
ScheduleDecision make_decision(const std::vector<SchedDevice> &devices,
                               const RadioParams &params,
                               const SchedulerConfig &cfg,
                               const std::vector<int> &selected_positions);

/// Selection then bandwidth: solve_sub1 followed by solve_sub2.
ScheduleDecision schedule_das(const std::vector<SchedDevice> &devices,
                              const RadioParams &params,
                              const SchedulerConfig &cfg);

/// Age-based baseline: picks the m devices with highest log(1 + age),
/// breaking ties uniformly at random from the supplied stream. Returns
/// positions, ascending.
std::vector<int> schedule_abs(const std::vector<int> &ages, int m, Rng &rng);

/// Uniform m-subset of {0..K-1} without replacement.
std::vector<int> schedule_random(int num_devices, int m, Rng &rng);

/// Everyone schedulable participates; bandwidth from solve_sub2. Devices
/// that cannot upload are skipped and counted, not faulted on.
ScheduleDecision schedule_all(const std::vector<SchedDevice> &devices,
                              const RadioParams &params,
                              const SchedulerConfig &cfg,
                              int *num_skipped = nullptr);

/// Exhaustive certification for small instances: every subset of the
/// schedulable devices with |S| >= min_devices (and within max_devices) is
/// evaluated with solve_sub2 and scored by joint_objective; the argmax is
/// returned, ties resolved to the lexicographically smallest subset.
/// Guarded to K <= 12.
ScheduleDecision brute_force_oracle(const std::vector<SchedDevice> &devices,
                                    const RadioParams &params,
                                    const SchedulerConfig &cfg);

/// Checks the decision invariants (budget, coupling of x and alpha,
/// minimum count, deadline) and throws on violation. Test support.
void validate_decision(const ScheduleDecision &decision,
                       const std::vector<SchedDevice> &devices,
                       const RadioParams &params, const SchedulerConfig &cfg);

} // namespace feel
