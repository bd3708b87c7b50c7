#include "feel/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "feel/diversity.hpp"

namespace feel {

namespace {

constexpr int kGoldenIters = 64;
constexpr int kMultiplierIters = 48;
constexpr int kAlphaIters = 48;
constexpr double kInvPhi = 0.6180339887498949;

/// Per-device closed forms for the bandwidth program, in terms of
/// q = g^2 * P / (B * N0) (the SNR at full bandwidth).
struct DeviceCurve {
  double q = 0;       ///< gain_sq * P / (B * N0)
  double power_w = 0;
  double train_s = 0;

  double rate(double alpha, double bandwidth) const {
    if (alpha <= 0)
      return 0;
    return alpha * bandwidth * std::log2(1.0 + q / alpha);
  }
  double completion(double alpha, double bandwidth, double size_bits) const {
    const double r = rate(alpha, bandwidth);
    return r > 0 ? train_s + size_bits / r : kInfinity;
  }
  double energy(double alpha, double bandwidth, double size_bits) const {
    const double r = rate(alpha, bandwidth);
    return r > 0 ? power_w * size_bits / r : kInfinity;
  }
  /// -dE/dalpha = P * s * r'(alpha) / r(alpha)^2, strictly decreasing.
  double marginal(double alpha, double bandwidth, double size_bits) const {
    const double u = q / alpha;
    const double dr = bandwidth *
                      (std::log2(1.0 + u) - u / ((1.0 + u) * std::numbers::ln2));
    const double r = rate(alpha, bandwidth);
    return power_w * size_bits * dr / (r * r);
  }
};

std::vector<DeviceCurve> make_curves(const std::vector<SchedDevice> &devices,
                                     const RadioParams &params) {
  std::vector<DeviceCurve> curves(devices.size());
  for (std::size_t k = 0; k < devices.size(); ++k)
    curves[k] = DeviceCurve{devices[k].gain_sq * devices[k].power_w /
                                (params.bandwidth_hz * params.noise_psd),
                            devices[k].power_w, devices[k].train_time_s};
  return curves;
}

/// Smallest alpha in (0, cap] whose completion meets the deadline.
std::optional<double> curve_min_alpha(const DeviceCurve &dev,
                                      const RadioParams &params,
                                      double deadline_s, double cap) {
  const double upload_budget = deadline_s - dev.train_s;
  if (upload_budget <= 0)
    return std::nullopt;
  const double rate_required = params.model_size_bits / upload_budget;
  // Relative slack so a deadline computed as train + s/rate(cap) round-trips.
  if (dev.rate(cap, params.bandwidth_hz) < rate_required * (1.0 - 1e-9))
    return std::nullopt;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < kAlphaIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dev.rate(mid, params.bandwidth_hz) >= rate_required)
      hi = mid;
    else
      lo = mid;
  }
  return hi; // upper end keeps the deadline satisfied
}

struct InnerAllocation {
  std::vector<double> alpha;
  double total_energy = 0;
  bool feasible = false;
};

/// Fixed-deadline step: alpha_min per device, then the leftover bandwidth
/// is spread so that every unpinned device has the same marginal energy
/// saving (bisection on the shared multiplier).
InnerAllocation allocate_for_deadline(const std::vector<DeviceCurve> &curves,
                                      const RadioParams &params,
                                      double deadline_s, double budget) {
  const std::size_t m = curves.size();
  const double cap = std::min(1.0, budget);
  const double s = params.model_size_bits;
  const double bw = params.bandwidth_hz;

  InnerAllocation out;
  out.alpha.resize(m);
  std::vector<double> amin(m);
  double sum_min = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto a = curve_min_alpha(curves[k], params, deadline_s, cap);
    if (!a)
      return out;
    amin[k] = *a;
    sum_min += *a;
  }
  if (sum_min > budget * (1.0 + 1e-12))
    return out;

  const auto alpha_at = [&](double mu, std::size_t k) {
    if (curves[k].marginal(amin[k], bw, s) <= mu)
      return amin[k];
    if (curves[k].marginal(cap, bw, s) >= mu)
      return cap;
    double lo = amin[k], hi = cap;
    for (int it = 0; it < kAlphaIters; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (curves[k].marginal(mid, bw, s) > mu)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  const double residual = budget - sum_min;
  if (residual <= 1e-15) {
    out.alpha = amin;
  } else if (cap * static_cast<double>(m) <= budget) {
    // Budget exceeds what per-device caps can absorb (relaxation hook).
    std::fill(out.alpha.begin(), out.alpha.end(), cap);
  } else {
    // Marginals can span many decades when the floors are tiny, so the
    // multiplier is bisected geometrically.
    double mu_hi = 0;
    double mu_lo = kInfinity;
    for (std::size_t k = 0; k < m; ++k) {
      mu_hi = std::max(mu_hi, curves[k].marginal(amin[k], bw, s));
      mu_lo = std::min(mu_lo, curves[k].marginal(cap, bw, s));
    }
    mu_lo *= 0.5; // at mu_lo everyone caps out: sum = m*cap > budget
    for (int it = 0; it < kMultiplierIters; ++it) {
      const double mu = std::sqrt(mu_lo * mu_hi);
      double sum = 0;
      for (std::size_t k = 0; k < m; ++k)
        sum += alpha_at(mu, k);
      if (sum > budget)
        mu_lo = mu;
      else
        mu_hi = mu;
    }
    double sum = 0;
    for (std::size_t k = 0; k < m; ++k) {
      out.alpha[k] = alpha_at(mu_hi, k);
      sum += out.alpha[k];
    }
    if (sum > budget) // shave rounding overshoot, never below alpha_min
      for (std::size_t k = 0; k < m; ++k)
        out.alpha[k] = std::max(amin[k], out.alpha[k] * budget / sum);
  }

  out.total_energy = 0;
  for (std::size_t k = 0; k < m; ++k)
    out.total_energy += curves[k].energy(out.alpha[k], bw, s);
  out.feasible = true;
  return out;
}

} // namespace

void SchedulerConfig::validate() const {
  if (lambda_e < 0 || lambda_t < 0 || lambda_i < 0)
    throw std::invalid_argument("scheduler: lambda weights must be non-negative");
  if (lambda_e + lambda_t + lambda_i <= 0)
    throw std::invalid_argument("scheduler: lambda weights must not all be zero");
  if (rho < 0 || rho > 1)
    throw std::invalid_argument("scheduler: rho must lie in [0,1]");
  if (min_devices < 1)
    throw std::invalid_argument("scheduler: min_devices must be >= 1");
  if (max_devices != 0 && max_devices < min_devices)
    throw std::invalid_argument("scheduler: max_devices below min_devices");
  if (tolerance <= 0)
    throw std::invalid_argument("scheduler: tolerance must be positive");
}

CostEstimates equal_share_estimates(const std::vector<SchedDevice> &candidates,
                                    const RadioParams &params) {
  CostEstimates est;
  if (candidates.empty())
    return est;
  const double alpha_eq = 1.0 / static_cast<double>(candidates.size());
  est.upload_energy_j.reserve(candidates.size());
  est.completion_s.reserve(candidates.size());
  for (const SchedDevice &dev : candidates) {
    const double r = achievable_rate(alpha_eq, params.bandwidth_hz,
                                     params.noise_psd, dev.gain_sq, dev.power_w);
    const double t_up = upload_time(params.model_size_bits, r);
    est.upload_energy_j.push_back(upload_energy(dev.power_w, t_up));
    est.completion_s.push_back(dev.train_time_s + t_up);
  }
  return est;
}

std::optional<double> min_bandwidth_for_deadline(const SchedDevice &device,
                                                 const RadioParams &params,
                                                 double deadline_s,
                                                 double alpha_cap) {
  if (deadline_s <= 0)
    throw std::invalid_argument("min_bandwidth_for_deadline: deadline must be positive");
  if (alpha_cap <= 0 || alpha_cap > 1)
    throw std::invalid_argument("min_bandwidth_for_deadline: cap outside (0,1]");
  const DeviceCurve curve{device.gain_sq * device.power_w /
                              (params.bandwidth_hz * params.noise_psd),
                          device.power_w, device.train_time_s};
  return curve_min_alpha(curve, params, deadline_s, alpha_cap);
}

BandwidthAllocation solve_sub2(const std::vector<SchedDevice> &selected,
                               const RadioParams &params, double rho,
                               double tolerance, double bandwidth_budget) {
  params.validate();
  if (selected.empty())
    throw std::invalid_argument("solve_sub2: empty selection");
  if (rho < 0 || rho > 1)
    throw std::invalid_argument("solve_sub2: rho outside [0,1]");
  if (tolerance <= 0)
    throw std::invalid_argument("solve_sub2: tolerance must be positive");
  if (bandwidth_budget <= 0)
    throw std::invalid_argument("solve_sub2: bandwidth budget must be positive");
  for (const SchedDevice &dev : selected)
    if (!dev.schedulable())
      throw InfeasibleError("solve_sub2: device " + std::to_string(dev.id) +
                            " has zero rate and cannot upload");

  const auto curves = make_curves(selected, params);
  const std::size_t m = curves.size();
  const double cap = std::min(1.0, bandwidth_budget);
  const double alpha_eq = std::min(cap, bandwidth_budget / static_cast<double>(m));

  double t_lo = 0, t_ub = 0;
  for (const DeviceCurve &c : curves) {
    t_lo = std::max(t_lo, c.train_s);
    t_ub = std::max(t_ub, c.completion(alpha_eq, params.bandwidth_hz,
                                       params.model_size_bits));
  }
  // Equal shares always fit the budget, so t_ub is feasible. For small rho
  // the optimum can sit above it: the deadline-free energy minimum may
  // stretch one device's completion past the equal-share makespan. Probing
  // an effectively unconstrained deadline gives the true upper end.
  {
    const double loose = (t_ub + 1.0) * 1e9;
    const InnerAllocation energy_opt =
        allocate_for_deadline(curves, params, loose, bandwidth_budget);
    if (energy_opt.feasible) {
      double makespan = 0;
      for (std::size_t k = 0; k < m; ++k)
        makespan = std::max(makespan,
                            curves[k].completion(energy_opt.alpha[k],
                                                 params.bandwidth_hz,
                                                 params.model_size_bits));
      t_ub = std::max(t_ub, makespan);
    }
  }
  t_ub *= 1.0 + 1e-9; // keep the boundary deadline feasible under rounding

  const auto objective_at = [&](const InnerAllocation &inner, double deadline) {
    return inner.feasible ? rho * deadline + (1.0 - rho) * inner.total_energy
                          : kInfinity;
  };

  InnerAllocation best =
      allocate_for_deadline(curves, params, t_ub, bandwidth_budget);
  if (!best.feasible)
    throw InfeasibleError("solve_sub2: no deadline admits a feasible bandwidth split");
  double best_f = objective_at(best, t_ub);

  const auto probe = [&](double deadline) {
    InnerAllocation inner =
        allocate_for_deadline(curves, params, deadline, bandwidth_budget);
    const double f = objective_at(inner, deadline);
    if (f < best_f) {
      best_f = f;
      best = std::move(inner);
    }
    return f;
  };

  double a = t_lo, b = t_ub;
  double x1 = b - (b - a) * kInvPhi;
  double x2 = a + (b - a) * kInvPhi;
  double f1 = probe(x1);
  double f2 = probe(x2);
  for (int it = 0; it < kGoldenIters && (b - a) > tolerance * 1e-3 * t_ub; ++it) {
    if (std::isinf(f1) && std::isinf(f2)) {
      // Both probes sit left of the feasible region; discard [a, x2].
      a = x2;
      x1 = b - (b - a) * kInvPhi;
      x2 = a + (b - a) * kInvPhi;
      f1 = probe(x1);
      f2 = probe(x2);
    } else if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - (b - a) * kInvPhi;
      f1 = probe(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + (b - a) * kInvPhi;
      f2 = probe(x2);
    }
  }

  BandwidthAllocation out;
  out.alpha = best.alpha;
  out.energy_j.resize(m);
  out.duration_s = 0;
  double total_energy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    out.energy_j[k] =
        curves[k].energy(best.alpha[k], params.bandwidth_hz, params.model_size_bits);
    total_energy += out.energy_j[k];
    out.duration_s = std::max(out.duration_s,
                              curves[k].completion(best.alpha[k], params.bandwidth_hz,
                                                   params.model_size_bits));
  }
  out.objective = rho * out.duration_s + (1.0 - rho) * total_energy;
  return out;
}

std::vector<int> sub1_select(const std::vector<double> &indices,
                             const std::vector<double> &energy_estimates,
                             const std::vector<double> &time_estimates,
                             const SchedulerConfig &cfg) {
  cfg.validate();
  const std::size_t n = indices.size();
  if (energy_estimates.size() != n || time_estimates.size() != n)
    throw std::invalid_argument("sub1_select: mismatched input lengths");
  if (static_cast<int>(n) < cfg.min_devices)
    throw InfeasibleError("sub1_select: " + std::to_string(n) +
                          " feasible devices, need at least " +
                          std::to_string(cfg.min_devices));

  Arr e_hat =
      normalize_metric(Eigen::Map<const Arr>(energy_estimates.data(),
                                             static_cast<Eigen::Index>(n)));
  Arr t_hat = normalize_metric(
      Eigen::Map<const Arr>(time_estimates.data(), static_cast<Eigen::Index>(n)));

  std::vector<double> score(n);
  for (std::size_t k = 0; k < n; ++k)
    score[k] = cfg.lambda_i * indices[k] - cfg.lambda_e * e_hat[static_cast<Eigen::Index>(k)] -
               cfg.lambda_t * t_hat[static_cast<Eigen::Index>(k)];

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[static_cast<std::size_t>(a)] != score[static_cast<std::size_t>(b)])
      return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
    return a < b;
  });

  std::size_t positive = 0;
  while (positive < n && score[static_cast<std::size_t>(order[positive])] > 0)
    ++positive;
  std::size_t take = std::max<std::size_t>(positive,
                                           static_cast<std::size_t>(cfg.min_devices));
  if (cfg.max_devices > 0)
    take = std::min(take, static_cast<std::size_t>(cfg.max_devices));

  std::vector<int> chosen(order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {

/// Positions of the schedulable devices, ordered by device id so that
/// score ties and subset comparisons resolve by id regardless of how the
/// caller ordered its device list.
std::vector<int> schedulable_positions(const std::vector<SchedDevice> &devices) {
  std::vector<int> out;
  for (std::size_t k = 0; k < devices.size(); ++k)
    if (devices[k].schedulable())
      out.push_back(static_cast<int>(k));
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) {
    return devices[static_cast<std::size_t>(a)].id <
           devices[static_cast<std::size_t>(b)].id;
  });
  return out;
}

std::vector<SchedDevice> pick(const std::vector<SchedDevice> &devices,
                              const std::vector<int> &positions) {
  std::vector<SchedDevice> out;
  out.reserve(positions.size());
  for (int p : positions)
    out.push_back(devices[static_cast<std::size_t>(p)]);
  return out;
}

} // namespace

std::vector<int> solve_sub1(const std::vector<SchedDevice> &devices,
                            const RadioParams &params,
                            const SchedulerConfig &cfg) {
  cfg.validate();
  const std::vector<int> feasible = schedulable_positions(devices);
  if (static_cast<int>(feasible.size()) < cfg.min_devices)
    throw InfeasibleError("solve_sub1: only " + std::to_string(feasible.size()) +
                          " of " + std::to_string(devices.size()) +
                          " devices are schedulable, need " +
                          std::to_string(cfg.min_devices));
  const std::vector<SchedDevice> cand = pick(devices, feasible);
  const CostEstimates est = equal_share_estimates(cand, params);
  std::vector<double> indices(cand.size());
  for (std::size_t k = 0; k < cand.size(); ++k)
    indices[k] = cand[k].index;
  std::vector<int> inner = sub1_select(indices, est.upload_energy_j,
                                       est.completion_s, cfg);
  std::vector<int> out;
  out.reserve(inner.size());
  for (int p : inner)
    out.push_back(feasible[static_cast<std::size_t>(p)]);
  std::sort(out.begin(), out.end());
  return out;
}

ObjectiveScales objective_scales(const std::vector<SchedDevice> &devices,
                                 const RadioParams &params) {
  const std::vector<int> feasible = schedulable_positions(devices);
  const CostEstimates est = equal_share_estimates(pick(devices, feasible), params);
  ObjectiveScales scales;
  scales.energy_hat.assign(devices.size(), 0.0);
  scales.time_hat.assign(devices.size(), 0.0);
  if (!feasible.empty()) {
    const Arr e_hat = normalize_metric(
        Eigen::Map<const Arr>(est.upload_energy_j.data(),
                              static_cast<Eigen::Index>(est.upload_energy_j.size())));
    const Arr t_hat = normalize_metric(
        Eigen::Map<const Arr>(est.completion_s.data(),
                              static_cast<Eigen::Index>(est.completion_s.size())));
    for (std::size_t i = 0; i < feasible.size(); ++i) {
      scales.energy_hat[static_cast<std::size_t>(feasible[i])] =
          e_hat[static_cast<Eigen::Index>(i)];
      scales.time_hat[static_cast<std::size_t>(feasible[i])] =
          t_hat[static_cast<Eigen::Index>(i)];
    }
  }
  return scales;
}

double joint_objective(const std::vector<SchedDevice> &devices,
                       const std::vector<int> &selected_positions,
                       const ObjectiveScales &scales,
                       const SchedulerConfig &cfg) {
  double j = 0;
  for (int p : selected_positions) {
    const auto k = static_cast<std::size_t>(p);
    j += cfg.lambda_i * devices[k].index - cfg.lambda_e * scales.energy_hat[k] -
         cfg.lambda_t * scales.time_hat[k];
  }
  return j;
}

ScheduleDecision make_decision(const std::vector<SchedDevice> &devices,
                               const RadioParams &params,
                               const SchedulerConfig &cfg,
                               const std::vector<int> &selected_positions) {
  if (selected_positions.empty())
    throw InfeasibleError("make_decision: empty selection");
  const BandwidthAllocation alloc =
      solve_sub2(pick(devices, selected_positions), params, cfg.rho, cfg.tolerance);
  ScheduleDecision d;
  d.selection.assign(devices.size(), 0);
  d.alpha.assign(devices.size(), 0.0);
  d.energy_j.assign(devices.size(), 0.0);
  for (std::size_t i = 0; i < selected_positions.size(); ++i) {
    const auto p = static_cast<std::size_t>(selected_positions[i]);
    d.selection[p] = 1;
    d.alpha[p] = alloc.alpha[i];
    d.energy_j[p] = alloc.energy_j[i];
  }
  d.predicted_duration_s = alloc.duration_s;
  d.objective_value = joint_objective(devices, selected_positions,
                                      objective_scales(devices, params), cfg);
  return d;
}

ScheduleDecision schedule_das(const std::vector<SchedDevice> &devices,
                              const RadioParams &params,
                              const SchedulerConfig &cfg) {
  return make_decision(devices, params, cfg, solve_sub1(devices, params, cfg));
}

std::vector<int> schedule_abs(const std::vector<int> &ages, int m, Rng &rng) {
  const int n = static_cast<int>(ages.size());
  if (m < 1)
    throw std::invalid_argument("schedule_abs: m must be >= 1");
  if (m > n)
    throw InfeasibleError("schedule_abs: m = " + std::to_string(m) +
                          " exceeds device count " + std::to_string(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order); // random order makes stable_sort break ties uniformly
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::log1p(static_cast<double>(ages[static_cast<std::size_t>(a)])) >
           std::log1p(static_cast<double>(ages[static_cast<std::size_t>(b)]));
  });
  std::vector<int> out(order.begin(), order.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> schedule_random(int num_devices, int m, Rng &rng) {
  if (m < 1)
    throw std::invalid_argument("schedule_random: m must be >= 1");
  if (m > num_devices)
    throw InfeasibleError("schedule_random: m = " + std::to_string(m) +
                          " exceeds device count " + std::to_string(num_devices));
  std::vector<int> pool(static_cast<std::size_t>(num_devices));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(num_devices - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

ScheduleDecision schedule_all(const std::vector<SchedDevice> &devices,
                              const RadioParams &params,
                              const SchedulerConfig &cfg, int *num_skipped) {
  const std::vector<int> feasible = schedulable_positions(devices);
  if (num_skipped)
    *num_skipped = static_cast<int>(devices.size() - feasible.size());
  if (feasible.empty())
    throw InfeasibleError("schedule_all: no schedulable devices");
  return make_decision(devices, params, cfg, feasible);
}

ScheduleDecision brute_force_oracle(const std::vector<SchedDevice> &devices,
                                    const RadioParams &params,
                                    const SchedulerConfig &cfg) {
  cfg.validate();
  if (devices.size() > 12)
    throw std::invalid_argument("brute_force_oracle: instance too large (K > 12)");
  const std::vector<int> feasible = schedulable_positions(devices);
  const int f = static_cast<int>(feasible.size());
  if (f < cfg.min_devices)
    throw InfeasibleError("brute_force_oracle: only " + std::to_string(f) +
                          " schedulable devices, need " +
                          std::to_string(cfg.min_devices));
  const int cap = cfg.max_devices > 0 ? cfg.max_devices : f;
  const ObjectiveScales scales = objective_scales(devices, params);

  bool have_best = false;
  double best_j = 0;
  std::vector<int> best_positions;
  ScheduleDecision best_decision;

  for (std::uint32_t mask = 1; mask < (1u << f); ++mask) {
    const int size = std::popcount(mask);
    if (size < cfg.min_devices || size > cap)
      continue;
    std::vector<int> positions;
    positions.reserve(static_cast<std::size_t>(size));
    for (int b = 0; b < f; ++b)
      if (mask & (1u << b))
        positions.push_back(feasible[static_cast<std::size_t>(b)]);
    const BandwidthAllocation alloc =
        solve_sub2(pick(devices, positions), params, cfg.rho, cfg.tolerance);
    const double j = joint_objective(devices, positions, scales, cfg);
    if (!have_best || j > best_j ||
        (j == best_j && positions < best_positions)) {
      have_best = true;
      best_j = j;
      best_positions = positions;
      ScheduleDecision d;
      d.selection.assign(devices.size(), 0);
      d.alpha.assign(devices.size(), 0.0);
      d.energy_j.assign(devices.size(), 0.0);
      for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto p = static_cast<std::size_t>(positions[i]);
        d.selection[p] = 1;
        d.alpha[p] = alloc.alpha[i];
        d.energy_j[p] = alloc.energy_j[i];
      }
      d.predicted_duration_s = alloc.duration_s;
      d.objective_value = j;
      best_decision = std::move(d);
    }
  }
  return best_decision;
}

void validate_decision(const ScheduleDecision &decision,
                       const std::vector<SchedDevice> &devices,
                       const RadioParams &params, const SchedulerConfig &cfg) {
  const std::size_t n = devices.size();
  if (decision.selection.size() != n || decision.alpha.size() != n ||
      decision.energy_j.size() != n)
    throw std::logic_error("decision: vector sizes do not match device count");
  double alpha_sum = 0;
  int selected = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const bool x = decision.selection[k] != 0;
    if (x != (decision.alpha[k] > 0))
      throw std::logic_error("decision: alpha/selection coupling violated");
    if (decision.alpha[k] < 0 || decision.alpha[k] > 1)
      throw std::logic_error("decision: alpha outside [0,1]");
    alpha_sum += decision.alpha[k];
    selected += decision.selection[k];
    if (x) {
      const double r = achievable_rate(decision.alpha[k], params.bandwidth_hz,
                                       params.noise_psd, devices[k].gain_sq,
                                       devices[k].power_w);
      const double completion =
          devices[k].train_time_s + upload_time(params.model_size_bits, r);
      if (completion > decision.predicted_duration_s *
                           (1.0 + cfg.tolerance) + cfg.tolerance)
        throw std::logic_error("decision: selected device misses the deadline");
    }
  }
  if (alpha_sum > 1.0 + cfg.tolerance)
    throw std::logic_error("decision: bandwidth ratios exceed the budget");
  if (selected < cfg.min_devices)
    throw std::logic_error("decision: fewer devices than the required minimum");
  if (cfg.max_devices > 0 && selected > cfg.max_devices)
    throw std::logic_error("decision: selection exceeds max_devices");
}

} // namespace feel
