// Copyright 2026 The smcdiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "smcdiv/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "smcdiv/core.hpp"
#include "smcdiv/kernels.hpp"
#include "smcdiv/models/dpm.hpp"
#include "smcdiv/models/grid.hpp"
#include "smcdiv/models/linreg.hpp"
#include "smcdiv/oracle.hpp"
#include "smcdiv/seqobs.hpp"
#include "smcdiv/smc.hpp"

namespace smcdiv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// (a - b) / se, with a zero standard error mapped to +-inf or 0.
double in_stderrs(double diff, double se) {
  if (se > 0.0) {
    return diff / se;
  }
  return diff > 0.0 ? kInf : (diff < 0.0 ? -kInf : 0.0);
}

DpmModel small_dpm(std::size_t n) {
  DpmModel m = default_dpm_model();
  m.observations.resize(n);
  return m;
}

DivergenceEstimate linreg_cell(std::size_t particles, std::size_t samples, const RngStream& rng,
                               std::size_t threads) {
  const LinRegModel lm = default_linreg_model();
  auto seq = linreg_as_seqobs(lm);
  const auto schedule = linreg_schedule(lm, seq, LinRegKernel::kRandomWalk, 1);
  const auto pkg = make_smc_package(build_seqobs_config(seq, schedule, particles));
  return estimate_kl_bound(pkg, linreg_exact_posterior_sampler(lm), seqobs_posterior(seq),
                           samples, samples, rng, threads);
}

// Runs the collapsed and uncollapsed variants of `schedule` on shared streams.
struct CouplingTally {
  double max_gap = 0.0;
  std::size_t plateau_nonzero = 0;
  std::size_t plateau_weights = 0;
  std::size_t output_mismatch = 0;
};

void couple(std::shared_ptr<const SeqObsModel> model, RejuvenationSchedule schedule,
            std::size_t particles, std::size_t runs, const RngStream& rng, CouplingTally& tally) {
  for (auto& s : schedule.steps) {
    s.collapse = true;
  }
  const auto collapsed = build_seqobs_config(model, schedule, particles);
  for (auto& s : schedule.steps) {
    s.collapse = false;
  }
  const auto plateaued = build_seqobs_config(model, schedule, particles);
  const std::vector<std::size_t> targets = seqobs_step_targets(schedule);

  for (std::size_t r = 0; r < runs; ++r) {
    RngStream a = rng.split(0).split(r);
    RngStream b = rng.split(0).split(r);
    ExecutionHistory<SeqState> hist;
    const auto sim_c = smc_simulate(collapsed, a);
    const auto sim_u = smc_simulate_traced(plateaued, b, &hist);
    tally.max_gap = std::max(tally.max_gap, std::abs(sim_c.log_weight - sim_u.log_weight));
    if (!(sim_c.output == sim_u.output)) {
      ++tally.output_mismatch;
    }
    for (std::size_t s = 2; s <= targets.size(); ++s) {
      if (targets[s - 1] == targets[s - 2]) {
        for (double w : hist.log_weights[s - 1]) {
          ++tally.plateau_weights;
          tally.plateau_nonzero += (w != 0.0) ? 1 : 0;
        }
      }
    }
    RngStream ra = rng.split(1).split(r);
    RngStream rb = rng.split(1).split(r);
    const double lw_c = smc_regenerate(collapsed, sim_c.output, ra);
    const double lw_u = smc_regenerate(plateaued, sim_c.output, rb);
    tally.max_gap = std::max(tally.max_gap, std::abs(lw_c - lw_u));
  }
}

CheckResult flow_result(std::string name, const DetailedBalanceReport& report, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = report.max_violation;
  r.tolerance = tol;
  r.passed = report.passed(tol);
  r.detail = "max |pi(x)P(x->y) - pi(y)P(y->x)|";
  return r;
}

std::size_t scaled(std::size_t n, double scale) {
  return std::max<std::size_t>(10, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
}

}  // namespace

CheckResult check_joint_identity(std::size_t runs, const RngStream& rng) {
  const GridModel model = default_grid_model();
  const SmcConfig<int> cfg = grid_as_config(model, 2);
  const ReferenceSampler<int> ref = grid_exact_posterior_sampler(model);
  double worst = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    RngStream sim_stream = rng.split(0).split(r);
    ExecutionHistory<int> hist;
    const Simulation<int> sim = smc_simulate_traced(cfg, sim_stream, &hist);
    const double sim_gap = p_joint_log_prob(cfg, hist, sim.output) -
                           q_joint_log_prob(cfg, hist, sim.output);
    worst = std::max(worst, relative_gap(sim_gap, sim.log_weight));

    RngStream ref_stream = rng.split(1).split(r);
    const int z = ref.sample(r, ref_stream);
    RngStream regen_stream = rng.split(2).split(r);
    ExecutionHistory<int> regen_hist;
    const double lw = smc_regenerate_traced(cfg, z, regen_stream, &regen_hist);
    const double regen_gap = p_joint_log_prob(cfg, regen_hist, z) - q_joint_log_prob(cfg, regen_hist, z);
    worst = std::max(worst, relative_gap(regen_gap, lw));
  }
  CheckResult out{"joint-identity", worst, 1e-9, worst <= 1e-9,
                  fmt::format("{} simulate + {} regenerate runs, grid K=3 T=2 N=2", runs, runs)};
  return out;
}

CheckResult check_evidence_unbiased(std::size_t runs, const RngStream& rng, std::size_t threads) {
  const GridModel model = default_grid_model();
  const SmcConfig<int> cfg = grid_as_config(model, 2);
  std::vector<double> estimates(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    RngStream stream = rng.split(r);
    ExecutionHistory<int> hist;
    smc_simulate_traced(cfg, stream, &hist);
    double log_z = 0.0;
    for (const auto& w : hist.log_weights) {
      log_z += log_mean_exp(w);
    }
    estimates[r] = std::exp(log_z);
  });
  const SampleSummary s = summarize(estimates);
  std::vector<int> space(model.states);
  for (std::size_t k = 0; k < model.states; ++k) {
    space[k] = static_cast<int>(k);
  }
  const double z = std::exp(enumerate_log_Z(grid_posterior(model), space));
  const double dev = std::abs(in_stderrs(s.mean - z, s.std_error));
  return CheckResult{"evidence-unbiased", dev, 3.0, dev <= 3.0,
                     fmt::format("mean Z-hat {:.6g} (stderr {:.2g}) vs Z {:.6g}, {} runs", s.mean,
                                 s.std_error, z, runs)};
}

CheckResult check_linreg_sandwich(std::size_t samples, const RngStream& rng, std::size_t threads) {
  const double log_z = linreg_log_evidence(default_linreg_model());
  const DivergenceEstimate est = linreg_cell(10, samples, rng, threads);
  const double low = in_stderrs(est.elbo - log_z, est.elbo_stderr);
  const double high = in_stderrs(log_z - est.eubo, est.eubo_stderr);
  const double worst = std::max(low, high);
  return CheckResult{"linreg-sandwich", worst, 3.0, worst <= 3.0,
                     fmt::format("ELBO {:.6f} <= log Z {:.6f} <= EUBO {:.6f}, N=10, {} samples",
                                 est.elbo, log_z, est.eubo, samples)};
}

CheckResult check_bound_dominance(std::size_t replicates, const RngStream& rng, std::size_t threads) {
  const BoundDominanceReport rep =
      verify_grid_bound_dominates(default_grid_model(), 1, replicates, rng, 0.0, threads);
  const double gap = in_stderrs(rep.exact - rep.mean, rep.std_error);
  return CheckResult{"bound-dominance", gap, 3.0, rep.dominates,
                     fmt::format("kl_bound {:.6f} (stderr {:.2g}) vs exact {:.6f}, grid N=1",
                                 rep.mean, rep.std_error, rep.exact)};
}

CheckResult check_particle_trend(std::size_t samples, const RngStream& rng, std::size_t threads) {
  const DivergenceEstimate one = linreg_cell(1, samples, rng.split(1), threads);
  const DivergenceEstimate many = linreg_cell(40, samples, rng.split(40), threads);
  const double pooled =
      std::sqrt(one.eubo_stderr * one.eubo_stderr + one.elbo_stderr * one.elbo_stderr +
                many.eubo_stderr * many.eubo_stderr + many.elbo_stderr * many.elbo_stderr);
  const double diff = in_stderrs(many.kl_bound - one.kl_bound, pooled);
  return CheckResult{"particle-trend", diff, 3.0, diff <= 3.0,
                     fmt::format("kl_bound N=1 {:.4f}, N=40 {:.4f} (pooled stderr {:.2g})",
                                 one.kl_bound, many.kl_bound, pooled)};
}

CheckResult check_seqobs_weights(std::size_t pairs_per_step, const RngStream& rng) {
  auto model = dpm_as_seqobs(small_dpm(3));
  const std::size_t num_obs = model->num_observations();
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int variant = 0; variant < 2; ++variant) {
    RejuvenationSchedule schedule = dpm_gibbs_schedule(model, variant == 0 ? 1 : 2);
    for (auto& s : schedule.steps) {
      s.collapse = variant == 0;
    }
    const auto cfg = build_seqobs_config(model, schedule, 1);
    if (!cfg.densities) {
      throw Error(ErrorKind::kPrecondition, "mixture config carries no densities");
    }
    const std::vector<std::size_t> targets = seqobs_step_targets(schedule);
    for (std::size_t s = 2; s <= cfg.steps + 1; ++s) {
      const bool final_step = s == cfg.steps + 1;
      const std::size_t prev_obs = targets[s - 2];
      for (std::size_t i = 0; i < pairs_per_step; ++i) {
        RngStream stream = rng.split(static_cast<std::uint64_t>(variant)).split(s).split(i);
        const SeqState prev = sample_prior(*model, prev_obs, stream);
        const SeqState next = final_step ? cfg.final_move.forward(prev, stream)
                                         : cfg.moves[s - 2].forward(prev, stream);
        const double generic = generic_log_weight(*cfg.densities, cfg.steps, s, prev, next);
        double simple = 0.0;
        if (final_step) {
          simple = -model->log_joint(num_obs, next);
        } else if (targets[s - 1] != prev_obs) {
          simple = model->log_likelihood(targets[s - 1], next);
        }
        worst = std::max(worst, relative_gap(generic, simple));
        ++pairs;
      }
    }
  }
  return CheckResult{"seqobs-weights", worst, 1e-9, worst <= 1e-9,
                     fmt::format("{} state pairs, 3-point mixture, collapsed and plateau schedules",
                                 pairs)};
}

CheckResult check_plateau_coupling(std::size_t runs, const RngStream& rng) {
  CouplingTally tally;
  auto dpm = dpm_as_seqobs(small_dpm(4));
  couple(dpm, dpm_gibbs_schedule(dpm, 2), 3, runs, rng.split(0), tally);
  const LinRegModel lm = default_linreg_model();
  auto lin = linreg_as_seqobs(lm);
  couple(lin, linreg_schedule(lm, lin, LinRegKernel::kRandomWalk, 3), 4, runs, rng.split(1), tally);
  const bool ok = tally.max_gap == 0.0 && tally.plateau_nonzero == 0 && tally.output_mismatch == 0 &&
                  tally.plateau_weights > 0;
  return CheckResult{"plateau-coupling", tally.max_gap, 0.0, ok,
                     fmt::format("{} plateau weights ({} nonzero), {} output mismatches, {} runs x 2 "
                                 "models",
                                 tally.plateau_weights, tally.plateau_nonzero,
                                 tally.output_mismatch, runs)};
}

std::vector<CheckResult> check_kernels(bool negative_control) {
  constexpr double kTol = 1e-12;
  std::vector<CheckResult> out;
  RngStream rng(7);

  const std::vector<int> three = {0, 1, 2};
  const std::function<double(const int&)> target = [](const int& x) {
    return std::log(static_cast<double>(x + 1));
  };
  Proposal<int> uniform;
  uniform.sample = [](const int&, RngStream& r) { return static_cast<int>(r.uniform_index(3)); };
  uniform.log_density = [](const int&, const int&) { return -std::log(3.0); };
  uniform.support = [three](const int&) { return three; };
  out.push_back(flow_result("balance:mh-uniform-3",
                            check_detailed_balance(mh_kernel(target, uniform, true), target, three, rng),
                            kTol));
  out.push_back(flow_result("balance:identity",
                            check_detailed_balance(identity_kernel<int>(), target, three, rng), kTol));

  auto dpm = dpm_as_seqobs(small_dpm(4));
  double worst = 0.0;
  std::size_t kernels = 0;
  bool all_exact = true;
  for (std::size_t t = 1; t <= dpm->num_observations(); ++t) {
    const std::vector<SeqState> space = *dpm->enumerate_space(t);
    const std::function<double(const SeqState&)> step_target = [dpm, t](const SeqState& x) {
      return dpm->log_joint(t, x);
    };
    for (std::size_t site = 0; site < t; ++site) {
      const auto report = check_detailed_balance(dpm_gibbs_kernel(dpm, t, site), step_target, space, rng);
      all_exact = all_exact && report.exact;
      worst = std::max(worst, report.max_violation);
      ++kernels;
    }
  }
  out.push_back(CheckResult{"balance:dpm-gibbs", worst, kTol, all_exact && worst <= kTol,
                            fmt::format("{} site kernels, partitions of up to 4 points", kernels)});

  if (negative_control) {
    DetailedBalanceKernel<int> broken;
    broken.name = "accept-always";
    broken.step = uniform.sample;
    broken.log_transition = [](const int&, const int&) { return -std::log(3.0); };
    CheckResult r = flow_result("balance:negative-control",
                                check_detailed_balance(broken, target, three, rng), kTol);
    r.detail = "accept-always MH on {0,1,2}; expected to fail";
    out.push_back(std::move(r));
  }
  return out;
}

CheckResult check_tractable_exactness(std::size_t samples, const RngStream& rng, std::size_t threads) {
  const auto pkg = tractable_adapter<int>(
      [](RngStream& r) { return static_cast<int>(r.uniform_index(2)); },
      [](const int&) { return std::log(0.5); });
  ReferenceSampler<int> ref;
  ref.sample = [](std::size_t, RngStream& r) { return r.uniform() < 0.75 ? 0 : 1; };
  const UnnormalizedPosterior<int> post{[](const int& z) { return z == 0 ? std::log(3.0) : 0.0; }};
  const DivergenceEstimate est = estimate_kl_bound(pkg, ref, post, samples, samples, rng, threads);
  const double exact = exact_symmetric_kl(DistTable<int>::from_weights({{0, 0.5}, {1, 0.5}}),
                                          DistTable<int>::from_weights({{0, 3.0}, {1, 1.0}}))
                           .value;
  const double se = std::hypot(est.eubo_stderr, est.elbo_stderr);
  const double dev = std::abs(in_stderrs(est.kl_bound - exact, se));
  return CheckResult{"tractable-exactness", dev, 3.0, dev <= 3.0,
                     fmt::format("kl_bound {:.6f} (stderr {:.2g}) vs exact {:.6f}", est.kl_bound, se,
                                 exact)};
}

std::vector<CheckResult> run_validation_suite(const ValidationOptions& options, const RngStream& rng) {
  const double k = options.scale;
  const std::size_t th = options.threads;
  std::vector<CheckResult> out;
  out.push_back(check_joint_identity(scaled(1000, k), rng.split(1)));
  out.push_back(check_evidence_unbiased(scaled(100000, k), rng.split(2), th));
  out.push_back(check_linreg_sandwich(scaled(10000, k), rng.split(3), th));
  out.push_back(check_bound_dominance(scaled(100000, k), rng.split(4), th));
  out.push_back(check_particle_trend(scaled(10000, k), rng.split(5), th));
  out.push_back(check_seqobs_weights(scaled(1000, k), rng.split(6)));
  out.push_back(check_plateau_coupling(scaled(1000, k), rng.split(7)));
  for (auto& r : check_kernels(options.negative_controls)) {
    out.push_back(std::move(r));
  }
  out.push_back(check_tractable_exactness(scaled(100000, k), rng.split(9), th));
  return out;
}

std::string format_check(const CheckResult& r) {
  return fmt::format("{} {}: measured={:.6g} tolerance={:.6g} ({})", r.passed ? "PASS" : "FAIL",
                     r.name, r.measured, r.tolerance, r.detail);
}

}  // namespace smcdiv
