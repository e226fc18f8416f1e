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

#include "smcdiv/models/grid.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace smcdiv {
namespace {

void check_stochastic(const Table& table, std::size_t rows, std::size_t cols, const char* what) {
  if (table.size() != rows) {
    throw Error(ErrorKind::kConstruction, std::string(what) + " has the wrong number of rows");
  }
  for (const auto& row : table) {
    if (row.size() != cols) {
      throw Error(ErrorKind::kConstruction, std::string(what) + " has a row of the wrong width");
    }
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) {
        throw Error(ErrorKind::kConstruction, std::string(what) + " has a negative entry");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(ErrorKind::kConstruction, std::string(what) + " row is not normalized");
    }
  }
}

// k(b; a) > 0 iff l(a; b) > 0.
void check_support(const Table& forward, const Table& backward, const char* what) {
  for (std::size_t a = 0; a < forward.size(); ++a) {
    for (std::size_t b = 0; b < forward.size(); ++b) {
      if ((forward[a][b] > 0.0) != (backward[b][a] > 0.0)) {
        throw Error(ErrorKind::kConstruction,
                    std::string(what) + " kernels violate the support condition");
      }
    }
  }
}

Table uniform_table(std::size_t k) {
  return Table(k, std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Table identity_table(std::size_t k) {
  Table t(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    t[i][i] = 1.0;
  }
  return t;
}

}  // namespace

void GridModel::fill_defaults() {
  if (backward.empty() && steps() > 1) {
    backward.assign(steps() - 1, uniform_table(states));
  }
  if (final_forward.empty()) {
    final_forward = identity_table(states);
  }
  if (final_backward.empty()) {
    final_backward = identity_table(states);
  }
}

void GridModel::validate() const {
  if (states < 1) {
    throw Error(ErrorKind::kConstruction, "grid model needs at least one state");
  }
  if (observations.empty()) {
    throw Error(ErrorKind::kConstruction, "grid model needs at least one observation");
  }
  check_stochastic(Table{prior}, 1, states, "prior");
  check_stochastic(transition, states, states, "transition");
  if (emission.empty()) {
    throw Error(ErrorKind::kConstruction, "emission table is empty");
  }
  check_stochastic(emission, states, emission.front().size(), "emission");
  for (std::size_t y : observations) {
    if (y >= emission.front().size()) {
      throw Error(ErrorKind::kConstruction, "observation symbol out of range");
    }
  }
  if (backward.size() + 1 != steps()) {
    throw Error(ErrorKind::kConstruction, "need one backward table per step after the first");
  }
  for (const auto& b : backward) {
    check_stochastic(b, states, states, "backward");
    check_support(transition, b, "step");
  }
  check_stochastic(final_forward, states, states, "final forward");
  check_stochastic(final_backward, states, states, "final backward");
  check_support(final_forward, final_backward, "output");
  for (double p : prior) {
    if (!(p > 0.0)) {
      throw Error(ErrorKind::kConstruction, "initial kernel must be positive on every state");
    }
  }
  for (const auto& per_step : grid_log_targets(*this)) {
    for (double lp : per_step) {
      if (lp == kNegInf) {
        throw Error(ErrorKind::kConstruction, "every target must be positive on every state");
      }
    }
  }
}

GridModel default_grid_model() {
  GridModel m;
  m.states = 3;
  m.prior = {0.5, 0.3, 0.2};
  m.transition = {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.25, 0.25, 0.5}};
  m.emission = {{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}};
  m.observations = {0, 1};
  m.backward = {{{0.5, 0.3, 0.2}, {0.2, 0.6, 0.2}, {0.25, 0.25, 0.5}}};
  m.final_forward = {{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}};
  m.final_backward = {{0.6, 0.3, 0.1}, {0.2, 0.7, 0.1}, {0.1, 0.1, 0.8}};
  m.validate();
  return m;
}

std::vector<std::vector<double>> grid_log_targets(const GridModel& m) {
  std::vector<std::vector<double>> out;
  std::vector<double> alpha(m.states);
  for (std::size_t x = 0; x < m.states; ++x) {
    alpha[x] = m.prior[x] * m.emission[x][m.observations[0]];
  }
  auto push_log = [&out](const std::vector<double>& a) {
    std::vector<double> l(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      l[i] = std::log(a[i]);
    }
    out.push_back(std::move(l));
  };
  push_log(alpha);
  for (std::size_t t = 1; t < m.steps(); ++t) {
    std::vector<double> next(m.states, 0.0);
    for (std::size_t b = 0; b < m.states; ++b) {
      for (std::size_t a = 0; a < m.states; ++a) {
        next[b] += alpha[a] * m.transition[a][b];
      }
      next[b] *= m.emission[b][m.observations[t]];
    }
    alpha.swap(next);
    push_log(alpha);
  }
  return out;
}

double grid_log_evidence(const GridModel& m) {
  return log_sum_exp(grid_log_targets(m).back());
}

SmcConfig<int> grid_as_config(const GridModel& model, std::size_t particles) {
  model.validate();
  auto m = std::make_shared<const GridModel>(model);
  auto targets = std::make_shared<const std::vector<std::vector<double>>>(grid_log_targets(model));
  const std::size_t steps = model.steps();

  auto draw = [](const std::vector<double>& probs, RngStream& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) {
        last = static_cast<int>(i);
      }
      cumulative += probs[i];
      if (u < cumulative) {
        return static_cast<int>(i);
      }
    }
    return last;
  };

  SmcDensities<int> d;
  d.log_target = [targets](std::size_t t, const int& x) { return (*targets)[t - 1][x]; };
  d.log_init = [m](const int& x) { return std::log(m->prior[x]); };
  d.log_forward = [m, steps](std::size_t t, const int& to, const int& from) {
    return std::log(t == steps + 1 ? m->final_forward[from][to] : m->transition[from][to]);
  };
  d.log_backward = [m, steps](std::size_t t, const int& to, const int& from) {
    return std::log(t == steps + 1 ? m->final_backward[from][to] : m->backward[t - 2][from][to]);
  };

  SmcConfig<int> cfg;
  cfg.steps = steps;
  cfg.particles = particles;
  cfg.init = [m, draw](RngStream& rng) { return draw(m->prior, rng); };
  cfg.log_init_weight = [d](const int& x) { return d.log_target(1, x) - d.log_init(x); };
  for (std::size_t t = 2; t <= steps; ++t) {
    SmcMove<int> move;
    move.forward = [m, draw](const int& from, RngStream& rng) {
      return draw(m->transition[from], rng);
    };
    move.backward = [m, draw, t](const int& to, RngStream& rng) {
      return draw(m->backward[t - 2][to], rng);
    };
    move.log_weight = [d, steps, t](const int& prev, const int& next) {
      return generic_log_weight(d, steps, t, prev, next);
    };
    cfg.moves.push_back(std::move(move));
  }
  cfg.final_move.forward = [m, draw](const int& from, RngStream& rng) {
    return draw(m->final_forward[from], rng);
  };
  cfg.final_move.backward = [m, draw](const int& to, RngStream& rng) {
    return draw(m->final_backward[to], rng);
  };
  cfg.final_move.log_weight = [d, steps](const int& prev, const int& z) {
    return generic_log_weight(d, steps, steps + 1, prev, z);
  };
  cfg.densities = std::move(d);
  cfg.validate();
  return cfg;
}

UnnormalizedPosterior<int> grid_posterior(const GridModel& model) {
  model.validate();
  auto final_target = std::make_shared<const std::vector<double>>(grid_log_targets(model).back());
  return UnnormalizedPosterior<int>{[final_target](const int& z) {
    if (z < 0 || static_cast<std::size_t>(z) >= final_target->size()) {
      return kNegInf;
    }
    return (*final_target)[z];
  }};
}

ReferenceSampler<int> grid_exact_posterior_sampler(const GridModel& model) {
  model.validate();
  const std::vector<double> lp = grid_log_targets(model).back();
  const double log_z = log_sum_exp(lp);
  std::vector<double> probs(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    probs[i] = std::exp(lp[i] - log_z);
  }
  ReferenceSampler<int> ref;
  ref.exact = true;
  ref.sample = [probs](std::size_t, RngStream& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cumulative += probs[i];
      if (u < cumulative) {
        return static_cast<int>(i);
      }
    }
    return static_cast<int>(probs.size() - 1);
  };
  return ref;
}

}  // namespace smcdiv
