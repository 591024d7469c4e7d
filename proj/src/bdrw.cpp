#include "particle_limits/bdrw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "particle_limits/occupancy_tree.hpp"

namespace particle_limits {

void BdrwParams::validate() const {
  if (n < 2) throw std::invalid_argument("bdrw needs at least 2 sites");
  if (ell < 1.0) throw std::invalid_argument("density parameter ell must be >= 1");
  if (horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");
  if (cap < 1.0) throw std::invalid_argument("explosion cap must be >= 1");
  if (event_budget < 1) throw std::invalid_argument("event budget must be >= 1");
  validate_checkpoints(checkpoints, horizon);
}

double bdrw_total_rate(const Configuration& c, const RateFunctions& rates, int n,
                       double ell) {
  if (c.kind != OccupationKind::unbounded) {
    throw std::invalid_argument("bdrw requires an unbounded configuration");
  }
  if (c.n != n) throw std::invalid_argument("configuration and n disagree");
  const double walk = double(n) * double(n);
  double total = 0.0;
  for (int x = 0; x < n; ++x) {
    const auto eta = static_cast<double>(c.occupations[x]);
    total += 2.0 * walk * eta + ell * rates.birth(eta / ell) + ell * rates.death(eta / ell);
  }
  return total;
}

namespace {

/// One uniformized candidate block: given `count` Poisson candidates on
/// (start, end), candidate times are the order statistics of uniforms and
/// are only materialized on demand (threshold hits, explosion, envelope
/// changes) through chained Beta draws. Everything else needs just counts.
struct CandidateBlock {
  double start = 0.0;
  double end = 0.0;
  std::int64_t count = 0;
  std::int64_t consumed = 0;
  std::int64_t materialized_index = 0;
  double materialized_time = 0.0;

  void reset(double t0, double t1, std::int64_t n) {
    start = t0;
    end = t1;
    count = n;
    consumed = 0;
    materialized_index = 0;
    materialized_time = t0;
  }

  /// Time of the most recently consumed candidate (exact conditional order
  /// statistic given the block count and earlier materializations).
  double materialize(RngStream& stream) {
    const std::int64_t ahead = consumed - materialized_index;
    if (ahead <= 0) return materialized_time;
    const auto remaining = static_cast<double>(count - consumed + 1);
    materialized_time +=
        (end - materialized_time) * stream.beta(static_cast<double>(ahead), remaining);
    materialized_index = consumed;
    return materialized_time;
  }
};

/// Least-squares line through the last <= 4 ladder points of
/// (time, ell / threshold), extrapolated to zero. Exact for the mean-field
/// profile where the inverse density scale decays linearly.
std::optional<double> extrapolate_tau(const std::vector<ThresholdHit>& hits, double ell,
                                      double last_hit_time) {
  const std::size_t count = hits.size();
  if (count < 2) return std::nullopt;
  const std::size_t use = std::min<std::size_t>(4, count);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = count - use; i < count; ++i) {
    const double x = hits[i].time;
    const double y = ell / hits[i].threshold;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = double(use);
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  const double slope = (m * sxy - sx * sy) / denom;
  if (slope >= 0.0) return std::nullopt;
  const double intercept = (sy - slope * sx) / m;
  return std::max(-intercept / slope, last_hit_time);
}

}  // namespace

RunOutcome bdrw_run(const Configuration& init, const RateFunctions& rates,
                    const BdrwParams& params, RngStream& stream) {
  params.validate();
  init.validate();
  rates.validate();
  if (init.kind != OccupationKind::unbounded) {
    throw std::invalid_argument("bdrw requires an unbounded configuration");
  }
  if (init.n != params.n) {
    throw std::invalid_argument("configuration and params disagree on n");
  }

  const int n = params.n;
  const double ell = params.ell;
  const double inv_ell = 1.0 / ell;
  const double walk_pair = 2.0 * double(n) * double(n);  // both directions
  const double inv_walk_pair = 1.0 / walk_pair;
  const Torus torus{n};
  std::vector<std::int64_t> eta = init.occupations;

  // Walk rates are proportional to the occupations and live in the sampling
  // tree. Reaction rates are handled by thinning: per site an envelope
  // r_bar(x) bounds the true rate for every occupation inside a bracket
  // around the current one, so walk jumps only have to check two integer
  // bracket bounds, and the exact per-site rates are recomputed only inside
  // the (much rarer) reaction-candidate scans.
  OccupancyTree occupancy(static_cast<std::size_t>(n));
  std::vector<std::int64_t> bracket_lo(static_cast<std::size_t>(n));
  std::vector<std::int64_t> bracket_hi(static_cast<std::size_t>(n));
  std::vector<double> envelope_rate(static_cast<std::size_t>(n));
  double envelope_total = 0.0;
  auto site_reaction = [&](std::int64_t occupation) {
    const double s = static_cast<double>(occupation) * inv_ell;
    return ell * rates.birth(s) + ell * rates.death(s);
  };
  auto rebracket = [&](int x) {
    const std::int64_t width = std::max<std::int64_t>(2, eta[x] / 8);
    bracket_lo[x] = std::max<std::int64_t>(0, eta[x] - width);
    bracket_hi[x] = eta[x] + width;
    const double s_lo = static_cast<double>(bracket_lo[x]) * inv_ell;
    const double s_hi = static_cast<double>(bracket_hi[x]) * inv_ell;
    const double bound =
        ell * (rates.birth.max_on(s_lo, s_hi) + rates.death.max_on(s_lo, s_hi));
    envelope_total += bound - envelope_rate[x];
    envelope_rate[x] = bound;
  };
  for (int x = 0; x < n; ++x) {
    occupancy.add(static_cast<std::size_t>(x), static_cast<double>(eta[x]));
    rebracket(x);
  }

  // Geometric threshold ladder ell * 2^j clipped at the cap.
  std::vector<double> ladder;
  for (double y = ell; y < params.cap; y *= 2.0) ladder.push_back(y);
  ladder.push_back(params.cap);

  RunOutcome outcome;
  std::size_t next_rung = 0;
  const double infinity = std::numeric_limits<double>::infinity();
  double next_rung_level = ladder.empty() ? infinity : ladder.front();
  CandidateBlock block;
  double now = 0.0;
  auto record_hits = [&](std::int64_t occupation) {
    if (static_cast<double>(occupation) >= next_rung_level) {
      const double hit_time = block.count > 0 ? block.materialize(stream) : now;
      do {
        outcome.threshold_hits.push_back({ladder[next_rung], hit_time});
        ++next_rung;
        next_rung_level = next_rung < ladder.size() ? ladder[next_rung] : infinity;
      } while (static_cast<double>(occupation) >= next_rung_level);
      now = hit_time;
    }
  };

  auto finish = [&](RunStatus status) {
    outcome.status = status;
    outcome.final_time = now;
    std::int64_t max_occ = 0;
    for (const auto v : eta) max_occ = std::max(max_occ, v);
    outcome.final_max_occupation = max_occ;
    if (status == RunStatus::exploded) {
      outcome.tau_estimate = extrapolate_tau(outcome.threshold_hits, ell, now);
      if (!outcome.tau_estimate) outcome.tau_estimate = now;
    }
    return outcome;
  };

  // The initial state may already sit on ladder rungs (or past the cap).
  for (int x = 0; x < n; ++x) record_hits(eta[x]);
  for (int x = 0; x < n; ++x) {
    if (static_cast<double>(eta[x]) >= params.cap) return finish(RunStatus::exploded);
  }

  // Segment boundaries: the checkpoint grid plus the horizon. Inside a
  // segment the composite process is simulated by uniformization against a
  // frozen candidate rate Lambda >= walk rate + reaction envelope: the
  // number of candidates is one Poisson draw, each candidate consumes one
  // uniform, and candidates falling into envelope slack are no-ops. This is
  // distributionally identical to the event-by-event chain, and candidate
  // times never need a logarithm unless a threshold hit or a stop actually
  // materializes them.
  const bool frozen_rates = rates.birth.is_zero() && rates.death.is_zero();
  std::vector<std::pair<double, bool>> boundaries;  // (time, is_checkpoint)
  for (const double t : params.checkpoints) boundaries.emplace_back(t, true);
  boundaries.emplace_back(params.horizon, false);

  double walk_total = walk_pair * occupancy.total();  // changes only on birth/death

  // A walk jump that leaves both bracket windows changes no envelope terms,
  // so the hot path carries two integer compares instead of rate updates.
  auto settle_bracket = [&](int x) {
    if (eta[x] < bracket_lo[x] || eta[x] > bracket_hi[x]) rebracket(x);
  };

  for (const auto& [boundary, is_checkpoint] : boundaries) {
    while (now < boundary) {
      if (!frozen_rates) {
        // Fresh block: rebase the tracked envelope sum on the per-site
        // envelopes so roundoff cannot accumulate across blocks.
        envelope_total = 0.0;
        for (int i = 0; i < n; ++i) envelope_total += envelope_rate[i];
      }
      const double bound_start = walk_total + envelope_total;
      if (bound_start <= 0.0) break;  // absorbing state coasts to the boundary

      // Pure walks keep the rate constant, so the candidate rate is tight;
      // otherwise leave a little headroom so slow growth does not force
      // restarts (restarts are cheap, slack candidates are pure waste).
      const double lambda = frozen_rates ? bound_start : bound_start * 1.005;
      block.reset(now, boundary, stream.poisson(lambda * (boundary - now)));
      bool restarted = false;

      while (block.consumed < block.count) {
        ++block.consumed;
        const double selector = stream.uniform01() * lambda;

        if (selector < walk_total) {
          if (outcome.trajectory.event_count >= params.event_budget) {
            now = block.materialize(stream);
            return finish(RunStatus::budget_exhausted);
          }
          ++outcome.trajectory.event_count;
          // Walk: site chosen with weight eta(x); the in-leaf residual
          // supplies the direction bit (uniform on [0, eta)).
          const auto [site, residual] = occupancy.sample(selector * inv_walk_pair);
          const auto x = static_cast<int>(site);
          const bool to_right = residual + residual < static_cast<double>(eta[x]);
          const int target = to_right ? torus.right(x) : torus.left(x);
          eta[x] -= 1;
          eta[target] += 1;
          occupancy.move_unit(site, static_cast<std::size_t>(target));
          record_hits(eta[target]);
          if (static_cast<double>(eta[target]) >= params.cap) {
            now = block.materialize(stream);
            return finish(RunStatus::exploded);
          }
          if (!frozen_rates &&
              (eta[x] < bracket_lo[x] || eta[target] > bracket_hi[target])) {
            settle_bracket(x);
            settle_bracket(target);
            const double bound_now = walk_total + envelope_total;
            if (bound_now > lambda || bound_now < 0.35 * lambda) {
              now = block.materialize(stream);
              restarted = true;
              break;
            }
          }
          continue;
        }

        const double envelope_weight = selector - walk_total;
        if (envelope_weight >= envelope_total) continue;  // lambda slack: no-op

        // Reaction candidate: thin against the exact per-site rates, which
        // the brackets guarantee to sit below the envelope terms. The scan
        // maps the candidate onto true-rate mass; overshoot is a no-op.
        double envelope_cum = 0.0;
        int x = -1;
        double site_offset = 0.0;
        for (int i = 0; i < n; ++i) {
          if (envelope_weight < envelope_cum + envelope_rate[i]) {
            // Candidate belongs to site i's envelope slot; accept iff it
            // falls inside the site's true-rate prefix.
            const double within = envelope_weight - envelope_cum;
            if (within < site_reaction(eta[i])) {
              x = i;
              site_offset = within;
            }
            break;
          }
          envelope_cum += envelope_rate[i];
        }
        if (x < 0) continue;  // thinned away: no-op

        if (outcome.trajectory.event_count >= params.event_budget) {
          now = block.materialize(stream);
          return finish(RunStatus::budget_exhausted);
        }
        ++outcome.trajectory.event_count;

        const double birth = ell * rates.birth(static_cast<double>(eta[x]) * inv_ell);
        if (site_offset < birth) {
          eta[x] += 1;
          occupancy.add(static_cast<std::size_t>(x), 1.0);
          walk_total += walk_pair;
          record_hits(eta[x]);
          if (static_cast<double>(eta[x]) >= params.cap) {
            now = block.materialize(stream);
            return finish(RunStatus::exploded);
          }
        } else {
          if (eta[x] <= 0) {
            throw std::logic_error("death event at an empty site despite d(0) = 0");
          }
          eta[x] -= 1;
          occupancy.add(static_cast<std::size_t>(x), -1.0);
          walk_total -= walk_pair;
        }
        settle_bracket(x);
        const double bound_now = walk_total + envelope_total;
        if (bound_now > lambda || bound_now < 0.35 * lambda) {
          now = block.materialize(stream);
          restarted = true;
          break;
        }
      }

      if (!restarted) {
        now = boundary;
        block.count = 0;
      }
    }

    now = boundary;
    block.count = 0;
    if (is_checkpoint) {
      Configuration c{n, OccupationKind::unbounded, eta};
      outcome.trajectory.snapshots.push_back({boundary, std::move(c)});
    }
  }

  return finish(RunStatus::completed);
}

std::size_t TruncatedDistribution::state_index(
    const std::vector<std::int64_t>& occupations) const {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int x = 0; x < n; ++x) {
    const auto eta = occupations[x];
    if (eta < 0 || eta > occupancy_cap) return boundary_index();
    index += static_cast<std::size_t>(eta) * stride;
    stride *= static_cast<std::size_t>(occupancy_cap) + 1;
  }
  return index;
}

TruncatedDistribution bdrw_small_oracle(const Configuration& init,
                                        const RateFunctions& rates, int n, double ell,
                                        double t, int occupancy_cap) {
  init.validate();
  rates.validate();
  if (init.kind != OccupationKind::unbounded) {
    throw std::invalid_argument("oracle requires an unbounded configuration");
  }
  if (init.n != n) throw std::invalid_argument("configuration and n disagree");
  if (n < 1 || n > 3) throw std::invalid_argument("oracle limited to 1 <= n <= 3");
  if (occupancy_cap < 1 || occupancy_cap > 8) {
    throw std::invalid_argument("oracle limited to occupancy_cap <= 8");
  }
  if (ell < 1.0) throw std::invalid_argument("density parameter ell must be >= 1");
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");

  const std::size_t per_site = static_cast<std::size_t>(occupancy_cap) + 1;
  std::size_t box = 1;
  for (int x = 0; x < n; ++x) box *= per_site;
  const std::size_t states = box + 1;  // plus absorbing boundary

  TruncatedDistribution result;
  result.n = n;
  result.occupancy_cap = occupancy_cap;
  result.probabilities.assign(states, 0.0);

  const double walk = double(n) * double(n);
  auto decode = [&](std::size_t index) {
    std::vector<std::int64_t> occ(n);
    for (int x = 0; x < n; ++x) {
      occ[x] = static_cast<std::int64_t>(index % per_site);
      index /= per_site;
    }
    return occ;
  };

  // Jump targets and rates per interior state; escapes go to the boundary.
  std::vector<std::vector<std::pair<std::size_t, double>>> transitions(states);
  std::vector<double> outflow(states, 0.0);
  const Torus torus{n};
  for (std::size_t s = 0; s < box; ++s) {
    auto occ = decode(s);
    auto push = [&](std::vector<std::int64_t>& target, double rate) {
      if (rate <= 0.0) return;
      transitions[s].emplace_back(result.state_index(target), rate);
      outflow[s] += rate;
    };
    for (int x = 0; x < n; ++x) {
      const auto eta = occ[x];
      const double jump_each = walk * static_cast<double>(eta);
      if (eta > 0) {
        for (const int target_site : {torus.right(x), torus.left(x)}) {
          auto target = occ;
          target[x] -= 1;
          target[target_site] += 1;
          push(target, jump_each);
        }
        const double death = ell * rates.death(static_cast<double>(eta) / ell);
        if (death > 0.0) {
          auto target = occ;
          target[x] -= 1;
          push(target, death);
        }
      }
      const double birth = ell * rates.birth(static_cast<double>(eta) / ell);
      if (birth > 0.0) {
        auto target = occ;
        target[x] += 1;
        push(target, birth);
      }
    }
  }

  double uniformization_rate = 0.0;
  for (std::size_t s = 0; s < box; ++s) {
    uniformization_rate = std::max(uniformization_rate, outflow[s]);
  }
  if (uniformization_rate == 0.0) uniformization_rate = 1.0;

  std::vector<double> current(states, 0.0);
  current[result.state_index(init.occupations)] = 1.0;

  const double lambda_t = uniformization_rate * t;
  double cumulative = 0.0;
  std::vector<double> next(states, 0.0);
  for (std::uint64_t k = 0; k < 4000000; ++k) {
    const double log_weight =
        -lambda_t + (k == 0 ? 0.0
                            : double(k) * std::log(lambda_t) - std::lgamma(double(k) + 1.0));
    const double weight = std::exp(log_weight);
    if (weight > 0.0) {
      for (std::size_t s = 0; s < states; ++s) result.probabilities[s] += weight * current[s];
    }
    cumulative += weight;
    if (cumulative >= 1.0 - 1e-12 && double(k) >= lambda_t) break;

    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      const double p = current[s];
      if (p == 0.0) continue;
      const double stay = s < box ? 1.0 - outflow[s] / uniformization_rate : 1.0;
      next[s] += p * stay;
      for (const auto& [target, rate] : transitions[s]) {
        next[target] += p * rate / uniformization_rate;
      }
    }
    current.swap(next);
  }
  result.truncation_error = std::max(0.0, 1.0 - cumulative);
  result.boundary_mass = result.probabilities[result.boundary_index()];
  return result;
}

}  // namespace particle_limits
