#include "particle_limits/ssep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace particle_limits {

void SsepParams::validate() const {
  if (n < 2) throw std::invalid_argument("ssep needs at least 2 sites");
  if (horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");
  validate_checkpoints(checkpoints, horizon);
}

namespace {

/// Set of discrepant edges with O(1) insert/erase and uniform sampling.
/// Edge x stands for (x, x+1 mod n).
class EdgeSet {
 public:
  explicit EdgeSet(int n) : position_(n, -1) { members_.reserve(n); }

  bool contains(int edge) const { return position_[edge] >= 0; }
  int size() const { return static_cast<int>(members_.size()); }
  int at(int index) const { return members_[index]; }

  void insert(int edge) {
    if (position_[edge] >= 0) return;
    position_[edge] = static_cast<int>(members_.size());
    members_.push_back(edge);
  }

  void erase(int edge) {
    const int pos = position_[edge];
    if (pos < 0) return;
    const int last = members_.back();
    members_[pos] = last;
    position_[last] = pos;
    members_.pop_back();
    position_[edge] = -1;
  }

 private:
  std::vector<int> members_;
  std::vector<int> position_;
};

}  // namespace

Trajectory ssep_run(const Configuration& init, const SsepParams& params,
                    RngStream& stream) {
  params.validate();
  init.validate();
  if (init.kind != OccupationKind::exclusion) {
    throw std::invalid_argument("ssep requires an exclusion configuration");
  }
  if (init.n != params.n) {
    throw std::invalid_argument("configuration and params disagree on n");
  }

  const int n = params.n;
  const double edge_rate = double(n) * double(n);
  std::vector<std::int64_t> eta = init.occupations;

  EdgeSet discrepant(n);
  for (int x = 0; x < n; ++x) {
    if (eta[x] != eta[(x + 1) % n]) discrepant.insert(x);
  }

  Trajectory trajectory;
  trajectory.snapshots.reserve(params.checkpoints.size());
  std::size_t next_checkpoint = 0;
  auto snapshot_until = [&](double limit) {
    // Emits every pending checkpoint strictly before `limit`; the snapshot at
    // an event time itself is taken after the event (cadlag convention).
    while (next_checkpoint < params.checkpoints.size() &&
           params.checkpoints[next_checkpoint] < limit) {
      Configuration c{n, OccupationKind::exclusion, eta};
      trajectory.snapshots.push_back({params.checkpoints[next_checkpoint], std::move(c)});
      ++next_checkpoint;
    }
  };

  const Torus torus{n};
  double now = 0.0;
  while (discrepant.size() > 0) {
    const double total_rate = edge_rate * discrepant.size();
    const double event_time = now + stream.exponential(total_rate);
    if (event_time > params.horizon) break;
    snapshot_until(event_time);
    now = event_time;

    const int edge = discrepant.at(
        static_cast<int>(stream.uniform_below(static_cast<std::uint32_t>(discrepant.size()))));
    const int x = edge;
    const int y = torus.right(x);
    std::swap(eta[x], eta[y]);
    ++trajectory.event_count;

    // The swapped edge stays discrepant; only its two neighbors can flip.
    for (const int e : {torus.left(x), y}) {
      if (eta[e] != eta[torus.right(e)]) {
        discrepant.insert(e);
      } else {
        discrepant.erase(e);
      }
    }
  }
  snapshot_until(std::numeric_limits<double>::infinity());
  return trajectory;
}

std::uint32_t configuration_bits(const Configuration& c) {
  if (c.kind != OccupationKind::exclusion || c.n > 31) {
    throw std::invalid_argument("configuration_bits needs a small exclusion configuration");
  }
  std::uint32_t bits = 0;
  for (int x = 0; x < c.n; ++x) {
    if (c.occupations[x] != 0) bits |= (1u << x);
  }
  return bits;
}

SsepDistribution ssep_step_distribution_oracle(const Configuration& init, double t) {
  init.validate();
  if (init.kind != OccupationKind::exclusion) {
    throw std::invalid_argument("oracle requires an exclusion configuration");
  }
  if (init.n > 6) {
    throw std::invalid_argument("oracle limited to n <= 6 (state space 2^n)");
  }
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");

  const int n = init.n;
  const std::uint32_t states = 1u << n;
  const double edge_rate = double(n) * double(n);
  const double uniformization_rate = edge_rate * n;  // >= any row's total rate

  // Substochastic step matrix P = I + Q / Lambda compressed to the swap
  // targets; diagonal entries are implicit.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> jumps(states);
  std::vector<double> stay(states);
  for (std::uint32_t s = 0; s < states; ++s) {
    double out = 0.0;
    for (int x = 0; x < n; ++x) {
      const int y = (x + 1) % n;
      const bool bx = (s >> x) & 1u;
      const bool by = (s >> y) & 1u;
      if (bx != by) {
        const std::uint32_t target = s ^ (1u << x) ^ (1u << y);
        jumps[s].emplace_back(target, edge_rate / uniformization_rate);
        out += edge_rate;
      }
    }
    stay[s] = 1.0 - out / uniformization_rate;
  }

  SsepDistribution result;
  result.n = n;
  result.probabilities.assign(states, 0.0);

  std::vector<double> current(states, 0.0);
  current[configuration_bits(init)] = 1.0;

  const double lambda_t = uniformization_rate * t;
  double cumulative = 0.0;
  std::vector<double> next(states, 0.0);
  for (std::uint64_t k = 0; k < 2000000; ++k) {
    const double log_weight =
        -lambda_t + (k == 0 ? 0.0
                            : double(k) * std::log(lambda_t) - std::lgamma(double(k) + 1.0));
    const double weight = std::exp(log_weight);
    if (weight > 0.0) {
      for (std::uint32_t s = 0; s < states; ++s) {
        result.probabilities[s] += weight * current[s];
      }
    }
    cumulative += weight;
    if (cumulative >= 1.0 - 1e-12 && double(k) >= lambda_t) break;

    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint32_t s = 0; s < states; ++s) {
      const double p = current[s];
      if (p == 0.0) continue;
      next[s] += p * stay[s];
      for (const auto& [target, prob] : jumps[s]) next[target] += p * prob;
    }
    current.swap(next);
  }
  result.truncation_error = std::max(0.0, 1.0 - cumulative);
  return result;
}

}  // namespace particle_limits
