#include "particle_limits/trajectory.hpp"

#include <stdexcept>
#include <string>

namespace particle_limits {

void validate_checkpoints(const std::vector<double>& checkpoints, double horizon) {
  double previous = 0.0;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double t = checkpoints[i];
    if (t < 0.0) throw std::invalid_argument("checkpoint times must be nonnegative");
    if (i > 0 && t < previous) {
      throw std::invalid_argument("checkpoint times must be sorted");
    }
    if (t > horizon) {
      throw std::invalid_argument("checkpoint " + std::to_string(t) +
                                  " exceeds horizon " + std::to_string(horizon));
    }
    previous = t;
  }
}

}  // namespace particle_limits
