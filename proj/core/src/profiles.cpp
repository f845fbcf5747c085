#include "bqlab/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace bqlab {

Field make_profile(const Grid& g, const ProfileSpec& spec) {
  const double a = spec.amplitude, w = spec.width, c = spec.center, k = spec.frequency;
  if (spec.kind == "zero") return Field::zeros(g);
  if ((spec.kind == "gaussian" || spec.kind == "packet") && !(w > 0.0))
    throw std::invalid_argument("profile width must be positive");
  if (spec.kind == "gaussian") {
    return Field::sample(g, [=](double x, double y) {
      const double r2 = (x - c) * (x - c) + y * y;
      return a * std::exp(-r2 / (2.0 * w * w));
    });
  }
  if (spec.kind == "packet") {
    return Field::sample(g, [=](double x, double y) {
      const double r2 = (x - c) * (x - c) + y * y;
      return a * std::exp(-r2 / (2.0 * w * w)) * std::cos(k * (x - c));
    });
  }
  if (spec.kind == "mode") {
    const double j = k / g.frequency_spacing();
    if (std::abs(j - std::round(j)) > 1e-9 || std::abs(k) >= g.max_frequency())
      throw std::invalid_argument("mode frequency is not an interior lattice frequency");
    return Field::sample(g, [=](double x, double) { return a * std::cos(k * x); });
  }
  throw std::invalid_argument("unknown profile kind '" + spec.kind + "'");
}

}  // namespace bqlab
