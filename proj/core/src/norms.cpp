#include "bqlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bqlab/propagator.hpp"
#include "transforms.hpp"

namespace bqlab {

void validate(const ModParams& mp) {
  if (!(mp.p >= 1.0)) throw std::invalid_argument("modulation exponent p must lie in [1, inf]");
  if (!(mp.q >= 1.0)) throw std::invalid_argument("modulation exponent q must lie in [1, inf]");
  if (!std::isfinite(mp.s)) throw std::invalid_argument("regularity s must be finite");
}

std::vector<double> box_norms(const Field& f, double p, const WindowBank& bank) {
  require_same_grid(bank.grid(), f.grid(), "box_norms");
  const Grid& g = f.grid();
  auto spec = spectrum_of(f);
  auto boxes = bank.boxes();
  std::vector<double> out(boxes.size(), 0.0);
  std::vector<cplx> windowed(g.size()), samples(g.size());
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    if (!bank.window_spectrum(boxes[b], spec, windowed)) continue;
    detail::inverse_complex(g, windowed, samples);
    out[b] = lp_norm(std::span<const cplx>(samples), g.cell_volume(), p);
  }
  return out;
}

double combine_box_norms(std::span<const double> norms, const WindowBank& bank, double q, double s) {
  auto boxes = bank.boxes();
  if (norms.size() != boxes.size()) throw std::invalid_argument("combine_box_norms: size mismatch");
  std::vector<double> terms(norms.size());
  for (std::size_t b = 0; b < norms.size(); ++b) {
    const double k = std::hypot(double(boxes[b][0]), double(boxes[b][1]));
    terms[b] = std::pow(1.0 + k, s) * norms[b];
  }
  double peak = 0.0;
  for (double x : terms) peak = std::max(peak, x);
  if (peak == 0.0 || std::isinf(q)) return peak;
  double acc = 0.0;
  if (q == 1.0) {
    for (double x : terms) acc += x;
    return acc;
  }
  for (double x : terms) acc += std::pow(x / peak, q);
  return peak * std::pow(acc, 1.0 / q);
}

double modulation_norm(const Field& f, const ModParams& mp, const WindowBank& bank) {
  validate(mp);
  return combine_box_norms(box_norms(f, mp.p, bank), bank, mp.q, mp.s);
}

double dinvj_modulation_norm(const Field& v, const ModParams& mp, const WindowBank& bank) {
  return modulation_norm(apply_riesz_j(v), mp, bank);
}

}  // namespace bqlab
