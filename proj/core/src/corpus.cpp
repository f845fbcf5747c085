#include "bqlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "bqlab/propagator.hpp"

namespace bqlab {
namespace {

// exp(-w^2 xi^2 / 2) drops below the occupancy threshold once w xi exceeds this
const double kGaussTail = std::sqrt(-2.0 * std::log(kOccupancyThreshold));

struct Packet {
  double amp, width, x0, y0, k, phase;
};

Field sum_packets(const Grid& g, const std::vector<Packet>& ps) {
  return Field::sample(g, [&](double x, double y) {
    double acc = 0.0;
    for (const auto& p : ps) {
      const double dx = x - p.x0, dy = g.dim() == 2 ? y - p.y0 : 0.0;
      acc += p.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * p.width * p.width)) * std::cos(p.k * dx + p.phase);
    }
    return acc;
  });
}

}  // namespace

std::string to_string(MemberKind k) {
  switch (k) {
    case MemberKind::Gaussian: return "gaussian";
    case MemberKind::WavePacket: return "packet";
    case MemberKind::SingleMode: return "mode";
    case MemberKind::Noise: return "noise";
  }
  return "?";
}

std::vector<MemberKind> localized_kinds() {
  return {MemberKind::Gaussian, MemberKind::WavePacket, MemberKind::Noise};
}

double Corpus::max_group_speed() const {
  double v = 0.0;
  for (const auto& m : members) v = std::max(v, m.group_speed);
  return v;
}

double safe_cutoff(const Grid& g, double horizon) {
  const double vmax = g.half_length() / (2.0 * horizon);
  if (!(vmax > 1.0)) throw std::invalid_argument("safe_cutoff: horizon too long for this box (group speed >= 1)");
  double lo = 0.0, hi = 1.0;
  while (group_speed(hi) < vmax) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (group_speed(mid) < vmax ? lo : hi) = mid;
  }
  return std::min(lo, 0.9 * g.max_frequency());
}

Corpus make_corpus(const Grid& g, std::uint64_t seed, std::size_t size, const CorpusOptions& opt) {
  if (opt.kinds.empty()) throw std::invalid_argument("make_corpus: empty kind list");
  if (!(opt.cutoff > 0.0)) throw std::invalid_argument("make_corpus: cutoff must be positive");
  const double kc = opt.cutoff;
  // a little margin so occupancy measured on the lattice stays under kc
  const double min_width = 1.05 * kGaussTail / kc;
  const double L = g.half_length();
  Corpus c;
  c.seed = seed;
  for (std::size_t i = 0; i < size; ++i) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(i), 0x5bd1e995u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto between = [&](double a, double b) { return a + (b - a) * uni(rng); };
    const MemberKind kind = opt.kinds[i % opt.kinds.size()];
    const double spread = opt.center_spread * L;
    std::vector<Packet> ps;
    std::string label = to_string(kind) + "#" + std::to_string(i);
    switch (kind) {
      case MemberKind::Gaussian: {
        const double w = min_width * between(1.0, 2.5);
        ps.push_back({1.0, w, between(-spread, spread), between(-spread, spread), 0.0, 0.0});
        break;
      }
      case MemberKind::WavePacket: {
        const double k = kc * between(0.2, 0.6);
        const double w = 1.05 * kGaussTail / (kc - k) * between(1.0, 1.5);
        ps.push_back({1.0, w, between(-spread, spread), between(-spread, spread), k, 0.0});
        break;
      }
      case MemberKind::Noise: {
        for (int j = 0; j < 4; ++j) {
          const double k = kc * between(0.0, 0.6);
          const double w = 1.05 * kGaussTail / (kc - k) * between(1.0, 2.0);
          ps.push_back({between(-1.0, 1.0), w, between(-spread, spread), between(-spread, spread), k,
                        between(0.0, 2.0 * std::numbers::pi)});
        }
        break;
      }
      case MemberKind::SingleMode:
        break;
    }
    Field f = Field::zeros(g);
    if (kind == MemberKind::SingleMode) {
      const int jmax = std::max(1, int(std::floor(kc / g.frequency_spacing())));
      std::uniform_int_distribution<int> pick(1, jmax);
      const double k = pick(rng) * g.frequency_spacing();
      f = Field::sample(g, [k](double x, double) { return std::cos(k * x); });
    } else {
      f = sum_packets(g, ps);
    }
    f = forward_transform(f);
    const double v = max_group_speed(f);
    if (v > group_speed(kc) * (1.0 + 1e-9))
      throw std::logic_error("make_corpus: member " + label + " exceeds the frequency cutoff");
    c.members.push_back({std::move(f), kind, label, v});
  }
  return c;
}

}  // namespace bqlab
