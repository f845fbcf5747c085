#include "bqlab/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "transforms.hpp"

namespace bqlab {
namespace {

using Spectrum = std::vector<cplx>;

// Spectral kernels shared by the Picard map and the reference integrator.
class Engine {
 public:
  Engine(const Grid& g, const SolverConfig& cfg) : lat_(g), cfg_(cfg) {
    const std::size_t n = g.size();
    r_.resize(n);
    c_.resize(n);
    s_.resize(n);
    for (std::size_t m = 0; m < n; ++m) r_[m] = lat_.abs_xi[m] / lat_.bracket[m];
  }

  const Grid& grid() const { return lat_.grid; }
  std::size_t size() const { return r_.size(); }

  void set_time(double t) {
    t_ = t;
    for (std::size_t m = 0; m < r_.size(); ++m) {
      c_[m] = std::cos(t * lat_.omega[m]);
      s_[m] = std::sin(t * lat_.omega[m]);
    }
  }

  // [oa, ob] = B(t) [a, b]; outputs may alias inputs
  void group(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> oa, std::span<cplx> ob) const {
    for (std::size_t m = 0; m < r_.size(); ++m) {
      const cplx x = a[m], y = b[m];
      if (r_[m] == 0.0) {
        oa[m] = x;
        ob[m] = t_ * x + y;
      } else {
        oa[m] = c_[m] * x - r_[m] * s_[m] * y;
        ob[m] = (s_[m] / r_[m]) * x + c_[m] * y;
      }
    }
  }

  // first component of B(t)[a, b]
  void group_u(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> oa) const {
    for (std::size_t m = 0; m < r_.size(); ++m)
      oa[m] = r_[m] == 0.0 ? a[m] : c_[m] * a[m] - r_[m] * s_[m] * b[m];
  }

  // [ga, gb] = B(-t) [0, F]
  void pull_back(std::span<const cplx> F, std::span<cplx> ga, std::span<cplx> gb) const {
    for (std::size_t m = 0; m < r_.size(); ++m) {
      ga[m] = r_[m] * s_[m] * F[m];
      gb[m] = c_[m] * F[m];
    }
  }

  Spectrum forcing(std::span<const cplx> u) const {
    if (!cfg_.nonlinear) return Spectrum(u.size());
    return detail::power_spectrum(grid(), u, cfg_.pp.lambda);
  }

 private:
  Lattice lat_;
  const SolverConfig& cfg_;
  std::vector<double> r_, c_, s_;
  double t_ = 0.0;
};

double spectral_l2_sq(const Grid& g, std::span<const cplx> a) {
  double acc = 0.0;
  for (const cplx& z : a) acc += std::norm(z);
  return acc / g.volume();
}

StatePair pair_from_spectra(const Grid& g, Spectrum a, Spectrum b) {
  return {field_from_spectrum(g, std::move(a)), field_from_spectrum(g, std::move(b))};
}

// Trajectory from node-ordered samples; reversed when time runs backwards.
Trajectory ordered_trajectory(std::vector<double> times, std::vector<StatePair> states) {
  if (times.size() > 1 && times[1] < times[0]) {
    std::reverse(times.begin(), times.end());
    std::reverse(states.begin(), states.end());
  }
  return Trajectory(std::move(times), std::move(states));
}

struct SpectralSample {
  double t;
  Spectrum u, v;
};

Trajectory build_trajectory(const Grid& g, std::vector<SpectralSample>& samples) {
  std::vector<double> times;
  std::vector<StatePair> states;
  times.reserve(samples.size());
  states.reserve(samples.size());
  for (auto& s : samples) {
    times.push_back(s.t);
    states.push_back(pair_from_spectra(g, std::move(s.u), std::move(s.v)));
  }
  samples.clear();
  return ordered_trajectory(std::move(times), std::move(states));
}

bool all_zero(const std::vector<SpectralSample>& samples) {
  for (const auto& s : samples)
    for (std::size_t m = 0; m < s.u.size(); ++m)
      if (s.u[m] != cplx(0.0) || s.v[m] != cplx(0.0)) return false;
  return true;
}

double weighted_norm(const Grid& g, std::vector<SpectralSample> samples, const SolverConfig& cfg,
                     const WindowBank& bank) {
  if (all_zero(samples)) return 0.0;
  Trajectory traj = build_trajectory(g, samples);
  return weighted_sup_norm(traj, cfg.mod(), TimeWeight::poly_alpha(cfg.pp.alpha()), bank).sup;
}

std::size_t norm_stride(const SolverConfig& cfg) {
  return cfg.norm_every == 0 ? cfg.sample_every : cfg.norm_every;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw std::invalid_argument("solver: T must be positive");
  if (cfg.M < 2) throw std::invalid_argument("solver: M must be >= 2");
  if (!(cfg.tol_fixed_point > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
  if (cfg.K_max < 1) throw std::invalid_argument("solver: K_max must be >= 1");
  if (!(cfg.dt_ref > 0.0)) throw std::invalid_argument("solver: dt_ref must be positive");
  if (cfg.sample_every == 0 || cfg.M % cfg.sample_every != 0)
    throw std::invalid_argument("solver: sample_every must divide M");
  if (cfg.M % norm_stride(cfg) != 0) throw std::invalid_argument("solver: norm_every must divide M");
  if (cfg.direction != 1 && cfg.direction != -1) throw std::invalid_argument("solver: direction must be +1 or -1");
  if (cfg.nonlinear && cfg.pp.lambda < 2) throw std::invalid_argument("solver: lambda must be an integer >= 2");
}

std::vector<double> node_times(const SolverConfig& cfg) {
  std::vector<double> t(cfg.M + 1);
  for (std::size_t m = 0; m <= cfg.M; ++m) t[m] = cfg.direction * (cfg.T * double(m) / double(cfg.M));
  return t;
}

Trajectory linear_trajectory(const StatePair& z0, const SolverConfig& cfg) {
  validate(cfg);
  const Grid& g = z0.grid();
  Engine eng(g, cfg);
  const auto u0 = spectrum_of(z0.u), v0 = spectrum_of(z0.v);
  const auto times = node_times(cfg);
  std::vector<SpectralSample> out;
  for (std::size_t m = 0; m <= cfg.M; m += cfg.sample_every) {
    eng.set_time(times[m]);
    SpectralSample s{times[m], Spectrum(g.size()), Spectrum(g.size())};
    eng.group(u0, v0, s.u, s.v);
    out.push_back(std::move(s));
  }
  return build_trajectory(g, out);
}

Trajectory duhamel_apply(const Trajectory& traj, const StatePair& z0, const SolverConfig& cfg) {
  validate(cfg);
  const Grid& g = z0.grid();
  require_same_grid(g, traj.grid(), "duhamel_apply");
  const auto times = node_times(cfg);
  if (traj.size() != times.size() || !traj.is_uniform())
    throw std::invalid_argument("duhamel_apply: trajectory must be sampled at every node t_m = mT/M");
  // trajectory storage is time-sorted; node order runs outward from t = 0
  auto node_state = [&](std::size_t m) -> const StatePair& {
    return cfg.direction > 0 ? traj.states()[m] : traj.states()[cfg.M - m];
  };
  for (std::size_t m = 0; m <= cfg.M; ++m) {
    double tt = cfg.direction > 0 ? traj.times()[m] : traj.times()[cfg.M - m];
    if (std::abs(tt - times[m]) > 1e-9 * cfg.T)
      throw std::invalid_argument("duhamel_apply: trajectory must be sampled at every node t_m = mT/M");
  }

  Engine eng(g, cfg);
  const std::size_t n = g.size();
  const auto u0 = spectrum_of(z0.u), v0 = spectrum_of(z0.v);
  const double h = cfg.direction * cfg.dt();
  Spectrum Sa(n), Sb(n), ga(n), gb(n), pa(n), pb(n), wa(n), wb(n);
  std::vector<SpectralSample> out;
  for (std::size_t m = 0; m <= cfg.M; ++m) {
    eng.set_time(times[m]);
    auto F = eng.forcing(spectrum_of(node_state(m).u));
    eng.pull_back(F, ga, gb);
    if (m > 0)
      for (std::size_t i = 0; i < n; ++i) {
        Sa[i] += 0.5 * h * (pa[i] + ga[i]);
        Sb[i] += 0.5 * h * (pb[i] + gb[i]);
      }
    std::swap(pa, ga);
    std::swap(pb, gb);
    for (std::size_t i = 0; i < n; ++i) {
      wa[i] = u0[i] - Sa[i];
      wb[i] = v0[i] - Sb[i];
    }
    SpectralSample s{times[m], Spectrum(n), Spectrum(n)};
    eng.group(wa, wb, s.u, s.v);
    out.push_back(std::move(s));
  }
  return build_trajectory(g, out);
}

PicardResult picard_solve(const StatePair& z0, const SolverConfig& cfg, const WindowBank& bank) {
  validate(cfg);
  const Grid& g = z0.grid();
  require_same_grid(g, bank.grid(), "picard_solve");
  const std::size_t n = g.size(), nodes = cfg.M + 1, nstride = norm_stride(cfg);
  const auto times = node_times(cfg);
  const double h = cfg.direction * cfg.dt();
  Engine eng(g, cfg);
  const auto u0 = spectrum_of(z0.u), v0 = spectrum_of(z0.v);

  FixedPointReport rep;
  std::vector<Spectrum> U(nodes), Fprev(nodes);
  std::vector<SpectralSample> samples, lin_norm_nodes;
  for (std::size_t m = 0; m < nodes; ++m) {
    eng.set_time(times[m]);
    Spectrum a(n), b(n);
    eng.group(u0, v0, a, b);
    U[m] = a;
    if (m % cfg.sample_every == 0) samples.push_back({times[m], a, b});
    if (m % nstride == 0) lin_norm_nodes.push_back({times[m], std::move(a), std::move(b)});
  }
  rep.epsilon = weighted_norm(g, std::move(lin_norm_nodes), cfg, bank);
  rep.iterate_norms.push_back(rep.epsilon);

  Spectrum Sa(n), Sb(n), dSa(n), dSb(n), ga(n), gb(n), pa(n), pb(n), dga(n), dgb(n), dpa(n), dpb(n);
  Spectrum wa(n), wb(n), za(n), zb(n), da(n), db(n), dF(n);
  double prev_delta = -1.0;
  for (std::size_t k = 0; k < cfg.K_max; ++k) {
    std::fill(Sa.begin(), Sa.end(), cplx(0.0));
    std::fill(Sb.begin(), Sb.end(), cplx(0.0));
    std::fill(dSa.begin(), dSa.end(), cplx(0.0));
    std::fill(dSb.begin(), dSb.end(), cplx(0.0));
    std::vector<SpectralSample> delta_nodes, iter_nodes, new_samples;
    double sum_delta = 0.0, sum_state = 0.0;
    for (std::size_t m = 0; m < nodes; ++m) {
      eng.set_time(times[m]);
      Spectrum F = eng.forcing(U[m]);
      // differences of forcings, not of trajectories, keep the ratios above round-off
      if (k == 0) {
        dF = F;
      } else {
        for (std::size_t i = 0; i < n; ++i) dF[i] = F[i] - Fprev[m][i];
      }
      eng.pull_back(F, ga, gb);
      eng.pull_back(dF, dga, dgb);
      Fprev[m] = std::move(F);
      if (m > 0)
        for (std::size_t i = 0; i < n; ++i) {
          Sa[i] += 0.5 * h * (pa[i] + ga[i]);
          Sb[i] += 0.5 * h * (pb[i] + gb[i]);
          dSa[i] += 0.5 * h * (dpa[i] + dga[i]);
          dSb[i] += 0.5 * h * (dpb[i] + dgb[i]);
        }
      std::swap(pa, ga);
      std::swap(pb, gb);
      std::swap(dpa, dga);
      std::swap(dpb, dgb);
      for (std::size_t i = 0; i < n; ++i) {
        wa[i] = u0[i] - Sa[i];
        wb[i] = v0[i] - Sb[i];
      }
      eng.group(wa, wb, za, zb);
      eng.group(dSa, dSb, da, db);
      for (std::size_t i = 0; i < n; ++i) {
        da[i] = -da[i];
        db[i] = -db[i];
      }
      U[m] = za;
      sum_delta += spectral_l2_sq(g, da) + spectral_l2_sq(g, db);
      sum_state += spectral_l2_sq(g, za) + spectral_l2_sq(g, zb);
      if (m % cfg.sample_every == 0) new_samples.push_back({times[m], za, zb});
      if (m % nstride == 0) {
        delta_nodes.push_back({times[m], da, db});
        iter_nodes.push_back({times[m], za, zb});
      }
    }
    samples = std::move(new_samples);
    rep.iterations = k + 1;
    const double rel = sum_delta == 0.0 ? 0.0 : std::sqrt(sum_delta / sum_state);
    rep.relative_changes.push_back(rel);
    const double delta = weighted_norm(g, std::move(delta_nodes), cfg, bank);
    if (prev_delta >= 0.0) {
      double ratio = 0.0;
      if (prev_delta > 0.0) ratio = delta / prev_delta;
      else if (delta > 0.0) ratio = std::numeric_limits<double>::infinity();
      rep.contraction_ratios.push_back(ratio);
    }
    prev_delta = delta;
    rep.iterate_norms.push_back(weighted_norm(g, std::move(iter_nodes), cfg, bank));
    if (!std::isfinite(rel)) break;
    if (rel < cfg.tol_fixed_point) {
      rep.converged = rep.contraction_ratios.empty() || rep.contraction_ratios.back() < 1.0;
      break;
    }
  }
  rep.final_norm = rep.iterate_norms.back();
  rep.within_ball = rep.final_norm <= 2.0 * rep.epsilon;
  return {build_trajectory(g, samples), rep};
}

Trajectory reference_integrate(const StatePair& z0, const SolverConfig& cfg) {
  validate(cfg);
  const Grid& g = z0.grid();
  const std::size_t n = g.size();
  Engine eng(g, cfg);
  const auto times = node_times(cfg);
  const double spacing = cfg.T * double(cfg.sample_every) / double(cfg.M);
  const auto sub = static_cast<std::size_t>(std::ceil(spacing / cfg.dt_ref - 1e-9));
  const double h = cfg.direction * spacing / double(sub);

  Spectrum Wa = spectrum_of(z0.u), Wb = spectrum_of(z0.v);
  double init_max = 0.0;
  for (double x : samples_of(z0.u)) init_max = std::max(init_max, std::abs(x));
  for (double x : samples_of(z0.v)) init_max = std::max(init_max, std::abs(x));

  Spectrum u(n), ga(n), gb(n), Ta(n), Tb(n);
  std::array<Spectrum, 4> ka, kb;
  for (auto& x : ka) x.resize(n);
  for (auto& x : kb) x.resize(n);
  // G(t, W) = -B(-t)[0, f(u)], u the first component of B(t) W
  auto rhs = [&](double t, const Spectrum& a, const Spectrum& b, Spectrum& oa, Spectrum& ob) {
    eng.set_time(t);
    eng.group_u(a, b, u);
    auto F = eng.forcing(u);
    eng.pull_back(F, oa, ob);
    for (std::size_t i = 0; i < n; ++i) {
      oa[i] = -oa[i];
      ob[i] = -ob[i];
    }
  };

  std::vector<SpectralSample> out;
  auto emit = [&](double t) {
    eng.set_time(t);
    SpectralSample s{t, Spectrum(n), Spectrum(n)};
    eng.group(Wa, Wb, s.u, s.v);
    double peak = 0.0;
    std::vector<double> phys(n);
    detail::inverse_real(g, s.u, phys);
    for (double x : phys) peak = std::max(peak, std::abs(x));
    if (!(peak <= 1e6 * init_max) && init_max > 0.0) {
      throw std::runtime_error("reference_integrate: instability at t = " + fmt(t) + ", max|u| = " +
                               fmt(peak) + " exceeds 1e6 x initial max " + fmt(init_max));
    }
    out.push_back(std::move(s));
  };

  emit(times[0]);
  double t = 0.0;
  for (std::size_t m = cfg.sample_every; m <= cfg.M; m += cfg.sample_every) {
    for (std::size_t j = 0; j < sub; ++j) {
      rhs(t, Wa, Wb, ka[0], kb[0]);
      for (std::size_t i = 0; i < n; ++i) {
        Ta[i] = Wa[i] + 0.5 * h * ka[0][i];
        Tb[i] = Wb[i] + 0.5 * h * kb[0][i];
      }
      rhs(t + 0.5 * h, Ta, Tb, ka[1], kb[1]);
      for (std::size_t i = 0; i < n; ++i) {
        Ta[i] = Wa[i] + 0.5 * h * ka[1][i];
        Tb[i] = Wb[i] + 0.5 * h * kb[1][i];
      }
      rhs(t + 0.5 * h, Ta, Tb, ka[2], kb[2]);
      for (std::size_t i = 0; i < n; ++i) {
        Ta[i] = Wa[i] + h * ka[2][i];
        Tb[i] = Wb[i] + h * kb[2][i];
      }
      rhs(t + h, Ta, Tb, ka[3], kb[3]);
      for (std::size_t i = 0; i < n; ++i) {
        Wa[i] += h / 6.0 * (ka[0][i] + 2.0 * ka[1][i] + 2.0 * ka[2][i] + ka[3][i]);
        Wb[i] += h / 6.0 * (kb[0][i] + 2.0 * kb[1][i] + 2.0 * kb[2][i] + kb[3][i]);
      }
      t = times[m - cfg.sample_every] + double(j + 1) * h;
    }
    t = times[m];
    emit(t);
  }
  return build_trajectory(g, out);
}

std::vector<double> residual_fourth_order(const Trajectory& traj, std::optional<int> lambda) {
  if (traj.size() < 3) throw std::invalid_argument("residual_fourth_order: need at least 3 samples");
  const double dt = traj.spacing();
  const Grid& g = traj.grid();
  const auto xi = g.abs_frequencies();
  const std::size_t n = g.size();
  std::vector<Spectrum> U;
  U.reserve(traj.size());
  for (const auto& z : traj.states()) U.push_back(spectrum_of(z.u));
  std::vector<double> out;
  Spectrum R(n);
  for (std::size_t i = 1; i + 1 < U.size(); ++i) {
    Spectrum F = lambda ? detail::power_spectrum(g, U[i], *lambda) : Spectrum(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double k2 = xi[m] * xi[m];
      const cplx utt = (U[i + 1][m] - 2.0 * U[i][m] + U[i - 1][m]) / (dt * dt);
      R[m] = utt + k2 * U[i][m] + k2 * k2 * U[i][m] - k2 * F[m];
    }
    out.push_back(std::sqrt(spectral_l2_sq(g, R)));
  }
  return out;
}

ScatteringResult scattering_state(const Trajectory& traj, int direction, const SolverConfig& cfg,
                                  const WindowBank& bank) {
  const ProblemParams& pp = cfg.pp;
  const double al = pp.alpha() * pp.lambda;
  if (!(al > 1.0)) {
    throw std::invalid_argument("scattering_state: alpha*lambda = " + fmt(al) +
                                " <= 1, the forcing tail is not integrable");
  }
  if (direction != 1 && direction != -1) throw std::invalid_argument("scattering_state: direction must be +1 or -1");
  auto times = traj.times();
  const std::size_t origin = direction > 0 ? 0 : traj.size() - 1;
  if (std::abs(times[origin]) > 1e-12 || traj.size() < 2)
    throw std::invalid_argument("scattering_state: trajectory must start at t = 0 and extend in the chosen direction");
  const StatePair& z0 = traj.states()[origin];
  if (!cfg.nonlinear) return {z0, 0.0, 0.0};

  const Grid& g = traj.grid();
  const std::size_t n = g.size();
  Engine eng(g, cfg);
  const ModParams dual{pp.p_conjugate(), pp.q, pp.s};
  Spectrum Ia(n), Ib(n), ga(n), gb(n), pa(n), pb(n);
  double csup = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = times[i];
    Spectrum F = eng.forcing(spectrum_of(traj.states()[i].u));
    eng.set_time(t);
    eng.pull_back(F, ga, gb);
    if (i > 0) {
      const double w = 0.5 * (t - times[i - 1]);
      for (std::size_t m = 0; m < n; ++m) {
        Ia[m] += w * (pa[m] + ga[m]);
        Ib[m] += w * (pb[m] + gb[m]);
      }
    }
    std::swap(pa, ga);
    std::swap(pb, gb);
    const double fn = modulation_norm(field_from_spectrum(g, std::move(F)), dual, bank);
    csup = std::max(csup, std::pow(1.0 + std::abs(t), al) * fn);
  }
  // Ia, Ib integrate over increasing time; backwards the integral from 0 to -T flips sign
  auto a = spectrum_of(z0.u), b = spectrum_of(z0.v);
  const double sgn = direction > 0 ? 1.0 : -1.0;
  for (std::size_t m = 0; m < n; ++m) {
    a[m] -= sgn * Ia[m];
    b[m] -= sgn * Ib[m];
  }
  const double T = std::abs(times[direction > 0 ? traj.size() - 1 : 0]);
  ScatteringResult res{pair_from_spectra(g, std::move(a), std::move(b)), 0.0, csup};
  res.tail_bound = csup * std::pow(1.0 + T, 1.0 - al) / (al - 1.0);
  return res;
}

double sup_relative_difference(const Trajectory& z, const Trajectory& w) {
  if (z.size() != w.size()) throw std::invalid_argument("sup_relative_difference: sample count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::abs(z.times()[i] - w.times()[i]) > 1e-9 * (1.0 + std::abs(w.times()[i])))
      throw std::invalid_argument("sup_relative_difference: sample times differ");
    const auto& a = z.states()[i];
    const auto& b = w.states()[i];
    const Grid& g = a.grid();
    Spectrum du = spectrum_of(a.u), dv = spectrum_of(a.v);
    const Spectrum bu = spectrum_of(b.u), bv = spectrum_of(b.v);
    for (std::size_t m = 0; m < du.size(); ++m) {
      du[m] -= bu[m];
      dv[m] -= bv[m];
    }
    num = std::max(num, std::sqrt(spectral_l2_sq(g, du) + spectral_l2_sq(g, dv)));
    den = std::max(den, std::sqrt(spectral_l2_sq(g, bu) + spectral_l2_sq(g, bv)));
  }
  return den == 0.0 ? num : num / den;
}

}  // namespace bqlab
