#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace bqlab::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, std::size_t N, int sign) {
    // the planner is not thread safe; execution with fftw_execute_dft is
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(n, N, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    std::size_t total = n == 1 ? N : N * N;
    std::vector<cplx> a(total), b(total);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan p = n == 1 ? fftw_plan_dft_1d(static_cast<int>(N), in, out, dir, flags)
                         : fftw_plan_dft_2d(static_cast<int>(N), static_cast<int>(N), in, out, dir, flags);
    if (p == nullptr) throw std::runtime_error("fftw planner failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void dft(int n, std::size_t N, const cplx* in, cplx* out, int sign) {
  fftw_plan p = cache().get(n, N, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace bqlab::detail
