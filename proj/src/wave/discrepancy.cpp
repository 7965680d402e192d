#include "dnlens/wave/discrepancy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "dnlens/error.hpp"
#include "dnlens/wave/solver.hpp"

namespace dnlens::wave {

double difference_l2_squared(const SpaceTimeSamples& a, const SpaceTimeSamples& b, double t1, double t2,
                             const std::vector<bool>& mask) {
  if (!a.same_layout(b)) throw PreconditionError("traces have different layouts");
  if (!mask.empty() && mask.size() != a.ns()) throw PreconditionError("column mask size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.nt(); ++i) {
    const double t = a.t(i);
    if (t < t1 - 1e-12 * a.dt() || t > t2 + 1e-12 * a.dt()) continue;
    const double* ra = a.row(i);
    const double* rb = b.row(i);
    for (std::size_t j = 0; j < a.ns(); ++j) {
      if (!mask.empty() && !mask[j]) continue;
      const double d = ra[j] - rb[j];
      sum += d * d;
    }
  }
  return sum * a.dt() * a.ds();
}

DiscrepancyStats dn_discrepancy(const geometry::SpeedField& a, const geometry::SpeedField& b,
                                const std::vector<BoundarySignal>& probes, const WaveGrid& grid,
                                double t1, double t2, const std::vector<bool>& gamma2, unsigned jobs) {
  if (!(t1 >= 0.0) || !(t2 <= grid.T() + 1e-12) || !(t1 < t2)) {
    throw PreconditionError("discrepancy window must lie inside (0, T)");
  }
  DiscrepancyStats st;
  const std::size_t n = probes.size();
  st.ratios.resize(n);
  st.diff_norms.resize(n);
  st.h1_norms.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const DNTrace ta = solve_ibvp(a, probes[i], grid);
        const DNTrace tb = solve_ibvp(b, probes[i], grid);
        st.diff_norms[i] = std::sqrt(difference_l2_squared(ta, tb, t1, t2, gamma2));
        st.h1_norms[i] = probes[i].h1_norm();
        st.ratios[i] = st.h1_norms[i] > 0.0 ? st.diff_norms[i] / st.h1_norms[i] : 0.0;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (double r : st.ratios) st.max_ratio = std::max(st.max_ratio, r);
  return st;
}

}  // namespace dnlens::wave
