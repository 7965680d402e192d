#include "dnlens/geometry/lens.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "dnlens/error.hpp"

namespace dnlens::geometry {

LensRecord lens_map(const Metric& metric, const BoundaryPhase& entry, const IntegratorOptions& opt) {
  if (entry.side != Side::inward) throw PreconditionError("lens map entry must point inward");
  const PhaseState start = boundary_phase_to_interior(metric, entry);
  GeodesicResult g = integrate_geodesic(metric, start, opt);

  LensRecord rec;
  rec.entry = entry;
  rec.entry.s = metric.domain.wrap(entry.s);
  rec.trapped = g.trapped;
  rec.length = g.length;
  if (g.exit) rec.exit = phase_to_boundary(metric, *g.exit, Side::outward);
  rec.path = std::move(g.path);
  return rec;
}

LensSweep lens_sweep(const Metric& metric, const std::vector<BoundaryPhase>& probes,
                     const IntegratorOptions& opt, unsigned jobs) {
  LensSweep out;
  const std::size_t n = probes.size();
  out.records.resize(n);
  out.errors.resize(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out.records[i] = lens_map(metric, probes[i], opt);
      } catch (const Error& e) {
        out.records[i].entry = probes[i];
        out.records[i].length = std::numeric_limits<double>::quiet_NaN();
        out.errors[i] = e.what();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!out.errors[i].empty()) continue;
    if (out.records[i].trapped) {
      out.trapped.push_back(i);
    } else {
      out.T0_estimate = std::max(out.T0_estimate, out.records[i].length);
    }
  }
  return out;
}

void write_lens_csv(std::ostream& os, const LensSweep& sweep) {
  os << "s_in,mu_in,s_out,mu_out,length,trapped\n";
  char buf[512];
  for (std::size_t i = 0; i < sweep.records.size(); ++i) {
    const LensRecord& r = sweep.records[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double s_out = r.exit ? r.exit->s : nan;
    const double mu_out = r.exit ? r.exit->mu : nan;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.entry.s, r.entry.mu, s_out,
                  mu_out, r.length, r.trapped ? 1 : 0);
    os << buf;
  }
}

std::vector<BoundaryPhase> even_probes(const Domain& domain, std::size_t count, double mu) {
  std::vector<BoundaryPhase> v;
  v.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    v.push_back({domain.perimeter() * static_cast<double>(i) / static_cast<double>(count), mu, Side::inward});
  }
  return v;
}

}  // namespace dnlens::geometry
