#include "dnlens/probe/wavefront.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "json.hpp"

namespace dnlens::probe {

namespace {

struct Coarse {
  std::size_t ni = 0, nj = 0;
  std::vector<double> t, s;  // block centers
  std::vector<double> v;     // ni x nj
};

std::vector<double> gaussian_kernel(double sigma_cells) {
  const auto r = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_cells));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -r; i <= r; ++i) {
    const double q = static_cast<double>(i) / sigma_cells;
    k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * q * q);
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& x : k) x /= sum;
  return k;
}

// Three-point parabolic offset of the maximum, in cells.
double parabolic(double l, double c, double r) {
  const double den = l - 2.0 * c + r;
  if (!(den < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
}

// Rows and columns of the trace around a center, with values copied out.
struct Patch {
  std::vector<double> t;   // row times
  std::vector<double> ds;  // column offsets from s_center
  std::vector<double> v;   // rows x cols
  double s_center = 0.0;
};

Patch cut_patch(const wave::SpaceTimeSamples& tr, std::size_t i_lo, std::size_t i_hi, double t1, double s1,
                double half) {
  Patch p;
  p.s_center = s1;
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < tr.ns(); ++j) {
    const double d = std::remainder(tr.s()[j] - s1, tr.perimeter());
    if (std::abs(d) <= half) {
      cols.push_back(j);
      p.ds.push_back(d);
    }
  }
  for (std::size_t i = i_lo; i < i_hi; ++i) {
    if (std::abs(tr.t(i) - t1) > half) continue;
    p.t.push_back(tr.t(i));
    const double* row = tr.row(i);
    for (std::size_t c : cols) p.v.push_back(row[c]);
  }
  return p;
}

// One-dimensional DFT of `n` strided complex values in place, by table lookup.
void dft(std::complex<double>* x, std::size_t n, std::size_t stride, int sign, std::vector<std::complex<double>>& buf) {
  buf.assign(n, 0.0);
  std::vector<std::complex<double>> roots(n);
  for (std::size_t k = 0; k < n; ++k) {
    roots[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t q = 0; q < n; ++q) {
    std::complex<double> acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) acc += x[b * stride] * roots[(q * b) % n];
    buf[q] = acc;
  }
  for (std::size_t q = 0; q < n; ++q) x[q * stride] = buf[q];
}

// Divides the patch by sqrt(tau^2 - c^2 xi^2) in the Fourier domain; components
// near or beyond glancing are dropped.
void deconvolve_patch(Patch& p, double dt, double ds, double h, double c) {
  const std::size_t M = p.t.size(), N = p.ds.size();
  std::vector<std::complex<double>> a(p.v.begin(), p.v.end()), buf;
  for (std::size_t i = 0; i < M; ++i) dft(a.data() + i * N, N, 1, -1, buf);
  for (std::size_t j = 0; j < N; ++j) dft(a.data() + j, M, N, -1, buf);
  auto freq = [](std::size_t k, std::size_t n, double step) {
    const double kk = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    return 2.0 * std::numbers::pi * kk / (static_cast<double>(n) * step);
  };
  for (std::size_t i = 0; i < M; ++i) {
    const double tau = h * freq(i, M, dt);
    for (std::size_t j = 0; j < N; ++j) {
      const double xi = h * freq(j, N, ds);
      const double v = tau * tau - c * c * xi * xi;
      a[i * N + j] = v > 0.02 ? a[i * N + j] / std::sqrt(v) : 0.0;
    }
  }
  for (std::size_t j = 0; j < N; ++j) dft(a.data() + j, M, N, 1, buf);
  for (std::size_t i = 0; i < M; ++i) dft(a.data() + i * N, N, 1, 1, buf);
  const double scale = 1.0 / static_cast<double>(M * N);
  for (std::size_t k = 0; k < a.size(); ++k) p.v[k] = a[k].real() * scale;
}

// Power centroid (t, s offset) of a patch.
std::pair<double, double> centroid(const Patch& p) {
  const std::size_t N = p.ds.size();
  double w = 0.0, wt = 0.0, ws = 0.0;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double e = p.v[i * N + j] * p.v[i * N + j];
      w += e;
      wt += e * p.t[i];
      ws += e * p.ds[j];
    }
  }
  if (!(w > 0.0)) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  return {wt / w, ws / w};
}

double gabor_xi(const Patch& p, double t1, double s_off, double h, const DetectionOptions& opt) {
  const double sq = std::sqrt(h);
  const double half = opt.gabor_half_width * sq, sig = opt.gabor_sigma * sq;
  const std::size_t N = p.ds.size();
  std::vector<std::complex<double>> S(N, 0.0);
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const double dt = p.t[i] - t1;
    if (std::abs(dt) > half) continue;
    const std::complex<double> ph = std::polar(std::exp(-0.5 * dt * dt / (sig * sig)), p.t[i] / h);
    for (std::size_t j = 0; j < N; ++j) S[j] += ph * p.v[i * N + j];
  }
  std::vector<double> d(N);
  for (std::size_t j = 0; j < N; ++j) {
    d[j] = p.ds[j] - s_off;
    S[j] *= std::abs(d[j]) <= half ? std::exp(-0.5 * d[j] * d[j] / (sig * sig)) : 0.0;
  }
  auto power = [&](double k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) acc += S[j] * std::polar(1.0, -k * d[j] / h);
    return std::norm(acc);
  };
  const double step = 0.005;
  const auto nk = static_cast<std::size_t>(std::llround(2.0 * opt.xi_max / step));
  std::vector<double> pw(nk + 1);
  std::size_t best = 0;
  for (std::size_t q = 0; q <= nk; ++q) {
    pw[q] = power(-opt.xi_max + step * static_cast<double>(q));
    if (pw[q] > pw[best]) best = q;
  }
  double off = 0.0;
  if (best > 0 && best < nk) off = parabolic(pw[best - 1], pw[best], pw[best + 1]);
  return -opt.xi_max + step * (static_cast<double>(best) + off);
}

void refine(const wave::SpaceTimeSamples& tr, std::size_t i_lo, std::size_t i_hi, double h,
            const DetectionOptions& opt, WavefrontDetection& d) {
  const double sq = std::sqrt(h);
  const double half = std::max(opt.refine_half_width, opt.gabor_half_width) * sq;
  Patch p = cut_patch(tr, i_lo, i_hi, d.t1, d.s1, half);
  if (p.t.size() < 4 || p.ds.size() < 4) {
    d.xi = gabor_xi(p, d.t1, 0.0, h, opt);
    return;
  }
  if (opt.deconvolve) {
    for (int pass = 0; pass < 2; ++pass) {
      deconvolve_patch(p, tr.dt(), tr.ds(), h, opt.boundary_speed);
      const auto [tc, sc] = centroid(p);
      if (!std::isfinite(tc)) break;
      d.t1 = tc;
      d.s1 = std::fmod(p.s_center + sc + 2.0 * tr.perimeter(), tr.perimeter());
      p = cut_patch(tr, i_lo, i_hi, d.t1, d.s1, half);
      if (p.t.size() < 4 || p.ds.size() < 4) break;
    }
    if (p.t.size() >= 4 && p.ds.size() >= 4) deconvolve_patch(p, tr.dt(), tr.ds(), h, opt.boundary_speed);
  }
  d.xi = gabor_xi(p, d.t1, 0.0, h, opt);
}

}  // namespace

std::vector<WavefrontDetection> locate_wavefront(const wave::SpaceTimeSamples& tr, double t_lo, double h, double t_hi,
                                                 const DetectionOptions& opt) {
  std::vector<WavefrontDetection> out;
  if (tr.nt() == 0 || tr.ns() == 0) return out;
  t_hi = std::min(t_hi, tr.t_end());
  std::size_t i_lo = 0;
  while (i_lo < tr.nt() && tr.t(i_lo) <= t_lo) ++i_lo;
  std::size_t i_hi = i_lo;
  while (i_hi < tr.nt() && tr.t(i_hi) <= t_hi) ++i_hi;
  if (i_hi <= i_lo) return out;

  const double sq = std::sqrt(h);
  const double sigma = opt.smoothing * sq;
  const auto bt = std::max<std::size_t>(1, static_cast<std::size_t>(sigma / (4.0 * tr.dt())));
  const auto bs = std::max<std::size_t>(1, static_cast<std::size_t>(sigma / (4.0 * tr.ds())));

  // Block means of |Lambda f|^2.
  Coarse cg;
  cg.ni = (i_hi - i_lo + bt - 1) / bt;
  cg.nj = std::max<std::size_t>(1, tr.ns() / bs);
  cg.t.resize(cg.ni);
  cg.s.resize(cg.nj);
  cg.v.assign(cg.ni * cg.nj, 0.0);
  std::vector<std::size_t> jstart(cg.nj + 1);
  for (std::size_t J = 0; J <= cg.nj; ++J) jstart[J] = J * tr.ns() / cg.nj;
  for (std::size_t J = 0; J < cg.nj; ++J) {
    const std::size_t a = jstart[J], b = jstart[J + 1];
    cg.s[J] = tr.s()[a] + 0.5 * static_cast<double>(b - a - 1) * tr.ds();
  }
  for (std::size_t I = 0; I < cg.ni; ++I) {
    const std::size_t a = i_lo + I * bt, b = std::min(i_hi, a + bt);
    cg.t[I] = 0.5 * (tr.t(a) + tr.t(b - 1));
    for (std::size_t i = a; i < b; ++i) {
      const double* row = tr.row(i);
      for (std::size_t J = 0; J < cg.nj; ++J) {
        double acc = 0.0;
        for (std::size_t j = jstart[J]; j < jstart[J + 1]; ++j) acc += row[j] * row[j];
        cg.v[I * cg.nj + J] += acc / static_cast<double>((b - a) * (jstart[J + 1] - jstart[J]));
      }
    }
  }

  // Separable Gaussian: truncated in t, periodic in s.
  const double cell_t = static_cast<double>(bt) * tr.dt();
  const double cell_s = tr.perimeter() / static_cast<double>(cg.nj);
  const std::vector<double> kt = gaussian_kernel(sigma / cell_t), ks = gaussian_kernel(sigma / cell_s);
  const auto rt = static_cast<std::ptrdiff_t>(kt.size() / 2), rs = static_cast<std::ptrdiff_t>(ks.size() / 2);
  const auto NI = static_cast<std::ptrdiff_t>(cg.ni), NJ = static_cast<std::ptrdiff_t>(cg.nj);
  std::vector<double> tmp(cg.v.size(), 0.0), sm(cg.v.size(), 0.0);
  for (std::ptrdiff_t I = 0; I < NI; ++I) {
    for (std::ptrdiff_t J = 0; J < NJ; ++J) {
      double acc = 0.0;
      for (std::ptrdiff_t q = -rs; q <= rs; ++q) {
        const std::ptrdiff_t jj = ((J + q) % NJ + NJ) % NJ;
        acc += ks[static_cast<std::size_t>(q + rs)] * cg.v[static_cast<std::size_t>(I * NJ + jj)];
      }
      tmp[static_cast<std::size_t>(I * NJ + J)] = acc;
    }
  }
  for (std::ptrdiff_t I = 0; I < NI; ++I) {
    for (std::ptrdiff_t J = 0; J < NJ; ++J) {
      double acc = 0.0;
      for (std::ptrdiff_t q = -rt; q <= rt; ++q) {
        const std::ptrdiff_t ii = I + q;
        if (ii < 0 || ii >= NI) continue;
        acc += kt[static_cast<std::size_t>(q + rt)] * tmp[static_cast<std::size_t>(ii * NJ + J)];
      }
      sm[static_cast<std::size_t>(I * NJ + J)] = acc;
    }
  }

  std::vector<double> sorted = sm;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double vmax = *std::max_element(sm.begin(), sm.end());
  if (!(vmax > 0.0)) return out;
  double ref = 0.0;
  for (std::size_t i = 0; i < i_lo; ++i) {
    const double* row = tr.row(i);
    for (std::size_t j = 0; j < tr.ns(); ++j) ref = std::max(ref, row[j] * row[j]);
  }
  const double floor =
      std::max({opt.median_factor * median, opt.relative_floor * vmax, opt.reference_floor * ref});

  auto at = [&](std::ptrdiff_t I, std::ptrdiff_t J) {
    return sm[static_cast<std::size_t>(I * NJ + ((J % NJ) + NJ) % NJ)];
  };
  std::vector<WavefrontDetection> cand;
  for (std::ptrdiff_t I = 0; I < NI; ++I) {
    for (std::ptrdiff_t J = 0; J < NJ; ++J) {
      const double v = at(I, J);
      if (!(v > floor)) continue;
      bool peak = true;
      for (std::ptrdiff_t a = -1; a <= 1 && peak; ++a) {
        for (std::ptrdiff_t b = -1; b <= 1 && peak; ++b) {
          if ((a == 0 && b == 0) || I + a < 0 || I + a >= NI) continue;
          const double w = at(I + a, J + b);
          // Ties go to the earlier cell.
          if (w > v || (w == v && (a < 0 || (a == 0 && b < 0)))) peak = false;
        }
      }
      if (!peak) continue;
      WavefrontDetection d;
      double oi = 0.0;
      if (I > 0 && I + 1 < NI) oi = parabolic(at(I - 1, J), v, at(I + 1, J));
      const double oj = parabolic(at(I, J - 1), v, at(I, J + 1));
      d.t1 = cg.t[static_cast<std::size_t>(I)] + oi * cell_t;
      d.s1 = std::fmod(cg.s[static_cast<std::size_t>(J)] + oj * cell_s + tr.perimeter(), tr.perimeter());
      d.amplitude = v;
      d.window_lo = t_lo;
      d.window_hi = t_hi;
      cand.push_back(d);
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.amplitude > b.amplitude; });
  const double merge = opt.merge_radius * sq;
  for (const WavefrontDetection& c : cand) {
    bool keep = true;
    for (const WavefrontDetection& k : out) {
      const double dt = c.t1 - k.t1, ds = std::remainder(c.s1 - k.s1, tr.perimeter());
      if (dt * dt + ds * ds < merge * merge) keep = false;
    }
    if (keep) out.push_back(c);
  }
  for (WavefrontDetection& d : out) refine(tr, i_lo, i_hi, h, opt, d);
  return out;
}

std::string detections_to_json(const std::vector<WavefrontDetection>& d) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["detections"] = nlohmann::json::array();
  for (const auto& x : d) {
    j["detections"].push_back({{"t1", x.t1},
                               {"s1", x.s1},
                               {"xi", x.xi},
                               {"amplitude", x.amplitude},
                               {"window", {x.window_lo, x.window_hi}}});
  }
  return j.dump(2);
}

}  // namespace dnlens::probe
