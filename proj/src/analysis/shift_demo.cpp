#include "dnlens/analysis/shift_demo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "dnlens/error.hpp"

namespace dnlens::analysis {

namespace {

double packet(double x, double sigma, double omega, bool modulated) {
  const double env = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) * std::exp(-x * x / (4.0 * sigma * sigma));
  return modulated ? std::numbers::sqrt2 * env * std::cos(omega * x) : env;
}

}  // namespace

std::vector<ShiftRow> shift_norm_demo(double c1, double c2, const std::vector<double>& sigmas, bool modulated,
                                      const ShiftDemoOptions& opt) {
  const double d = c1 - c2;
  if (modulated && d == 0.0) throw PreconditionError("modulation frequency pi/(c1 - c2) needs c1 != c2");
  const double omega = modulated ? std::numbers::pi / std::abs(d) : 0.0;
  const double period = modulated ? 2.0 * std::numbers::pi / omega : 0.0;
  if (modulated && opt.step > 0.0 && opt.step > period / 16.0) {
    throw PreconditionError("grid too coarse for the modulation frequency: step " + std::to_string(opt.step) +
                            " exceeds period/16 = " + std::to_string(period / 16.0));
  }
  std::vector<ShiftRow> out;
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) throw PreconditionError("envelope widths must be positive");
    double step = opt.step > 0.0 ? opt.step : sigma / 20.0;
    if (modulated && opt.step <= 0.0) step = std::min(step, period / 32.0);
    const double lo = std::min(c1, c2) - opt.tail * sigma, hi = std::max(c1, c2) + opt.tail * sigma;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double x = lo + static_cast<double>(k) * step;
      const double a = packet(x - c1, sigma, omega, modulated), b = packet(x - c2, sigma, omega, modulated);
      diff += (a - b) * (a - b);
      norm += a * a;
    }
    out.push_back({sigma, modulated, std::sqrt(diff / norm)});
  }
  return out;
}

void write_shift_csv(std::ostream& os, const std::vector<ShiftRow>& rows) {
  const auto old = os.precision(17);
  os << "sigma,modulated,ratio\n";
  for (const ShiftRow& r : rows) os << r.sigma << ',' << (r.modulated ? 1 : 0) << ',' << r.ratio << '\n';
  os.precision(old);
}

}  // namespace dnlens::analysis
