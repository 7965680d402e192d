#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/speed.hpp"
#include "dnlens/wave/samples.hpp"

namespace dnlens::wave {

inline constexpr double kThetaMin = 0.2;
inline constexpr double kCflLimit = 0.5;

// Link from an interior node to the boundary along one grid direction.
struct CutLink {
  std::size_t node = 0;
  double theta = 1.0;       // fraction of dx to the boundary
  double theta_used = 1.0;  // max(theta, kThetaMin)
  double s = 0.0;           // arclength of the crossing
};

// Interpolation tap for the one-sided normal derivative. Exterior taps take the
// boundary value at s_exterior.
struct Tap {
  std::size_t node = 0;
  double weight = 0.0;
  bool exterior = false;
  double s_exterior = 0.0;
};

struct DnStencil {
  double s = 0.0;
  Vec2 xb;
  Vec2 normal;
  double depth = 0.0;
  std::array<Tap, 4> near{};  // bilinear taps at xb - depth * normal
  std::array<Tap, 4> far{};   // at xb - 2 depth * normal
};

struct RowRun {
  std::size_t begin = 0;  // node index, inclusive
  std::size_t end = 0;    // exclusive
};

// Uniform Cartesian discretization of the domain and of (0, T). Nodes strictly
// inside carry unknowns; all others hold zero. On a rectangle the boundary
// nodes lie on the grid and are reached by links of fraction 1.
class WaveGrid {
 public:
  static WaveGrid build(const geometry::Domain& domain, double dx, double dt, double T,
                        std::size_t trace_stride = 1);

  const geometry::Domain& domain() const { return domain_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  double T() const { return static_cast<double>(nsteps_) * dt_; }
  std::size_t nsteps() const { return nsteps_; }
  std::size_t trace_stride() const { return trace_stride_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t node_count() const { return nx_ * ny_; }
  Vec2 node(std::size_t k) const;
  Vec2 origin() const { return origin_; }
  bool interior(std::size_t k) const { return mask_[k] != 0; }
  std::size_t interior_count() const { return interior_count_; }

  const std::vector<RowRun>& runs() const { return runs_; }
  const std::vector<CutLink>& cuts() const { return cuts_; }
  const std::vector<DnStencil>& stencils() const { return stencils_; }
  const std::vector<double>& boundary_s() const { return boundary_s_; }
  double max_boundary_spacing() const;

  // Time/arclength layout shared by boundary signals and traces.
  SpaceTimeSamples layout() const;
  std::size_t trace_rows() const { return nsteps_ / trace_stride_ + 1; }

  double cfl_bound(const geometry::SpeedField& speed) const;
  // Throws CflViolation when dt exceeds 0.5 dx / max c.
  void check_cfl(const geometry::SpeedField& speed) const;

 private:
  geometry::Domain domain_;
  double dx_ = 0.0, dt_ = 0.0;
  std::size_t nsteps_ = 0, trace_stride_ = 1;
  std::size_t nx_ = 0, ny_ = 0;
  Vec2 origin_;
  std::vector<std::uint8_t> mask_;
  std::size_t interior_count_ = 0;
  std::vector<RowRun> runs_;
  std::vector<CutLink> cuts_;
  std::vector<DnStencil> stencils_;
  std::vector<double> boundary_s_;
};

}  // namespace dnlens::wave
