#pragma once

#include <cstdint>
#include <string>

#include "dnlens/wave/samples.hpp"

namespace dnlens::wave {

struct SampleFileInfo {
  std::string kind;  // "trace" or "signal"
  double dx = 0.0;
  double T = 0.0;
  std::uint64_t speed_hash = 0;
};

// Writes `<base>.bin` (row-major little-endian float64, nt x ns) and `<base>.json`.
void write_samples(const std::string& base, const SpaceTimeSamples& samples, const SampleFileInfo& info);
SpaceTimeSamples read_samples(const std::string& base, SampleFileInfo* info = nullptr);

void write_trace(const std::string& base, const DNTrace& trace);
void write_signal(const std::string& base, const BoundarySignal& signal, double dx);

// Long format: t,s,value
void write_samples_csv(const std::string& path, const SpaceTimeSamples& samples);

}  // namespace dnlens::wave
