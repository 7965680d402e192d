#include "dnlens/wave/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "dnlens/error.hpp"
#include "dnlens/hash.hpp"
#include "json.hpp"

namespace dnlens::wave {

namespace {

static_assert(std::endian::native == std::endian::little, "sample files assume a little-endian host");

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw Error("cannot open for writing: " + path);
  return os;
}

}  // namespace

void write_samples(const std::string& base, const SpaceTimeSamples& samples, const SampleFileInfo& info) {
  {
    auto os = open_out(base + ".bin", std::ios::out | std::ios::binary);
    os.write(reinterpret_cast<const char*>(samples.data().data()),
             static_cast<std::streamsize>(samples.data().size() * sizeof(double)));
    if (!os) throw Error("write failed: " + base + ".bin");
  }
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = info.kind;
  j["dtype"] = "float64";
  j["byte_order"] = "little";
  j["layout"] = "row-major, rows = time";
  j["dims"] = {samples.nt(), samples.ns()};
  j["dt"] = samples.dt();
  j["ds"] = samples.ds();
  j["perimeter"] = samples.perimeter();
  j["dx"] = info.dx;
  j["T"] = info.T;
  j["speed_hash"] = hex64(info.speed_hash);
  auto os = open_out(base + ".json");
  os << j.dump(2) << "\n";
}

SpaceTimeSamples read_samples(const std::string& base, SampleFileInfo* info) {
  std::ifstream js(base + ".json");
  if (!js) throw PreconditionError("missing sidecar: " + base + ".json");
  const nlohmann::json j = nlohmann::json::parse(js);
  const auto nt = j.at("dims").at(0).get<std::size_t>();
  const auto ns = j.at("dims").at(1).get<std::size_t>();
  const double perimeter = j.at("perimeter").get<double>();
  std::vector<double> s(ns);
  for (std::size_t k = 0; k < ns; ++k) s[k] = perimeter * static_cast<double>(k) / static_cast<double>(ns);
  SpaceTimeSamples out(nt, j.at("dt").get<double>(), std::move(s), perimeter);
  std::ifstream bs(base + ".bin", std::ios::binary);
  if (!bs) throw PreconditionError("missing data file: " + base + ".bin");
  bs.read(reinterpret_cast<char*>(out.data().data()), static_cast<std::streamsize>(nt * ns * sizeof(double)));
  if (bs.gcount() != static_cast<std::streamsize>(nt * ns * sizeof(double))) {
    throw PreconditionError("truncated data file: " + base + ".bin");
  }
  if (info) {
    info->kind = j.value("kind", "");
    info->dx = j.value("dx", 0.0);
    info->T = j.value("T", 0.0);
    info->speed_hash = std::stoull(j.value("speed_hash", std::string("0")), nullptr, 16);
  }
  return out;
}

void write_trace(const std::string& base, const DNTrace& trace) {
  write_samples(base, trace, {"trace", trace.dx, trace.t_end(), trace.speed_hash});
}

void write_signal(const std::string& base, const BoundarySignal& signal, double dx) {
  write_samples(base, signal, {"signal", dx, signal.t_end(), 0});
}

void write_samples_csv(const std::string& path, const SpaceTimeSamples& samples) {
  auto os = open_out(path);
  os << "t,s,value\n";
  char buf[128];
  for (std::size_t i = 0; i < samples.nt(); ++i) {
    for (std::size_t j = 0; j < samples.ns(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", samples.t(i), samples.s()[j], samples.at(i, j));
      os << buf;
    }
  }
}

}  // namespace dnlens::wave
