#include "llgrid/density_io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "llgrid/errors.hpp"

namespace llgrid {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw FormatError("write failed for " + tmp);
    }
  }
  fs::rename(tmp, target);
}

std::string format_density(const Field& P) {
  const GridSpec& g = P.grid;
  std::string s = "llgrid v1 " + std::to_string(g.dim()) + " " + std::to_string(g.particles()) +
                  " " + std::to_string(g.points()) + " " + num(g.lo()) + " " + num(g.hi()) + "\n";
  s.reserve(s.size() + P.values.size() * 25);
  const std::size_t row = static_cast<std::size_t>(g.points());
  for (std::size_t k = 0; k < P.values.size(); ++k) {
    s += num(P.values[k]);
    s += (k + 1) % row == 0 ? '\n' : ' ';
  }
  return s;
}

void write_density(const std::string& path, const Field& P) { atomic_write(path, format_density(P)); }

Field read_field(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string magic, version;
  int d = 0, N = 0, M = 0;
  double a = 0, b = 0;
  if (!(in >> magic >> version >> d >> N >> M >> a >> b) || magic != "llgrid" || version != "v1")
    throw FormatError(path + ": expected header 'llgrid v1 d N M a b'");
  GridSpec g(d, N, M, a, b);
  Field f(g);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (!(in >> f.values[k]))
      throw FormatError(path + ": expected " + std::to_string(f.values.size()) + " values, got " +
                        std::to_string(k));
    if (!(f.values[k] >= 0) || !std::isfinite(f.values[k]))
      throw FormatError(path + ": value " + std::to_string(k) + " is negative or not finite");
  }
  std::string extra;
  if (in >> extra) throw FormatError(path + ": trailing data after the last value");
  return f;
}

NBodyDensity read_density(const std::string& path) {
  Field f = read_field(path);
  const double total = f.integral();
  if (std::abs(total - 1.0) > 1e-10)
    throw FormatError(path + ": density integrates to " + num(total) + ", not 1");
  return NBodyDensity(f.grid, std::move(f.values), false);
}

void write_checkpoint(const std::string& prefix, const Checkpoint& c) {
  nlohmann::ordered_json j;
  j["eps"] = c.eps;
  j["iterations"] = c.iterations;
  j["energy"] = c.energy;
  j["marginal_residual"] = c.marginal_residual;
  j["config_hash"] = c.config_hash;
  j["potential"] = c.potential;
  j["density"] = std::filesystem::path(prefix + ".density").filename().string();
  write_density(prefix + ".density", c.density);
  atomic_write(prefix + ".json", j.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::string& prefix) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(prefix + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(prefix + ".json: " + e.what());
  }
  Checkpoint c{read_field(prefix + ".density"), 0.0, 0, 0.0, 0.0, {}, {}};
  try {
    c.eps = j.at("eps").get<double>();
    c.iterations = j.at("iterations").get<int>();
    c.energy = j.at("energy").get<double>();
    c.marginal_residual = j.at("marginal_residual").get<double>();
    c.config_hash = j.at("config_hash").get<std::string>();
    c.potential = j.value("potential", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(prefix + ".json: " + e.what());
  }
  return c;
}

}  // namespace llgrid
