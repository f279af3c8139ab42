#include "llgrid/config.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "llgrid/errors.hpp"

namespace llgrid {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConstraintError("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConstraintError("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConstraintError("config: " + key + " expects true/false, got '" + v + "'");
}

std::vector<double> read_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConstraintError("config: cannot open marginal table " + path);
  std::vector<double> v;
  double x;
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::getline(in, tok);
      continue;
    }
    x = to_double("marginal.path", tok);
    v.push_back(x);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double("list", item));
  }
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "grid.d") d = static_cast<int>(to_int(key, v));
  else if (key == "grid.N") N = static_cast<int>(to_int(key, v));
  else if (key == "grid.M") M = static_cast<int>(to_int(key, v));
  else if (key == "grid.a") a = to_double(key, v);
  else if (key == "grid.b") b = to_double(key, v);
  else if (key == "grid.budget") budget = static_cast<std::size_t>(to_int(key, v));
  else if (key == "marginal") {
    if (v != "uniform" && v != "gaussian" && v != "table")
      throw ConstraintError("config: marginal must be uniform, gaussian or table");
    marginal = v;
  } else if (key == "marginal.sigma") sigma = to_double(key, v);
  else if (key == "marginal.centre") centre = to_double(key, v);
  else if (key == "marginal.path") {
    if (!std::filesystem::exists(v)) throw ConstraintError("config: marginal.path does not exist: " + v);
    marginal_path = v;
  } else if (key.rfind("cost.", 0) == 0) {
    auto kv = cost.to_config();
    if (key == "cost.family" && v != kv["cost.family"]) {
      kv.erase("cost.power.s");
      kv.erase("cost.table.path");
    }
    kv[key] = v;
    if (key == "cost.table.path" && !std::filesystem::exists(v))
      throw ConstraintError("config: cost.table.path does not exist: " + v);
    // Defer validation of a family switch until its parameter arrives.
    if (kv["cost.family"] == "power" && !kv.count("cost.power.s")) kv["cost.power.s"] = "1";
    if (kv["cost.family"] == "table" && kv["cost.table.path"].empty()) {
      table_pending = true;
      return;
    }
    table_pending = false;
    cost = CostSpec::from_config(kv);
  } else if (key == "eps") eps_list = {to_double(key, v)};
  else if (key == "eps.list") eps_list = parse_double_list(v);
  else if (key == "alpha") alpha = to_double(key, v);
  else if (key == "beta") beta = to_double(key, v);
  else if (key == "hypothesis.smallness") smallness = to_double(key, v);
  else if (key == "solver.max_outer_iters") solver.max_outer_iters = static_cast<int>(to_int(key, v));
  else if (key == "solver.tol_marginal") solver.tol_marginal = to_double(key, v);
  else if (key == "solver.tol_energy") solver.tol_energy = to_double(key, v);
  else if (key == "solver.symmetrize") solver.symmetrize_each_iter = to_bool(key, v);
  else if (key == "solver.step.initial") solver.step.initial_step = to_double(key, v);
  else if (key == "solver.step.shrink") solver.step.shrink = to_double(key, v);
  else if (key == "solver.step.sufficient_decrease") solver.step.sufficient_decrease = to_double(key, v);
  else if (key == "sweep.continuation") continuation = to_bool(key, v);
  else if (key == "out.dir") out_dir = v;
  else if (key == "seed") seed = static_cast<unsigned>(to_int(key, v));
  else throw ConstraintError("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::optional<std::string> family;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConstraintError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "cost.family")
      family = value;
    else
      entries.emplace_back(std::move(key), std::move(value));
  }
  // The family resets its parameters, so it goes first whatever the line order.
  if (family) c.set("cost.family", *family);
  for (const auto& [key, value] : entries) c.set(key, value);
  if (c.table_pending) throw ConstraintError("config: cost.family=table requires cost.table.path");
  c.solver.validate();
  c.system_grid();
  if (c.eps_list.empty()) throw ConstraintError("config: eps list is empty");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConstraintError("config: cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv = cost.to_config();
  kv["grid.d"] = std::to_string(d);
  kv["grid.N"] = std::to_string(N);
  kv["grid.M"] = std::to_string(M);
  kv["grid.a"] = format_double(a);
  kv["grid.b"] = format_double(b);
  kv["grid.budget"] = std::to_string(budget);
  kv["marginal"] = marginal;
  if (marginal == "gaussian") {
    kv["marginal.sigma"] = format_double(sigma);
    kv["marginal.centre"] = format_double(centre);
  }
  if (marginal == "table") kv["marginal.path"] = marginal_path;
  std::string list;
  for (std::size_t k = 0; k < eps_list.size(); ++k)
    list += (k ? "," : "") + format_double(eps_list[k]);
  kv["eps.list"] = list;
  kv["alpha"] = format_double(alpha);
  kv["beta"] = format_double(beta);
  kv["hypothesis.smallness"] = format_double(smallness);
  kv["solver.max_outer_iters"] = std::to_string(solver.max_outer_iters);
  kv["solver.tol_marginal"] = format_double(solver.tol_marginal);
  kv["solver.tol_energy"] = format_double(solver.tol_energy);
  kv["solver.symmetrize"] = solver.symmetrize_each_iter ? "true" : "false";
  kv["solver.step.initial"] = format_double(solver.step.initial_step);
  kv["solver.step.shrink"] = format_double(solver.step.shrink);
  kv["solver.step.sufficient_decrease"] = format_double(solver.step.sufficient_decrease);
  kv["sweep.continuation"] = continuation ? "true" : "false";
  kv["seed"] = std::to_string(seed);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical()); }

GridSpec ExperimentConfig::system_grid() const {
  return GridSpec(d, N, M, a, b, budget);
}

OneBodyDensity ExperimentConfig::marginal_density() const {
  GridSpec g = system_grid();
  if (marginal == "uniform") return OneBodyDensity::uniform(g);
  if (marginal == "gaussian") return OneBodyDensity::gaussian(g, sigma, centre);
  if (marginal_path.empty()) throw ConstraintError("config: marginal=table requires marginal.path");
  auto v = read_column(marginal_path);
  if (v.size() != g.one_body_states())
    throw ConstraintError("config: marginal table has " + std::to_string(v.size()) +
                          " values, grid needs " + std::to_string(g.one_body_states()));
  return OneBodyDensity::normalized(g, std::move(v));
}

SolverConfig ExperimentConfig::solver_for(double eps) const {
  SolverConfig s = solver;
  s.eps = eps;
  s.seed = seed;
  return s;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["tool_version"] = tool_version;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts) j["artifacts"].push_back({{"path", a.path}, {"wall_time", a.wall_time}});
  j["pass"] = pass;
  j["summary"] = summary;
  return j.dump(2) + "\n";
}

}  // namespace llgrid
