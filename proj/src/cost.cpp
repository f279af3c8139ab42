#include "llgrid/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "llgrid/errors.hpp"

namespace llgrid {

CostSpec CostSpec::coulomb() { return CostSpec{}; }

CostSpec CostSpec::inverse_power(double s) {
  if (!(s > 0)) throw DomainError("cost: inverse-power exponent must be positive");
  CostSpec c;
  c.family_ = CostFamily::power;
  c.s_ = s;
  return c;
}

CostSpec CostSpec::table(std::vector<double> t, std::vector<double> c) {
  if (t.size() != c.size() || t.size() < 2)
    throw ConstraintError("cost table: need at least two (t, c) samples");
  CostSpec out;
  out.family_ = CostFamily::table;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0) || !(c[k] > 0))
      throw ConstraintError("cost table: samples must be positive for log interpolation");
    if (k > 0 && !(t[k] > t[k - 1]))
      throw ConstraintError("cost table: t must be strictly increasing");
    if (k > 0 && c[k] > c[k - 1])
      throw ConstraintError("cost table: c must be nonincreasing in t");
    out.log_t_.push_back(std::log(t[k]));
    out.log_c_.push_back(std::log(c[k]));
  }
  return out;
}

CostSpec CostSpec::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cost table: cannot open " + path);
  std::vector<double> t, c;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw FormatError("cost table: expected two columns in " + path);
    t.push_back(a);
    c.push_back(b);
  }
  CostSpec out = table(std::move(t), std::move(c));
  out.table_path_ = path;
  return out;
}

CostSpec CostSpec::none() {
  CostSpec c;
  c.family_ = CostFamily::none;
  return c;
}

CostSpec CostSpec::from_config(const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  std::string family = get("cost.family").value_or("coulomb");
  CostSpec c;
  if (family == "coulomb") {
    c = coulomb();
  } else if (family == "power") {
    auto s = get("cost.power.s");
    if (!s) throw ConstraintError("cost: family=power requires cost.power.s");
    c = inverse_power(std::stod(*s));
  } else if (family == "table") {
    auto p = get("cost.table.path");
    if (!p) throw ConstraintError("cost: family=table requires cost.table.path");
    c = load_table(*p);
  } else if (family == "none") {
    c = none();
  } else {
    throw ConstraintError("cost: unknown family '" + family + "'");
  }
  if (auto scale = get("cost.cap.scale")) {
    if (*scale == "none")
      c.without_cap();
    else
      c.with_cap_scale(std::stod(*scale));
  }
  return c;
}

std::map<std::string, std::string> CostSpec::to_config() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  switch (family_) {
    case CostFamily::coulomb: kv["cost.family"] = "coulomb"; break;
    case CostFamily::power:
      kv["cost.family"] = "power";
      kv["cost.power.s"] = num(s_);
      break;
    case CostFamily::table:
      kv["cost.family"] = "table";
      kv["cost.table.path"] = table_path_;
      break;
    case CostFamily::none: kv["cost.family"] = "none"; break;
  }
  kv["cost.cap.scale"] = cap_scale_ ? num(*cap_scale_) : "none";
  return kv;
}

CostSpec& CostSpec::with_cap_scale(double scale) {
  if (!(scale > 0)) throw DomainError("cost: cap scale must be positive");
  cap_scale_ = scale;
  return *this;
}

CostSpec& CostSpec::without_cap() {
  cap_scale_.reset();
  return *this;
}

std::optional<double> CostSpec::cap(double h) const {
  if (!cap_scale_) return std::nullopt;
  return radial(*cap_scale_ * h);
}

double CostSpec::radial(double t) const {
  if (!(t > 0)) return family_ == CostFamily::none ? 0.0 : std::numeric_limits<double>::infinity();
  switch (family_) {
    case CostFamily::coulomb: return 1.0 / t;
    case CostFamily::power: return std::pow(t, -s_);
    case CostFamily::none: return 0.0;
    case CostFamily::table: {
      const double lt = std::log(t);
      std::size_t k = std::upper_bound(log_t_.begin(), log_t_.end(), lt) - log_t_.begin();
      k = std::clamp<std::size_t>(k, 1, log_t_.size() - 1);
      const double w = (lt - log_t_[k - 1]) / (log_t_[k] - log_t_[k - 1]);
      return std::exp(log_c_[k - 1] + w * (log_c_[k] - log_c_[k - 1]));
    }
  }
  return 0.0;
}

double CostSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  double n2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) n2 += (x[k] - y[k]) * (x[k] - y[k]);
  return radial(std::sqrt(n2));
}

bool CostSpec::divergent() const {
  switch (family_) {
    case CostFamily::coulomb:
    case CostFamily::power: return true;
    case CostFamily::none: return false;
    case CostFamily::table: return log_c_[1] < log_c_[0];
  }
  return false;
}

std::string CostSpec::describe() const {
  std::ostringstream os;
  switch (family_) {
    case CostFamily::coulomb: os << "coulomb"; break;
    case CostFamily::power: os << "power(s=" << s_ << ")"; break;
    case CostFamily::table: os << "table(" << table_path_ << ")"; break;
    case CostFamily::none: os << "none"; break;
  }
  if (cap_scale_) os << ", cap=m(" << *cap_scale_ << "h)";
  return os.str();
}

}  // namespace llgrid
