#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace llgrid {

enum class CostFamily { coulomb, power, table, none };

// Radial pair cost c(x, y) = f(|x - y|) with decreasing envelopes m <= c <= M.
// For the built-in families the envelopes coincide with f.  Grid-coincident
// pairs (|x - y| = 0) are charged the cap m(cap_scale * h) when a cap is set.
class CostSpec {
 public:
  static CostSpec coulomb();
  static CostSpec inverse_power(double s);
  // Samples (t_k, c_k), t strictly increasing, c positive and nonincreasing;
  // interpolated linearly in (log t, log c) and extrapolated with the end slopes.
  static CostSpec table(std::vector<double> t, std::vector<double> c);
  static CostSpec load_table(const std::string& path);
  // c == 0; only for sanity checks (m does not diverge).
  static CostSpec none();

  // Flat key=value form: cost.family, cost.power.s, cost.cap.scale, cost.table.path.
  static CostSpec from_config(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_config() const;

  CostSpec& with_cap_scale(double scale);
  CostSpec& without_cap();

  CostFamily family() const { return family_; }
  double power() const { return s_; }
  std::optional<double> cap_scale() const { return cap_scale_; }
  // Value charged at coincident nodes for grid spacing h, if configured.
  std::optional<double> cap(double h) const;

  double radial(double t) const;
  double lower_envelope(double t) const { return radial(t); }
  double upper_envelope(double t) const { return radial(t); }
  double operator()(std::span<const double> x, std::span<const double> y) const;

  // Whether m(t) -> infinity as t -> 0+.
  bool divergent() const;
  std::string describe() const;

 private:
  CostFamily family_ = CostFamily::coulomb;
  double s_ = 1.0;
  std::vector<double> log_t_, log_c_;
  std::string table_path_;
  std::optional<double> cap_scale_ = 0.5;
};

}  // namespace llgrid
