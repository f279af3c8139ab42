#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llgrid/config.hpp"
#include "llgrid/functionals.hpp"

namespace llgrid {

struct CheckFailure {
  std::string suite;
  std::string check;
  std::string detail;
  // JSON with the seed, trial and (for small grids) the input values, enough to
  // rerun the failing case.
  std::string replay;
};

struct SuiteResult {
  std::string name;
  int checks = 0;
  std::vector<CheckFailure> failures;
  double wall_time = 0.0;
  bool pass() const { return failures.empty(); }
};

struct VerifyOptions {
  // Fisher information used by the kinetic-energy suite; replaced to test that
  // the suite catches a broken kernel.
  FisherFunction fisher = [](const Field& P) { return fisher_information(P); };
  unsigned seed = 1;
  int trials = 200;  // random cases per property
  // Also validate this density file against the config's marginal.
  std::optional<std::string> density_path;
  // Stop a suite at its first failure.
  bool stop_early = false;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool pass() const;
  const CheckFailure* first_failure() const;
  std::string to_json() const;
};

// Property suites per module: grid, kinetic, ims, interaction, solver,
// competitor, diagonal and, with a density path, density-file.
std::vector<std::string> verify_suite_names();
SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg,
                      const VerifyOptions& opt);
VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opt = {});

// Broken Fisher kernels for checking that the suites have teeth.
namespace mutants {
// 4 sum |D P|^2 h^{axes}: the square root dropped, so 2-homogeneous.
double fisher_without_sqrt(const Field& P);
// 4 sum (sqrt P(x) + sqrt P(x + e_a))^2 h^{axes} / h^2 on interior pairs: the
// difference sign flipped.
double fisher_sign_flip(const Field& P);
}  // namespace mutants

}  // namespace llgrid
