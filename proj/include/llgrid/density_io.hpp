#pragma once

#include <string>
#include <vector>

#include "llgrid/density.hpp"

namespace llgrid {

// Writes content to path.tmp.<pid> and renames it over path, so readers never
// see a partially written file.
void atomic_write(const std::string& path, const std::string& content);

// Text format: header "llgrid v1 d N M a b", then M^{dN} values, row-major.
std::string format_density(const Field& P);
void write_density(const std::string& path, const Field& P);
// Parses and checks nonnegativity; no normalization requirement.
Field read_field(const std::string& path);
// Also requires the discrete integral to be 1 within 1e-10.
NBodyDensity read_density(const std::string& path);

struct Checkpoint {
  Field density;
  double eps = 0.0;
  int iterations = 0;
  double energy = 0.0;
  double marginal_residual = 0.0;
  std::string config_hash;
  std::vector<double> potential;  // dual multiplier, used to resume
};

// <prefix>.density and <prefix>.json.
void write_checkpoint(const std::string& prefix, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& prefix);

}  // namespace llgrid
