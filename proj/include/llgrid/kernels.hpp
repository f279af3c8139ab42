#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "llgrid/grid.hpp"

// Node-loop kernels shared by every module.  Two implementations with identical
// signatures: `serial` is the plain reference (single accumulator, flat order)
// kept for testing; `parallel` distributes fixed-size node blocks over OpenMP
// threads and adds the block partials in block order, so its result does not
// depend on the thread count.
namespace llgrid::kernels {

inline constexpr std::size_t block_size = 1u << 13;

// Axes that survive a marginal: keep[a] != 0 for the kept axes.
struct AxisMask {
  std::vector<char> keep;
};

namespace serial {

// sum_x sum_a (f(x+e_a) - f(x))^2 over nodes with x_a < M-1 (replicate boundary).
double difference_energy(const GridSpec& g, std::span<const double> f);
// Same, each node's term weighted by w(x).
double weighted_difference_energy(const GridSpec& g, std::span<const double> w,
                                  std::span<const double> f);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
// out[c] = sum of values over the stencil centred at node c, clipped to the grid.
void ball_sums(const GridSpec& g, std::span<const double> values, const BallStencil& stencil,
               std::span<double> out);
// out on grid^{kept axes}: plain sum of values over the dropped axes.
void axis_sums(const GridSpec& g, std::span<const double> values, const AxisMask& mask,
               std::span<double> out);
// values[x] *= factor[(x_first, ..., x_{first+count-1})].
void scale_by_block(const GridSpec& g, std::span<double> values, int first, int count,
                    std::span<const double> factor);

}  // namespace serial

namespace parallel {

double difference_energy(const GridSpec& g, std::span<const double> f);
double weighted_difference_energy(const GridSpec& g, std::span<const double> w,
                                  std::span<const double> f);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
void ball_sums(const GridSpec& g, std::span<const double> values, const BallStencil& stencil,
               std::span<double> out);
void axis_sums(const GridSpec& g, std::span<const double> values, const AxisMask& mask,
               std::span<double> out);
void scale_by_block(const GridSpec& g, std::span<double> values, int first, int count,
                    std::span<const double> factor);

}  // namespace parallel

// Kernels used by the library proper.
namespace active = parallel;

}  // namespace llgrid::kernels
