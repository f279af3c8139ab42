#include "llgrid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace llgrid::kernels {
namespace {

// Neumaier compensated sum.
struct Accumulator {
  double s = 0.0, c = 0.0;
  void operator+=(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct Cursor {
  std::vector<int> c;
  int points;

  Cursor(const GridSpec& g, std::size_t start) : c(g.axes()), points(g.points()) {
    g.unflatten(start, c);
  }
  void advance() {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
      if (++c[k] < points) return;
      c[k] = 0;
    }
  }
};

std::vector<std::ptrdiff_t> flat_offsets(const GridSpec& g, const BallStencil& st) {
  std::vector<std::ptrdiff_t> out(st.size());
  for (std::size_t k = 0; k < st.size(); ++k) {
    auto o = st.offset(k);
    std::ptrdiff_t f = 0;
    for (int a = 0; a < st.axes; ++a) f += o[a] * static_cast<std::ptrdiff_t>(g.stride(a));
    out[k] = f;
  }
  return out;
}

double ball_sum_at(const GridSpec& g, std::span<const double> values, const BallStencil& st,
                   const std::vector<std::ptrdiff_t>& flat, std::size_t x,
                   const std::vector<int>& c) {
  const int M = g.points();
  double s = 0.0;
  for (std::size_t k = 0; k < st.size(); ++k) {
    auto o = st.offset(k);
    bool inside = true;
    for (int a = 0; a < st.axes; ++a) {
      int v = c[a] + o[a];
      if (v < 0 || v >= M) {
        inside = false;
        break;
      }
    }
    if (inside) s += values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + flat[k])];
  }
  return s;
}

struct MarginalLayout {
  std::vector<int> kept, dropped;
  std::size_t out_size = 1, inner_size = 1;
};

MarginalLayout layout_of(const GridSpec& g, const AxisMask& mask) {
  MarginalLayout L;
  for (int a = 0; a < g.axes(); ++a) {
    if (mask.keep[a]) {
      L.kept.push_back(a);
      L.out_size *= g.points();
    } else {
      L.dropped.push_back(a);
      L.inner_size *= g.points();
    }
  }
  return L;
}

std::size_t block_index(const GridSpec& g, std::size_t x, int first, int count) {
  std::size_t n = 1;
  for (int k = 0; k < count; ++k) n *= g.points();
  return (x / g.stride(first + count - 1)) % n;
}

}  // namespace

namespace serial {

double difference_energy(const GridSpec& g, std::span<const double> f) {
  const int M = g.points();
  const int A = g.axes();
  Cursor cur(g, 0);
  Accumulator acc;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (int a = 0; a < A; ++a) {
      if (cur.c[a] < M - 1) {
        double d = f[x + g.stride(a)] - f[x];
        acc += d * d;
      }
    }
    cur.advance();
  }
  return acc.value();
}

double weighted_difference_energy(const GridSpec& g, std::span<const double> w,
                                  std::span<const double> f) {
  const int M = g.points();
  const int A = g.axes();
  Cursor cur(g, 0);
  Accumulator acc;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (int a = 0; a < A; ++a) {
      if (cur.c[a] < M - 1) {
        double d = f[x + g.stride(a)] - f[x];
        acc += w[x] * d * d;
      }
    }
    cur.advance();
  }
  return acc.value();
}

double dot(std::span<const double> a, std::span<const double> b) {
  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc.value();
}

double sum(std::span<const double> a) {
  Accumulator acc;
  for (double v : a) acc += v;
  return acc.value();
}

void ball_sums(const GridSpec& g, std::span<const double> values, const BallStencil& st,
               std::span<double> out) {
  auto flat = flat_offsets(g, st);
  Cursor cur(g, 0);
  for (std::size_t x = 0; x < values.size(); ++x) {
    out[x] = ball_sum_at(g, values, st, flat, x, cur.c);
    cur.advance();
  }
}

void axis_sums(const GridSpec& g, std::span<const double> values, const AxisMask& mask,
               std::span<double> out) {
  auto L = layout_of(g, mask);
  std::fill(out.begin(), out.end(), 0.0);
  Cursor cur(g, 0);
  for (std::size_t x = 0; x < values.size(); ++x) {
    std::size_t o = 0;
    for (int a : L.kept) o = o * g.points() + cur.c[a];
    out[o] += values[x];
    cur.advance();
  }
}

void scale_by_block(const GridSpec& g, std::span<double> values, int first, int count,
                    std::span<const double> factor) {
  for (std::size_t x = 0; x < values.size(); ++x)
    values[x] *= factor[block_index(g, x, first, count)];
}

}  // namespace serial

namespace parallel {
namespace {

template <class Body>
double blocked_reduce(const GridSpec& g, std::size_t n, Body body) {
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    Cursor cur(g, begin);
    Accumulator acc;
    for (std::size_t x = begin; x < end; ++x) {
      acc += body(x, cur.c);
      cur.advance();
    }
    partial[b] = acc.value();
  }
  Accumulator total;
  for (double p : partial) total += p;
  return total.value();
}

}  // namespace

double difference_energy(const GridSpec& g, std::span<const double> f) {
  const int M = g.points();
  const int A = g.axes();
  return blocked_reduce(g, f.size(), [&](std::size_t x, const std::vector<int>& c) {
    double acc = 0.0;
    for (int a = 0; a < A; ++a) {
      if (c[a] < M - 1) {
        double d = f[x + g.stride(a)] - f[x];
        acc += d * d;
      }
    }
    return acc;
  });
}

double weighted_difference_energy(const GridSpec& g, std::span<const double> w,
                                  std::span<const double> f) {
  const int M = g.points();
  const int A = g.axes();
  return blocked_reduce(g, f.size(), [&](std::size_t x, const std::vector<int>& c) {
    double acc = 0.0;
    for (int a = 0; a < A; ++a) {
      if (c[a] < M - 1) {
        double d = f[x + g.stride(a)] - f[x];
        acc += w[x] * d * d;
      }
    }
    return acc;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(nblocks); ++k) {
    const std::size_t begin = static_cast<std::size_t>(k) * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    Accumulator acc;
    for (std::size_t i = begin; i < end; ++i) acc += a[i] * b[i];
    partial[k] = acc.value();
  }
  Accumulator total;
  for (double p : partial) total += p;
  return total.value();
}

double sum(std::span<const double> a) {
  const std::size_t n = a.size();
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(nblocks); ++k) {
    const std::size_t begin = static_cast<std::size_t>(k) * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    Accumulator acc;
    for (std::size_t i = begin; i < end; ++i) acc += a[i];
    partial[k] = acc.value();
  }
  Accumulator total;
  for (double p : partial) total += p;
  return total.value();
}

void ball_sums(const GridSpec& g, std::span<const double> values, const BallStencil& st,
               std::span<double> out) {
  auto flat = flat_offsets(g, st);
  const std::size_t n = values.size();
  const std::size_t nblocks = (n + block_size - 1) / block_size;
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    Cursor cur(g, begin);
    for (std::size_t x = begin; x < end; ++x) {
      out[x] = ball_sum_at(g, values, st, flat, x, cur.c);
      cur.advance();
    }
  }
}

void axis_sums(const GridSpec& g, std::span<const double> values, const AxisMask& mask,
               std::span<double> out) {
  auto L = layout_of(g, mask);
  const int M = g.points();
#pragma omp parallel for schedule(static)
  for (std::int64_t o = 0; o < static_cast<std::int64_t>(L.out_size); ++o) {
    // Base offset from the kept coordinates.
    std::size_t rest = static_cast<std::size_t>(o);
    std::size_t base = 0;
    for (int k = static_cast<int>(L.kept.size()) - 1; k >= 0; --k) {
      base += (rest % M) * g.stride(L.kept[k]);
      rest /= M;
    }
    std::vector<int> c(L.dropped.size(), 0);
    double acc = 0.0;
    for (std::size_t i = 0; i < L.inner_size; ++i) {
      std::size_t x = base;
      for (std::size_t k = 0; k < c.size(); ++k) x += c[k] * g.stride(L.dropped[k]);
      acc += values[x];
      for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
        if (++c[k] < M) break;
        c[k] = 0;
      }
    }
    out[o] = acc;
  }
}

void scale_by_block(const GridSpec& g, std::span<double> values, int first, int count,
                    std::span<const double> factor) {
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < static_cast<std::int64_t>(values.size()); ++x)
    values[x] *= factor[block_index(g, static_cast<std::size_t>(x), first, count)];
}

}  // namespace parallel
}  // namespace llgrid::kernels
