#include "alphatree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "alphatree/parallel.hpp"

namespace alphatree {

unsigned default_thread_count() {
  if (const char* env = std::getenv("ALPHATREE_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Accumulator {
  StatRecord record;
  TKL tkl;
};

struct SubtreeInfo {
  std::uint64_t leaves;
  std::uint64_t internals;
};

// depth: d(r, t) for the top vertex of t.
SubtreeInfo walk(const Tree& t, std::uint64_t depth, Accumulator& acc) {
  if (t.is_leaf()) {
    acc.record.sackin += depth - 1;
    acc.record.max_depth = std::max(acc.record.max_depth, depth - 1);
    acc.tkl.T += depth;
    return {1, 0};
  }
  const Tree l = t.left();
  const Tree r = t.right();
  const SubtreeInfo li = walk(l, depth + 1, acc);
  const SubtreeInfo ri = walk(r, depth + 1, acc);
  const std::uint64_t lo = std::min(li.leaves, ri.leaves);
  const std::uint64_t hi = std::max(li.leaves, ri.leaves);
  acc.record.colless += hi - lo;
  acc.record.v_min_sum += lo;
  if (li.leaves == 1 && ri.leaves == 1) ++acc.record.cherries;
  const std::uint64_t internals = li.internals + ri.internals + 1;
  acc.tkl.K += depth;
  acc.tkl.L += internals;
  return {li.leaves + ri.leaves, internals};
}

Accumulator accumulate(const Tree& t) {
  if (t.empty()) throw TreeError("statistics of an empty tree");
  Accumulator acc;
  walk(t, 1, acc);
  acc.record.n_leaves = t.leaf_count();
  return acc;
}

std::uint64_t sum_internal_sizes(const Tree& t) {
  if (!t.is_internal()) return 0;
  return t.leaf_count() + sum_internal_sizes(t.left()) + sum_internal_sizes(t.right());
}

}  // namespace

StatRecord compute_stats(const Tree& t) {
  return accumulate(t).record;
}

std::uint64_t sackin(const Tree& t) { return compute_stats(t).sackin; }

std::uint64_t sackin_by_internal(const Tree& t) {
  if (t.empty()) throw TreeError("statistics of an empty tree");
  return sum_internal_sizes(t);
}

std::uint64_t colless(const Tree& t) { return compute_stats(t).colless; }
std::uint64_t cherries(const Tree& t) { return compute_stats(t).cherries; }
std::uint64_t max_leaf_depth(const Tree& t) { return compute_stats(t).max_depth; }
std::uint64_t v_min_sum(const Tree& t) { return compute_stats(t).v_min_sum; }

TKL tkl(const Tree& t) { return accumulate(t).tkl; }

bool sackin_colless_gap_bound_check(const Tree& t) {
  const StatRecord s = compute_stats(t);
  if (s.colless > s.sackin) return false;
  const double n = static_cast<double>(s.n_leaves);
  const double bound = n * std::log2(n);
  // Tight for perfectly balanced trees; allow for rounding in log2.
  return static_cast<double>(s.sackin - s.colless) <= bound * (1.0 + 1e-12);
}

std::vector<double> expected_L_curve(AlphaParam alpha, std::size_t n_max) {
  if (n_max == 0) throw std::domain_error("expected_L requires n >= 1");
  const double a = alpha.value();
  std::vector<double> curve(n_max + 1, 0.0);
  curve[1] = 0.0;
  for (std::size_t n = 1; n < n_max; ++n) {
    const double nd = static_cast<double>(n);
    if (n == 1) {
      curve[2] = 1.0;  // (1-a)/(1-a), also the limit at a = 1
      continue;
    }
    curve[n + 1] = curve[n] * (nd + 1.0) / (nd - a) + (2.0 * nd - 1.0) * (1.0 - a) / (nd - a);
  }
  return curve;
}

double expected_L(AlphaParam alpha, std::size_t n) {
  return expected_L_curve(alpha, n)[n];
}

double expected_sackin(AlphaParam alpha, std::size_t n) {
  return expected_L(alpha, n) + static_cast<double>(n) - 1.0;
}

double cherry_mean_exact(AlphaParam alpha, std::size_t m) {
  const double a = alpha.value();
  if (a >= 1.0) throw std::domain_error("cherry_mean_exact is undefined at alpha = 1");
  if (m < 3) throw std::domain_error("cherry_mean_exact requires m >= 3");
  double product = 1.0;
  for (std::size_t i = 3; i < m; ++i) {
    const double id = static_cast<double>(i);
    product *= (id - 2.0 + a) / (id - a);
  }
  const double md = static_cast<double>(m);
  return (1.0 - a) / (3.0 - 2.0 * a) * (md - a) + a / 2.0 + a / (2.0 * (3.0 - 2.0 * a)) * product;
}

CherryMoments cherry_moments_recurrence(AlphaParam alpha, std::size_t m_max) {
  const double a = alpha.value();
  if (a >= 1.0) throw std::domain_error("cherry moment recurrences are undefined at alpha = 1");
  if (m_max < 2) throw std::domain_error("cherry_moments_recurrence requires m_max >= 2");
  CherryMoments out{alpha, std::vector<double>(m_max + 1, 0.0), std::vector<double>(m_max + 1, 0.0)};
  out.mean[2] = 1.0;
  out.variance[2] = 0.0;
  for (std::size_t m = 2; m < m_max; ++m) {
    const double md = static_cast<double>(m);
    const double d = md - a;
    const double mu = out.mean[m];
    const double var = out.variance[m];
    out.mean[m + 1] = md * (1.0 - a) / d + (md - 2.0 + a) / d * mu;
    out.variance[m + 1] = a * (1.0 - a) * md * (md - 1.0) / (d * d) + var * (md - 4.0 + 3.0 * a) / d +
                          mu * 2.0 * (1.0 - a) * (md * (1.0 - 2.0 * a) + a) / (d * d) -
                          mu * mu * 4.0 * (1.0 - a) * (1.0 - a) / (d * d);
  }
  return out;
}

double cherry_mean_slope(AlphaParam alpha) {
  const double a = alpha.value();
  return (1.0 - a) / (3.0 - 2.0 * a);
}

double cherry_variance_slope(AlphaParam alpha) {
  const double a = alpha.value();
  return (1.0 - a) * (2.0 - a) / ((3.0 - 2.0 * a) * (3.0 - 2.0 * a) * (5.0 - 4.0 * a));
}

std::uint64_t sample_cherry_count(std::size_t m, AlphaParam alpha, Rng& rng) {
  if (m == 0) throw std::domain_error("sample_cherry_count requires m >= 1");
  if (m == 1) return 0;
  const double a = alpha.value();
  std::uint64_t c = 1;
  for (std::size_t k = 2; k < m; ++k) {
    const double kd = static_cast<double>(k);
    const double p = (1.0 - a) * (kd - 2.0 * static_cast<double>(c)) / (kd - a);
    if (uniform01(rng) < p) ++c;
  }
  return c;
}

NormalityReport normality_diagnostic(AlphaParam alpha, std::size_t m, std::size_t n_samples,
                                     std::uint64_t seed, unsigned threads) {
  if (alpha.value() >= 1.0) throw std::domain_error("normality_diagnostic is undefined at alpha = 1");
  if (m < 3 || n_samples < 2) throw std::domain_error("normality_diagnostic requires m >= 3, n_samples >= 2");
  std::vector<double> counts(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    counts[i] = static_cast<double>(sample_cherry_count(m, alpha, rng));
  });

  NormalityReport r;
  r.alpha = alpha.value();
  r.m = m;
  r.n_samples = n_samples;
  r.seed = seed;
  r.exact_mean = cherry_mean_exact(alpha, m);
  r.asymptotic_variance = cherry_variance_slope(alpha) * static_cast<double>(m);

  const double n = static_cast<double>(n_samples);
  double sum = 0;
  for (double c : counts) sum += c;
  r.sample_mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double c : counts) {
    const double d = c - r.sample_mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  r.sample_variance = m2 * n / (n - 1.0);
  r.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  r.excess_kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  r.jarque_bera = n / 6.0 * (r.skewness * r.skewness + r.excess_kurtosis * r.excess_kurtosis / 4.0);
  const double scale = std::sqrt(r.asymptotic_variance);
  r.standardized_mean = (r.sample_mean - r.exact_mean) / scale;
  r.standardized_mean_se = std::sqrt(r.sample_variance) / scale / std::sqrt(n);
  return r;
}

}  // namespace alphatree
