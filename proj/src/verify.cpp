#include "alphatree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alphatree/alpha_model.hpp"
#include "alphatree/appendix.hpp"
#include "alphatree/enumeration.hpp"
#include "alphatree/stats.hpp"

namespace alphatree {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

CheckResult split_sums(double perturbation) {
  double worst = 0;
  for (int i = 0; i <= 10; ++i) {
    const AlphaParam alpha(i / 10.0);
    for (std::size_t n = 2; n <= 60; ++n) {
      double sum = 0;
      for (std::size_t m = 1; m < n; ++m) sum += q_alpha(alpha, m, n - m) * (1.0 + perturbation);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  std::ostringstream os;
  os << "max |sum_m q(m,n-m) - 1| = " << worst << " (n <= 60, alpha in 0..1 step 0.1)";
  return {"split-sums", worst <= 1e-12, os.str()};
}

CheckResult split_recursions() {
  double worst = 0;
  for (int i = 0; i <= 10; ++i) {
    const AlphaParam alpha(i / 10.0);
    const double a = alpha.value();
    for (std::size_t x = 1; x < 40; ++x) {
      for (std::size_t y = 1; x + y <= 40; ++y) {
        if (x == 1 && y == 1) continue;
        const double d = static_cast<double>(x + y) - 1.0 - a;
        double rhs;
        if (x > 1 && y > 1) {
          rhs = q_alpha(alpha, x - 1, y) * (static_cast<double>(x) - 1.0 - a) / d +
                q_alpha(alpha, x, y - 1) * (static_cast<double>(y) - 1.0 - a) / d;
        } else if (x == 1) {
          const double e = static_cast<double>(y) - a;
          rhs = a / 2.0 / e + q_alpha(alpha, 1, y - 1) * (static_cast<double>(y) - 1.0 - a) / e;
        } else {
          const double e = static_cast<double>(x) - a;
          rhs = a / 2.0 / e + q_alpha(alpha, x - 1, 1) * (static_cast<double>(x) - 1.0 - a) / e;
        }
        worst = std::max(worst, std::abs(q_alpha(alpha, x, y) - rhs));
      }
    }
  }
  std::ostringstream os;
  os << "max recurrence residual = " << worst << " (a+b <= 40)";
  return {"split-recursions", worst <= 1e-12, os.str()};
}

CheckResult reference_tables() {
  const std::vector<RationalAlpha> alphas{RationalAlpha(0, 1), RationalAlpha(1, 7), RationalAlpha(1, 3),
                                          RationalAlpha(1, 2), RationalAlpha(5, 6)};
  std::size_t mismatches = 0;
  std::size_t compared = 0;
  for (const auto& ref : reference_shapes()) {
    const Tree shape = shape_from_size_sequence(ref.sequence);
    if (cladogram_count_for_shape(shape) != ref.cladograms) ++mismatches;
    for (const auto& a : alphas) {
      ++compared;
      if (exact_shape_prob(shape, a) != ref.probability(a.value())) ++mismatches;
    }
  }
  std::ostringstream os;
  os << mismatches << " mismatches over " << reference_shapes().size() << " shapes, " << compared
     << " exact probability comparisons";
  return {"reference-shapes", mismatches == 0, os.str()};
}

CheckResult normalization(std::size_t n_max) {
  const std::vector<RationalAlpha> alphas{RationalAlpha(0, 1), RationalAlpha(1, 7), RationalAlpha(1, 3),
                                          RationalAlpha(1, 2), RationalAlpha(2, 3), RationalAlpha(1, 1)};
  std::ostringstream failures;
  bool ok = true;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto shapes = enumerate_shapes(n);
    if (shapes.size() != shape_count(n)) {
      ok = false;
      failures << " A(" << n << ")";
    }
    if (n >= 2) {
      std::uint64_t total = 0;
      for (const auto& s : shapes) total += cladogram_count_for_shape(s);
      if (total != cladogram_total(n)) {
        ok = false;
        failures << " count(" << n << ")";
      }
    }
    for (const auto& a : alphas) {
      if (shape_distribution(n, a).total_probability() != 1) {
        ok = false;
        failures << " sum(" << n << "," << a.to_string() << ")";
      }
    }
  }
  std::string detail = "n <= " + std::to_string(n_max) + ": shape counts, (2n-3)!! and exact sums";
  if (!ok) detail += "; failed:" + failures.str();
  return {"normalization", ok, detail};
}

CheckResult deletion_stability(std::size_t n_max) {
  const std::vector<RationalAlpha> alphas{RationalAlpha(0, 1), RationalAlpha(1, 3), RationalAlpha(1, 2),
                                          RationalAlpha(2, 3), RationalAlpha(1, 1)};
  bool ok = true;
  for (std::size_t n = 3; n <= n_max; ++n) {
    for (const auto& a : alphas) {
      if (!(brute_force_delete_pushforward(shape_distribution(n, a)) == shape_distribution(n - 1, a))) {
        ok = false;
      }
    }
  }
  double worst = 0;
  for (int i = 0; i <= 10; ++i) {
    const AlphaParam alpha(i / 10.0);
    for (std::size_t x = 1; x < 30; ++x) {
      for (std::size_t y = 1; x + y <= 30; ++y) {
        worst = std::max(worst, std::abs(deletion_stability_residual(alpha, x, y)));
      }
    }
  }
  ok = ok && worst <= 1e-12;
  std::ostringstream os;
  os << "exact pushforward for 3 <= n <= " << n_max << "; max residual " << worst << " (x+y <= 30)";
  return {"deletion-stability", ok, os.str()};
}

CheckResult identities(std::uint64_t seed, std::size_t samples) {
  std::size_t failures = 0;
  const double alphas[] = {0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = make_stream(seed, i);
    const AlphaParam alpha(alphas[i % 3]);
    const std::size_t n = 1 + uniform_index(rng, 200);
    const Tree t = sample_shape(n, alpha, rng);
    const StatRecord s = compute_stats(t);
    const TKL k = tkl(t);
    const bool ok = s.colless + 2 * s.v_min_sum == s.sackin && k.T == s.sackin + n &&
                    k.T - k.K == 2 * n - 1 && k.K == k.L && sackin_colless_gap_bound_check(t) &&
                    sackin_by_internal(t) == s.sackin;
    if (!ok) ++failures;
  }
  return {"tkl-identities", failures == 0,
          std::to_string(failures) + " failures on " + std::to_string(samples) + " sampled trees"};
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& options) {
  const bool deep = options.level == VerifyLevel::deep;
  VerifyReport report;
  report.checks.push_back(split_sums(options.q_perturbation));
  report.checks.push_back(split_recursions());
  report.checks.push_back(reference_tables());
  report.checks.push_back(normalization(deep ? 10 : 8));
  report.checks.push_back(deletion_stability(deep ? 8 : 6));
  report.checks.push_back(identities(options.seed, deep ? 10000 : 1000));
  return report;
}

}  // namespace alphatree
