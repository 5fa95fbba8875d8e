#include "msc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace msc {

LogLogPairs log_log_pairs(std::span<const ComplexityProfile> profiles, const Manifest& manifest, int scale_index) {
  std::unordered_map<std::string_view, const ComplexityProfile*> by_subject;
  for (const auto& p : profiles) {
    if (manifest.find(p.subject_id) == nullptr)
      throw Error(Errc::UnknownSubject, "profile subject '" + p.subject_id + "' is not in the manifest");
    by_subject.emplace(p.subject_id, &p);
  }

  LogLogPairs out;
  for (const auto& entry : manifest.entries) {
    const auto it = by_subject.find(entry.subject_id);
    const ScaleEntry* scale = nullptr;
    if (it != by_subject.end())
      for (const auto& s : it->second->per_scale)
        if (s.scale_index == scale_index) scale = &s;
    if (scale == nullptr) {
      out.missing.push_back(entry.subject_id);
      continue;
    }
    if (!(scale->complexity > 0.0)) {
      out.excluded.push_back(entry.subject_id);
      continue;
    }
    out.pairs.push_back({std::log(scale->complexity), std::log(entry.age_years)});
  }
  if (out.pairs.empty())
    throw Error(Errc::EmptyAfterFiltering, "no subject has a positive complexity at scale " + std::to_string(scale_index));
  return out;
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::OutOfRange, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::OutOfRange, "incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
  if (!(dof > 0.0)) throw Error(Errc::OutOfRange, "degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2));
}

Regression pearson_regression(std::span<const XYPair> pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) throw Error(Errc::TooFewPoints, "regression needs >= 3 points, got " + std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (const auto& p : pairs) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pairs) {
    const double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw Error(Errc::DegenerateVariance, "x values have zero variance");
  if (!(syy > 0.0)) throw Error(Errc::DegenerateVariance, "y values have zero variance");

  Regression out;
  out.n = n;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  const double dof = static_cast<double>(n - 2);
  const double one_minus_r2 = (1.0 - out.r) * (1.0 + out.r);
  if (dof == 0.0 || one_minus_r2 <= 0.0) {
    out.p = dof == 0.0 ? 1.0 : 0.0;
  } else {
    const double t = out.r * std::sqrt(dof / one_minus_r2);
    out.p = student_t_two_sided(t, dof);
  }
  out.p = std::clamp(out.p, kMinReportedP, 1.0);
  return out;
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::OutOfRange, "p-value " + std::to_string(p) + " is outside [0, 1]");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t rank = m; rank-- > 0;) {
    const std::size_t i = order[rank];
    const double scaled = p_values[i] * static_cast<double>(m) / static_cast<double>(rank + 1);
    running = std::min(running, scaled);
    q[i] = std::max(running, p_values[i]);
  }
  return q;
}

CorrelationTable correlation_table(std::span<const ComplexityProfile> profiles, const Manifest& manifest,
                                   const ScaleSchedule& schedule) {
  CorrelationTable table;
  bool missing_recorded = false;
  for (std::size_t k = 0; k < schedule.factors.size(); ++k) {
    const int scale_index = static_cast<int>(k);
    const Index factor = schedule.factors[k];
    try {
      LogLogPairs pairs = log_log_pairs(profiles, manifest, scale_index);
      if (!missing_recorded) {
        table.missing = pairs.missing;
        missing_recorded = true;
      }
      for (const auto& s : pairs.excluded) table.excluded.push_back(s + "@" + std::to_string(scale_index));
      const Regression fit = pearson_regression(pairs.pairs);
      table.rows.push_back({scale_index, factor, fit.n, fit.r, fit.p, 1.0, fit.slope, fit.intercept});
      table.scatter.push_back(std::move(pairs.pairs));
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownSubject) throw;
      table.skipped.push_back({scale_index, factor, std::string(e.name()) + ": " + e.what()});
    }
  }

  std::vector<double> p;
  for (const auto& row : table.rows) p.push_back(row.p);
  const std::vector<double> q = benjamini_hochberg(p);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].q_fdr = q[i];
  return table;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string format_p(double p) {
  if (p <= kMinReportedP) return "<1e-300";
  return fmt("%.3e", p);
}

std::string correlation_csv(const CorrelationTable& table) {
  std::string out = "scale_index,scale_factor,n,r,p,q_fdr,slope,intercept\n";
  for (const auto& row : table.rows) {
    out += std::to_string(row.scale_index) + "," + std::to_string(row.scale_factor) + "," + std::to_string(row.n) +
           "," + fmt("%.17g", row.r) + "," + fmt("%.17g", row.p) + "," + fmt("%.17g", row.q_fdr) + "," +
           fmt("%.17g", row.slope) + "," + fmt("%.17g", row.intercept) + "\n";
  }
  return out;
}

std::string correlation_text(const CorrelationTable& table) {
  std::string out = "# y = ln(age_years) regressed on x = ln C(lambda); log base e\n";
  char line[256];
  std::snprintf(line, sizeof line, "%11s %12s %6s %9s %10s %10s %9s %10s\n", "scale_index", "scale_factor", "n", "r",
                "p", "q_fdr", "slope", "intercept");
  out += line;
  for (const auto& row : table.rows) {
    std::snprintf(line, sizeof line, "%11d %12lld %6zu %9.3f %10s %10s %9.3f %10.3f\n", row.scale_index,
                  static_cast<long long>(row.scale_factor), row.n, row.r, format_p(row.p).c_str(),
                  format_p(row.q_fdr).c_str(), row.slope, row.intercept);
    out += line;
  }
  for (const auto& s : table.skipped)
    out += "# skipped scale " + std::to_string(s.scale_index) + " (factor " + std::to_string(s.scale_factor) +
           "): " + s.reason + "\n";
  return out;
}

}  // namespace msc
