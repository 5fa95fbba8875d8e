#pragma once

#include <span>
#include <string>
#include <vector>

#include "msc/complexity.hpp"
#include "msc/npy_io.hpp"

namespace msc {

struct XYPair {
  double x = 0.0;
  double y = 0.0;
};

/// (ln C, ln age) pairs at one scale, in manifest order. Subjects whose C is
/// zero at that scale are dropped and listed in `excluded`; manifest subjects
/// without a profile are listed in `missing`.
struct LogLogPairs {
  std::vector<XYPair> pairs;
  std::vector<std::string> excluded;
  std::vector<std::string> missing;
};

LogLogPairs log_log_pairs(std::span<const ComplexityProfile> profiles, const Manifest& manifest, int scale_index);

struct Regression {
  double r = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Least-squares fit of y on x with the sample Pearson r and its two-sided
/// p-value under Student's t with n - 2 degrees of freedom.
Regression pearson_regression(std::span<const XYPair> pairs);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
/// using the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) to stay in the fast
/// convergence region. Relative accuracy is about 1e-14.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

/// Smallest p-value stored; anything below is reported as "<1e-300".
inline constexpr double kMinReportedP = 1e-300;

/// Benjamini-Hochberg step-up q-values, returned in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

struct CorrelationRow {
  int scale_index = 0;
  Index scale_factor = 1;
  std::size_t n = 0;
  double r = 0.0;
  double p = 1.0;
  double q_fdr = 1.0;
  double slope = 0.0;
  double intercept = 0.0;
};

struct SkippedScale {
  int scale_index = 0;
  Index scale_factor = 1;
  std::string reason;
};

struct CorrelationTable {
  std::vector<CorrelationRow> rows;
  std::vector<SkippedScale> skipped;
  std::vector<std::vector<XYPair>> scatter;  // parallel to rows
  std::vector<std::string> excluded;         // "subject@scale" for C = 0 drops
  std::vector<std::string> missing;          // manifest subjects without a profile
};

/// One row per usable scale of `schedule`; q_fdr is computed jointly over
/// all usable rows. Scales with too few points or no variance are skipped.
CorrelationTable correlation_table(std::span<const ComplexityProfile> profiles, const Manifest& manifest,
                                   const ScaleSchedule& schedule);

/// `scale_index,scale_factor,n,r,p,q_fdr,slope,intercept`
std::string correlation_csv(const CorrelationTable& table);

/// Column-aligned text in the same column order, with the log base noted.
std::string correlation_text(const CorrelationTable& table);

/// Formats a p or q value; values at or below kMinReportedP print as "<1e-300".
std::string format_p(double p);

}  // namespace msc
