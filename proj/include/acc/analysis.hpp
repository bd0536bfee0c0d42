#pragma once

#include <map>
#include <string>
#include <vector>

#include "acc/types.hpp"

namespace acc {

struct DegenerateFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discrete W^{1,1}, H^1 and W^{1,inf} error measures of a per-atom field.
/// The gradient is the forward difference over one lattice spacing.
struct ErrorReport {
  double w11 = 0;
  double h1 = 0;
  double w1inf = 0;
  // gradient-only seminorm parts, emitted alongside the full norms
  double w11_grad = 0;
  double h1_grad = 0;
  double w1inf_grad = 0;
};

ErrorReport error_norms(const Vec& e, double epsilon);

/// Least-squares slopes of log(err) against log(eps). Data points below
/// 1e-14 are treated as exact and excluded; throws DegenerateFit when fewer
/// than two usable points remain.
struct RateFit {
  double rate = 0;
  double prefactor = 0;  ///< err ~ prefactor * eps^rate
};

RateFit fit_rate(const std::vector<double>& eps,
                 const std::vector<double>& err);

/// One refinement level of a convergence study.
struct StudyRow {
  int n_atoms = 0;
  double epsilon = 0;
  ErrorReport err;
};

struct ConvergenceStudy {
  std::string method_tag;
  int m = 0;    ///< enrichment seed count, 0 when not applicable
  int ell = 0;  ///< Krylov depth, 0 when not applicable
  std::vector<StudyRow> rows;

  RateFit rate_w11() const;
  RateFit rate_h1() const;
  RateFit rate_w1inf() const;
};

/// CSV writing: 17 significant digits, '.' decimal point, no padding.
std::string format_g17(double v);
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_study_csv(const std::string& path, const ConvergenceStudy& study);

/// Per-atom field dump: columns x, u (plus one column per extra field).
void write_field_csv(const std::string& path, const Vec& x, const Vec& u,
                     const std::map<std::string, Vec>& extra = {});

}  // namespace acc
