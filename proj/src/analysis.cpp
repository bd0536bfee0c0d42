#include "acc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace acc {

ErrorReport error_norms(const Vec& e, double epsilon) {
  int n = static_cast<int>(e.size());
  if (n < 2) throw DimensionMismatch("error_norms: need at least two atoms");
  ErrorReport r;
  double sum1 = 0, sum2 = 0, sum1g = 0, sum2g = 0;
  for (int j = 0; j < n; ++j) {
    double de = (j + 1 < n) ? (e[j + 1] - e[j]) / epsilon : 0.0;
    sum1 += std::abs(e[j]) + std::abs(de);
    sum2 += e[j] * e[j] + de * de;
    sum1g += std::abs(de);
    sum2g += de * de;
    r.w1inf = std::max({r.w1inf, std::abs(e[j]), std::abs(de)});
    r.w1inf_grad = std::max(r.w1inf_grad, std::abs(de));
  }
  r.w11 = epsilon * sum1;
  r.h1 = std::sqrt(epsilon * sum2);
  r.w11_grad = epsilon * sum1g;
  r.h1_grad = std::sqrt(epsilon * sum2g);
  return r;
}

RateFit fit_rate(const std::vector<double>& eps,
                 const std::vector<double>& err) {
  if (eps.size() != err.size())
    throw DimensionMismatch("fit_rate: length mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < eps.size(); ++i) {
    if (err[i] < 1e-14) continue;  // converged to machine precision
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(err[i]));
  }
  size_t m = lx.size();
  if (m < 2) throw DegenerateFit("fit_rate: fewer than two usable points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sx += lx[i], sy += ly[i];
    sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
  }
  double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-30)
    throw DegenerateFit("fit_rate: collinear abscissae");
  RateFit f;
  f.rate = (m * sxy - sx * sy) / denom;
  f.prefactor = std::exp((sy - f.rate * sx) / m);
  return f;
}

namespace {
std::vector<double> eps_col(const ConvergenceStudy& s) {
  std::vector<double> v;
  for (const auto& r : s.rows) v.push_back(r.epsilon);
  return v;
}
}  // namespace

RateFit ConvergenceStudy::rate_w11() const {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.err.w11);
  return fit_rate(eps_col(*this), e);
}

RateFit ConvergenceStudy::rate_h1() const {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.err.h1);
  return fit_rate(eps_col(*this), e);
}

RateFit ConvergenceStudy::rate_w1inf() const {
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.err.w1inf);
  return fit_rate(eps_col(*this), e);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw DimensionMismatch("csv row width != header width");
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

void write_study_csv(const std::string& path, const ConvergenceStudy& study) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : study.rows)
    rows.push_back({std::to_string(r.n_atoms), format_g17(r.epsilon),
                    format_g17(r.err.w11), format_g17(r.err.h1),
                    format_g17(r.err.w1inf), format_g17(r.err.w11_grad),
                    format_g17(r.err.h1_grad), format_g17(r.err.w1inf_grad),
                    std::to_string(study.m), std::to_string(study.ell),
                    study.method_tag});
  write_csv(path,
            {"n_atoms", "epsilon", "w11", "h1", "w1inf", "w11_grad", "h1_grad",
             "w1inf_grad", "m", "ell", "method_tag"},
            rows);
}

void write_field_csv(const std::string& path, const Vec& x, const Vec& u,
                     const std::map<std::string, Vec>& extra) {
  if (x.size() != u.size())
    throw DimensionMismatch("field csv: x and u lengths differ");
  std::vector<std::string> header{"x", "u"};
  for (const auto& [name, v] : extra) {
    if (v.size() != x.size())
      throw DimensionMismatch("field csv: extra column length");
    header.push_back(name);
  }
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    std::vector<std::string> row{format_g17(x[j]), format_g17(u[j])};
    for (const auto& [name, v] : extra) row.push_back(format_g17(v[j]));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

}  // namespace acc
