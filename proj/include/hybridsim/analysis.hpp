#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <math.h>  // boost pchip calls unqualified isnan

#include <Eigen/Dense>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>

#include "hybridsim/circuit.hpp"

namespace hybridsim {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ensemble statistics of one sweep cell.
struct EnsemblePoint {
  NoiseModel model = NoiseModel::kBulkNoise;
  Boundary boundary = Boundary::kPeriodic;
  std::size_t n_qubits = 0;
  double measure_rate = 0.0;
  double reset_rate = 0.0;
  std::size_t t_noise = 0;
  std::size_t depth = 0;
  std::size_t n_traj = 0;
  double i_mean = 0.0, i_stderr = 0.0;
  double en_mean = 0.0, en_stderr = 0.0;
  double sa_mean = 0.0, sab_mean = 0.0;
  double purity_exp_mean = 0.0;

  bool operator==(const EnsemblePoint&) const = default;
};

/// One (x, y) observation; stderr = 0 means unknown.
struct Sample {
  double x = 0.0;
  double y = 0.0;
  double stderr = 0.0;
};

struct LinearFit {
  double slope = 0.0, intercept = 0.0;
  double slope_stderr = 0.0, intercept_stderr = 0.0;
  double rss = 0.0;
};

namespace detail {

// Weights 1/stderr^2 only when every point carries a positive stderr.
inline std::vector<double> fit_weights(const std::vector<Sample>& s) {
  const bool weighted =
      !s.empty() && std::all_of(s.begin(), s.end(), [](const Sample& p) { return p.stderr > 0.0; });
  std::vector<double> w(s.size(), 1.0);
  if (weighted)
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = 1.0 / (s[i].stderr * s[i].stderr);
  return w;
}

// Weighted least squares of y on u (u = transformed x), centred for stability.
inline LinearFit weighted_line(const std::vector<double>& u, const std::vector<double>& y,
                               const std::vector<double>& w, bool known_variance) {
  double sw = 0, su = 0, sy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sw += w[i];
    su += w[i] * u[i];
    sy += w[i] * y[i];
  }
  const double ub = su / sw, yb = sy / sw;
  double suu = 0, suy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += w[i] * (u[i] - ub) * (u[i] - ub);
    suy += w[i] * (u[i] - ub) * (y[i] - yb);
  }
  if (!(suu > 0.0)) throw AnalysisError("degenerate abscissae: all x equal");
  LinearFit f;
  f.slope = suy / suu;
  f.intercept = yb - f.slope * ub;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = y[i] - (f.slope * u[i] + f.intercept);
    f.rss += w[i] * r * r;
  }
  // Known stderrs give the covariance directly; otherwise scale by the residual variance.
  const std::size_t dof = u.size() > 2 ? u.size() - 2 : 0;
  const double s2 = known_variance ? 1.0 : (dof ? f.rss / double(dof) : 0.0);
  f.slope_stderr = std::sqrt(s2 / suu);
  f.intercept_stderr = std::sqrt(s2 * (1.0 / sw + ub * ub / suu));
  return f;
}

}  // namespace detail

struct ThermoFit {
  double s_inf = 0.0, c = 0.0;
  double s_inf_stderr = 0.0, c_stderr = 0.0;
  double rss = 0.0;
};

/// Fits S(L) = c / L + S_inf; samples carry x = L.
inline ThermoFit extrapolate_thermo(const std::vector<Sample>& points) {
  std::vector<double> u, y;
  for (const auto& p : points) {
    if (!(p.x > 0.0)) throw AnalysisError("system sizes must be positive");
    u.push_back(1.0 / p.x);
    y.push_back(p.y);
  }
  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 2)
    throw AnalysisError("extrapolation needs at least two distinct L");
  const bool known = std::all_of(points.begin(), points.end(), [](const Sample& p) { return p.stderr > 0.0; });
  const auto f = detail::weighted_line(u, y, detail::fit_weights(points), known);
  return {f.intercept, f.slope, f.intercept_stderr, f.slope_stderr, f.rss};
}

enum class FitModel { kPowerFixedThird, kPowerFree, kLogLinear };

inline std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::kPowerFixedThird: return "pow13";
    case FitModel::kPowerFree: return "powfree";
    default: return "log";
  }
}
inline FitModel parse_fit_model(const std::string& s) {
  if (s == "pow13") return FitModel::kPowerFixedThird;
  if (s == "powfree") return FitModel::kPowerFree;
  if (s == "log") return FitModel::kLogLinear;
  throw AnalysisError("unknown fit model '" + s + "' (expected pow13, powfree or log)");
}

inline constexpr double kDefaultQMax = 1.0 / 8.0;

/// S(q) = a q^exponent + b for the power models, S = a ln q + b for the log model.
/// rss is the minimized (weighted) objective; residuals are plain y - model(q).
struct FitResult {
  FitModel model = FitModel::kPowerFixedThird;
  double a = 0.0, b = 0.0;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double rss = 0.0;
  std::vector<double> q;
  std::vector<double> residuals;

  double predict(double x) const {
    return model == FitModel::kLogLinear ? a * std::log(x) + b : a * std::pow(x, exponent) + b;
  }
};

namespace detail {

inline FitResult power_fit(const std::vector<Sample>& s, const std::vector<double>& w, double e) {
  std::vector<double> u, y;
  for (const auto& p : s) {
    u.push_back(std::pow(p.x, -e));
    y.push_back(p.y);
  }
  const auto f = weighted_line(u, y, w, false);
  FitResult r;
  r.a = f.slope;
  r.b = f.intercept;
  r.exponent = -e;
  r.rss = f.rss;
  return r;
}

}  // namespace detail

/// Profiled objective of the free power law at decay e (S = a q^-e + b).
inline double power_profile_rss(const std::vector<Sample>& points, double e) {
  return detail::power_fit(points, detail::fit_weights(points), e).rss;
}

/// Fits S(q) over the window q <= q_max; samples carry x = q.
inline FitResult fit_scaling(const std::vector<Sample>& points, FitModel model, double q_max = kDefaultQMax) {
  std::vector<Sample> s;
  for (const auto& p : points) {
    if (!(p.x > 0.0)) throw AnalysisError("fit_scaling needs q > 0");
    if (p.x <= q_max) s.push_back(p);
  }
  const std::size_t need = model == FitModel::kPowerFree ? 4 : 3;
  if (s.size() < need)
    throw AnalysisError(to_string(model) + " fit needs at least " + std::to_string(need) +
                        " points with q <= q_max, got " + std::to_string(s.size()));
  const auto w = detail::fit_weights(s);

  FitResult r;
  switch (model) {
    case FitModel::kPowerFixedThird:
      r = detail::power_fit(s, w, 1.0 / 3.0);
      break;
    case FitModel::kLogLinear: {
      std::vector<double> u, y;
      for (const auto& p : s) {
        u.push_back(std::log(p.x));
        y.push_back(p.y);
      }
      const auto f = detail::weighted_line(u, y, w, false);
      r.a = f.slope;
      r.b = f.intercept;
      r.rss = f.rss;
      break;
    }
    case FitModel::kPowerFree: {
      // Grid over e in [0.1, 0.6], then Brent (golden section with parabolic steps)
      // within one grid cell either side of the best node.
      constexpr double lo = 0.1, hi = 0.6, h = 0.01;
      auto obj = [&](double e) { return detail::power_fit(s, w, e).rss; };
      double best_e = lo, best = obj(lo);
      for (int k = 1; lo + k * h <= hi + 1e-12; ++k) {
        const double e = lo + k * h, v = obj(e);
        if (v < best) best = v, best_e = e;
      }
      const auto m = boost::math::tools::brent_find_minima(obj, std::max(best_e - h, 1e-6), best_e + h,
                                                           std::numeric_limits<double>::digits);
      r = detail::power_fit(s, w, m.second <= best ? m.first : best_e);
      break;
    }
  }
  r.model = model;
  for (const auto& p : s) {
    r.q.push_back(p.x);
    r.residuals.push_back(p.y - r.predict(p.x));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Finite-size data collapse.

struct CollapseSample {
  double size = 0.0;
  double q = 0.0;
  double g = 0.0;
};

struct CollapseTracePoint {
  double q_c = 0.0, nu = 0.0, cost = 0.0;
};

struct CollapseResult {
  double q_c = 0.0, nu = 0.0, cost = 0.0;
  std::vector<CollapseTracePoint> trace;
};

struct CollapseOptions {
  double qc_lo = 0.0, qc_hi = 0.0;
  double nu_lo = 0.0, nu_hi = 0.0;
  std::size_t grid = 21;         // nodes per axis
  std::size_t knots = 30;        // spline segments over the pooled x range
  double smoothing = 1e-6;       // second-difference penalty, relative to trace(B^T B)
  double tol = 1e-6;             // refinement stops below this fraction of each range
};

namespace detail {

// Uniform cubic B-spline basis weights at fractional position t in [0, 1).
inline void cubic_bspline_weights(double t, double out[4]) {
  const double s = 1.0 - t;
  out[0] = s * s * s / 6.0;
  out[1] = (3 * t * t * t - 6 * t * t + 4) / 6.0;
  out[2] = (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0;
  out[3] = t * t * t / 6.0;
}

// Mean squared deviation of (x, y) from a penalized cubic spline fit.
inline double pspline_mse(const std::vector<double>& x, const std::vector<double>& y, std::size_t segments,
                          double smoothing) {
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double x0 = *mn, span = *mx - *mn;
  const std::size_t nb = segments + 3;
  Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd bty = Eigen::VectorXd::Zero(nb);
  std::vector<std::size_t> cell(x.size());
  std::vector<std::array<double, 4>> wts(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double pos = span > 0 ? (x[i] - x0) / span * double(segments) : 0.0;
    std::size_t c = std::min<std::size_t>(std::size_t(std::max(pos, 0.0)), segments - 1);
    cubic_bspline_weights(pos - double(c), wts[i].data());
    cell[i] = c;
    for (int a = 0; a < 4; ++a) {
      bty(c + a) += wts[i][a] * y[i];
      for (int b = 0; b < 4; ++b) btb(c + a, c + b) += wts[i][a] * wts[i][b];
    }
  }
  const double lambda = smoothing * btb.trace();
  for (std::size_t k = 0; k + 2 < nb; ++k) {
    const double d[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) btb(k + a, k + b) += lambda * d[a] * d[b];
  }
  const Eigen::VectorXd coef = btb.ldlt().solve(bty);
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = 0;
    for (int a = 0; a < 4; ++a) f += wts[i][a] * coef(cell[i] + a);
    sse += (y[i] - f) * (y[i] - f);
  }
  return sse / double(x.size());
}

}  // namespace detail

/// Estimates (q_c, nu) so that g(q, L) - g(q_c, L) collapses onto one curve of
/// (q - q_c) L^{1/nu}.
class CollapseProblem {
 public:
  CollapseProblem(const std::vector<CollapseSample>& data, const CollapseOptions& opts) : opts_(opts) {
    std::map<double, std::vector<std::pair<double, double>>> by_size;
    for (const auto& s : data) {
      if (!(s.size > 0.0)) throw AnalysisError("collapse sizes must be positive");
      by_size[s.size].emplace_back(s.q, s.g);
    }
    if (by_size.size() < 3)
      throw AnalysisError("collapse needs at least 3 system sizes, got " + std::to_string(by_size.size()));
    if (!(opts.qc_lo <= opts.qc_hi) || !(opts.nu_lo <= opts.nu_hi) || !(opts.nu_lo > 0.0))
      throw AnalysisError("collapse search ranges must be ordered with nu > 0");
    if (opts.grid < 2 || opts.knots < 1) throw AnalysisError("collapse grid and knot counts too small");
    double support_lo = -std::numeric_limits<double>::infinity();
    double support_hi = std::numeric_limits<double>::infinity();
    for (auto& [size, pts] : by_size) {
      std::sort(pts.begin(), pts.end());
      for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first == pts[i - 1].first)
          throw AnalysisError("duplicate q for size " + std::to_string(size));
      if (pts.size() < 5)
        throw AnalysisError("collapse needs at least 5 q values per size; L = " + std::to_string(size) +
                            " has " + std::to_string(pts.size()));
      support_lo = std::max(support_lo, pts.front().first);
      support_hi = std::min(support_hi, pts.back().first);
      Series s;
      s.size = size;
      std::vector<double> qs, gs;
      for (const auto& [q, g] : pts) {
        s.q.push_back(q);
        s.g.push_back(g);
        qs.push_back(q);
        gs.push_back(g);
      }
      s.interp = std::make_shared<Pchip>(std::move(qs), std::move(gs));
      series_.push_back(std::move(s));
    }
    if (opts.qc_lo < support_lo || opts.qc_hi > support_hi)
      throw AnalysisError("q_c search range lies outside the q support shared by all sizes");
  }

  double cost(double q_c, double nu) const {
    std::vector<double> x, y;
    for (const auto& s : series_) {
      const double scale = std::pow(s.size, 1.0 / nu);
      const double gc = (*s.interp)(q_c);
      for (std::size_t i = 0; i < s.q.size(); ++i) {
        x.push_back((s.q[i] - q_c) * scale);
        y.push_back(s.g[i] - gc);
      }
    }
    return detail::pspline_mse(x, y, opts_.knots, opts_.smoothing);
  }

  CollapseResult solve() const {
    CollapseResult r;
    auto eval = [&](double qc, double nu) {
      const double c = cost(qc, nu);
      r.trace.push_back({qc, nu, c});
      return c;
    };
    const std::size_t n = opts_.grid;
    const double dq = (opts_.qc_hi - opts_.qc_lo) / double(n - 1);
    const double dn = (opts_.nu_hi - opts_.nu_lo) / double(n - 1);
    r.cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double qc = opts_.qc_lo + double(i) * dq, nu = opts_.nu_lo + double(j) * dn;
        const double c = eval(qc, nu);
        if (c < r.cost) r = {qc, nu, c, std::move(r.trace)};
      }
    // Compass search from the best node, halving the step when no neighbour improves.
    double sq = dq, sn = dn;
    while (sq > opts_.tol * (opts_.qc_hi - opts_.qc_lo) || sn > opts_.tol * (opts_.nu_hi - opts_.nu_lo)) {
      bool moved = false;
      const double cand[4][2] = {{r.q_c + sq, r.nu}, {r.q_c - sq, r.nu}, {r.q_c, r.nu + sn}, {r.q_c, r.nu - sn}};
      for (const auto& c : cand) {
        if (c[0] < opts_.qc_lo || c[0] > opts_.qc_hi || c[1] < opts_.nu_lo || c[1] > opts_.nu_hi) continue;
        const double v = eval(c[0], c[1]);
        if (v < r.cost) {
          r.q_c = c[0], r.nu = c[1], r.cost = v;
          moved = true;
        }
      }
      if (!moved) sq *= 0.5, sn *= 0.5;
      if (sq == 0.0 && sn == 0.0) break;
    }
    return r;
  }

 private:
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  struct Series {
    double size = 0.0;
    std::vector<double> q, g;
    std::shared_ptr<Pchip> interp;
  };
  CollapseOptions opts_;
  std::vector<Series> series_;
};

inline CollapseResult data_collapse(const std::vector<CollapseSample>& data, const CollapseOptions& opts) {
  return CollapseProblem(data, opts).solve();
}

}  // namespace hybridsim
