#include "radloc/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace radloc {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho = 0.0;
};

// Strong-Wolfe line search (bracket + zoom with bisection/interpolation).
// phi(t) = f(x + t*d). Returns the accepted step length, or 0 on failure.
class LineSearch {
 public:
  LineSearch(const LbfgsObjective& objective, std::span<const double> x,
             std::span<const double> direction, double f0, double g0,
             const LbfgsOptions& opt)
      : objective_(objective),
        x_(x),
        direction_(direction),
        f0_(f0),
        g0_(g0),
        opt_(opt),
        trial_(x.size()),
        grad_(x.size()) {}

  double run() {
    double t_prev = 0.0;
    double f_prev = f0_;
    double g_prev = g0_;
    double t = 1.0;
    for (int iter = 0; iter < opt_.max_line_search_steps; ++iter) {
      const double f = eval(t);
      const double g = dg_;
      if (f > f0_ + opt_.wolfe_c1 * t * g0_ || (iter > 0 && f >= f_prev))
        return zoom(t_prev, f_prev, g_prev, t, f, g);
      if (std::abs(g) <= -opt_.wolfe_c2 * g0_) return t;
      if (g >= 0.0) return zoom(t, f, g, t_prev, f_prev, g_prev);
      t_prev = t;
      f_prev = f;
      g_prev = g;
      t *= 2.0;
    }
    return 0.0;
  }

  double accepted_f() const { return f_; }
  std::span<const double> accepted_grad() const { return grad_; }
  std::span<const double> accepted_x() const { return trial_; }

 private:
  double eval(double t) {
    for (std::size_t i = 0; i < x_.size(); ++i)
      trial_[i] = x_[i] + t * direction_[i];
    f_ = objective_(trial_, grad_);
    dg_ = dot(grad_, direction_);
    return f_;
  }

  double zoom(double lo, double f_lo, double g_lo, double hi, double f_hi,
              double /*g_hi*/) {
    for (int iter = 0; iter < opt_.max_line_search_steps; ++iter) {
      // Quadratic interpolation using (lo, f_lo, g_lo) and f_hi; fall back
      // to bisection when the minimizer is outside or too close to an edge.
      double t = lo + 0.5 * (hi - lo);
      const double denom = 2.0 * (f_hi - f_lo - g_lo * (hi - lo));
      if (denom != 0.0) {
        const double cand = lo - g_lo * (hi - lo) * (hi - lo) / denom;
        const double margin = 0.1 * std::abs(hi - lo);
        if (std::min(lo, hi) + margin <= cand &&
            cand <= std::max(lo, hi) - margin)
          t = cand;
      }
      const double f = eval(t);
      const double g = dg_;
      if (f > f0_ + opt_.wolfe_c1 * t * g0_ || f >= f_lo) {
        hi = t;
        f_hi = f;
      } else {
        if (std::abs(g) <= -opt_.wolfe_c2 * g0_) return t;
        if (g * (hi - lo) >= 0.0) {
          hi = lo;
          f_hi = f_lo;
        }
        lo = t;
        f_lo = f;
        g_lo = g;
      }
      if (std::abs(hi - lo) < 1e-16) break;
    }
    // Best point satisfying sufficient decrease so far.
    const double f = eval(lo);
    return (lo > 0.0 && f <= f0_ + opt_.wolfe_c1 * lo * g0_) ? lo : 0.0;
  }

  const LbfgsObjective& objective_;
  std::span<const double> x_;
  std::span<const double> direction_;
  double f0_;
  double g0_;
  const LbfgsOptions& opt_;
  std::vector<double> trial_;
  std::vector<double> grad_;
  double f_ = 0.0;
  double dg_ = 0.0;
};

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective,
                           std::vector<double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);

  std::vector<double> grad(n);
  double fx = objective(result.x, grad);
  result.fx = fx;

  std::deque<Pair> history;
  std::vector<double> direction(n);
  std::vector<double> alpha_buf;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (inf_norm(grad) <= options.grad_tolerance) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
    alpha_buf.assign(history.size(), 0.0);
    for (std::size_t h = history.size(); h-- > 0;) {
      const Pair& p = history[h];
      alpha_buf[h] = p.rho * dot(p.s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha_buf[h] * p.y[i];
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& d : direction) d *= gamma;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const Pair& p = history[h];
      const double beta = p.rho * dot(p.y, direction);
      for (std::size_t i = 0; i < n; ++i)
        direction[i] += (alpha_buf[h] - beta) * p.s[i];
    }

    double dir_deriv = dot(grad, direction);
    if (dir_deriv >= 0.0) {
      // Not a descent direction (stale curvature); restart from steepest.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
      dir_deriv = dot(grad, direction);
      if (dir_deriv >= 0.0) break;
    }

    LineSearch search(objective, result.x, direction, fx, dir_deriv, options);
    const double step = search.run();
    if (step <= 0.0) break;

    Pair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    const auto new_x = search.accepted_x();
    const auto new_grad = search.accepted_grad();
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = new_x[i] - result.x[i];
      pair.y[i] = new_grad[i] - grad[i];
    }
    const double sy = dot(pair.s, pair.y);

    std::copy(new_x.begin(), new_x.end(), result.x.begin());
    std::copy(new_grad.begin(), new_grad.end(), grad.begin());
    fx = search.accepted_f();
    result.fx = fx;
    result.objective_trace.push_back(fx);
    ++result.iterations;

    if (sy > 1e-10) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > static_cast<std::size_t>(options.memory))
        history.pop_front();
    }
  }
  return result;
}

}  // namespace radloc
