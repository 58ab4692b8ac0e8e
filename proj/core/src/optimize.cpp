#include "bms/optimize.hpp"

#include "bms/error.hpp"

#include <chrono>
#include <cmath>
#include <deque>

namespace bms {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration-cap";
    case SolveStatus::conditioning: return "conditioning";
  }
  return "unknown";
}

namespace {

struct Eval {
  double value;
  Vector grad;
};

Eval evaluate(const Objective& f, const Vector& x, int& counter) {
  Eval e{0.0, Vector::Zero(x.size())};
  e.value = f(x, &e.grad);
  ++counter;
  if (!std::isfinite(e.value) || !e.grad.allFinite())
    throw CallableError("objective returned a non-finite value or gradient");
  if (e.grad.size() != x.size()) throw CallableError("objective gradient has the wrong size");
  return e;
}

double stationarity(const Vector& x, const Vector& g, const Projection& proj) {
  if (g.size() == 0) return 0.0;
  if (!proj) return g.cwiseAbs().maxCoeff();
  return (x - proj(x - g)).cwiseAbs().maxCoeff();
}

}  // namespace

MinimizeResult quasi_newton_min(const Objective& f, Vector x0, const QuasiNewtonOptions& opt,
                                const Projection& projection, const CurvatureModel& curvature) {
  const auto start = std::chrono::steady_clock::now();
  MinimizeResult out;
  SolveReport& rep = out.report;

  Vector x = projection ? projection(x0) : std::move(x0);
  Eval cur = evaluate(f, x, rep.evaluations);
  double stat = stationarity(x, cur.grad, projection);
  const double target = opt.tolerance + opt.relative_tolerance * stat;
  rep.tolerance = target;

  std::deque<std::pair<Vector, Vector>> pairs;  // (s, y)
  rep.status = SolveStatus::iteration_cap;

  for (rep.iterations = 0;; ++rep.iterations) {
    if (stat <= target) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (rep.iterations >= opt.max_iterations) break;

    // Variables pinned at the boundary with the gradient pushing outward.
    Eigen::Array<bool, Eigen::Dynamic, 1> pinned = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(x.size(), false);
    if (projection) {
      const Vector probe = projection(x - cur.grad);
      for (Eigen::Index i = 0; i < x.size(); ++i) pinned(i) = probe(i) == x(i) && cur.grad(i) != 0.0;
    }
    auto mask = [&](Vector v) {
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (pinned(i)) v(i) = 0.0;
      return v;
    };

    InverseCurvature h0;
    if (curvature) {
      try {
        h0 = curvature(x);
      } catch (const ConditioningError&) {
        h0 = nullptr;
      }
    }

    auto two_loop = [&](const Vector& g) {
      Vector q = mask(g);
      std::vector<double> alpha(pairs.size());
      for (std::size_t j = pairs.size(); j-- > 0;) {
        const auto& [s, y] = pairs[j];
        alpha[j] = s.dot(q) / y.dot(s);
        q -= alpha[j] * y;
      }
      Vector r;
      if (h0) {
        r = h0(q);
      } else if (!pairs.empty()) {
        const auto& [s, y] = pairs.back();
        r = (s.dot(y) / y.dot(y)) * q;
      } else {
        const double gn = q.norm();
        r = (gn > 1.0 ? 1.0 / gn : 1.0) * q;
      }
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& [s, y] = pairs[j];
        const double beta = y.dot(r) / y.dot(s);
        r += (alpha[j] - beta) * s;
      }
      return Vector(-mask(r));
    };

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector d;
      if (attempt == 0) {
        d = two_loop(cur.grad);
      } else {
        // Fall back to steepest descent with fresh memory.
        pairs.clear();
        d = -mask(cur.grad);
        const double dn = d.norm();
        if (dn > 1.0) d /= dn;
      }
      if (!d.allFinite()) continue;

      double step = 1.0;
      for (int bt = 0; bt <= opt.max_backtracks; ++bt, step *= 0.5) {
        Vector xn = x + step * d;
        if (projection) xn = projection(xn);
        const double decrease = cur.grad.dot(xn - x);
        if (bt == 0 && decrease >= 0.0 && attempt == 0) break;  // not a descent direction
        Eval next = evaluate(f, xn, rep.evaluations);
        bool ok = next.value <= cur.value + opt.armijo * decrease;
        double next_stat = 0.0;
        const double flat = 1e-12 * std::max(1.0, std::abs(cur.value));
        if (!ok && std::abs(next.value - cur.value) <= flat) {
          // Round-off regime: the cost cannot resolve the step, accept when
          // the gradient still improves.
          next_stat = stationarity(xn, next.grad, projection);
          ok = next_stat < stat;
        }
        if (!ok) continue;

        Vector s = xn - x;
        Vector y = next.grad - cur.grad;
        const double sy = s.dot(y);
        if (opt.memory > 0 && sy > 1e-12 * s.norm() * y.norm()) {
          pairs.emplace_back(std::move(s), std::move(y));
          while (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
        }
        x = std::move(xn);
        cur = std::move(next);
        stat = stationarity(x, cur.grad, projection);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::conditioning;
      break;
    }
  }

  rep.gradient_norm = stat;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.x = std::move(x);
  out.value = cur.value;
  return out;
}

MinimizeResult quasi_newton_min_or_throw(const Objective& f, Vector x0, const QuasiNewtonOptions& options,
                                         const Projection& projection, const CurvatureModel& curvature) {
  MinimizeResult r = quasi_newton_min(f, std::move(x0), options, projection, curvature);
  if (r.report.status != SolveStatus::converged)
    throw ConvergenceFailure("minimization stopped: " + to_string(r.report.status) + ", gradient norm " +
                                 std::to_string(r.report.gradient_norm),
                             r.x, r.report.gradient_norm);
  return r;
}

Projection box_projection(Vector lower, Vector upper) {
  require(lower.size() == upper.size(), "box_projection: bound sizes differ");
  require((lower.array() <= upper.array()).all(), "box_projection: lower > upper");
  return [lo = std::move(lower), hi = std::move(upper)](const Vector& x) -> Vector {
    return x.cwiseMax(lo).cwiseMin(hi);
  };
}

}  // namespace bms
