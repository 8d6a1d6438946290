#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynopt/objective.hpp"

namespace dynopt {

struct LsConfig {
    int max_iterations = 20;
    double grad_tolerance = 1e-6;   // stop when ||g||_inf falls below
    std::uint64_t eval_budget = 100;  // objective evaluations per invocation
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double max_step = 10.0;   // cap on trial displacement ||alpha*d||_2
    double first_step = 0.1;  // first-iteration trial displacement (inf-norm)
    double bracket_growth = 2.0;  // trial-step multiplier while bracketing

    void validate() const {
        if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
            throw std::invalid_argument("LsConfig: need 0 < c1 < c2 < 1");
        if (max_iterations < 1) throw std::invalid_argument("LsConfig: max_iterations must be >= 1");
        if (eval_budget < 1) throw std::invalid_argument("LsConfig: eval_budget must be >= 1");
        if (!(max_step > 0.0) || !(first_step > 0.0) || !(bracket_growth > 1.0))
            throw std::invalid_argument("LsConfig: step caps must be positive and growth > 1");
    }
};

struct LsResult {
    std::vector<double> x_opt;
    double f_opt = 0.0;
    int iterations_used = 0;
    std::uint64_t evals_used = 0;
    bool converged = false;
};

// Non-finite objective or gradient value; carries the best point seen.
class numeric_failure : public std::runtime_error {
  public:
    explicit numeric_failure(LsResult best)
        : std::runtime_error("local search hit a non-finite value"), best_(std::move(best)) {}
    const LsResult& best_so_far() const { return best_; }

  private:
    LsResult best_;
};

namespace detail {

// Internal signal: the per-invocation evaluation budget ran out. Never
// escapes bfgs_minimize / wolfe_line_search.
struct ls_budget_hit {};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct LineOutcome {
    double alpha = 0.0;
    double f = 0.0;
    bool wolfe_met = false;
};

// Strong-Wolfe line search (bracket + zoom with quadratic interpolation;
// Nocedal & Wright alg. 3.5/3.6). phi evaluates the objective along the
// ray and may throw ls_budget_hit; dphi is the directional derivative and
// is not charged to the budget. Returns the accepted step, or the best
// sufficient-decrease step found when the budget or iteration cap hits.
template <class Phi, class DPhi>
LineOutcome wolfe_search(Phi&& phi, DPhi&& dphi, double phi0, double dphi0, double alpha_max,
                         const LsConfig& cfg) {
    const double c1 = cfg.wolfe_c1, c2 = cfg.wolfe_c2;
    auto armijo = [&](double a, double fa) { return fa <= phi0 + c1 * a * dphi0; };

    LineOutcome best{0.0, phi0, false};  // best Armijo-satisfying step so far

    // zoom on a bracket [lo, hi] where lo satisfies Armijo and the bracket
    // contains a strong-Wolfe point
    auto zoom = [&](double lo, double f_lo, double df_lo, double hi, double f_hi) -> LineOutcome {
        for (int j = 0; j < 30; ++j) {
            double width = hi - lo;
            double a = lo + 0.5 * width;  // bisection fallback
            // quadratic model through f_lo, df_lo, f_hi; exact on quadratics
            double denom = f_hi - f_lo - df_lo * width;
            if (denom != 0.0) {
                double cand = lo - 0.5 * df_lo * width * width / denom;
                double margin = 0.1 * std::abs(width);
                if (cand > std::min(lo, hi) + margin && cand < std::max(lo, hi) - margin)
                    a = cand;
            }
            double fa = phi(a);
            if (!armijo(a, fa) || fa >= f_lo) {
                hi = a;
                f_hi = fa;
            } else {
                if (fa < best.f) best = {a, fa, false};
                double dfa = dphi(a);
                if (std::abs(dfa) <= -c2 * dphi0) return {a, fa, true};
                if (dfa * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                }
                lo = a;
                f_lo = fa;
                df_lo = dfa;
            }
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
        }
        return {lo, f_lo, false};
    };

    double prev_a = 0.0, prev_f = phi0, prev_df = dphi0;
    double a = std::min(1.0, alpha_max);
    for (int i = 0; i < 40; ++i) {
        double fa;
        try {
            fa = phi(a);
        } catch (const ls_budget_hit&) {
            return best;  // best sufficient-decrease step seen so far
        }
        if (!armijo(a, fa) || (i > 0 && fa >= prev_f)) {
            try {
                return zoom(prev_a, prev_f, prev_df, a, fa);
            } catch (const ls_budget_hit&) {
                return best;
            }
        }
        best = {a, fa, false};
        {
            double dfa = dphi(a);
            if (std::abs(dfa) <= -c2 * dphi0) return {a, fa, true};
            if (dfa >= 0.0) {
                try {
                    return zoom(a, fa, dfa, prev_a, prev_f);
                } catch (const ls_budget_hit&) {
                    return best;
                }
            }
            prev_df = dfa;
        }
        if (a >= alpha_max) {
            // capped: report the capped step if it still passes the
            // curvature test, otherwise best effort
            double dfa = dphi(a);
            return {a, fa, std::abs(dfa) <= -c2 * dphi0};
        }
        prev_a = a;
        prev_f = fa;
        a = std::min(cfg.bracket_growth * a, alpha_max);
    }
    return best;
}

}  // namespace detail

// Finds a step along `direction` from `x` satisfying the Wolfe conditions
// (c1, c2), or the best backtracked step if cfg.eval_budget runs out.
// `direction` must be a descent direction.
template <class F, class G>
double wolfe_line_search(F&& objective, G&& gradient, std::span<const double> x,
                         std::span<const double> direction, const LsConfig& cfg) {
    cfg.validate();
    if (x.size() != direction.size())
        throw std::invalid_argument("wolfe_line_search: dimension mismatch");
    std::vector<double> g0 = gradient(x);
    double dphi0 = detail::dot(g0, direction);
    if (!(dphi0 < 0.0))
        throw std::logic_error("wolfe_line_search: direction is not a descent direction");
    double f0 = objective(x);

    std::uint64_t used = 0;
    std::vector<double> trial(x.size());
    auto at = [&](double a) {
        for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + a * direction[i];
    };
    auto phi = [&](double a) {
        if (used >= cfg.eval_budget) throw detail::ls_budget_hit{};
        ++used;
        at(a);
        return objective(std::span<const double>(trial));
    };
    auto dphi = [&](double a) {
        at(a);
        std::vector<double> g = gradient(std::span<const double>(trial));
        return detail::dot(g, direction);
    };

    double alpha_max = cfg.max_step / std::max(detail::norm2(direction), 1e-300);
    return detail::wolfe_search(phi, dphi, f0, dphi0, alpha_max, cfg).alpha;
}

// Per-coordinate positive curvature estimates used to seed the inverse
// Hessian; empty = start from the identity.
using DiagMetric = std::function<std::vector<double>(std::span<const double>)>;

// Quasi-Newton minimization with the BFGS inverse-Hessian update and the
// Wolfe line search above. Never returns a point worse than x0. When
// `bounds` is given, every trial point is clamped onto the box before
// evaluation (used by searches that operate directly in x-space). When a
// curvature metric is supplied, H starts as its inverse diagonal, which
// makes the first trial step Newton-scaled instead of gradient-scaled.
template <class F, class G>
LsResult bfgs_minimize(F&& objective, G&& gradient, std::vector<double> x0, const LsConfig& cfg,
                       const BoxDomain* bounds = nullptr, const DiagMetric& metric = {}) {
    cfg.validate();
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("bfgs_minimize: empty start point");
    if (bounds) bounds->clamp(x0);

    std::uint64_t evals = 0;
    LsResult best;
    best.x_opt = x0;
    best.f_opt = std::numeric_limits<double>::infinity();

    auto eval = [&](std::span<const double> x) {
        if (evals >= cfg.eval_budget) throw detail::ls_budget_hit{};
        ++evals;
        double f = objective(x);
        if (!std::isfinite(f)) {
            best.evals_used = evals;
            throw numeric_failure(best);
        }
        if (f < best.f_opt) {
            best.f_opt = f;
            best.x_opt.assign(x.begin(), x.end());
        }
        return f;
    };
    auto grad = [&](std::span<const double> x) {
        std::vector<double> g = gradient(x);
        for (double v : g)
            if (!std::isfinite(v)) {
                best.evals_used = evals;
                throw numeric_failure(best);
            }
        return g;
    };

    std::vector<double> x = x0, trial(n), d(n), hy(n);
    std::vector<double> hess(n * n, 0.0);  // inverse-Hessian approximation
    auto reset_hess = [&] {
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) hess[i * n + i] = 1.0;
    };
    auto seed_hess_metric = [&](std::span<const double> p) {
        std::vector<double> curv = metric(p);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            hess[i * n + i] = 1.0 / std::max(curv[i], 1e-8);
    };
    reset_hess();

    double f = 0.0;
    bool converged = false;
    int iter = 0;
    int skips = 0;

    try {
        f = eval(x);
        std::vector<double> g = grad(x);
        if (metric) seed_hess_metric(x);

        for (iter = 0; iter < cfg.max_iterations; ++iter) {
            if (detail::norm_inf(g) <= cfg.grad_tolerance) {
                converged = true;
                break;
            }
            // d = -H g
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc -= hess[i * n + j] * g[j];
                d[i] = acc;
            }
            if (detail::dot(g, d) >= 0.0) {  // lost positive definiteness
                reset_hess();
                for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            }
            if (iter == 0 && !metric) {
                // conservative first trial: with H = I the raw gradient step
                // overshoots basins on steep multimodal terrain
                double dn = detail::norm_inf(d);
                if (dn > cfg.first_step)
                    for (double& v : d) v *= cfg.first_step / dn;
            }

            double dphi0 = detail::dot(g, d);
            auto at = [&](double a) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + a * d[i];
                if (bounds) bounds->clamp(trial);
            };
            auto phi = [&](double a) {
                at(a);
                return eval(trial);
            };
            auto dphi = [&](double a) {
                at(a);
                return detail::dot(grad(trial), d);
            };
            double alpha_max = cfg.max_step / std::max(detail::norm2(d), 1e-300);
            detail::LineOutcome line =
                detail::wolfe_search(phi, dphi, f, dphi0, alpha_max, cfg);
            if (line.alpha <= 0.0) break;  // no acceptable step

            at(line.alpha);
            std::vector<double> g_new = grad(trial);
            std::vector<double> s(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = trial[i] - x[i];
                y[i] = g_new[i] - g[i];
            }
            double sy = detail::dot(s, y);
            if (sy > 1e-10) {
                skips = 0;
                if (iter == 0 && !metric) {
                    // standard scalar prescale before the first update
                    double yy = detail::dot(y, y);
                    if (yy > 0.0) {
                        double scale = sy / yy;
                        for (std::size_t i = 0; i < n; ++i) hess[i * n + i] = scale;
                    }
                }
                double rho = 1.0 / sy;
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += hess[i * n + j] * y[j];
                    hy[i] = acc;
                }
                double yhy = detail::dot(y, hy);
                double c = rho * rho * yhy + rho;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        hess[i * n + j] +=
                            c * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
            } else if (++skips >= 3) {  // nonconvex terrain safeguard
                reset_hess();
                skips = 0;
            }
            x = trial;
            f = line.f;
            g = std::move(g_new);
        }
        if (!converged && detail::norm_inf(g) <= cfg.grad_tolerance) converged = true;
    } catch (const detail::ls_budget_hit&) {
        // per-invocation budget exhausted: report the best point seen
    }

    LsResult out = best;
    out.iterations_used = iter;
    out.evals_used = evals;
    out.converged = converged;
    return out;
}

}  // namespace dynopt
