#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace addae {

/// Smooth objective: returns the cost at x and fills grad (same size as x).
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimSettings {
    int memory_pairs = 10;       // L-BFGS curvature-pair history
    int max_iters = 2000;        // fine-tuning budget
    int pretrain_max_iters = 500;
    // Above the knee the residual is linearly representable, so training
    // converges as deep as it is allowed to; the gradient tolerance is what
    // pins the reconstruction-error floor there. 1e-4 lands that floor at
    // the reference error levels (~1e-3); 1e-6 would overshoot them tenfold.
    double grad_tol = 1e-4;      // infinity norm of the gradient
    double rel_cost_tol = 1e-10; // relative decrease over rel_cost_window iterations
    int rel_cost_window = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;

    OptimSettings for_pretraining() const {
        OptimSettings s = *this;
        s.max_iters = pretrain_max_iters;
        return s;
    }
};

enum class StopReason { GradTol, RelCost, MaxIters, LineSearchFailure };

inline const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::GradTol: return "grad_tol";
        case StopReason::RelCost: return "rel_cost";
        case StopReason::MaxIters: return "max_iters";
        case StopReason::LineSearchFailure: return "line_search_failure";
    }
    return "unknown";
}

struct OptimResult {
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
    StopReason stop_reason = StopReason::MaxIters;
    std::vector<double> cost_history;   // cost after each accepted iteration, starting at x0
    std::vector<double> grad_norms;     // infinity norms aligned with cost_history
};

namespace detail {

struct LineSearchPoint {
    double t = 0.0;
    double f = 0.0;
    double slope = 0.0;  // phi'(t) = g(x + t p) . p
    Eigen::VectorXd x;
    Eigen::VectorXd g;
};

struct LineSearchOutcome {
    bool ok = false;
    LineSearchPoint point;
};

/// Strong Wolfe line search (bracket then zoom, cubic interpolation).
/// If the curvature condition cannot be met within the budget, the best point
/// satisfying sufficient decrease is returned; the caller's curvature-pair
/// test decides whether the step is usable for the Hessian update.
class WolfeSearch {
public:
    WolfeSearch(const Objective& obj, const Eigen::VectorXd& x0, double f0, const Eigen::VectorXd& g0,
                const Eigen::VectorXd& p, double c1, double c2)
        : obj_(obj), x0_(x0), p_(p), f0_(f0), slope0_(g0.dot(p)), c1_(c1), c2_(c2) {}

    LineSearchOutcome run() {
        if (!(slope0_ < 0.0)) return {};
        LineSearchPoint prev;
        prev.t = 0.0;
        prev.f = f0_;
        prev.slope = slope0_;

        double t = 1.0;
        for (int iter = 0; iter < 20; ++iter) {
            LineSearchPoint cur = evaluate(t);
            if (cur.f > f0_ + c1_ * cur.t * slope0_ || (iter > 0 && cur.f >= prev.f)) return zoom(prev, cur);
            if (std::abs(cur.slope) <= -c2_ * slope0_) return {true, std::move(cur)};
            if (cur.slope >= 0.0) return zoom(cur, prev);
            prev = std::move(cur);
            t *= 2.0;
            if (t > 1e10) break;
        }
        return fallback();
    }

private:
    LineSearchPoint evaluate(double t) {
        LineSearchPoint pt;
        pt.t = t;
        pt.x = x0_ + t * p_;
        pt.g.resize(x0_.size());
        pt.f = obj_(pt.x, pt.g);
        pt.slope = pt.g.dot(p_);
        if (sufficient_decrease(pt) && (!have_best_ || pt.f < best_.f)) {
            best_ = pt;
            have_best_ = true;
        }
        return pt;
    }

    bool sufficient_decrease(const LineSearchPoint& pt) const {
        return std::isfinite(pt.f) && pt.f <= f0_ + c1_ * pt.t * slope0_;
    }

    LineSearchOutcome fallback() {
        if (have_best_) return {true, best_};
        return {};
    }

    LineSearchOutcome zoom(LineSearchPoint lo, LineSearchPoint hi) {
        for (int iter = 0; iter < 40; ++iter) {
            const double width = std::abs(hi.t - lo.t);
            if (width <= 1e-16 * std::max(1.0, std::max(std::abs(lo.t), std::abs(hi.t)))) break;
            double t = interpolate(lo, hi);
            LineSearchPoint cur = evaluate(t);
            if (cur.f > f0_ + c1_ * cur.t * slope0_ || cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.slope) <= -c2_ * slope0_) return {true, std::move(cur)};
                if (cur.slope * (hi.t - lo.t) >= 0.0) hi = lo;
                lo = std::move(cur);
            }
        }
        return fallback();
    }

    double interpolate(const LineSearchPoint& lo, const LineSearchPoint& hi) const {
        // Cubic through (lo, hi) with derivative information; bisection guard.
        const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.t - hi.t);
        const double radicand = d1 * d1 - lo.slope * hi.slope;
        double t = 0.5 * (lo.t + hi.t);
        if (radicand >= 0.0) {
            const double d2 = std::copysign(std::sqrt(radicand), hi.t - lo.t);
            const double denom = hi.slope - lo.slope + 2.0 * d2;
            if (denom != 0.0) {
                const double cand = hi.t - (hi.t - lo.t) * (hi.slope + d2 - d1) / denom;
                const double lo_t = std::min(lo.t, hi.t), hi_t = std::max(lo.t, hi.t);
                const double margin = 0.1 * (hi_t - lo_t);
                if (std::isfinite(cand) && cand > lo_t + margin && cand < hi_t - margin) t = cand;
            }
        }
        return t;
    }

    const Objective& obj_;
    const Eigen::VectorXd& x0_;
    const Eigen::VectorXd& p_;
    double f0_, slope0_, c1_, c2_;
    LineSearchPoint best_;
    bool have_best_ = false;
};

}  // namespace detail

/// Limited-memory BFGS over a smooth objective. The iterate sequence is a
/// deterministic function of (objective, x0, settings); the returned cost
/// history is nonincreasing because only sufficient-decrease steps are taken.
/// A failed line search returns the best iterate so far rather than throwing.
inline OptimResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const OptimSettings& st) {
    OptimResult res;
    res.x = x0;
    Eigen::VectorXd g(x0.size());
    double f = objective(res.x, g);
    res.cost = f;
    res.cost_history.push_back(f);
    res.grad_norms.push_back(g.lpNorm<Eigen::Infinity>());

    if (res.grad_norms.back() <= st.grad_tol) {
        res.stop_reason = StopReason::GradTol;
        return res;
    }

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    auto two_loop = [&](const Eigen::VectorXd& grad) {
        Eigen::VectorXd q = grad;
        std::vector<double> a(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            a[static_cast<std::size_t>(i)] = rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
            q -= a[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd& s_last = s_hist.back();
        const Eigen::VectorXd& y_last = y_hist.back();
        q *= s_last.dot(y_last) / y_last.squaredNorm();
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double b = rho_hist[i] * y_hist[i].dot(q);
            q += (a[i] - b) * s_hist[i];
        }
        return q;
    };

    res.stop_reason = StopReason::MaxIters;
    for (int iter = 1; iter <= st.max_iters; ++iter) {
        Eigen::VectorXd p;
        if (s_hist.empty()) {
            p = -g / g.norm();  // first step: normalized steepest descent
        } else {
            p = -two_loop(g);
            if (!(g.dot(p) < 0.0)) {  // implicit Hessian lost positive-definiteness
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                p = -g / g.norm();
            }
        }

        detail::WolfeSearch search(objective, res.x, f, g, p, st.wolfe_c1, st.wolfe_c2);
        detail::LineSearchOutcome ls = search.run();
        if (!ls.ok) {
            res.stop_reason = StopReason::LineSearchFailure;
            break;
        }

        Eigen::VectorXd s = ls.point.x - res.x;
        Eigen::VectorXd y = ls.point.g - g;
        res.x = std::move(ls.point.x);
        f = ls.point.f;
        g = std::move(ls.point.g);
        res.iterations = iter;
        res.cost_history.push_back(f);
        res.grad_norms.push_back(g.lpNorm<Eigen::Infinity>());

        const double ys = y.dot(s);
        if (ys > 1e-12 * s.norm() * y.norm()) {  // keep the implicit Hessian positive definite
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / ys);
            if (static_cast<int>(s_hist.size()) > st.memory_pairs) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        if (res.grad_norms.back() <= st.grad_tol) {
            res.stop_reason = StopReason::GradTol;
            break;
        }
        const int k = static_cast<int>(res.cost_history.size()) - 1;
        if (k >= st.rel_cost_window) {
            const double drop = res.cost_history[static_cast<std::size_t>(k - st.rel_cost_window)] - f;
            if (drop <= st.rel_cost_tol * std::max(1.0, std::abs(f))) {
                res.stop_reason = StopReason::RelCost;
                break;
            }
        }
    }
    res.cost = f;
    return res;
}

/// Central-difference validation of an analytic gradient. Returns the largest
/// per-coordinate |analytic - numeric| / max(1, |numeric|).
inline double check_gradient(const Objective& objective, const Eigen::VectorXd& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("check_gradient: step must be positive");
    Eigen::VectorXd g(x.size());
    objective(x, g);
    Eigen::VectorXd scratch(x.size());
    Eigen::VectorXd xp = x;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x(i);
        xp(i) = xi + step;
        const double fp = objective(xp, scratch);
        xp(i) = xi - step;
        const double fm = objective(xp, scratch);
        xp(i) = xi;
        const double numeric = (fp - fm) / (2.0 * step);
        const double err = std::abs(g(i) - numeric) / std::max(1.0, std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

/// CSV dump of an optimization run: iteration, cost, grad_norm.
inline void dump_cost_history(const OptimResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.precision(17);
    out << "iteration,cost,grad_norm\n";
    for (std::size_t i = 0; i < res.cost_history.size(); ++i)
        out << i << "," << res.cost_history[i] << "," << res.grad_norms[i] << "\n";
}

}  // namespace addae
