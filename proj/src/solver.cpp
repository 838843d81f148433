#include "hamepi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace hamepi {

namespace {

bool finite_state(const std::vector<double>& y) {
    for (double x : y)
        if (!std::isfinite(x)) return false;
    return true;
}

bool nonnegative_state(const std::vector<double>& y) {
    for (double x : y)
        if (x < 0.0) return false;
    return true;
}

// Returns true when integration should stop at the previous sample.
bool handle_domain(Trajectory& traj, const std::vector<double>& y, double t,
                   DomainPolicy policy) {
    if (!finite_state(y)) {
        if (!traj.domain_exit) {
            traj.domain_exit = true;
            traj.domain_exit_time = t;
        }
        return true;
    }
    if (nonnegative_state(y)) return false;
    if (!traj.domain_exit) {
        traj.domain_exit = true;
        traj.domain_exit_time = t;
    }
    return policy == DomainPolicy::Truncate;
}

} // namespace

RhsFn make_rhs(const OdeSystem& sys) {
    auto field = std::make_shared<std::vector<CompiledExpr>>(sys.compile());
    return [field](double, const std::vector<double>& y, std::vector<double>& dy) {
        for (std::size_t i = 0; i < field->size(); ++i) dy[i] = (*field)[i](y);
    };
}

RhsFn make_rhs(const HamiltonianSystem& sys) {
    auto field = std::make_shared<std::vector<CompiledExpr>>(sys.compile_field());
    return [field](double, const std::vector<double>& y, std::vector<double>& dy) {
        for (std::size_t i = 0; i < field->size(); ++i) dy[i] = (*field)[i](y);
    };
}

RhsFn make_rhs(const InteractingSystem& sys) { return make_rhs(sys.system()); }

Trajectory integrate_rk4(const RhsFn& rhs, std::vector<double> state0, double t_end,
                         double dt, const IntegrateOptions& opt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");
    if (!finite_state(state0)) throw ValidationError("initial state must be finite");

    const std::size_t n = state0.size();
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(state0);

    std::vector<double> y = std::move(state0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), ynew(n);
    double t = 0.0;
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        double h = std::min(dt, t_end - t);
        try {
            rhs(t, y, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            rhs(t + 0.5 * h, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            rhs(t + 0.5 * h, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            rhs(t + h, tmp, k4);
        } catch (const Error&) {
            traj.domain_exit = true;
            traj.domain_exit_time = t;
            break;
        }
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
        if (handle_domain(traj, ynew, t, opt.domain)) break;
        y = ynew;
        traj.times.push_back(t);
        traj.states.push_back(y);
    }
    return traj;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192,
                 A75 = -2187.0 / 6784, A76 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
// Dense-output weights.
constexpr double D1 = -12715105075.0 / 11282082432.0;
constexpr double D3 = 87487479700.0 / 32700410799.0;
constexpr double D4 = -10690763975.0 / 1880347072.0;
constexpr double D5 = 701980252875.0 / 199316789632.0;
constexpr double D6 = -1453857185.0 / 822651844.0;
constexpr double D7 = 69997945.0 / 29380423.0;

} // namespace

Trajectory integrate_adaptive(const RhsFn& rhs, std::vector<double> state0,
                              double t_end, double rtol, double atol,
                              const IntegrateOptions& opt) {
    if (!(rtol > 0.0)) throw ValidationError("rtol must be positive");
    if (!(atol > 0.0)) throw ValidationError("atol must be positive");
    if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");
    if (!finite_state(state0)) throw ValidationError("initial state must be finite");
    for (std::size_t i = 0; i + 1 < opt.sample_times.size(); ++i)
        if (!(opt.sample_times[i] < opt.sample_times[i + 1]))
            throw ValidationError("sample times must be strictly increasing");
    if (!opt.sample_times.empty() &&
        (opt.sample_times.front() < 0.0 || opt.sample_times.back() > t_end))
        throw ValidationError("sample times must lie within [0, t_end]");

    const std::size_t n = state0.size();
    const bool dense = !opt.sample_times.empty();
    Trajectory traj;

    std::size_t cursor = 0; // next requested sample
    if (dense) {
        while (cursor < opt.sample_times.size() && opt.sample_times[cursor] <= 0.0) {
            traj.times.push_back(opt.sample_times[cursor]);
            traj.states.push_back(state0);
            ++cursor;
        }
    } else {
        traj.times.push_back(0.0);
        traj.states.push_back(state0);
    }

    std::vector<double> y = std::move(state0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n),
        ynew(n), yerr(n);
    std::vector<double> r1(n), r2(n), r3(n), r4(n), r5(n);

    double t = 0.0;
    try {
        rhs(0.0, y, k1);
    } catch (const Error&) {
        traj.domain_exit = true;
        traj.domain_exit_time = 0.0;
        return traj;
    }

    // Starting step from the relative size of the initial slope.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sc = atol + rtol * std::fabs(y[i]);
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    double h = 0.01 * std::sqrt((d0 + 1e-30) / (d1 + 1e-30));
    h = std::min(std::max(h, 1e-8), t_end > 0.0 ? t_end : 1e-8);

    bool rejected = false;
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        h = std::min(h, t_end - t);
        if (h < 1e-14 * std::max(1.0, std::fabs(t)))
            throw IntegrationError("step size underflow", t);

        bool stage_failed = false;
        try {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * A21 * k1[i];
            rhs(t + C2 * h, tmp, k2);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            rhs(t + C3 * h, tmp, k3);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            rhs(t + C4 * h, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            rhs(t + C5 * h, tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] +
                                     A64 * k4[i] + A65 * k5[i]);
            rhs(t + h, tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] +
                                      A75 * k5[i] + A76 * k6[i]);
            rhs(t + h, ynew, k7);
        } catch (const Error&) {
            stage_failed = true;
        }
        if (stage_failed || !finite_state(ynew)) {
            // Retry with a smaller step before giving up.
            if (h > 1e-10 * std::max(1.0, std::fabs(t))) {
                h *= 0.25;
                rejected = true;
                continue;
            }
            traj.domain_exit = true;
            traj.domain_exit_time = t;
            break;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                            E6 * k6[i] + E7 * k7[i]);
            double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            rejected = true;
            continue;
        }

        if (dense && cursor < opt.sample_times.size() &&
            opt.sample_times[cursor] <= t + h + 1e-12 * std::max(1.0, t + h)) {
            for (std::size_t i = 0; i < n; ++i) {
                double ydiff = ynew[i] - y[i];
                double bspl = h * k1[i] - ydiff;
                r1[i] = y[i];
                r2[i] = ydiff;
                r3[i] = bspl;
                r4[i] = ydiff - h * k7[i] - bspl;
                r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] +
                             D6 * k6[i] + D7 * k7[i]);
            }
            while (cursor < opt.sample_times.size() &&
                   opt.sample_times[cursor] <= t + h + 1e-12 * std::max(1.0, t + h)) {
                double ts = opt.sample_times[cursor];
                double th = std::clamp((ts - t) / h, 0.0, 1.0);
                double th1 = 1.0 - th;
                std::vector<double> ys(n);
                for (std::size_t i = 0; i < n; ++i)
                    ys[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                traj.times.push_back(ts);
                traj.states.push_back(std::move(ys));
                ++cursor;
            }
        }

        t += h;
        bool stop = handle_domain(traj, ynew, t, opt.domain);
        y = ynew;
        k1 = k7; // first-same-as-last
        if (!dense && !stop) {
            traj.times.push_back(t);
            traj.states.push_back(y);
        }
        if (stop) break;

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::min(rejected ? 1.0 : 10.0, std::max(0.2, fac));
        h *= fac;
        rejected = false;
    }
    return traj;
}

DriftReport diagnostics(const Trajectory& traj, const Expr& hamiltonian,
                        const std::vector<std::string>& variables,
                        const Params& params, const Expr* casimir) {
    DriftReport rep;
    rep.domain_exit = traj.domain_exit;
    if (traj.states.empty()) return rep;
    CompiledExpr h = hamiltonian.compile(variables, params);
    double h0 = h(traj.states.front());
    for (const auto& s : traj.states)
        rep.h_drift = std::max(rep.h_drift, std::fabs(h(s) - h0));
    if (casimir) {
        rep.has_casimir = true;
        CompiledExpr c = casimir->compile(variables, params);
        double c0 = c(traj.states.front());
        for (const auto& s : traj.states) {
            try {
                rep.c_drift = std::max(rep.c_drift, std::fabs(c(s) - c0));
            } catch (const Error&) {
                rep.domain_exit = true;
            }
        }
    }
    return rep;
}

namespace {

double simpson_segment(const std::function<double(double)>& f, double a, double fa,
                       double m, double fm, double b, double fb, double whole,
                       double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_segment(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           simpson_segment(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return sign * simpson_segment(f, a, fa, m, fm, b, fb, whole, tol, 48);
}

double bracket_solve(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& opt) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo), fhi = f(hi);
    if (std::fabs(flo) <= opt.f_tol) return lo;
    if (std::fabs(fhi) <= opt.f_tol) return hi;
    if (flo * fhi > 0.0)
        throw DomainError("no sign change on bracketing interval");

    // Illinois variant of regula falsi: halving a stale endpoint weight keeps
    // convergence superlinear without derivatives.
    int side = 0;
    double x = lo;
    for (int it = 0; it < opt.max_iter; ++it) {
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!std::isfinite(x) || x <= lo || x >= hi) x = 0.5 * (lo + hi);
        double fx = f(x);
        if (std::fabs(fx) <= opt.f_tol) return x;
        if (fx * flo < 0.0) {
            hi = x;
            fhi = fx;
            if (side == -1) flo *= 0.5;
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if (side == 1) fhi *= 0.5;
            side = 1;
        }
        if (hi - lo <= opt.x_tol * std::max(1.0, std::fabs(lo) + std::fabs(hi)))
            return 0.5 * (lo + hi);
    }
    return x;
}

namespace {

// Equilibrium S_inf: largest zero of -dS/dt below s0. -dS/dt is positive on
// (S_inf, s0]; the scan refines geometrically toward the lower limit so roots
// very close to it are still bracketed. Throwing or non-finite evaluations
// count as "past the equilibrium".
double find_s_inf(double s0, double lower,
                  const std::function<double(double)>& minus_sdot) {
    auto positive = [&](double s) {
        try {
            double v = minus_sdot(s);
            return std::isfinite(v) && v > 0.0;
        } catch (const Error&) {
            return false;
        }
    };
    double prev = s0;
    for (int j = 1; j <= 300; ++j) {
        double s = lower + (s0 - lower) * std::exp2(-j / 8.0);
        if (!positive(s)) {
            double a = s, b = prev; // root in [a, b]
            for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
                double mid = 0.5 * (a + b);
                if (positive(mid)) b = mid; else a = mid;
            }
            return 0.5 * (a + b);
        }
        prev = s;
    }
    return lower;
}

} // namespace

ExactSolution::ExactSolution(double s0, double s_inf,
                             std::function<double(double)> minus_sdot,
                             std::function<double(double)> r_of_s)
    : s0_(s0), s_inf_(s_inf), minus_sdot_(std::move(minus_sdot)),
      r_of_s_(std::move(r_of_s)) {
    // t(S) table on S_j = S_inf + (s0 - S_inf) 2^{-j/8}; the last point sits
    // at the 1e-9-relative guard distance from the equilibrium, which defines
    // the valid horizon.
    auto integrand = [this](double s) { return 1.0 / minus_sdot_(s); };
    const int last = 240; // 2^(-240/8) ~ 9.3e-10
    s_grid_.push_back(s0);
    t_grid_.push_back(0.0);
    for (int j = 1; j <= last; ++j) {
        double s = s_inf_ + (s0 - s_inf_) * std::exp2(-j / 8.0);
        t_grid_.push_back(t_grid_.back() +
                          adaptive_simpson(integrand, s, s_grid_.back(), 1e-12));
        s_grid_.push_back(s);
    }
}

std::array<double, 3> ExactSolution::operator()(double t) const {
    if (t < 0.0) throw ValidationError("exact solution defined for t >= 0");
    if (t == 0.0) return {s0_, 1.0 - s0_, 0.0};
    if (t > horizon()) throw HorizonError(t, horizon());

    auto it = std::upper_bound(t_grid_.begin(), t_grid_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - t_grid_.begin());
    j = std::min(std::max<std::size_t>(j, 1), t_grid_.size() - 1) - 1;

    auto integrand = [this](double s) { return 1.0 / minus_sdot_(s); };
    auto g = [&](double s) {
        return t_grid_[j] + adaptive_simpson(integrand, s, s_grid_[j], 1e-13) - t;
    };
    RootOptions ro;
    ro.x_tol = 1e-15;
    ro.f_tol = 1e-11 * std::max(1.0, t);
    double s = bracket_solve(g, s_grid_[j + 1], s_grid_[j], ro);
    double r = r_of_s_(s);
    return {s, 1.0 - s - r, r};
}

std::vector<std::array<double, 3>> ExactSolution::sample(
    const std::vector<double>& times) const {
    std::vector<std::array<double, 3>> out;
    out.reserve(times.size());
    for (double t : times) out.push_back((*this)(t));
    return out;
}

namespace {

void check_initial_fraction(double s0) {
    if (!(s0 > 0.0 && s0 < 1.0))
        throw ValidationError("initial susceptible fraction must lie in (0,1)");
}

} // namespace

ExactSolution exact_sirs(double alpha, double beta, double mu, double s0) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ValidationError("alpha and beta must be positive");
    if (mu < 0.0) throw ValidationError("mu must be non-negative");
    check_initial_fraction(s0);
    if (!(beta * s0 - mu > 0.0))
        throw LogDomainError(beta * s0 - mu);
    auto r_of_s = [=](double s) {
        double arg = (beta * s - mu) / (beta * s0 - mu);
        if (!(arg > 0.0)) throw LogDomainError(arg);
        return -(alpha / beta) * std::log(arg);
    };
    auto minus_sdot = [=](double s) {
        return (beta * s - mu) * (1.0 - s - r_of_s(s));
    };
    double s_inf = find_s_inf(s0, mu / beta, minus_sdot);
    return ExactSolution(s0, s_inf, minus_sdot, r_of_s);
}

ExactSolution exact_vacc_i(double alpha, double beta, double v, double s0) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ValidationError("alpha and beta must be positive");
    if (v < 0.0) throw ValidationError("v must be non-negative");
    check_initial_fraction(s0);
    auto r_of_s = [=](double s) {
        double arg = (beta * s + v) / (beta * s0 + v);
        if (!(arg > 0.0)) throw LogDomainError(arg);
        return -((alpha + v) / beta) * std::log(arg);
    };
    auto minus_sdot = [=](double s) {
        return (beta * s + v) * (1.0 - s - r_of_s(s));
    };
    // S may legitimately cross zero here; the branch ends at beta*S + v = 0.
    double s_inf = find_s_inf(s0, -v / beta, minus_sdot);
    return ExactSolution(s0, s_inf, minus_sdot, r_of_s);
}

ExactSolution exact_vacc_s(double alpha, double beta, double v, double s0) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ValidationError("alpha and beta must be positive");
    if (v < 0.0) throw ValidationError("v must be non-negative");
    check_initial_fraction(s0);
    const double i0 = 1.0 - s0;
    // R(S) from the level-set condition; strictly increasing in R, so the
    // root in (0, 1-S) is unique when it exists.
    auto rho = [=](double s) {
        if (!(s > 0.0)) throw LogDomainError(s);
        auto level = [=](double r) {
            double i = 1.0 - s - r;
            return r + (alpha / beta) * std::log(s / s0) -
                   (v / beta) * std::log(i / i0);
        };
        double hi = (1.0 - s) * (1.0 - 1e-13);
        double at_lo = level(0.0);
        if (at_lo >= 0.0) return 0.0; // only at s = s0
        if (level(hi) < 0.0) return 1.0 - s; // level set pinched to I = 0
        RootOptions ro;
        ro.x_tol = 1e-16;
        ro.f_tol = 1e-13;
        return bracket_solve(level, 0.0, hi, ro);
    };
    auto minus_sdot = [=](double s) {
        double i = 1.0 - s - rho(s);
        return s * (beta * i + v);
    };
    double s_inf = find_s_inf(s0, 0.0, minus_sdot);
    return ExactSolution(s0, s_inf, minus_sdot, rho);
}

ExactSolution exact_sir(double alpha, double beta, double s0) {
    return exact_sirs(alpha, beta, 0.0, s0);
}

} // namespace hamepi
