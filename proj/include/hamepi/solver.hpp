#ifndef HAMEPI_SOLVER_HPP
#define HAMEPI_SOLVER_HPP

#include <array>
#include <functional>

#include "hamepi/coupling.hpp"

namespace hamepi {

/// What to do when a trajectory leaves the physical domain (a negative
/// compartment). Truncate stops at the last in-domain sample; Flag records
/// the exit time and keeps integrating (the right-hand sides of polynomial
/// models remain well defined). A right-hand side that throws always
/// truncates, whatever the policy.
enum class DomainPolicy { Truncate, Flag };

struct IntegrateOptions {
    DomainPolicy domain = DomainPolicy::Truncate;
    /// Adaptive only: when non-empty, output exactly at these times (dense
    /// interpolation) instead of at every accepted step. Must be increasing
    /// and within [0, t_end].
    std::vector<double> sample_times;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    bool domain_exit = false;
    double domain_exit_time = 0.0;
};

using RhsFn = std::function<void(double t, const std::vector<double>& y,
                                 std::vector<double>& dy)>;

RhsFn make_rhs(const OdeSystem& sys);
RhsFn make_rhs(const HamiltonianSystem& sys);
RhsFn make_rhs(const InteractingSystem& sys);

/// Classical fixed-step 4th-order Runge-Kutta, sampled at every step.
Trajectory integrate_rk4(const RhsFn& rhs, std::vector<double> state0, double t_end,
                         double dt, const IntegrateOptions& opt = {});

/// Dormand-Prince 5(4) embedded pair with PI-free standard step control and
/// 4th-order dense output for the requested sample times.
Trajectory integrate_adaptive(const RhsFn& rhs, std::vector<double> state0,
                              double t_end, double rtol, double atol,
                              const IntegrateOptions& opt = {});

struct DriftReport {
    double h_drift = 0.0;
    double c_drift = 0.0;
    bool has_casimir = false;
    bool domain_exit = false;
};

/// Max |H(t)-H(0)| and, when a Casimir is given, max |C(t)-C(0)| along the
/// stored grid.
DriftReport diagnostics(const Trajectory& traj, const Expr& hamiltonian,
                        const std::vector<std::string>& variables,
                        const Params& params, const Expr* casimir = nullptr);

/// Adaptive Simpson quadrature to absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol);

struct RootOptions {
    int max_iter = 200;
    double x_tol = 1e-14;
    double f_tol = 1e-12;
};

/// Bisection/secant hybrid on a bracketing interval (f changes sign).
double bracket_solve(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& opt = {});

/// Closed-form trajectory of a model whose dynamics reduces, on the Casimir
/// level set through (S0, 1-S0, 0), to a single quadrature: t(S) is tabulated
/// once on a grid refining geometrically toward the equilibrium S_inf, and
/// S(t) is recovered by monotone inversion. Valid for t in [0, horizon()];
/// the horizon corresponds to S_inf + 1e-9 (S0 - S_inf).
class ExactSolution {
public:
    double horizon() const { return t_grid_.back(); }
    double s_infinity() const { return s_inf_; }
    double s0() const { return s0_; }

    /// (S, I, R) at time t; throws HorizonError past the valid horizon.
    std::array<double, 3> operator()(double t) const;

    std::vector<std::array<double, 3>> sample(const std::vector<double>& times) const;

    ExactSolution(double s0, double s_inf, std::function<double(double)> minus_sdot,
                  std::function<double(double)> r_of_s);

private:
    double s0_;
    double s_inf_;
    std::function<double(double)> minus_sdot_; // -dS/dt > 0 on (s_inf, s0]
    std::function<double(double)> r_of_s_;
    std::vector<double> s_grid_; // decreasing from s0
    std::vector<double> t_grid_; // increasing from 0
};

/// Non-permanent immunity (return flow mu*I): R(S) = -(alpha/beta)
/// log((beta S - mu)/(beta S0 - mu)), dS/dt = -(beta S - mu) I.
ExactSolution exact_sirs(double alpha, double beta, double mu, double s0);

/// Vaccination at rate v*I: R(S) = -((alpha+v)/beta)
/// log((beta S + v)/(beta S0 + v)), dS/dt = -(beta S + v) I.
ExactSolution exact_vacc_i(double alpha, double beta, double v, double s0);

/// Vaccination at rate v*S: R(S) solved from the level-set condition
/// R + (alpha/beta) log(S/S0) - (v/beta) log((1-S-R)/(1-S0)) = 0, which is
/// strictly increasing in R, then dS/dt = -S (beta I + v).
ExactSolution exact_vacc_s(double alpha, double beta, double v, double s0);

/// Classic SIR: the mu = 0 / v = 0 limit, R(S) = -(alpha/beta) log(S/S0).
ExactSolution exact_sir(double alpha, double beta, double s0);

} // namespace hamepi

#endif
