#include "singlab/oracle1d.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

double DiracOracle::eval(double x) const { return slope * std::min(x, 1.0 - x); }

ScalarField DiracOracle::sample(const Domain& dom) const {
    ScalarField u(dom);
    for (std::size_t i = 0; i < dom.node_count(); ++i) u[i] = eval(dom.position(i)[0]);
    return u;
}

double DiracOracle::jump_residual() const {
    return std::fabs(2.0 * slope - std::pow(0.5 * slope, -gamma));
}

DiracOracle dirac_closed_form(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("dirac_closed_form: gamma must be positive");
    DiracOracle d;
    d.gamma = gamma;
    d.slope = std::pow(2.0, (gamma - 1.0) / (gamma + 1.0));
    d.peak = 0.5 * d.slope;
    return d;
}

namespace {

struct TraceResult {
    std::vector<double> s, u, up;
    double end_s = 0.0;   // where the trajectory stopped
    double end_u = 0.0;   // value there
    bool reached_wall = false;
};

// Dormand-Prince 5(4) for u'' = -c/(shift+u)^gamma from s=0 (u=peak, u'=0)
// toward s=0.5, stopping when u falls to the floor.
TraceResult integrate_half(double gamma, double c, double shift, double peak,
                           double rtol, bool record) {
    const double floor_u = std::max(1e-13, 1e-12 * peak);
    auto accel = [&](double u) {
        return -c / std::pow(shift + std::max(u, floor_u * 0.5), gamma);
    };

    // classic DP45 tableau (autonomous system: the c nodes drop out)
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    TraceResult out;
    double s = 0.0, u = peak, v = 0.0;
    if (record) {
        out.s.push_back(s);
        out.u.push_back(u);
        out.up.push_back(v);
    }
    double dt = 1e-4;
    const double max_dt = 5e-4;  // keeps the Hermite interpolant tight
    const double atol = 1e-14;
    int rejected_in_a_row = 0;

    auto rhs = [&](double uu, double vv, double& du, double& dv) {
        du = vv;
        dv = accel(uu);
    };

    for (int step = 0; step < 2000000; ++step) {
        if (s >= 0.5) break;
        if (u <= floor_u) break;
        dt = std::min({dt, max_dt, 0.5 - s});

        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v, k7u, k7v;
        rhs(u, v, k1u, k1v);
        rhs(u + dt * a21 * k1u, v + dt * a21 * k1v, k2u, k2v);
        rhs(u + dt * (a31 * k1u + a32 * k2u), v + dt * (a31 * k1v + a32 * k2v), k3u, k3v);
        rhs(u + dt * (a41 * k1u + a42 * k2u + a43 * k3u),
            v + dt * (a41 * k1v + a42 * k2v + a43 * k3v), k4u, k4v);
        rhs(u + dt * (a51 * k1u + a52 * k2u + a53 * k3u + a54 * k4u),
            v + dt * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v), k5u, k5v);
        rhs(u + dt * (a61 * k1u + a62 * k2u + a63 * k3u + a64 * k4u + a65 * k5u),
            v + dt * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v), k6u,
            k6v);
        double u_new = u + dt * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u + b6 * k6u);
        double v_new = v + dt * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
        rhs(u_new, v_new, k7u, k7v);
        double err_u =
            dt * (e1 * k1u + e3 * k3u + e4 * k4u + e5 * k5u + e6 * k6u + e7 * k7u);
        double err_v =
            dt * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v);
        double sc_u = atol + rtol * std::max(std::fabs(u), std::fabs(u_new));
        double sc_v = atol + rtol * std::max(std::fabs(v), std::fabs(v_new));
        double err = std::sqrt(0.5 * ((err_u / sc_u) * (err_u / sc_u) +
                                      (err_v / sc_v) * (err_v / sc_v)));

        if (err <= 1.0 || dt <= 1e-16) {
            // crossing the floor inside the step: shrink onto the crossing
            if (u_new < floor_u && u > floor_u && dt > 1e-15) {
                dt *= 0.5;
                continue;
            }
            s += dt;
            u = u_new;
            v = v_new;
            if (record) {
                out.s.push_back(s);
                out.u.push_back(u);
                out.up.push_back(v);
            }
            rejected_in_a_row = 0;
            double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            dt *= std::clamp(grow, 0.2, 5.0);
        } else {
            dt *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (++rejected_in_a_row > 200) break;
        }
        if (dt < 1e-16) break;
    }
    out.end_s = s;
    out.end_u = u;
    out.reached_wall = s >= 0.5 - 1e-14;
    return out;
}

}  // namespace

double ShootingSolution::eval(double x) const {
    double xm = std::min(x, 1.0 - x);
    if (xm <= 0.0) return 0.0;
    double s = 0.5 - xm;
    if (s <= 0.0) return peak_;
    if (s >= s_.back()) {
        // beyond the recorded trajectory: linear continuation to the wall
        double rest = 0.5 - s_.back();
        if (rest <= 0.0) return std::max(0.0, u_.back());
        double t = (s - s_.back()) / rest;
        return std::max(0.0, u_.back() * (1.0 - t));
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
    double h = s_[k + 1] - s_[k];
    double t = (s - s_[k]) / h;
    double u0 = u_[k], u1 = u_[k + 1], m0 = up_[k] * h, m1 = up_[k + 1] * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * m0 +
           (-2 * t3 + 3 * t2) * u1 + (t3 - t2) * m1;
}

ScalarField ShootingSolution::sample(const Domain& dom) const {
    ScalarField f(dom);
    for (std::size_t i = 0; i < dom.node_count(); ++i) f[i] = eval(dom.position(i)[0]);
    f.zero_boundary();
    return f;
}

ShootingSolution shoot_constant_data(double gamma, double c, double tol, double shift) {
    if (!(gamma > 0.0)) throw ConfigError("shoot_constant_data: gamma must be positive");
    if (!(c > 0.0)) throw ConfigError("shoot_constant_data: c must be positive");
    double rtol = std::clamp(tol, 1e-13, 1e-6);

    // residual of a trial peak: negative if the trajectory hits zero before
    // the wall, positive if it reaches the wall with leftover height
    auto residual = [&](double peak) {
        TraceResult t = integrate_half(gamma, c, shift, peak, rtol, false);
        if (t.reached_wall) return t.end_u;
        return -(0.5 - t.end_s);
    };

    double lo = 1e-8, hi = 1e3;
    double flo = residual(lo), fhi = residual(hi);
    if (!(flo < 0.0) || !(fhi > 0.0))
        throw SolveError("shoot_constant_data: peak bracket failed", {flo, fhi});
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    double peak = 0.5 * (lo + hi);
    TraceResult t = integrate_half(gamma, c, shift, peak, rtol, true);

    ShootingSolution sol;
    sol.peak_ = peak;
    sol.residual_ = t.reached_wall ? std::fabs(t.end_u) : (0.5 - t.end_s);
    sol.s_ = std::move(t.s);
    sol.u_ = std::move(t.u);
    sol.up_ = std::move(t.up);
    return sol;
}

}  // namespace singlab
