#include "pibounds/bounds.hpp"

#include <cmath>

namespace pibounds {

namespace {

double ceil_xlog(double x, double arg) { return std::ceil(x * std::log(arg)); }

} // namespace

double bound_howard_gamma(int n, int m, double gamma) {
    double h = 1.0 / (1.0 - gamma);
    return n * (m - 1) * ceil_xlog(h, h);
}

double bound_simplex_gamma(int n, int m, double gamma) {
    double h = n / (1.0 - gamma);
    return n * (m - 1) * ceil_xlog(h, h);
}

double bound_simplex_gamma2(int n, int m, double gamma) {
    double h = 1.0 / (1.0 - gamma);
    return static_cast<double>(n) * n * (m - 1) * (1.0 + 2.0 * h * std::log(h));
}

double bound_eps_howard(double gamma, double v_max, double eps) {
    return std::ceil(std::log(v_max / eps) / (1.0 - gamma));
}

double bound_eps_simplex(int n, double gamma, double v_max, double eps) {
    return std::ceil(n * std::log(n * v_max / eps) / (1.0 - gamma));
}

double bound_simplex_structural(int n, int m, double tau_t, double tau_r) {
    double outer = ceil_xlog(tau_r, n * tau_r) + ceil_xlog(tau_r, n * tau_t);
    double inner = (m - 1) * ceil_xlog(n * tau_t, n * tau_t)
                 + ceil_xlog(n * tau_t, static_cast<double>(n) * n * tau_t);
    return static_cast<double>(n) * n * (m - 1) * outer * inner;
}

double bound_structural_both(int n, int m, double tau_t, double tau_r) {
    return n * (m - 1) * (ceil_xlog(tau_t, n * tau_t) + ceil_xlog(tau_r, n * tau_r));
}

double bound_ye(int n, int m, double gamma) {
    double h = 1.0 / (1.0 - gamma);
    return n * (m - 1) * std::ceil(n * h * std::log(n * n * h));
}

double bound_hansen(int n, int m, double gamma) {
    double h = 1.0 / (1.0 - gamma);
    return (static_cast<double>(n) * m + 1.0) * std::ceil(h * std::log(n * h));
}

EventIntervals event_intervals(int n, int m, double tau_t, double tau_r) {
    (void)tau_r;
    EventIntervals iv;
    iv.simplex_new_class = n * ((m - 1) * ceil_xlog(n * tau_t, n * tau_t)
                                + ceil_xlog(n * tau_t, static_cast<double>(n) * n * tau_t));
    iv.howard_new_class = static_cast<double>(n) * m * ceil_xlog(tau_t, n * tau_t);
    iv.simplex_new_cycle = static_cast<double>(n) * m * std::ceil(2.0 * (n - 1) * std::log(n));
    iv.howard_new_cycle = n;
    return iv;
}

} // namespace pibounds
