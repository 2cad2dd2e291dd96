#include "ngt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ngt {

namespace {

// x ln(x / y) with the 0 ln 0 = 0 convention.
double xlogxy(double x, double y) {
    if (x == 0.0) {
        return 0.0;
    }
    return x * std::log(x / y);
}

void check_inputs(const BoundInputs& in) {
    if (!(in.n >= 1 && in.k >= 1 && in.k <= in.n)) {
        throw std::invalid_argument("bound inputs require 1 <= k <= n");
    }
    if (!(in.rho > 0.0 && in.rho < 0.5)) {
        throw std::invalid_argument("bound inputs require 0 < rho < 1/2");
    }
}

}  // namespace

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("binary_entropy requires p in [0, 1]");
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double channel_capacity(double rho) {
    return kNatsPerBit - binary_entropy(rho);
}

double binary_kl(double a, double b) {
    if (!(b > 0.0 && b < 1.0)) {
        throw std::invalid_argument("binary_kl requires 0 < b < 1");
    }
    if (!(a >= 0.0 && a <= 1.0)) {
        throw std::invalid_argument("binary_kl requires 0 <= a <= 1");
    }
    return xlogxy(a, b) + xlogxy(1.0 - a, 1.0 - b);
}

std::vector<double> zeta_grid(double rho) {
    constexpr int kPoints = 101;
    const double lo = rho + 1e-3;
    const double hi = 1.0 - rho - 1e-3;
    std::vector<double> grid;
    grid.reserve(kPoints + 1);
    for (int i = 0; i < kPoints; ++i) {
        grid.push_back(lo + (hi - lo) * i / (kPoints - 1));
    }
    grid.push_back(0.5);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

double approx_cert_bracket(double n, double k, double rho, double delta0, double delta1,
                           double zeta) {
    const double search = k * std::log(n / k) / channel_capacity(rho);
    const double false_pos = k * std::log(k / delta0) / binary_kl(zeta, rho);
    // D2(zeta || 1-rho) written as D2(1-zeta || rho): no rounding of 1 - rho,
    // and bit-identical to the first divisor at zeta = 1/2.
    const double false_neg = k * std::log(1.0 / delta1) / binary_kl(1.0 - zeta, rho);
    return search + std::max(false_pos, false_neg);
}

ZetaChoice minimize_zeta(double n, double k, double rho, double delta0, double delta1) {
    ZetaChoice best{0.5, approx_cert_bracket(n, k, rho, delta0, delta1, 0.5)};
    for (double z : zeta_grid(rho)) {
        const double v = approx_cert_bracket(n, k, rho, delta0, delta1, z);
        if (v < best.value || (v == best.value && z < best.zeta)) {
            best = {z, v};
        }
    }
    return best;
}

std::map<std::string, double> bound_curves(const BoundInputs& in) {
    check_inputs(in);
    const double n = in.n;
    const double k = in.k;
    const double rho = in.rho;
    const double cap = channel_capacity(rho);
    const double search = k * std::log(n / k) / cap;

    std::map<std::string, double> out;
    out["capacity_lb"] = search;
    out["existing_ub"] = search + k * std::log(k) / binary_kl(rho, 1.0 - rho);
    out["conv_lb"] = k * std::log(k) / std::log((1.0 - rho) / rho);
    if (in.delta) {
        out["majority_cert_ub"] = search + k * std::log(k / *in.delta) / binary_kl(0.5, rho);
    }
    const auto d0 = in.delta0 ? in.delta0 : in.delta;
    const auto d1 = in.delta1 ? in.delta1 : in.delta;
    if (d0 && d1) {
        if (in.zeta) {
            out["threshold_cert_ub"] = approx_cert_bracket(n, k, rho, *d0, *d1, *in.zeta);
        } else {
            out["threshold_cert_ub"] = minimize_zeta(n, k, rho, *d0, *d1).value;
        }
    }
    return out;
}

}  // namespace ngt
