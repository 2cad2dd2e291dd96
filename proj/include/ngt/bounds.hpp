#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ngt {

// Information measures, all in nats.
double binary_entropy(double p);
double channel_capacity(double rho);
// D2(a || b); requires 0 < b < 1 and 0 <= a <= 1.
double binary_kl(double a, double b);

constexpr double kNatsPerBit = 0.69314718055994530942;

struct BoundInputs {
    double n = 0;
    double k = 0;
    double rho = 0;
    std::optional<double> delta;
    std::optional<double> delta0;
    std::optional<double> delta1;
    // Fixes the threshold instead of taking the grid infimum.
    std::optional<double> zeta;
};

// The 101-point threshold grid strictly inside (rho, 1 - rho), plus 1/2.
std::vector<double> zeta_grid(double rho);

// The bracketed term of the approximate-certification bound at a fixed zeta:
//   k ln(n/k)/I(rho) + max{ k ln(k/delta0)/D2(zeta||rho), k ln(1/delta1)/D2(zeta||1-rho) }.
double approx_cert_bracket(double n, double k, double rho, double delta0, double delta1,
                           double zeta);

struct ZetaChoice {
    double zeta;
    double value;
};
// Minimizer of approx_cert_bracket over zeta_grid(rho); ties go to the smaller zeta.
ZetaChoice minimize_zeta(double n, double k, double rho, double delta0, double delta1);

// Leading-order test-count curves: capacity_lb, existing_ub, conv_lb, and
// majority_cert_ub / threshold_cert_ub when the required confidences are
// present. The (1 + o(1)) factors are set to exactly 1.
std::map<std::string, double> bound_curves(const BoundInputs& in);

}  // namespace ngt
