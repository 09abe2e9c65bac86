#include "nlheat/stable_params.hpp"

#include <cmath>

#include "nlheat/errors.hpp"
#include "nlheat/special.hpp"

namespace nlheat::stable {

using special::pi;

IsotropicStableParams::IsotropicStableParams(double alpha_, int d_) : alpha(alpha_), d(d_) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("isotropic stable: alpha must lie in (0, 2)");
    if (d < 1) throw DomainError("isotropic stable: dimension must be >= 1");
}

SkewedStableParams::SkewedStableParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw DomainError("skewed stable: alpha must lie in (0, 1) or (1, 2)");
    if (!(beta >= -1.0 && beta <= 1.0)) throw DomainError("skewed stable: beta must lie in [-1, 1]");
}

double SkewedStableParams::theta() const { return alpha < 1.0 ? beta : -beta * (2.0 - alpha) / alpha; }

double SkewedStableParams::rho() const { return 0.5 * (1.0 + theta()); }

double SkewedStableParams::gamma() const { return std::cos(0.5 * pi * theta() * alpha); }

double SkewedStableParams::beta_s() const {
    const double th = theta();
    if (th == 0.0) return 0.0;
    return std::tan(0.5 * pi * th * alpha) / std::tan(0.5 * pi * alpha);
}

double SkewedStableParams::c_plus() const {
    return -gamma() * (1.0 + beta_s()) / (2.0 * special::gamma(-alpha) * std::cos(0.5 * pi * alpha));
}

double SkewedStableParams::c_minus() const {
    return -gamma() * (1.0 - beta_s()) / (2.0 * special::gamma(-alpha) * std::cos(0.5 * pi * alpha));
}

std::complex<double> SkewedStableParams::symbol(double xi) const {
    if (xi == 0.0) return {0.0, 0.0};
    const double s = xi > 0.0 ? 1.0 : -1.0;
    return std::pow(std::abs(xi), alpha) * std::polar(1.0, -0.5 * pi * theta() * alpha * s);
}

}  // namespace nlheat::stable
