#pragma once

// Parameter types for stable laws. The one-dimensional skewed family is
// parameterized by (alpha, beta) with the scale fixed so that the density
// series takes its simplest form: with
//   theta = beta                    (alpha < 1)
//   theta = -beta (2 - alpha)/alpha (alpha > 1)
// the symbol is psi(xi) = |xi|^alpha exp(-i pi theta alpha sgn(xi) / 2), i.e.
//   psi(xi) = gamma |xi|^alpha (1 - i beta_s tan(pi alpha / 2) sgn(xi))
// with gamma = cos(pi theta alpha / 2) and beta_s = tan(pi theta alpha/2)/tan(pi alpha/2).
// beta_s coincides with beta for beta in {-1, 0, 1}.

#include <complex>

namespace nlheat::stable {

struct IsotropicStableParams {
    double alpha = 0.5;
    int d = 1;

    IsotropicStableParams() = default;
    IsotropicStableParams(double alpha_, int d_);
};

struct SkewedStableParams {
    double alpha = 0.5;
    double beta = 0.0;

    SkewedStableParams() = default;
    SkewedStableParams(double alpha_, double beta_);

    double theta() const;
    double rho() const;      // P(X_1 > 0)
    double gamma() const;    // scale in the tan-form symbol
    double beta_s() const;   // skewness in the tan-form symbol
    double c_plus() const;   // Levy density coefficient on (0, inf)
    double c_minus() const;  // Levy density coefficient on (-inf, 0)
    std::complex<double> symbol(double xi) const;

    /// Parameters of the law of -X_1.
    SkewedStableParams reflected() const { return SkewedStableParams(alpha, -beta); }
};

}  // namespace nlheat::stable
