#pragma once

// Levy measures, symbols and their scaling diagnostics.

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "nlheat/stable_params.hpp"

namespace nlheat::levy {

/// nu(dz) = A_{d,-alpha} |z|^{-d-alpha} dz; symbol |xi|^alpha.
struct IsotropicStable {
    double alpha;
    int d;
};

/// nu(dx) = (c_+ 1_{x>=0} + c_- 1_{x<0}) |x|^{-1-alpha} dx for the skewed
/// semigroup with parameters (alpha, beta) (see stable_params.hpp).
struct OneDimStable {
    double alpha;
    double beta;
};

struct Atom {
    std::vector<double> location;
    double mass;
};

struct FiniteAtomic {
    std::vector<Atom> atoms;
};

/// nu(dz) = profile(|z|) dz on R^d.
struct RadialDensity {
    int d;
    std::function<double(double)> profile;
    double support_radius = std::numeric_limits<double>::infinity();
    std::string label = "custom";
};

/// An immutable Levy measure. Construction validates nu({0}) = 0 and the
/// integrability of (1 ^ |z|) where the family admits it.
class LevyMeasure {
public:
    using Family = std::variant<IsotropicStable, OneDimStable, FiniteAtomic, RadialDensity>;

    explicit LevyMeasure(Family family);

    static LevyMeasure isotropic_stable(double alpha, int d) { return LevyMeasure(IsotropicStable{alpha, d}); }
    static LevyMeasure one_dim_stable(double alpha, double beta) { return LevyMeasure(OneDimStable{alpha, beta}); }
    static LevyMeasure atoms(std::vector<Atom> atoms) { return LevyMeasure(FiniteAtomic{std::move(atoms)}); }

    const Family& family() const { return family_; }
    int dimension() const { return dim_; }
    std::string name() const;

    bool is_finite() const { return std::holds_alternative<FiniteAtomic>(family_); }
    /// nu(R^d); infinite for the stable families.
    double total_mass() const;
    /// True when int (1 ^ |z|) nu(dz) < inf (bounded-variation jump part).
    bool bounded_variation() const;
    /// Stable index for stable families, 0 for finite measures, NaN otherwise.
    double stable_index() const;
    /// The density coefficient K with nu(|z| in ds) = K s^{-1-alpha} ds for
    /// stable families (A_{d,-alpha} * |S^{d-1}| or c_+ + c_-).
    double radial_stable_coefficient() const;

    /// nu({|x| >= r}).
    double tail_mass(double r) const;
    /// h(r) = int (1 ^ |x|^2/r^2) nu(dx).
    double concentration_h(double r) const;

    struct MomentReport {
        double direct;
        double layer_cake;
        double rel_diff;
    };
    /// int_{|z|<r} |z|^p nu(dz), computed directly and by the layer-cake
    /// identity p int_0^r s^{p-1} nu(|x|>=s) ds - r^p nu(|x|>=r).
    MomentReport truncated_moment(double p, double r) const;

    /// Re psi(xi) along a ray, |xi| = k (radial measures and d = 1 only).
    double re_symbol_radial(double k) const;

    /// Density k(s) with nu(dz) = k(|z|) ds sigma(du) in polar coordinates
    /// (sigma = counting measure on {-1, +1} when d = 1). For the skewed 1-D
    /// family this is the symmetrized (c_+ + c_-)/2 s^{-1-alpha}, exact for
    /// integrands even in z. Throws for finite atomic measures.
    double polar_density(double s) const;

private:
    Family family_;
    int dim_ = 1;
};

/// Symbol psi; only the radial majorant psi* is needed by the library.
struct FromMeasure {
    LevyMeasure measure;
};
struct StablePower {
    double alpha;
};
struct LogSymbol {};
struct SkewedStable {
    double alpha;
    double beta;
};

using SymbolSpec = std::variant<FromMeasure, StablePower, LogSymbol, SkewedStable>;

std::string symbol_name(const SymbolSpec& sym);

/// psi*(r) = sup_{|xi| <= r} Re psi(xi).
double psi_star(const SymbolSpec& sym, double r);

struct WuscReport {
    double c_emp = 0.0;         // max psi*(lambda theta) / (lambda^alpha psi*(theta))
    double argmax_lambda = 0.0;
    double argmax_theta = 0.0;
    double trend_slope = 0.0;   // d log(max_theta ratio) / d log lambda over the top of the grid
    bool bounded = true;        // false when the ratio keeps growing with lambda
};

/// Empirical weak upper scaling constant of psi* on the grid.
WuscReport check_wusc(const SymbolSpec& sym, double alpha, double theta0, const std::vector<double>& lambda_grid,
                      const std::vector<double>& theta_grid);

struct EquivalenceReport {
    double min_ratio = 0.0;  // min over grid of psi*(r) / h(1/r)
    double max_ratio = 0.0;
    double lower_bound = 0.0;  // 1 / (8 (1 + 2d))
    double upper_bound = 2.0;
    bool comparability_holds = false;
    double c_wusc = 0.0;   // empirical constant of psi* in WUSC(alpha, 0, .)
    double c_h = 0.0;      // empirical constant C in h(lambda r) <= C lambda^-alpha h(r)
    double c_d = 0.0;      // 16 (1 + 2d)
    bool a1_implies_a2 = false;  // c_h <= c_d * c_wusc
    bool a2_implies_a1 = false;  // c_wusc <= c_d * c_h
};

/// Checks psi*/h comparability and the (A1) <=> (A2) constants on a grid of
/// radii r and scale factors lambda >= 1.
EquivalenceReport scaling_equivalence_check(const LevyMeasure& nu, const SymbolSpec& sym, double alpha,
                                            const std::vector<double>& r_grid,
                                            const std::vector<double>& lambda_grid);

}  // namespace nlheat::levy
