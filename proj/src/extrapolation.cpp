#include "nlheat/extrapolation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "nlheat/errors.hpp"

namespace nlheat::extrap {

std::vector<double> aitken(std::span<const double> s) {
    std::vector<double> out;
    if (s.size() < 3) return out;
    out.reserve(s.size() - 2);
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        const double d1 = s[i + 1] - s[i];
        const double d2 = s[i + 2] - s[i + 1];
        const double den = d2 - d1;
        if (den == 0.0 || !std::isfinite(den))
            out.push_back(s[i + 2]);
        else
            out.push_back(s[i + 2] - d2 * d2 / den);
    }
    return out;
}

Estimate aitken_limit(std::span<const double> seq) {
    if (seq.size() < 4) throw DomainError("aitken_limit: need at least four terms");
    const auto acc = aitken(seq);
    const double last = acc.back();
    const double prev = acc[acc.size() - 2];
    return {last, std::abs(last - prev)};
}

namespace {

double richardson_once(std::span<const double> t, std::span<const double> y, std::span<const double> e,
                       std::size_t end) {
    const std::size_t m = e.size() + 1;
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t r = end - m + i;
        a(i, 0) = 1.0;
        for (std::size_t j = 0; j < e.size(); ++j) a(i, j + 1) = std::pow(t[r], e[j]);
        b(i) = y[r];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
    return c(0);
}

}  // namespace

Estimate richardson(std::span<const double> t, std::span<const double> y, std::span<const double> exponents) {
    if (t.size() != y.size()) throw DomainError("richardson: size mismatch");
    const std::size_t m = exponents.size() + 1;
    if (t.size() < m) throw DomainError("richardson: not enough samples for the requested exponents");
    const double last = richardson_once(t, y, exponents, t.size());
    double err = std::numeric_limits<double>::infinity();
    if (t.size() > m) err = std::abs(last - richardson_once(t, y, exponents, t.size() - 1));
    return {last, err};
}

LinearFit least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> y) {
    const std::size_t n = y.size();
    const std::size_t k = columns.size();
    if (k == 0 || n < k) throw DomainError("least_squares: underdetermined system");
    Eigen::MatrixXd a(n, k);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        b(i) = y[i];
        for (std::size_t j = 0; j < k; ++j) {
            if (columns[j].size() != n) throw DomainError("least_squares: column size mismatch");
            a(i, j) = columns[j][i];
        }
    }
    // column scaling keeps the QR well conditioned for t^p columns of disparate size
    Eigen::VectorXd scale(k);
    for (std::size_t j = 0; j < k; ++j) {
        scale(j) = a.col(j).norm();
        if (scale(j) == 0.0) scale(j) = 1.0;
        a.col(j) /= scale(j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::VectorXd c = qr.solve(b);
    const Eigen::VectorXd r = b - a * c;
    LinearFit fit;
    fit.coef.resize(k);
    fit.stderr_.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) fit.coef[j] = c(j) / scale(j);
    fit.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    if (n > k) {
        const double s2 = r.squaredNorm() / static_cast<double>(n - k);
        const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * s2;
        for (std::size_t j = 0; j < k; ++j) fit.stderr_[j] = std::sqrt(std::max(0.0, cov(j, j))) / scale(j);
    }
    return fit;
}

Estimate wynn_epsilon(std::span<const double> s) {
    const std::size_t n = s.size();
    if (n == 0) throw DomainError("wynn_epsilon: empty sequence");
    if (n < 3) return {s.back(), n > 1 ? std::abs(s[n - 1] - s[n - 2]) : 0.0};
    // e[k][j]: column k of the epsilon table
    std::vector<double> prev(n + 1, 0.0), cur(s.begin(), s.end());
    std::vector<double> best;  // even columns' last entries
    best.push_back(cur.back());
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
            const double diff = cur[j + 1] - cur[j];
            const double base = (k == 1) ? 0.0 : prev[j + 1];
            if (diff == 0.0 || !std::isfinite(diff)) {
                next[j] = std::numeric_limits<double>::infinity();
            } else {
                next[j] = base + 1.0 / diff;
            }
        }
        prev = cur;
        cur = next;
        if (k % 2 == 0 && !cur.empty() && std::isfinite(cur.back())) best.push_back(cur.back());
        if (cur.size() < 2) break;
    }
    const double v = best.back();
    const double e = best.size() > 1 ? std::abs(best.back() - best[best.size() - 2]) : std::abs(s[n - 1] - s[n - 2]);
    return {v, e};
}

double loglog_slope(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.size() < 2) throw DomainError("loglog_slope: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double lx = std::log(t[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nlheat::extrap
