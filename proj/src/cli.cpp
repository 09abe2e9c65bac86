#include "nlheat/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlheat/errors.hpp"
#include "nlheat/expansion.hpp"
#include "nlheat/geometry.hpp"
#include "nlheat/heat.hpp"
#include "nlheat/spec_io.hpp"
#include "nlheat/stable.hpp"

namespace nlheat::cli {

using nlohmann::ordered_json;

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// JSON cannot hold inf/nan; they are written as strings.
ordered_json jnum(double x) {
    if (std::isfinite(x)) return x;
    return num(x);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("'" + item + "' is not a number");
        }
    }
    if (v.empty()) throw ConfigError("empty number list");
    return v;
}

struct Options {
    int threads = 0;
    std::string output;
    // shared
    std::string body = "interval:0,1";
    std::string measure;
    std::string driver;
    std::string tgrid;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double beta = std::numeric_limits<double>::quiet_NaN();
    int d = 1;
    double tol = 0.0;
    std::uint64_t seed = 1;
    // density
    std::string x;
    std::string xgrid;
    // heat-content
    std::string method = "quadrature";
    long samples = 1000000;
    // expansion
    int depth = 3;
    // verify
    std::string limit;
    int n = 1;
    std::string engine = "quadrature";
    int corrections = 3;
    std::string csv;
    // sample
    double t = 1.0;
};

heat::Driver driver_of(const Options& o) {
    if (!o.driver.empty()) return spec_io::driver_from_string(o.driver);
    if (std::isnan(o.alpha)) throw ConfigError("give --driver or --alpha");
    try {
        if (!std::isnan(o.beta)) return stable::SkewedStableParams(o.alpha, o.beta);
        return stable::IsotropicStableParams(o.alpha, o.d);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

int cmd_perimeter(const Options& o, std::ostream& out) {
    if (o.measure.empty()) throw ConfigError("perimeter: --measure is required");
    const auto body = spec_io::body_from_string(o.body);
    const auto nu = spec_io::measure_from_string(o.measure);
    const auto r = heat::nonlocal_perimeter(body, nu, o.tol > 0.0 ? o.tol : 1e-10);
    ordered_json j;
    j["body"] = spec_io::body_to_json(body);
    j["measure"] = nu.name();
    j["per_nu"] = jnum(r.value);
    j["error"] = jnum(r.error);
    j["divergent"] = r.divergent;
    if (std::holds_alternative<levy::IsotropicStable>(nu.family())) j["alpha_perimeter"] = jnum(r.alpha_perimeter);
    j["perimeter"] = geometry::CovarianceFn(body).perimeter();
    j["method"] = r.method;
    std::string prov = "int (g(0) - g(y)) nu(dy)";
    if (r.method == "closed_form") prov = "(c_+ + c_-) / (alpha (1 - alpha)) (b - a)^(1 - alpha)";
    if (r.method == "atomic_sum") prov = "sum_i m_i (g(0) - g(y_i))";
    if (r.divergent) prov = "integrand ~ |y|^(1 - d - alpha) near 0 is not integrable for alpha >= 1";
    j["provenance"] = prov;
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_density(const Options& o, std::ostream& out) {
    if (std::isnan(o.alpha)) throw ConfigError("density: --alpha is required");
    std::vector<double> xs;
    if (!o.x.empty()) xs = parse_list(o.x);
    if (!o.xgrid.empty()) {
        const auto g = parse_list(o.xgrid);
        if (g.size() != 3 || g[2] < 1 || g[2] != std::floor(g[2])) throw ConfigError("density: --xgrid x0,x1,count");
        const int n = static_cast<int>(g[2]);
        for (int i = 0; i < n; ++i) xs.push_back(n == 1 ? g[0] : g[0] + (g[1] - g[0]) * i / (n - 1));
    }
    if (xs.empty()) throw ConfigError("density: give --x or --xgrid");
    const bool skewed = !std::isnan(o.beta);
    std::optional<stable::SkewedStableParams> sp;
    std::optional<stable::IsotropicStableParams> ip;
    try {
        if (skewed || (o.d == 1 && o.alpha > 1.0))
            sp = stable::SkewedStableParams(o.alpha, skewed ? o.beta : 0.0);
        else
            ip = stable::IsotropicStableParams(o.alpha, o.d);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("density: ") + e.what());
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << "x,series_value,fourier_value,abs_diff\n";
    for (double x : xs) {
        double s = nan, f;
        try {
            s = sp ? stable::density_series_1d(*sp, x).value : stable::density_series_isotropic(*ip, std::abs(x)).value;
        } catch (const NumericError&) {
        } catch (const UnsupportedError&) {
        } catch (const DomainError&) {
        }
        f = sp ? stable::density_fourier(*sp, x).value : stable::density_fourier(*ip, std::abs(x)).value;
        out << num(x) << "," << num(s) << "," << num(f) << "," << num(std::abs(s - f)) << "\n";
    }
    return 0;
}

heat::Method method_of(const std::string& m) {
    if (m == "quadrature") return heat::Method::Quadrature;
    if (m == "mc") return heat::Method::MonteCarlo;
    if (m == "exact_1d") return heat::Method::Exact1D;
    throw ConfigError("unknown method '" + m + "' (quadrature, mc, exact_1d)");
}

int cmd_heat(const Options& o, std::ostream& out) {
    if (o.tgrid.empty()) throw ConfigError("heat-content: --tgrid is required");
    heat::HeatContentRequest req{spec_io::body_from_string(o.body), driver_of(o), spec_io::tgrid_from_string(o.tgrid)};
    std::sort(req.t.begin(), req.t.end());
    req.method = method_of(o.method);
    if (o.tol > 0.0) req.rel_tol = o.tol;
    req.mc_samples = o.samples;
    req.seed = o.seed;
    req.threads = o.threads;
    const auto rep = heat::heat_content(req);
    out << "t,H,H_over_t,stderr,method\n";
    for (std::size_t i = 0; i < rep.t.size(); ++i) {
        const double ratio = rep.t[i] > 0.0 ? rep.H[i] / rep.t[i] : std::numeric_limits<double>::quiet_NaN();
        out << num(rep.t[i]) << "," << num(rep.H[i]) << "," << num(ratio) << "," << num(rep.error[i]) << ","
            << heat::method_name(rep.method) << "\n";
    }
    return 0;
}

int cmd_expansion(const Options& o, std::ostream& out) {
    const auto body = spec_io::body_from_string(o.body);
    expansion::ExpansionSeries s;
    if (!o.measure.empty()) {
        s = expansion::compound_poisson_expansion(body, spec_io::measure_from_string(o.measure), o.depth);
    } else if (std::isnan(o.alpha)) {
        throw ConfigError("expansion: give --alpha (and optionally --beta) or --measure");
    } else if (!std::isnan(o.beta) || o.alpha > 1.0) {
        s = expansion::prop_expansion_1d(body, stable::SkewedStableParams(o.alpha, std::isnan(o.beta) ? 0.0 : o.beta),
                                         o.depth);
    } else {
        s = expansion::stable_expansion(body, o.alpha, o.depth);
    }
    ordered_json j;
    j["description"] = s.description;
    j["body"] = spec_io::body_to_json(body);
    j["t_max"] = jnum(s.t_max);
    j["terms"] = ordered_json::array();
    for (const auto& t : s.terms) {
        ordered_json tj;
        tj["order"] = t.order.str();
        tj["order_value"] = t.order.value;
        tj["log_power"] = t.log_power;
        tj["coefficient"] = jnum(t.coefficient);
        tj["error"] = jnum(t.error);
        tj["provenance"] = t.provenance;
        j["terms"].push_back(tj);
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
    if (o.limit.empty()) throw ConfigError("verify: --limit is required");
    if (o.tgrid.empty()) throw ConfigError("verify: --tgrid is required");
    expansion::VerifyRequest req;
    req.limit = expansion::parse_limit(o.limit);
    req.n = o.n;
    req.body = spec_io::body_from_string(o.body);
    req.driver = driver_of(o);
    req.t = spec_io::tgrid_from_string(o.tgrid);
    if (o.engine == "quadrature")
        req.engine = expansion::Engine::Quadrature;
    else if (o.engine == "exact_1d")
        req.engine = expansion::Engine::Exact1D;
    else
        throw ConfigError("unknown engine '" + o.engine + "' (quadrature, exact_1d)");
    req.tolerance = o.tol;
    req.corrections = o.corrections;
    req.threads = o.threads;
    const auto r = expansion::verify_limit(req);

    ordered_json j;
    j["limit"] = r.limit;
    j["body"] = spec_io::body_to_json(req.body);
    j["target"] = jnum(r.target);
    j["target_error"] = jnum(r.target_error);
    j["extrapolated"] = jnum(r.extrapolated);
    j["extrapolation_error"] = jnum(r.extrapolation_error);
    j["rel_error"] = jnum(r.rel_error);
    j["tolerance"] = r.tolerance;
    j["remainder_slope"] = jnum(r.remainder_slope);
    j["fit_basis"] = r.fit_basis;
    j["fit_coef"] = r.fit_coef;
    j["verdict"] = expansion::verdict_name(r.verdict);
    j["diagnostics"] = r.diagnostics;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < r.t.size(); ++i)
        rows.push_back({{"t", r.t[i]}, {"H", r.H[i]}, {"residual", r.residual[i]}, {"normalized", jnum(r.normalized[i])}});
    j["table"] = rows;
    out << j.dump(2) << "\n";
    if (!o.csv.empty()) {
        std::ofstream f(o.csv, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + o.csv);
        f << "t,H,residual,normalized\n";
        for (std::size_t i = 0; i < r.t.size(); ++i)
            f << num(r.t[i]) << "," << num(r.H[i]) << "," << num(r.residual[i]) << "," << num(r.normalized[i]) << "\n";
    }
    switch (r.verdict) {
        case expansion::Verdict::Pass: return 0;
        case expansion::Verdict::Fail: return 1;
        case expansion::Verdict::Inconclusive: return 4;
    }
    return 4;
}

int cmd_sample(const Options& o, std::ostream& out) {
    if (!(o.t >= 0.0)) throw ConfigError("sample: --t must be nonnegative");
    if (o.samples < 1) throw ConfigError("sample: --samples must be positive");
    const auto drv = driver_of(o);
    std::mt19937_64 rng(o.seed);
    if (const auto* p = std::get_if<stable::SkewedStableParams>(&drv)) {
        out << "x\n";
        for (double x : stable::sample(*p, o.t, rng, o.samples)) out << num(x) << "\n";
        return 0;
    }
    if (const auto* p = std::get_if<stable::IsotropicStableParams>(&drv)) {
        for (int k = 0; k < p->d; ++k) out << (k ? "," : "") << (p->d == 1 ? "x" : "x" + std::to_string(k + 1));
        out << "\n";
        for (const auto& v : stable::sample(*p, o.t, rng, o.samples)) {
            for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << num(v[k]);
            out << "\n";
        }
        return 0;
    }
    throw ConfigError("sample: needs a stable driver");
}

// Merges a JSON config file: keys are long option names of the chosen
// subcommand; flags given on the command line take precedence.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end()) return args;
    if (it + 1 == args.end()) throw ConfigError("--config needs a path");
    const std::string path = *(it + 1);
    args.erase(it, it + 2);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError(path + ": expected a JSON object");
    std::vector<std::string> extra;
    for (const auto& [key, val] : cfg.items()) {
        if (key == "subcommand") continue;
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(),
                                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
        if (given) continue;
        if (val.is_boolean()) {
            if (val.get<bool>()) extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        if (val.is_string())
            extra.push_back(val.get<std::string>());
        else if (val.is_number_float())
            extra.push_back(num(val.get<double>()));
        else
            extra.push_back(val.dump());
    }
    if (cfg.contains("subcommand")) {
        const auto sub = cfg["subcommand"].get<std::string>();
        if (std::find(args.begin(), args.end(), sub) == args.end()) args.insert(args.begin(), sub);
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Heat content of Levy semigroups: perimeters, densities, expansions and limit checks", "nlheat"};
    app.require_subcommand(1);
    app.add_option("--threads", o.threads, "worker threads (default: NONLOCAL_HEAT_THREADS or all cores)");
    app.add_option("--output", o.output, "write the result here instead of stdout");
    app.set_help_all_flag("--help-all");
    app.fallthrough();  // global options may also follow the subcommand

    auto* per = app.add_subcommand("perimeter", "nonlocal perimeter Per_nu of a body");
    per->add_option("--body", o.body, "body spec")->capture_default_str();
    per->add_option("--measure", o.measure, "Levy measure spec")->required();
    per->add_option("--tol", o.tol, "relative tolerance");

    auto* den = app.add_subcommand("density", "stable density by series and by Fourier inversion (CSV)");
    den->add_option("--alpha", o.alpha)->required();
    den->add_option("--beta", o.beta, "skewness; selects the 1-D skewed law");
    den->add_option("--d", o.d, "dimension of the isotropic law")->capture_default_str();
    den->add_option("--x", o.x, "comma-separated points (radii for d > 1)");
    den->add_option("--xgrid", o.xgrid, "x0,x1,count (linear)");

    auto* hc = app.add_subcommand("heat-content", "H(t) on a t grid (CSV)");
    hc->add_option("--body", o.body)->capture_default_str();
    hc->add_option("--driver", o.driver, "driver spec (stable:a[,d], skewed:a,b, atoms:..., JSON)");
    hc->add_option("--alpha", o.alpha);
    hc->add_option("--beta", o.beta);
    hc->add_option("--d", o.d);
    hc->add_option("--tgrid", o.tgrid, "t0,ratio,count or JSON")->required();
    hc->add_option("--method", o.method, "quadrature | mc | exact_1d")->capture_default_str();
    hc->add_option("--samples", o.samples, "Monte Carlo samples")->capture_default_str();
    hc->add_option("--seed", o.seed)->capture_default_str();
    hc->add_option("--tol", o.tol, "relative quadrature tolerance");

    auto* ex = app.add_subcommand("expansion", "small-time expansion of H(t) (JSON)");
    ex->add_option("--body", o.body)->capture_default_str();
    ex->add_option("--alpha", o.alpha);
    ex->add_option("--beta", o.beta, "selects the exact interval series for the skewed law");
    ex->add_option("--measure", o.measure, "finite atomic measure: compound Poisson series");
    ex->add_option("--depth", o.depth, "number of terms")->capture_default_str();

    auto* ve = app.add_subcommand("verify", "numerical check of a small-time limit (JSON)");
    ve->add_option("--limit", o.limit, "first-order | perimeter-series | log-term | power-term | mean-abs")->required();
    ve->add_option("--n", o.n, "order for perimeter-series")->capture_default_str();
    ve->add_option("--body", o.body)->capture_default_str();
    ve->add_option("--driver", o.driver);
    ve->add_option("--alpha", o.alpha);
    ve->add_option("--beta", o.beta);
    ve->add_option("--d", o.d);
    ve->add_option("--tgrid", o.tgrid)->required();
    ve->add_option("--engine", o.engine, "quadrature | exact_1d")->capture_default_str();
    ve->add_option("--tol", o.tol, "relative tolerance (default per limit)");
    ve->add_option("--corrections", o.corrections, "correction terms in the fit")->capture_default_str();
    ve->add_option("--csv", o.csv, "also write the residual table here");

    auto* sa = app.add_subcommand("sample", "draw X_t (CSV)");
    sa->add_option("--driver", o.driver);
    sa->add_option("--alpha", o.alpha);
    sa->add_option("--beta", o.beta);
    sa->add_option("--d", o.d);
    sa->add_option("--t", o.t)->capture_default_str();
    sa->add_option("--samples", o.samples)->capture_default_str();
    sa->add_option("--seed", o.seed)->capture_default_str();

    try {
        auto args = merge_config(raw);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }

    std::ostringstream buf;
    int code = 0;
    try {
        if (o.threads < 0) throw ConfigError("--threads must be nonnegative");
        if (*per) code = cmd_perimeter(o, buf);
        if (*den) code = cmd_density(o, buf);
        if (*hc) code = cmd_heat(o, buf);
        if (*ex) code = cmd_expansion(o, buf);
        if (*ve) code = cmd_verify(o, buf);
        if (*sa) code = cmd_sample(o, buf);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << " (partial " << num(e.partial()) << ", error estimate "
            << num(e.error_estimate()) << ")\n";
        return 3;
    } catch (const ResourceError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    if (o.output.empty()) {
        out << buf.str();
    } else {
        std::ofstream f(o.output, std::ios::binary);
        if (!f) {
            err << "config error: cannot write " << o.output << "\n";
            return 2;
        }
        f << buf.str();
    }
    return code;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace nlheat::cli
