#include "nlheat/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat::spec_io {

using geometry::Body;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError(what + ": unknown key '" + k + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) throw ConfigError(what + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(what + ": key '" + key + "' has the wrong type");
    }
}

std::vector<double> numbers(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + item + "' is not a number");
        }
    }
    return out;
}

geometry::Interval parse_side(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(what + ": a side is [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

geometry::Box parse_box(const json& j, const std::string& what) {
    only_keys(j, {"shape", "sides"}, what);
    geometry::Box b;
    const auto sides = get<json>(j, "sides", what);
    if (!sides.is_array()) throw ConfigError(what + ": 'sides' must be an array");
    for (const auto& s : sides) b.sides.push_back(parse_side(s, what));
    return b;
}

// Splits "kind:rest"; empty kind when there is no colon.
std::pair<std::string, std::string> split_kind(const std::string& s) {
    const auto p = s.find(':');
    if (p == std::string::npos) return {"", s};
    return {s.substr(0, p), s.substr(p + 1)};
}

std::optional<json> as_json(const std::string& s) {
    if (s.empty()) throw ConfigError("empty spec");
    if (s.front() == '{' || s.front() == '[') {
        try {
            return json::parse(s);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
    }
    if (s.size() > 5 && s.substr(s.size() - 5) == ".json") {
        std::ifstream in(s);
        if (!in) throw ConfigError("cannot open " + s);
        try {
            return json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(s + ": invalid JSON: " + e.what());
        }
    }
    return std::nullopt;
}

template <class F>
auto wrap(const std::string& what, F f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

}  // namespace

Body parse_body(const json& j) {
    const std::string what = "body";
    return wrap(what, [&] {
        const auto shape = get<std::string>(j, "shape", what);
        if (shape == "interval") {
            only_keys(j, {"shape", "a", "b"}, what);
            return Body::interval(get<double>(j, "a", what), get<double>(j, "b", what));
        }
        if (shape == "box") return Body(parse_box(j, what));
        if (shape == "ball") {
            only_keys(j, {"shape", "d", "center", "radius"}, what);
            geometry::Ball b;
            b.radius = get<double>(j, "radius", what);
            if (j.contains("center")) b.center = get<std::vector<double>>(j, "center", what);
            if (j.contains("d")) {
                const int d = get<int>(j, "d", what);
                if (d < 1) throw ConfigError(what + ": d must be positive");
                if (b.center.empty()) b.center.assign(d, 0.0);
                if (static_cast<int>(b.center.size()) != d) throw ConfigError(what + ": center has the wrong length");
            }
            if (b.center.empty()) throw ConfigError(what + ": ball needs d or center");
            return Body(b);
        }
        if (shape == "polygon") {
            only_keys(j, {"shape", "vertices"}, what);
            geometry::Polygon2D p;
            for (const auto& v : get<json>(j, "vertices", what)) {
                if (!v.is_array() || v.size() != 2) throw ConfigError(what + ": vertices are [x, y]");
                p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            return Body(p);
        }
        if (shape == "box_union") {
            only_keys(j, {"shape", "boxes"}, what);
            geometry::DisjointBoxUnion u;
            for (const auto& b : get<json>(j, "boxes", what)) u.boxes.push_back(parse_box(b, what));
            return Body(u);
        }
        throw ConfigError(what + ": unknown shape '" + shape + "'");
    });
}

levy::LevyMeasure parse_measure(const json& j) {
    const std::string what = "measure";
    return wrap(what, [&] {
        const auto fam = get<std::string>(j, "family", what);
        if (fam == "isotropic_stable") {
            only_keys(j, {"family", "alpha", "d"}, what);
            return levy::LevyMeasure::isotropic_stable(get<double>(j, "alpha", what),
                                                       j.contains("d") ? get<int>(j, "d", what) : 1);
        }
        if (fam == "one_dim_stable") {
            only_keys(j, {"family", "alpha", "beta"}, what);
            return levy::LevyMeasure::one_dim_stable(get<double>(j, "alpha", what),
                                                     j.contains("beta") ? get<double>(j, "beta", what) : 0.0);
        }
        if (fam == "atomic") {
            only_keys(j, {"family", "atoms"}, what);
            std::vector<levy::Atom> atoms;
            for (const auto& a : get<json>(j, "atoms", what)) {
                only_keys(a, {"location", "mass"}, what + " atom");
                atoms.push_back({get<std::vector<double>>(a, "location", what), get<double>(a, "mass", what)});
            }
            return levy::LevyMeasure::atoms(std::move(atoms));
        }
        throw ConfigError(what + ": unknown family '" + fam + "'");
    });
}

heat::Driver parse_driver(const json& j) {
    const std::string what = "driver";
    return wrap(what, [&]() -> heat::Driver {
        const auto fam = get<std::string>(j, "family", what);
        if (fam == "isotropic_stable") {
            only_keys(j, {"family", "alpha", "d"}, what);
            return stable::IsotropicStableParams(get<double>(j, "alpha", what),
                                                 j.contains("d") ? get<int>(j, "d", what) : 1);
        }
        if (fam == "one_dim_stable") {
            only_keys(j, {"family", "alpha", "beta"}, what);
            return stable::SkewedStableParams(get<double>(j, "alpha", what),
                                              j.contains("beta") ? get<double>(j, "beta", what) : 0.0);
        }
        return parse_measure(j);
    });
}

std::vector<double> parse_tgrid(const json& j) {
    const std::string what = "t grid";
    if (j.is_array()) {
        try {
            return j.get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError(what + ": expected an array of numbers");
        }
    }
    only_keys(j, {"t0", "ratio", "count"}, what);
    const double t0 = get<double>(j, "t0", what);
    const double q = get<double>(j, "ratio", what);
    const int n = get<int>(j, "count", what);
    if (!(t0 > 0.0) || !(q > 0.0) || q == 1.0 || n < 1) throw ConfigError(what + ": need t0 > 0, ratio > 0, != 1, count >= 1");
    std::vector<double> t;
    for (int k = 0; k < n; ++k) t.push_back(t0 * std::pow(q, k));
    return t;
}

Body body_from_string(const std::string& s) {
    if (auto j = as_json(s)) return parse_body(*j);
    const auto [kind, rest] = split_kind(s);
    const auto v = numbers(rest, "body");
    return wrap("body", [&, kind = kind] {
        if (kind == "interval") {
            if (v.size() != 2) throw ConfigError("body: interval:a,b");
            return Body::interval(v[0], v[1]);
        }
        if (kind == "ball") {
            if (v.size() != 2 || v[0] != std::floor(v[0])) throw ConfigError("body: ball:d,R");
            geometry::Ball b{std::vector<double>(static_cast<std::size_t>(std::max(0.0, v[0])), 0.0), v[1]};
            return Body(b);
        }
        if (kind == "box") {
            geometry::Box b;
            for (double L : v) b.sides.push_back({0.0, L});
            return Body(b);
        }
        if (kind == "polygon") {
            if (v.size() % 2) throw ConfigError("body: polygon needs x,y pairs");
            geometry::Polygon2D p;
            for (std::size_t i = 0; i < v.size(); i += 2) p.vertices.push_back({v[i], v[i + 1]});
            return Body(p);
        }
        throw ConfigError("body: unknown shorthand '" + s + "'");
    });
}

levy::LevyMeasure measure_from_string(const std::string& s) {
    if (auto j = as_json(s)) return parse_measure(*j);
    const auto [kind, rest] = split_kind(s);
    return wrap("measure", [&, kind = kind, rest = rest] {
        if (kind == "atoms") {
            std::vector<levy::Atom> atoms;
            std::stringstream ss(rest);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto [x, m] = split_kind(item);
                if (x.empty()) throw ConfigError("measure: atoms:x1:m1,x2:m2");
                atoms.push_back({numbers(x, "measure"), numbers(m, "measure").at(0)});
            }
            return levy::LevyMeasure::atoms(std::move(atoms));
        }
        const auto v = numbers(rest, "measure");
        if (kind == "stable" && (v.size() == 1 || v.size() == 2))
            return levy::LevyMeasure::isotropic_stable(v[0], v.size() == 2 ? static_cast<int>(v[1]) : 1);
        if (kind == "skewed" && v.size() == 2) return levy::LevyMeasure::one_dim_stable(v[0], v[1]);
        throw ConfigError("measure: unknown shorthand '" + s + "'");
    });
}

heat::Driver driver_from_string(const std::string& s) {
    if (auto j = as_json(s)) return parse_driver(*j);
    const auto [kind, rest] = split_kind(s);
    if (kind == "atoms") return measure_from_string(s);
    const auto v = numbers(rest, "driver");
    return wrap("driver", [&, kind = kind]() -> heat::Driver {
        if (kind == "stable" && (v.size() == 1 || v.size() == 2))
            return stable::IsotropicStableParams(v[0], v.size() == 2 ? static_cast<int>(v[1]) : 1);
        if (kind == "skewed" && v.size() == 2) return stable::SkewedStableParams(v[0], v[1]);
        throw ConfigError("driver: unknown shorthand '" + s + "'");
    });
}

std::vector<double> tgrid_from_string(const std::string& s) {
    if (auto j = as_json(s)) return parse_tgrid(*j);
    const auto v = numbers(s, "t grid");
    if (v.size() != 3 || v[2] != std::floor(v[2])) throw ConfigError("t grid: expected t0,ratio,count");
    return parse_tgrid(json{{"t0", v[0]}, {"ratio", v[1]}, {"count", static_cast<int>(v[2])}});
}

json body_to_json(const Body& body) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            auto box = [](const geometry::Box& b) {
                json sides = json::array();
                for (const auto& iv : b.sides) sides.push_back({iv.a, iv.b});
                return json{{"shape", "box"}, {"sides", sides}};
            };
            if constexpr (std::is_same_v<S, geometry::Interval>) {
                return {{"shape", "interval"}, {"a", s.a}, {"b", s.b}};
            } else if constexpr (std::is_same_v<S, geometry::Box>) {
                return box(s);
            } else if constexpr (std::is_same_v<S, geometry::Ball>) {
                return {{"shape", "ball"}, {"d", s.center.size()}, {"center", s.center}, {"radius", s.radius}};
            } else if constexpr (std::is_same_v<S, geometry::Polygon2D>) {
                json v = json::array();
                for (const auto& p : s.vertices) v.push_back({p[0], p[1]});
                return {{"shape", "polygon"}, {"vertices", v}};
            } else {
                json boxes = json::array();
                for (const auto& b : s.boxes) boxes.push_back({{"sides", box(b)["sides"]}});
                return {{"shape", "box_union"}, {"boxes", boxes}};
            }
        },
        body.shape());
}

}  // namespace nlheat::spec_io
