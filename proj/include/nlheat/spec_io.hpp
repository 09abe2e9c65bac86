#pragma once

// JSON and shorthand specs for bodies, measures, drivers and t grids.
//
// Bodies:
//   {"shape":"interval","a":0,"b":1}                      interval:a,b
//   {"shape":"box","sides":[[0,1],[0,2]]}                 box:L1,L2,...  ([0,L_i])
//   {"shape":"ball","d":2,"center":[0,0],"radius":1}      ball:d,R      (centred at 0)
//   {"shape":"polygon","vertices":[[0,0],[1,0],[0,1]]}    polygon:x1,y1,x2,y2,...
//   {"shape":"box_union","boxes":[{"sides":[[0,1]]},...]}
// Measures / drivers:
//   {"family":"isotropic_stable","alpha":0.5,"d":1}       stable:alpha[,d]
//   {"family":"one_dim_stable","alpha":1.5,"beta":0.3}    skewed:alpha,beta
//   {"family":"atomic","atoms":[{"location":[0.3],"mass":1}]}
//                                                         atoms:x1:m1,x2:m2  (1-D)
// t grids:
//   {"t0":1e-2,"ratio":0.5,"count":11} or [t1, t2, ...]   t0,ratio,count
// Unknown keys are rejected with ConfigError.

#include <string>
#include <vector>

#include <json.hpp>

#include "nlheat/geometry.hpp"
#include "nlheat/heat.hpp"
#include "nlheat/levy.hpp"

namespace nlheat::spec_io {

using nlohmann::json;

geometry::Body parse_body(const json& j);
levy::LevyMeasure parse_measure(const json& j);
heat::Driver parse_driver(const json& j);
std::vector<double> parse_tgrid(const json& j);

/// Shorthand ("interval:0,1"), inline JSON ("{...}") or a path to a JSON file.
geometry::Body body_from_string(const std::string& s);
levy::LevyMeasure measure_from_string(const std::string& s);
heat::Driver driver_from_string(const std::string& s);
std::vector<double> tgrid_from_string(const std::string& s);

json body_to_json(const geometry::Body& body);

}  // namespace nlheat::spec_io
