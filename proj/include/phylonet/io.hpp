#pragma once

#include <string>

#include "json.hpp"
#include "phylonet/analytics.hpp"
#include "phylonet/limits.hpp"
#include "phylonet/network.hpp"

namespace phylonet::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// {initial_state, start_time, events: [[time, "B"|"D"|"C"|"M"], ...]}
json to_json(const MarkedTrajectory& x);
MarkedTrajectory trajectory_from_json(const json& j);

json to_json(const ColorNetwork& c);
ColorNetwork color_from_json(const json& j);

/// {schema_version, tree: {outdegrees}, decorations, glue: [[vertex, slot, child], ...]}
json to_json(const GluedNetwork& g);
GluedNetwork network_from_json(const json& j);

/// Edge list with node time coordinates: edge,u,v,weight,time_u,time_v
std::string edge_csv(const GluedNetwork& g);
/// Extended Newick: coalescence points are hybrid nodes #H<k>, mutation
/// points are internal nodes m<color>_<slot> above the child color's root.
std::string extended_newick(const GluedNetwork& g);
/// t,h
std::string height_csv(const HeightProcess& h);

/// {lower, upper, depth, certified}
json to_json(const CertifiedValue& v);
json to_json(const Estimate& e);
json to_json(const LocalBall& b);

}  // namespace phylonet::io
