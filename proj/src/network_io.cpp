#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "phylonet/errors.hpp"
#include "phylonet/io.hpp"

namespace phylonet::io {

namespace {

std::string end_name(LineageEnd e) {
  switch (e) {
    case LineageEnd::Death:
      return "death";
    case LineageEnd::Mutation:
      return "mutation";
    case LineageEnd::Coalescence:
      return "coalescence";
  }
  return "death";
}

LineageEnd end_from_name(const std::string& s) {
  if (s == "death") return LineageEnd::Death;
  if (s == "mutation") return LineageEnd::Mutation;
  if (s == "coalescence") return LineageEnd::Coalescence;
  throw std::invalid_argument("unknown lineage end '" + s + "'");
}

// Shortest round-trip representation of a double.
std::string num(double x) { return json(x).dump(); }

}  // namespace

json to_json(const MarkedTrajectory& x) {
  json ev = json::array();
  for (const Event& e : x.events()) ev.push_back({e.time, std::string(1, event_code(e.kind))});
  return json{{"initial_state", x.initial_state()}, {"start_time", x.start_time()}, {"events", ev}};
}

MarkedTrajectory trajectory_from_json(const json& j) {
  std::vector<Event> ev;
  for (const auto& e : j.at("events")) {
    std::string k = e.at(1).get<std::string>();
    if (k.size() != 1) throw std::invalid_argument("event kind must be one letter");
    ev.push_back({e.at(0).get<double>(), event_from_code(k[0])});
  }
  return MarkedTrajectory(j.at("initial_state").get<int>(), j.at("start_time").get<double>(),
                          std::move(ev));
}

json to_json(const ColorNetwork& c) {
  json lin = json::array();
  for (const auto& l : c.lineages()) {
    json o{{"birth", l.birth_time}, {"end", l.end_time}, {"end_kind", end_name(l.end)}};
    o["parent"] = l.parent ? json(*l.parent) : json(nullptr);
    if (l.end != LineageEnd::Death) o["end_ref"] = l.end_ref;
    lin.push_back(o);
  }
  json mp = json::array();
  for (const auto& m : c.mutation_points()) mp.push_back({m.lineage, m.time});
  json out{{"trajectory", to_json(c.trajectory())}, {"lineages", lin}, {"mutation_points", mp}};
  out["focal_point"] = c.focal_point() ? json{c.focal_point()->lineage, c.focal_point()->time}
                                       : json(nullptr);
  return out;
}

ColorNetwork color_from_json(const json& j) {
  MarkedTrajectory x = trajectory_from_json(j.at("trajectory"));
  std::vector<Lineage> lin;
  for (const auto& o : j.at("lineages")) {
    Lineage l;
    l.birth_time = o.at("birth").get<double>();
    l.end_time = o.at("end").get<double>();
    l.end = end_from_name(o.at("end_kind").get<std::string>());
    if (!o.at("parent").is_null()) l.parent = o.at("parent").get<std::size_t>();
    if (l.end != LineageEnd::Death) l.end_ref = o.at("end_ref").get<std::size_t>();
    lin.push_back(std::move(l));
  }
  // Branch and merge lists follow from parents and coalescence targets.
  for (std::size_t i = 0; i < lin.size(); ++i) {
    if (lin[i].parent) lin.at(*lin[i].parent).branches.push_back(i);
    if (lin[i].end == LineageEnd::Coalescence) lin.at(lin[i].end_ref).merged_in.push_back(i);
  }
  for (auto& l : lin) {
    std::stable_sort(l.branches.begin(), l.branches.end(),
                     [&](std::size_t a, std::size_t b) { return lin[a].birth_time < lin[b].birth_time; });
    std::stable_sort(l.merged_in.begin(), l.merged_in.end(),
                     [&](std::size_t a, std::size_t b) { return lin[a].end_time < lin[b].end_time; });
  }
  std::vector<MutationPoint> mp;
  for (const auto& m : j.at("mutation_points"))
    mp.push_back({m.at(0).get<std::size_t>(), m.at(1).get<double>()});
  ColorNetwork c(std::move(x), std::move(lin), std::move(mp));
  if (j.contains("focal_point") && !j.at("focal_point").is_null())
    c.set_focal_point({j["focal_point"].at(0).get<std::size_t>(), j["focal_point"].at(1).get<double>()});
  return c;
}

json to_json(const GluedNetwork& g) {
  json decs = json::array();
  for (const auto& d : g.decorations()) decs.push_back(to_json(d));
  json glue_map = json::array();
  for (std::size_t v = 0; v < g.colors(); ++v) {
    const auto& ch = g.tree().children(v);
    for (std::size_t i = 0; i < ch.size(); ++i) glue_map.push_back({v, i, ch[i]});
  }
  return json{{"schema_version", kSchemaVersion},
              {"tree", {{"outdegrees", g.tree().outdegrees()}}},
              {"decorations", decs},
              {"glue", glue_map},
              {"total_length", g.total_length()}};
}

GluedNetwork network_from_json(const json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw std::invalid_argument("unsupported network schema_version");
  GenealogyTree t = GenealogyTree::from_outdegrees(j.at("tree").at("outdegrees").get<std::vector<int>>());
  std::vector<ColorNetwork> decs;
  for (const auto& d : j.at("decorations")) decs.push_back(color_from_json(d));
  for (const auto& e : j.at("glue")) {
    std::size_t v = e.at(0), i = e.at(1), c = e.at(2);
    if (v >= t.size() || i >= t.children(v).size() || t.children(v)[i] != c)
      throw StructuralError("glue map does not match the tree");
  }
  return glue(std::move(t), std::move(decs));
}

std::string edge_csv(const GluedNetwork& g) {
  std::ostringstream s;
  s << "edge,u,v,weight,time_u,time_v\n";
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    s << e << ',' << g.edge_u(e) << ',' << g.edge_v(e) << ',' << num(g.edge_weight(e)) << ','
      << num(g.node_time(g.edge_u(e))) << ',' << num(g.node_time(g.edge_v(e))) << '\n';
  return s.str();
}

std::string extended_newick(const GluedNetwork& g) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> hybrid;
  auto hybrid_id = [&](std::size_t v, std::size_t l) {
    auto [it, fresh] = hybrid.emplace(std::make_pair(v, l), hybrid.size() + 1);
    (void)fresh;
    return it->second;
  };
  // Part of lineage l of color v after local time `from`, as a subtree whose
  // parent edge has length (first node time - from).
  std::function<std::string(std::size_t, std::size_t, double)> emit =
      [&](std::size_t v, std::size_t l, double from) -> std::string {
    const auto& lin = g.decorations()[v].lineages();
    const Lineage& x = lin[l];
    // Next interior point strictly after `from`.
    double next = x.end_time;
    int kind = 0;  // 0 end, 1 branch, 2 merge
    std::size_t other = 0;
    for (std::size_t c : x.branches)
      if (lin[c].birth_time > from && lin[c].birth_time < next) {
        next = lin[c].birth_time;
        kind = 1;
        other = c;
      }
    for (std::size_t m : x.merged_in)
      if (lin[m].end_time > from && lin[m].end_time < next) {
        next = lin[m].end_time;
        kind = 2;
        other = m;
      }
    std::string len = ":" + num(next - from);
    if (kind == 1) return "(" + emit(v, l, next) + "," + emit(v, other, next) + ")" + len;
    if (kind == 2)
      return "(" + emit(v, l, next) + ")#H" + std::to_string(hybrid_id(v, other)) + len;
    std::string tag = std::to_string(v) + "_" + std::to_string(l);
    switch (x.end) {
      case LineageEnd::Death:
        return "d" + tag + len;
      case LineageEnd::Coalescence:
        return "#H" + std::to_string(hybrid_id(v, l)) + len;
      case LineageEnd::Mutation: {
        std::size_t w = g.tree().children(v)[x.end_ref];
        const auto& wl = g.decorations()[w].lineages();
        return "(" + emit(w, 0, wl[0].birth_time) + ")m" + std::to_string(v) + "_" +
               std::to_string(x.end_ref) + len;
      }
    }
    return tag;
  };
  const auto& root = g.decorations()[0].lineages()[0];
  return "(" + emit(0, 0, root.birth_time) + ")root;";
}

std::string height_csv(const HeightProcess& h) {
  std::ostringstream s;
  s << "t,h\n";
  for (std::size_t i = 0; i < h.t.size(); ++i) s << num(h.t[i]) << ',' << num(h.h[i]) << '\n';
  return s.str();
}

json to_json(const CertifiedValue& v) {
  return json{{"lower", v.lower}, {"upper", v.upper}, {"depth", v.depth}, {"certified", v.certified}};
}

json to_json(const Estimate& e) {
  return json{{"value", e.value}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"flags", e.flags}};
}

json to_json(const LocalBall& b) {
  json vs = json::array();
  for (const auto& v : b.vertices) {
    json o{{"decoration", to_json(v.decoration)},
           {"outdegree", v.outdegree},
           {"distance", v.distance},
           {"parent_slot", v.parent_slot},
           {"spine_index", v.spine_index}};
    o["parent"] = v.parent ? json(*v.parent) : json(nullptr);
    vs.push_back(o);
  }
  return json{{"schema_version", kSchemaVersion},
              {"r", b.r},
              {"vertices", vs},
              {"focal_point", {{"vertex", 0}, {"lineage", b.focal.lineage}, {"time", b.focal.time}}},
              {"weight", b.weight},
              {"N", b.N}};
}

}  // namespace phylonet::io
