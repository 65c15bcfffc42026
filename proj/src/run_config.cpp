#include "eigenflow/run_config.hpp"

#include "eigenflow/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace eigenflow {

namespace {

using Json = nlohmann::ordered_json;

void only_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw InvalidInput("unknown key '" + where + "." + key + "'");
}

template <class T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput("wrong type for '" + where + "." + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string to_string(Direction direction) {
  return direction == Direction::nondecreasing ? "nondecreasing" : "nonincreasing";
}

Direction parse_direction(const std::string& text) {
  if (text == "nondecreasing") return Direction::nondecreasing;
  if (text == "nonincreasing") return Direction::nonincreasing;
  throw InvalidInput("direction must be nondecreasing or nonincreasing, got '" + text + "'");
}

RunConfig parse_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  only_keys(root, "config", {"shape", "forcing", "flow", "spectrum", "checks", "output"});

  if (root.contains("shape")) {
    const Json& s = root["shape"];
    only_keys(s, "shape", {"kind", "params"});
    read(s, "kind", c.shape.kind, "shape");
    const Json params = s.contains("params") ? s["params"] : Json::object();
    if (c.shape.kind == "icosphere") {
      only_keys(params, "shape.params", {"radius", "subdivisions"});
      read(params, "radius", c.shape.radius, "shape.params");
      read(params, "subdivisions", c.shape.subdivisions, "shape.params");
    } else if (c.shape.kind == "ellipsoid") {
      only_keys(params, "shape.params", {"axes", "subdivisions"});
      read(params, "axes", c.shape.axes, "shape.params");
      read(params, "subdivisions", c.shape.subdivisions, "shape.params");
    } else if (c.shape.kind == "file") {
      only_keys(params, "shape.params", {"path"});
      read(params, "path", c.shape.path, "shape.params");
      require(!c.shape.path.empty(), "file shape needs params.path");
    } else {
      throw InvalidInput("shape.kind must be icosphere, ellipsoid or file");
    }
  }

  read(root, "forcing", c.forcing, "config");
  Forcing::parse(c.forcing);

  if (root.contains("flow")) {
    const Json& f = root["flow"];
    only_keys(f, "flow", {"cfl", "t_end", "H_cap", "min_area_fraction", "snapshot_every", "max_steps"});
    read(f, "cfl", c.flow.cfl, "flow");
    read(f, "t_end", c.flow.t_end, "flow");
    if (f.contains("H_cap") && !f["H_cap"].is_null()) read(f, "H_cap", c.flow.H_cap, "flow");
    read(f, "min_area_fraction", c.flow.min_area_fraction, "flow");
    read(f, "snapshot_every", c.flow.snapshot_every, "flow");
    read(f, "max_steps", c.flow.max_steps, "flow");
  }

  if (root.contains("spectrum")) {
    const Json& s = root["spectrum"];
    only_keys(s, "spectrum", {"p_values", "tol", "p_tol", "max_iter", "seed"});
    read(s, "p_values", c.spectrum.p_values, "spectrum");
    read(s, "tol", c.spectrum.tol, "spectrum");
    read(s, "p_tol", c.spectrum.p_tol, "spectrum");
    read(s, "max_iter", c.spectrum.max_iter, "spectrum");
    read(s, "seed", c.spectrum.seed, "spectrum");
  }

  if (root.contains("checks")) {
    const Json& k = root["checks"];
    only_keys(k, "checks", {"bound_tol", "derivative_tol", "monotone"});
    read(k, "bound_tol", c.checks.bound_tol, "checks");
    read(k, "derivative_tol", c.checks.derivative_tol, "checks");
    if (k.contains("monotone")) {
      const Json& m = k["monotone"];
      only_keys(m, "checks.monotone", {"direction", "tol"});
      if (m.contains("direction") && !m["direction"].is_null()) {
        std::string d;
        read(m, "direction", d, "checks.monotone");
        c.checks.monotone.direction = parse_direction(d);
      }
      read(m, "tol", c.checks.monotone.tol, "checks.monotone");
    }
  }

  if (root.contains("output")) {
    const Json& o = root["output"];
    only_keys(o, "output", {"dir", "dump_meshes"});
    read(o, "dir", c.output.dir, "output");
    read(o, "dump_meshes", c.output.dump_meshes, "output");
  }

  require(c.shape.radius > 0.0 && std::isfinite(c.shape.radius), "shape radius must be positive");
  for (double a : c.shape.axes) require(a > 0.0 && std::isfinite(a), "ellipsoid axes must be positive");
  require(c.shape.subdivisions >= 0 && c.shape.subdivisions <= 7, "subdivisions must lie in [0, 7]");
  require(c.flow.cfl > 0.0 && c.flow.cfl <= 1.0, "flow.cfl must lie in (0, 1]");
  require(c.flow.t_end > 0.0 && std::isfinite(c.flow.t_end), "flow.t_end must be positive");
  require(c.flow.H_cap > 0.0, "flow.H_cap must be positive");
  require(c.flow.min_area_fraction >= 0.0 && c.flow.min_area_fraction < 1.0, "flow.min_area_fraction must lie in [0, 1)");
  require(c.flow.snapshot_every >= 1, "flow.snapshot_every must be at least 1");
  require(c.flow.max_steps >= 1, "flow.max_steps must be at least 1");
  require(!c.spectrum.p_values.empty(), "spectrum.p_values must not be empty");
  for (double p : c.spectrum.p_values) require(p > 1.0 && std::isfinite(p), "p_values must lie in (1, inf)");
  require(c.spectrum.tol > 0.0 && c.spectrum.p_tol > 0.0, "spectrum tolerances must be positive");
  require(c.spectrum.max_iter >= 1, "spectrum.max_iter must be at least 1");
  require(c.checks.bound_tol > 0.0 && c.checks.derivative_tol > 0.0 && c.checks.monotone.tol > 0.0,
          "check tolerances must be positive");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

Json to_json_object(const RunConfig& c, bool with_output) {
  Json shape = {{"kind", c.shape.kind}};
  if (c.shape.kind == "icosphere")
    shape["params"] = {{"radius", c.shape.radius}, {"subdivisions", c.shape.subdivisions}};
  else if (c.shape.kind == "ellipsoid")
    shape["params"] = {{"axes", c.shape.axes}, {"subdivisions", c.shape.subdivisions}};
  else
    shape["params"] = {{"path", c.shape.path}};
  Json root = {
      {"shape", shape},
      {"forcing", c.forcing},
      {"flow",
       {{"cfl", c.flow.cfl},
        {"t_end", c.flow.t_end},
        {"H_cap", number_or_null(c.flow.H_cap)},
        {"min_area_fraction", c.flow.min_area_fraction},
        {"snapshot_every", c.flow.snapshot_every},
        {"max_steps", c.flow.max_steps}}},
      {"spectrum",
       {{"p_values", c.spectrum.p_values},
        {"tol", c.spectrum.tol},
        {"p_tol", c.spectrum.p_tol},
        {"max_iter", c.spectrum.max_iter},
        {"seed", c.spectrum.seed}}},
      {"checks",
       {{"bound_tol", c.checks.bound_tol},
        {"derivative_tol", c.checks.derivative_tol},
        {"monotone",
         {{"direction", c.checks.monotone.direction ? Json(to_string(*c.checks.monotone.direction)) : Json(nullptr)},
          {"tol", c.checks.monotone.tol}}}}}};
  if (with_output) root["output"] = {{"dir", c.output.dir}, {"dump_meshes", c.output.dump_meshes}};
  return root;
}

}  // namespace

std::string config_to_json(const RunConfig& config) { return to_json_object(config, true).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) {
  // FNV-1a over the canonical text
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_json_object(config, false).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eigenflow
