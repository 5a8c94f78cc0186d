#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cate/geometry.hpp"
#include "cate/metrics.hpp"
#include "json.hpp"

namespace cate {

// All floating-point text output uses 6 significant digits.
inline std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

namespace io_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw StructuralError("unknown field \"" + it.key() + "\" in " + where);
  }
}

inline Vec vec_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || (arr.size() != 2 && arr.size() != 3))
    throw StructuralError(where + " must be an array of 2 or 3 numbers");
  Vec v = Vec::zero(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw StructuralError(where + " must contain numbers");
    v[static_cast<int>(i)] = arr[i].get<double>();
  }
  return v;
}

inline json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.n; ++i) arr.push_back(v[i]);
  return arr;
}

inline Controller controller_from_string(const std::string& s) {
  if (s == "CATE") return Controller::CATE;
  if (s == "FOTE") return Controller::FOTE;
  if (s == "CAPT_ASSIGN") return Controller::CAPT_ASSIGN;
  if (s == "GREEDY") return Controller::GREEDY;
  throw StructuralError("unknown controller \"" + s + "\"");
}

inline Schedule schedule_from_string(const std::string& s) {
  if (s == "gauss-seidel") return Schedule::GaussSeidel;
  if (s == "parallel") return Schedule::ParallelSnapshot;
  throw StructuralError("unknown schedule \"" + s + "\"");
}

}  // namespace io_detail

inline ScenarioSpec scenario_from_json(const std::string& text) {
  using io_detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw StructuralError(std::string("scenario JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw StructuralError("scenario must be a JSON object");
  io_detail::reject_unknown(doc,
                            {"dimension", "seed", "controller", "robots",
                             "formation", "obstacles", "params"},
                            "scenario");

  ScenarioSpec spec;
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw StructuralError("scenario needs an integer \"dimension\"");
  spec.dimension = doc["dimension"].get<int>();
  if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("controller"))
    spec.controller = io_detail::controller_from_string(doc["controller"].get<std::string>());

  if (!doc.contains("robots") || !doc["robots"].is_array())
    throw StructuralError("scenario needs a \"robots\" array");
  int id = 0;
  for (const auto& rj : doc["robots"]) {
    io_detail::reject_unknown(rj, {"position", "heading"}, "robot");
    if (!rj.contains("position"))
      throw StructuralError("robot needs a \"position\"");
    RobotState r;
    r.id = id++;
    r.position = io_detail::vec_from_json(rj["position"], "robot position");
    if (rj.contains("heading")) r.heading = rj["heading"].get<double>();
    r.velocity_estimate = Vec::zero(r.position.n);
    spec.robots.push_back(r);
  }

  if (!doc.contains("formation") || !doc["formation"].is_object())
    throw StructuralError("scenario needs a \"formation\" object");
  const auto& fj = doc["formation"];
  io_detail::reject_unknown(fj, {"points", "velocity"}, "formation");
  if (!fj.contains("points") || !fj["points"].is_array())
    throw StructuralError("formation needs a \"points\" array");
  for (const auto& pj : fj["points"])
    spec.formation.points.push_back(io_detail::vec_from_json(pj, "formation point"));
  spec.formation.velocity.base = Vec::zero(spec.dimension);
  spec.formation.velocity.amplitude = Vec::zero(spec.dimension);
  if (fj.contains("velocity")) {
    const auto& vj = fj["velocity"];
    io_detail::reject_unknown(vj, {"type", "value", "base", "amplitude", "omega"},
                              "formation velocity");
    std::string type = vj.contains("type") ? vj["type"].get<std::string>() : "constant";
    if (type == "constant") {
      spec.formation.velocity.kind = VelocityProfile::Kind::Constant;
      if (vj.contains("value"))
        spec.formation.velocity.base =
            io_detail::vec_from_json(vj["value"], "velocity value");
    } else if (type == "sinusoid") {
      spec.formation.velocity.kind = VelocityProfile::Kind::Sinusoid;
      if (vj.contains("base"))
        spec.formation.velocity.base = io_detail::vec_from_json(vj["base"], "velocity base");
      if (vj.contains("amplitude"))
        spec.formation.velocity.amplitude =
            io_detail::vec_from_json(vj["amplitude"], "velocity amplitude");
      if (vj.contains("omega")) spec.formation.velocity.omega = vj["omega"].get<double>();
    } else {
      throw StructuralError("unknown velocity profile \"" + type + "\"");
    }
  }

  if (doc.contains("obstacles")) {
    for (const auto& oj : doc["obstacles"]) {
      io_detail::reject_unknown(oj, {"center", "radius", "velocity"}, "obstacle");
      if (!oj.contains("center") || !oj.contains("radius"))
        throw StructuralError("obstacle needs \"center\" and \"radius\"");
      Obstacle o;
      o.center = io_detail::vec_from_json(oj["center"], "obstacle center");
      o.radius = oj["radius"].get<double>();
      o.velocity = Vec::zero(o.center.n);
      if (oj.contains("velocity"))
        o.velocity = io_detail::vec_from_json(oj["velocity"], "obstacle velocity");
      spec.obstacles.push_back(o);
    }
  }

  if (doc.contains("params")) {
    const auto& pj = doc["params"];
    io_detail::reject_unknown(
        pj,
        {"u_max", "sensing_radius", "safe_radius", "b", "c", "penalty",
         "gamma_gain", "dt", "timeout", "convergence_radius", "hysteresis",
         "schedule", "unicycle", "wheel_offset", "estimator_gain",
         "t_reassign", "qp_tol", "qp_max_iter"},
        "params");
    Params& p = spec.params;
    auto num = [&](const char* k, double& slot) {
      if (pj.contains(k)) slot = pj[k].get<double>();
    };
    num("u_max", p.u_max);
    num("sensing_radius", p.sensing_radius);
    num("safe_radius", p.safe_radius);
    num("b", p.b);
    num("c", p.c);
    num("penalty", p.penalty);
    num("gamma_gain", p.gamma_gain);
    num("dt", p.dt);
    num("timeout", p.timeout);
    num("convergence_radius", p.convergence_radius);
    num("hysteresis", p.hysteresis);
    num("wheel_offset", p.wheel_offset);
    num("estimator_gain", p.estimator_gain);
    num("t_reassign", p.t_reassign);
    num("qp_tol", p.qp_tol);
    if (pj.contains("qp_max_iter")) p.qp_max_iter = pj["qp_max_iter"].get<int>();
    if (pj.contains("schedule"))
      p.schedule = io_detail::schedule_from_string(pj["schedule"].get<std::string>());
    if (pj.contains("unicycle")) p.unicycle = pj["unicycle"].get<bool>();
  }
  return spec;
}

inline std::string scenario_to_json(const ScenarioSpec& spec) {
  using io_detail::json;
  json doc;
  doc["dimension"] = spec.dimension;
  doc["seed"] = spec.seed;
  doc["controller"] = to_string(spec.controller);
  doc["robots"] = json::array();
  for (const auto& r : spec.robots) {
    json rj;
    rj["position"] = io_detail::vec_to_json(r.position);
    if (spec.params.unicycle) rj["heading"] = r.heading;
    doc["robots"].push_back(rj);
  }
  json fj;
  fj["points"] = json::array();
  for (const auto& p : spec.formation.points)
    fj["points"].push_back(io_detail::vec_to_json(p));
  json vj;
  if (spec.formation.velocity.kind == VelocityProfile::Kind::Constant) {
    vj["type"] = "constant";
    vj["value"] = io_detail::vec_to_json(spec.formation.velocity.base);
  } else {
    vj["type"] = "sinusoid";
    vj["base"] = io_detail::vec_to_json(spec.formation.velocity.base);
    vj["amplitude"] = io_detail::vec_to_json(spec.formation.velocity.amplitude);
    vj["omega"] = spec.formation.velocity.omega;
  }
  fj["velocity"] = vj;
  doc["formation"] = fj;
  doc["obstacles"] = json::array();
  for (const auto& o : spec.obstacles) {
    json oj;
    oj["center"] = io_detail::vec_to_json(o.center);
    oj["radius"] = o.radius;
    oj["velocity"] = io_detail::vec_to_json(o.velocity);
    doc["obstacles"].push_back(oj);
  }
  const Params& p = spec.params;
  json pj;
  pj["u_max"] = p.u_max;
  pj["sensing_radius"] = p.sensing_radius;
  pj["safe_radius"] = p.safe_radius;
  pj["b"] = p.b;
  pj["c"] = p.c;
  pj["penalty"] = p.penalty;
  pj["gamma_gain"] = p.gamma_gain;
  pj["dt"] = p.dt;
  pj["timeout"] = p.timeout;
  pj["convergence_radius"] = p.convergence_radius;
  pj["hysteresis"] = p.hysteresis;
  pj["schedule"] = p.schedule == Schedule::GaussSeidel ? "gauss-seidel" : "parallel";
  pj["unicycle"] = p.unicycle;
  pj["wheel_offset"] = p.wheel_offset;
  pj["estimator_gain"] = p.estimator_gain;
  pj["t_reassign"] = p.t_reassign;
  pj["qp_tol"] = p.qp_tol;
  pj["qp_max_iter"] = p.qp_max_iter;
  doc["params"] = pj;
  return doc.dump(2) + "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// record.csv: one comment header with run metadata, then one row per step
// with t, per-robot x/y(/z) and chosen k.
inline std::string record_to_csv(const SimulationRecord& rec) {
  std::ostringstream out;
  out << "# controller=" << to_string(rec.controller) << " seed=" << rec.seed
      << " termination=" << to_string(rec.termination) << " dt=" << fmt6(rec.dt)
      << " dimension=" << rec.dimension << "\n";
  out << "t";
  for (int i = 0; i < rec.robot_count(); ++i) {
    out << ",x" << i << ",y" << i;
    if (rec.dimension == 3) out << ",z" << i;
    out << ",k" << i;
  }
  out << "\n";
  for (int s = 0; s < rec.step_count(); ++s) {
    out << fmt6(rec.times[static_cast<std::size_t>(s)]);
    for (int i = 0; i < rec.robot_count(); ++i) {
      const Vec& p = rec.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      for (int d = 0; d < rec.dimension; ++d) out << "," << fmt6(p[d]);
      out << "," << rec.allocations[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
    }
    out << "\n";
  }
  return out.str();
}

// Reads a record.csv back; desired-point and obstacle series are
// reconstructed from the scenario when one is supplied.
inline SimulationRecord record_from_csv(const std::string& text,
                                        const ScenarioSpec* scenario = nullptr) {
  SimulationRecord rec;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("record.csv missing metadata header");
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "controller") rec.controller = io_detail::controller_from_string(val);
      else if (key == "seed") rec.seed = std::stoull(val);
      else if (key == "dt") rec.dt = std::stod(val);
      else if (key == "dimension") rec.dimension = std::stoi(val);
      else if (key == "termination") {
        if (val == "converged") rec.termination = Termination::Converged;
        else if (val == "timeout") rec.termination = Termination::Timeout;
        else if (val == "safety-breach") rec.termination = Termination::SafetyBreach;
        else if (val == "solver-failure") rec.termination = Termination::SolverFailure;
        else throw std::runtime_error("bad termination in record.csv");
      }
    }
  }
  if (!std::getline(in, line)) throw std::runtime_error("record.csv missing column header");
  const int cols_per_robot = rec.dimension + 1;
  int ncols = 1;
  for (char ch : line)
    if (ch == ',') ++ncols;
  const int N = (ncols - 1) / cols_per_robot;
  if (N <= 0 || 1 + N * cols_per_robot != ncols)
    throw std::runtime_error("record.csv column count mismatch");
  rec.positions.assign(static_cast<std::size_t>(N), {});
  rec.allocations.assign(static_cast<std::size_t>(N), {});

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != ncols)
      throw std::runtime_error("record.csv ragged row");
    rec.times.push_back(std::stod(cells[0]));
    for (int i = 0; i < N; ++i) {
      Vec p = Vec::zero(rec.dimension);
      for (int d = 0; d < rec.dimension; ++d)
        p[d] = std::stod(cells[static_cast<std::size_t>(1 + i * cols_per_robot + d)]);
      rec.positions[static_cast<std::size_t>(i)].push_back(p);
      rec.allocations[static_cast<std::size_t>(i)].push_back(
          std::stoi(cells[static_cast<std::size_t>(1 + i * cols_per_robot + rec.dimension)]));
    }
  }

  if (scenario) {
    const int T = rec.step_count();
    rec.desired_points.assign(scenario->formation.points.size(), {});
    std::vector<Vec> pts = scenario->formation.points;
    double t = 0.0;
    for (int s = 0; s < T; ++s) {
      for (std::size_t k = 0; k < pts.size(); ++k) rec.desired_points[k].push_back(pts[k]);
      Vec shift = rec.dt * scenario->formation.velocity(t);
      for (auto& p : pts) p += shift;
      t += rec.dt;
    }
    rec.obstacle_centers.assign(scenario->obstacles.size(), {});
    for (std::size_t l = 0; l < scenario->obstacles.size(); ++l) {
      rec.obstacle_radii.push_back(scenario->obstacles[l].radius);
      for (int s = 0; s < T; ++s)
        rec.obstacle_centers[l].push_back(
            scenario->obstacles[l].center +
            rec.times[static_cast<std::size_t>(s)] * scenario->obstacles[l].velocity);
    }
  }
  return rec;
}

inline std::string metrics_to_json(const MetricsReport& r) {
  using io_detail::json;
  json j;
  j["crossings"] = r.crossings;
  j["trajectory_length"] = r.trajectory_length;
  if (r.convergence_time) j["convergence_time"] = *r.convergence_time;
  else j["convergence_time"] = nullptr;
  j["success"] = r.success;
  j["min_robot_robot"] = r.min_robot_robot;
  j["min_obstacle_clearance"] = r.min_obstacle_clearance;
  j["allocation_changes_after_tr"] = r.allocation_changes_after_tr;
  return j.dump(2) + "\n";
}

inline std::string metrics_csv_header() {
  return "crossings,trajectory_length,convergence_time,success,"
         "min_robot_robot,min_obstacle_clearance,allocation_changes_after_tr";
}

inline std::string metrics_to_csv_row(const MetricsReport& r) {
  std::ostringstream out;
  out << r.crossings << "," << fmt6(r.trajectory_length) << ","
      << (r.convergence_time ? fmt6(*r.convergence_time) : "") << ","
      << (r.success ? 1 : 0) << "," << fmt6(r.min_robot_robot) << ","
      << fmt6(r.min_obstacle_clearance) << "," << r.allocation_changes_after_tr;
  return out.str();
}

}  // namespace cate
