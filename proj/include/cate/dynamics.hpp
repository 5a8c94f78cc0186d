#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "cate/geometry.hpp"

namespace cate {

// Leader-follower consensus estimator of the desired velocity over a cyclic
// ring. Leaders see v_d directly; everyone else averages ring neighbors.
// Estimates are norm-clamped to u_max.
class EstimatorState {
 public:
  EstimatorState(int robot_count, std::set<int> leaders, double gain,
                 double u_max, int dim)
      : estimates_(static_cast<std::size_t>(robot_count), Vec::zero(dim)),
        leaders_(std::move(leaders)),
        gain_(gain),
        u_max_(u_max) {
    if (robot_count <= 0) throw std::invalid_argument("need at least one robot");
    if (leaders_.empty()) throw std::invalid_argument("leader set must be nonempty");
    for (int id : leaders_)
      if (id < 0 || id >= robot_count)
        throw std::invalid_argument("leader id out of range");
  }

  int size() const { return static_cast<int>(estimates_.size()); }
  const Vec& estimate(int i) const { return estimates_[static_cast<std::size_t>(i)]; }
  void set_estimate(int i, const Vec& v) {
    estimates_[static_cast<std::size_t>(i)] = clamp_norm(v, u_max_);
  }
  double gain() const { return gain_; }

  std::vector<int> ring_neighbors(int i) const {
    const int N = size();
    if (N == 1) return {};
    int prev = (i - 1 + N) % N, next = (i + 1) % N;
    if (prev == next) return {prev};
    return {prev, next};
  }

  bool is_leader(int i) const { return leaders_.count(i) > 0; }

 private:
  std::vector<Vec> estimates_;
  std::set<int> leaders_;
  double gain_;
  double u_max_;
};

// Synchronous Euler update of all estimates toward consensus on v_d.
inline EstimatorState estimator_step(const EstimatorState& est, const Vec& v_d,
                                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  EstimatorState next = est;
  for (int i = 0; i < est.size(); ++i) {
    Vec rate = Vec::zero(v_d.n);
    for (int j : est.ring_neighbors(i)) rate -= (est.estimate(i) - est.estimate(j));
    if (est.is_leader(i)) rate -= (est.estimate(i) - v_d);
    next.set_estimate(i, est.estimate(i) + dt * est.gain() * rate);
  }
  return next;
}

// Rigid translation of the desired points: x_k^d += dt * v_d(t).
inline std::vector<Vec> propagate_formation(const std::vector<Vec>& points,
                                            const VelocityProfile& velocity,
                                            double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  Vec shift = dt * velocity(t);
  std::vector<Vec> out = points;
  for (auto& p : out) p += shift;
  return out;
}

// Single-integrator Euler step. The controller contract bounds the input.
inline RobotState integrate_robot(const RobotState& robot, const Vec& u,
                                  double dt, double u_max) {
  if (norm(u) > u_max + 1e-9)
    throw std::runtime_error("input exceeds u_max: controller contract breach");
  RobotState next = robot;
  next.position += dt * u;
  return next;
}

struct UnicycleCommand {
  double v = 0.0;        // linear velocity
  double u_theta = 0.0;  // angular velocity
  double u_z = 0.0;      // climb rate, 3D only
};

// Near-identity diffeomorphism from a velocity command to unicycle inputs;
// the head point at distance l ahead of the axle then tracks u exactly.
inline UnicycleCommand unicycle_transform(const Vec& u_star, double theta,
                                          double wheel_offset) {
  if (!(wheel_offset > 0.0))
    throw std::invalid_argument("wheel offset l must be positive");
  UnicycleCommand cmd;
  cmd.v = u_star[0] * std::cos(theta) + u_star[1] * std::sin(theta);
  cmd.u_theta = (-u_star[0] * std::sin(theta) + u_star[1] * std::cos(theta)) / wheel_offset;
  if (u_star.n == 3) cmd.u_z = u_star[2];
  return cmd;
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline RobotState integrate_unicycle(const RobotState& robot,
                                     const UnicycleCommand& cmd, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  RobotState next = robot;
  next.position[0] += dt * cmd.v * std::cos(robot.heading);
  next.position[1] += dt * cmd.v * std::sin(robot.heading);
  if (robot.position.n == 3) next.position[2] += dt * cmd.u_z;
  next.heading = wrap_angle(robot.heading + dt * cmd.u_theta);
  return next;
}

// Head point controlled by the near-identity transform.
inline Vec head_point(const RobotState& robot, double wheel_offset) {
  Vec h = robot.position;
  h[0] += wheel_offset * std::cos(robot.heading);
  h[1] += wheel_offset * std::sin(robot.heading);
  return h;
}

}  // namespace cate
