#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cate {

// Point/vector in R^n with n fixed to 2 or 3 per scenario. Small fixed
// storage keeps the hot loops allocation-free.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int n = 2;

  Vec() = default;
  Vec(double x, double y) : c{x, y, 0.0}, n(2) {}
  Vec(double x, double y, double z) : c{x, y, z}, n(3) {}

  static Vec zero(int dim) {
    Vec v;
    v.n = dim;
    return v;
  }

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n; ++i) c[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec v) { return v *= s; }
  friend Vec operator*(Vec v, double s) { return v *= s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a.c[i] * b.c[i];
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

inline bool finite(const Vec& v) {
  for (int i = 0; i < v.n; ++i)
    if (!std::isfinite(v.c[i])) return false;
  return true;
}

// Rescales v to the ball of radius max_norm when it sticks out.
inline Vec clamp_norm(const Vec& v, double max_norm) {
  double m = norm(v);
  if (m <= max_norm || m == 0.0) return v;
  return v * (max_norm / m);
}

struct RobotState {
  int id = 0;           // index in 0..N-1
  Vec position;
  double heading = 0.0;  // radians; meaningful in unicycle mode only
  Vec velocity_estimate;
};

// Time-parameterized desired velocity. "constant" keeps amplitude zero;
// "sinusoid" adds amplitude*sin(omega*t) componentwise.
struct VelocityProfile {
  enum class Kind { Constant, Sinusoid };
  Kind kind = Kind::Constant;
  Vec base;
  Vec amplitude;
  double omega = 0.0;

  Vec operator()(double t) const {
    if (kind == Kind::Constant) return base;
    Vec v = base;
    double s = std::sin(omega * t);
    for (int i = 0; i < v.n; ++i) v.c[i] += amplitude.c[i] * s;
    return v;
  }

  // Upper bound on ||v_d(t)|| over all t.
  double sup_norm() const {
    return kind == Kind::Constant ? norm(base) : norm(base) + norm(amplitude);
  }
};

struct DesiredFormation {
  std::vector<Vec> points;
  VelocityProfile velocity;
};

struct Obstacle {
  Vec center;
  double radius = 0.0;
  Vec velocity;  // zero for static obstacles
};

// One-hot-rows allocation: entry (i,k)=1 means desired point k is assigned
// to robot i. Stored as row index -> column index.
class AllocationMatrix {
 public:
  AllocationMatrix() = default;
  explicit AllocationMatrix(int n) : assigned_(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) assigned_[i] = i;
  }

  int size() const { return static_cast<int>(assigned_.size()); }
  int row(int i) const { return assigned_[static_cast<std::size_t>(i)]; }
  void set_row(int i, int k) { assigned_[static_cast<std::size_t>(i)] = k; }

  int entry(int i, int k) const { return row(i) == k ? 1 : 0; }

  std::vector<int> column_sums() const {
    std::vector<int> s(assigned_.size(), 0);
    for (int k : assigned_) ++s[static_cast<std::size_t>(k)];
    return s;
  }

  bool is_permutation() const {
    for (int s : column_sums())
      if (s != 1) return false;
    return true;
  }

  friend bool operator==(const AllocationMatrix& a, const AllocationMatrix& b) {
    return a.assigned_ == b.assigned_;
  }
  friend bool operator!=(const AllocationMatrix& a, const AllocationMatrix& b) {
    return !(a == b);
  }

 private:
  std::vector<int> assigned_;
};

enum class Controller { CATE, FOTE, CAPT_ASSIGN, GREEDY };

enum class Schedule { GaussSeidel, ParallelSnapshot };

struct Params {
  double u_max = 3.0;
  double sensing_radius = 4.0;      // R
  double safe_radius = 1.0;         // r
  double b = 1e5;
  double c = 1e2;
  double penalty = 1000.0;          // relief on non-assigned convergence rows
  double gamma_gain = 1.0;          // kappa of the linear class-K function
  double dt = 0.02;
  double timeout = 60.0;
  double convergence_radius = 0.2;  // rho
  double hysteresis = 1e-6;
  Schedule schedule = Schedule::GaussSeidel;
  bool unicycle = false;
  double wheel_offset = 0.5;        // l of the head-point transform
  double estimator_gain = 5.0;
  double t_reassign = 0.0;          // CAPT: 0 = assign once at t=0
  double qp_tol = 1e-8;
  int qp_max_iter = 200;
};

struct ScenarioSpec {
  int dimension = 2;
  std::vector<RobotState> robots;
  DesiredFormation formation;
  std::vector<Obstacle> obstacles;
  Params params;
  std::uint64_t seed = 0;
  Controller controller = Controller::CATE;
};

// Malformed input (wrong dimension, NaN, empty) as opposed to a violated
// modeling assumption, which validate_scenario reports instead.
class StructuralError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string assumption;  // "A2".."A5"
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Sensing neighbor set: ids j != i with ||x_i - x_j|| <= R.
inline std::set<int> neighbor_set(const RobotState& robot,
                                  const std::vector<RobotState>& all,
                                  double sensing_radius) {
  std::set<int> out;
  for (const auto& other : all) {
    if (other.id == robot.id) continue;
    if (distance(robot.position, other.position) <= sensing_radius)
      out.insert(other.id);
  }
  return out;
}

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

inline void check_structure(const ScenarioSpec& spec) {
  const int n = spec.dimension;
  if (n != 2 && n != 3)
    throw StructuralError("dimension must be 2 or 3, got " + std::to_string(n));
  const std::size_t N = spec.robots.size();
  if (N == 0) throw StructuralError("scenario has no robots");
  if (spec.formation.points.size() != N)
    throw StructuralError("robot count " + std::to_string(N) +
                          " != desired point count " +
                          std::to_string(spec.formation.points.size()));
  auto check_vec = [n](const Vec& v, const char* what) {
    if (v.n != n)
      throw StructuralError(std::string(what) + ": dimension mismatch");
    if (!finite(v)) throw StructuralError(std::string(what) + ": not finite");
  };
  for (const auto& r : spec.robots) {
    check_vec(r.position, "robot position");
    check_vec(r.velocity_estimate, "robot velocity estimate");
  }
  for (const auto& p : spec.formation.points) check_vec(p, "desired point");
  check_vec(spec.formation.velocity.base, "desired velocity");
  check_vec(spec.formation.velocity.amplitude, "desired velocity amplitude");
  for (const auto& o : spec.obstacles) {
    check_vec(o.center, "obstacle center");
    check_vec(o.velocity, "obstacle velocity");
    if (!(o.radius > 0.0) || !std::isfinite(o.radius))
      throw StructuralError("obstacle radius must be positive and finite");
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (spec.robots[i].id != static_cast<int>(i))
      throw StructuralError("robot ids must be 0..N-1 in order");
  }
  const Params& p = spec.params;
  for (double v : {p.u_max, p.sensing_radius, p.safe_radius, p.b, p.c,
                   p.penalty, p.gamma_gain, p.dt, p.timeout,
                   p.convergence_radius}) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw StructuralError("parameters must be positive and finite");
  }
}

}  // namespace detail

// Checks the initial-separation assumptions A2-A5 plus the desired-velocity
// bound. Structural problems throw; assumption violations are reported.
inline ValidationReport validate_scenario(const ScenarioSpec& spec) {
  detail::check_structure(spec);
  ValidationReport report;
  const double r = spec.params.safe_radius;
  const std::size_t N = spec.robots.size();

  if (!(spec.params.sensing_radius > r)) {
    report.violations.push_back(
        {"A5", "sensing radius R=" + detail::fmt(spec.params.sensing_radius) +
                   " must exceed safe radius r=" + detail::fmt(r)});
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      double d = distance(spec.formation.points[i], spec.formation.points[j]);
      if (!(d > r)) {
        report.violations.push_back(
            {"A2", "desired points " + std::to_string(i) + "," +
                       std::to_string(j) + " at distance " + detail::fmt(d) +
                       " <= r=" + detail::fmt(r)});
      }
      d = distance(spec.robots[i].position, spec.robots[j].position);
      if (!(d > r)) {
        report.violations.push_back(
            {"A3", "robots " + std::to_string(i) + "," + std::to_string(j) +
                       " at distance " + detail::fmt(d) +
                       " <= r=" + detail::fmt(r)});
      }
    }
    for (std::size_t l = 0; l < spec.obstacles.size(); ++l) {
      double d = distance(spec.robots[i].position, spec.obstacles[l].center);
      double need = r + spec.obstacles[l].radius;
      if (!(d > need)) {
        report.violations.push_back(
            {"A4", "robot " + std::to_string(i) + " and obstacle " +
                       std::to_string(l) + " at distance " + detail::fmt(d) +
                       " <= r+r_o=" + detail::fmt(need)});
      }
    }
  }
  if (!(spec.formation.velocity.sup_norm() < spec.params.u_max)) {
    report.violations.push_back(
        {"A6", "desired velocity bound " +
                   detail::fmt(spec.formation.velocity.sup_norm()) +
                   " must stay below u_max=" + detail::fmt(spec.params.u_max)});
  }
  return report;
}

}  // namespace cate
