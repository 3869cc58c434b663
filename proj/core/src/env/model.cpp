#include "fastwbc/env/model.hpp"

#include "fastwbc/error.hpp"

#include <cmath>
#include <numbers>

namespace fastwbc::env {

void PtbModel::validate() const {
  const bool ok = l1 > 0 && l2 > 0 && m1 > 0 && m2 > 0 && foot_half > 0 && g > 0 &&
                  (tau_max.array() > 0).all() && (kp.array() > 0).all() &&
                  (kd.array() > 0).all() && (joint_upper.array() > joint_lower.array()).all();
  if (!ok) throw ValidationError("PtbModel: masses, lengths, gains and limits must be positive");
}

namespace {

// Link-2 centre in the torso frame: (com_offset_x, l2/2); rotated by th2.
struct Link2Geometry {
  double dx, a2, rho_sq;
};

Link2Geometry link2(const PtbModel& m) {
  const double a2 = 0.5 * m.l2;
  return {m.com_offset_x, a2, m.com_offset_x * m.com_offset_x + a2 * a2};
}

// R(th) (dx, a2) and its derivative with respect to th.
Vec2 link2_center(const Link2Geometry& g, double th) {
  const double c = std::cos(th), s = std::sin(th);
  return {g.dx * c - g.a2 * s, g.dx * s + g.a2 * c};
}

Vec2 link2_center_dth(const Link2Geometry& g, double th) {
  const double c = std::cos(th), s = std::sin(th);
  return {-g.dx * s - g.a2 * c, g.dx * c - g.a2 * s};
}

Vec2 along(double th) { return {-std::sin(th), std::cos(th)}; }
Vec2 along_dth(double th) { return {-std::cos(th), -std::sin(th)}; }

double rod_inertia(double mass, double len) { return mass * len * len / 12.0; }

}  // namespace

Mat2 mass_matrix(const PtbModel& m, const Vec2& q) {
  const auto g2 = link2(m);
  const double a1 = 0.5 * m.l1;
  const double i1 = rod_inertia(m.m1, m.l1);
  const double i2 = rod_inertia(m.m2, m.l2);
  // h(q2) = (-c1, -s1) . u'(th2) = dx sin q2 + a2 cos q2
  const double h = g2.dx * std::sin(q(1)) + g2.a2 * std::cos(q(1));
  Mat2 mm;
  mm(0, 0) = m.m1 * a1 * a1 + i1 + m.m2 * (m.l1 * m.l1 + g2.rho_sq + 2.0 * m.l1 * h) + i2;
  mm(0, 1) = m.m2 * (g2.rho_sq + m.l1 * h) + i2;
  mm(1, 0) = mm(0, 1);
  mm(1, 1) = m.m2 * g2.rho_sq + i2;
  return mm;
}

Vec2 gravity_forces(const PtbModel& m, const Vec2& q) {
  const auto g2 = link2(m);
  const double a1 = 0.5 * m.l1;
  const double th2 = q(0) + q(1);
  const double s1 = std::sin(q(0));
  // d/dth2 of the link-2 centre height: dx cos th2 - a2 sin th2
  const double dz2 = g2.dx * std::cos(th2) - g2.a2 * std::sin(th2);
  const double g_2 = m.g * m.m2 * dz2;
  const double g_1 = m.g * (-m.m1 * a1 * s1 - m.m2 * m.l1 * s1) + g_2;
  return {g_1, g_2};
}

Vec2 bias_forces(const PtbModel& m, const Vec2& q, const Vec2& qd) {
  const auto g2 = link2(m);
  // beta = m2 l1 h'(q2)
  const double beta = m.m2 * m.l1 * (g2.dx * std::cos(q(1)) - g2.a2 * std::sin(q(1)));
  const Vec2 coriolis{2.0 * beta * qd(0) * qd(1) + beta * qd(1) * qd(1), -beta * qd(0) * qd(0)};
  return coriolis + gravity_forces(m, q);
}

Vec2 forward_dynamics(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& tau) {
  return mass_matrix(m, q).ldlt().solve(tau - bias_forces(m, q, qd));
}

Vec2 inverse_dynamics(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& qdd) {
  return mass_matrix(m, q) * qdd + bias_forces(m, q, qd);
}

double total_energy(const PtbModel& m, const Vec2& q, const Vec2& qd) {
  const double kinetic = 0.5 * qd.dot(mass_matrix(m, q) * qd);
  const double potential = m.total_mass() * m.g * com_offset(m, q)(1);
  return kinetic + potential;
}

Keypoints forward_kinematics(const PtbModel& m, const Vec2& q, const Vec2& ankle) {
  Keypoints k;
  k.ankle = ankle;
  k.hip = ankle + m.l1 * along(q(0));
  k.head = k.hip + m.l2 * along(q(0) + q(1));
  k.heel = ankle + Vec2(-m.foot_half, 0.0);
  k.toe = ankle + Vec2(m.foot_half, 0.0);
  return k;
}

Keypoints keypoint_velocities(const PtbModel& m, const Vec2& q, const Vec2& qd, double foot_xd) {
  const Vec2 base(foot_xd, 0.0);
  Keypoints v;
  v.ankle = base;
  v.heel = base;
  v.toe = base;
  v.hip = base + m.l1 * qd(0) * along_dth(q(0));
  v.head = v.hip + m.l2 * (qd(0) + qd(1)) * along_dth(q(0) + q(1));
  return v;
}

Vec2 com_offset(const PtbModel& m, const Vec2& q) {
  const auto g2 = link2(m);
  const Vec2 c1 = 0.5 * m.l1 * along(q(0));
  const Vec2 c2 = m.l1 * along(q(0)) + link2_center(g2, q(0) + q(1));
  return (m.m1 * c1 + m.m2 * c2) / m.total_mass();
}

Vec2 com_velocity(const PtbModel& m, const Vec2& q, const Vec2& qd) {
  const auto g2 = link2(m);
  const double th2d = qd(0) + qd(1);
  const Vec2 v1 = 0.5 * m.l1 * qd(0) * along_dth(q(0));
  const Vec2 v2 = m.l1 * qd(0) * along_dth(q(0)) + th2d * link2_center_dth(g2, q(0) + q(1));
  return (m.m1 * v1 + m.m2 * v2) / m.total_mass();
}

Vec2 com_acceleration(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& qdd) {
  const auto g2 = link2(m);
  const double th1 = q(0), th2 = q(0) + q(1);
  const double th2d = qd(0) + qd(1), th2dd = qdd(0) + qdd(1);
  // d^2/dt^2 along(th) = thdd along'(th) - thd^2 along(th)
  const Vec2 a_link1 = qdd(0) * along_dth(th1) - qd(0) * qd(0) * along(th1);
  const Vec2 a1 = 0.5 * m.l1 * a_link1;
  const Vec2 a2 = m.l1 * a_link1 + th2dd * link2_center_dth(g2, th2) -
                  th2d * th2d * link2_center(g2, th2);
  return (m.m1 * a1 + m.m2 * a2) / m.total_mass();
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace fastwbc::env
