#pragma once

#include <Eigen/Dense>

namespace fastwbc::env {

using Vec2 = Eigen::Vector2d;  // (x, z) for positions, (ankle, hip) for joints
using Mat2 = Eigen::Matrix2d;

// Planar two-link balancer on a flat foot pinned at the ankle.
//
// Angles are counter-clockwise in the x-z plane and measured from vertical:
// link 1 (shank-to-hip) has absolute angle th1 = q1, link 2 (torso) has
// th2 = q1 + q2, and a link at angle th points along (-sin th, cos th).
// Joint torque tau_1 acts between foot and link 1, tau_2 between the links.
struct PtbModel {
  double l1 = 0.5, l2 = 0.5;  // link lengths [m]
  double m1 = 3.0, m2 = 5.0;  // link masses [kg], uniform rods
  double foot_half = 0.1;     // d_f [m]
  Vec2 tau_max{30.0, 20.0};   // [N m]
  Vec2 kp{60.0, 40.0};
  Vec2 kd{5.0, 3.0};
  Vec2 q_default{0.0, 0.0};
  double g = 9.81;
  Vec2 joint_lower{-1.2, -1.2};
  Vec2 joint_upper{1.2, 1.2};
  // Link-2 center offset along the torso's body x-axis (domain randomization).
  double com_offset_x = 0.0;

  double total_mass() const { return m1 + m2; }
  // Throws ValidationError if any mass, length, gain or limit is non-positive.
  void validate() const;
};

struct Keypoints {
  Vec2 ankle, hip, head, heel, toe;
};

// Joint-space rigid-body terms of M(q) qdd + c(q, qd) + G(q) = tau.
Mat2 mass_matrix(const PtbModel& m, const Vec2& q);
Vec2 bias_forces(const PtbModel& m, const Vec2& q, const Vec2& qd);  // c + G
Vec2 gravity_forces(const PtbModel& m, const Vec2& q);
Vec2 forward_dynamics(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& tau);
Vec2 inverse_dynamics(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& qdd);
// Kinetic plus potential energy (ankle at height 0).
double total_energy(const PtbModel& m, const Vec2& q, const Vec2& qd);

// Keypoints with the ankle placed at `ankle`.
Keypoints forward_kinematics(const PtbModel& m, const Vec2& q, const Vec2& ankle = Vec2::Zero());
// Velocities of ankle (= foot_xd along x), hip and head.
Keypoints keypoint_velocities(const PtbModel& m, const Vec2& q, const Vec2& qd,
                              double foot_xd = 0.0);

// Centre of mass relative to the ankle, and its time derivatives.
Vec2 com_offset(const PtbModel& m, const Vec2& q);
Vec2 com_velocity(const PtbModel& m, const Vec2& q, const Vec2& qd);
Vec2 com_acceleration(const PtbModel& m, const Vec2& q, const Vec2& qd, const Vec2& qdd);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace fastwbc::env
