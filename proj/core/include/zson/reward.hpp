#pragma once

#include "zson/geometry.hpp"
#include "zson/world.hpp"

namespace zson {

struct RewardConfig {
  double r_success = 5.0;
  double r_angle_success = 5.0;
  double r_slack = -0.01;
  double success_radius = 1.0;    // meters
  double angle_threshold = 25.0;  // degrees
  double atg_gate_radius = 1.0;   // meters; angle shaping active only inside
};

// Everything one reward evaluation needs; the environment fills the stop
// flags from the post-step distance/angle so the function stays pure.
struct StepContext {
  double prev_dtg = 0.0;  // geodesic distance to goal, meters
  double new_dtg = 0.0;
  double prev_atg = 0.0;  // |heading - goal heading|, degrees in [0, 180]
  double new_atg = 0.0;
  Action action = Action::STOP;
  bool stopped_in_success = false;        // STOP with new_dtg <= success_radius
  bool stopped_in_angle_success = false;  // additionally new_atg <= threshold
};

// Success and angle bonuses fire only on STOP; distance shaping is the
// negated change in distance-to-goal; angle shaping is the negated change in
// angle-to-goal in radians (so a 30 degree turn weighs about two forward
// steps), and it is gated off whenever the agent ends the step more than
// atg_gate_radius from the goal; every step pays the slack penalty.
inline double compute_step_reward(const StepContext& ctx,
                                  const RewardConfig& cfg) {
  double r = cfg.r_slack;
  r -= ctx.new_dtg - ctx.prev_dtg;
  if (ctx.new_dtg <= cfg.atg_gate_radius)
    r -= deg2rad(ctx.new_atg - ctx.prev_atg);
  if (ctx.action == Action::STOP && ctx.stopped_in_success) {
    r += cfg.r_success;
    if (ctx.stopped_in_angle_success) r += cfg.r_angle_success;
  }
  return r;
}

}  // namespace zson
