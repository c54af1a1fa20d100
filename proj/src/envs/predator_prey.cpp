#include "mcem/envs/predator_prey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcem::envs {

void PredatorPreyConfig::validate() const {
  if (num_predators < 1 || num_prey < 1 || num_landmarks < 0) throw ConfigError("predator-prey entity counts invalid");
  if (!(prey_max_speed > predator_max_speed)) throw ConfigError("prey must be strictly faster than predators");
  if (!(capture_radius < proximity_radius && proximity_radius < view_radius)) {
    throw ConfigError("need capture radius < proximity radius < view radius");
  }
  if (!(world_half_extent > 0.0 && dt > 0.0 && damping >= 0.0 && damping < 1.0)) {
    throw ConfigError("predator-prey physics constants out of range");
  }
  if (step_limit < 1) throw ConfigError("predator-prey step limit must be >= 1");
}

PredatorPreyConfig PredatorPreyConfig::preset(std::string_view name) {
  PredatorPreyConfig c;
  if (name == "3a1p") {
    c.num_predators = 3;
    c.num_prey = 1;
  } else if (name == "6a2p") {
    c.num_predators = 6;
    c.num_prey = 2;
  } else if (name == "9a3p") {
    c.num_predators = 9;
    c.num_prey = 3;
  } else {
    throw ConfigError("unknown predator-prey preset '" + std::string(name) + "' (expected 3a1p|6a2p|9a3p)");
  }
  return c;
}

PredatorPrey::PredatorPrey(PredatorPreyConfig config) : config_(config) {
  config_.validate();
  spec_.num_agents = config_.num_predators;
  spec_.discrete = false;
  spec_.action_dim = 2;
  spec_.action_low = -1.0;
  spec_.action_high = 1.0;
  spec_.obs_dim = config_.obs_dim();
  spec_.state_dim = config_.state_dim();
  spec_.step_limit = config_.step_limit;
  spec_.gamma = 0.99;
}

Observation PredatorPrey::reset(Rng& rng) {
  rng_.seed(rng());
  const Scalar L = config_.world_half_extent;
  std::uniform_real_distribution<Scalar> inner(-0.8 * L, 0.8 * L);
  std::uniform_real_distribution<Scalar> full(-L, L);

  landmark_pos_.clear();
  while (static_cast<int>(landmark_pos_.size()) < config_.num_landmarks) {
    const Point p(inner(rng_), inner(rng_));
    const bool overlaps = std::any_of(landmark_pos_.begin(), landmark_pos_.end(), [&](const Point& q) {
      return (p - q).norm() <= 2.0 * config_.landmark_radius;
    });
    if (!overlaps) landmark_pos_.push_back(p);
  }
  auto free_point = [&]() {
    for (;;) {
      const Point p(full(rng_), full(rng_));
      const bool blocked = std::any_of(landmark_pos_.begin(), landmark_pos_.end(), [&](const Point& q) {
        return (p - q).norm() < config_.landmark_radius;
      });
      if (!blocked) return p;
    }
  };
  pred_pos_.assign(static_cast<std::size_t>(config_.num_predators), Point::Zero());
  pred_vel_.assign(static_cast<std::size_t>(config_.num_predators), Point::Zero());
  prey_pos_.assign(static_cast<std::size_t>(config_.num_prey), Point::Zero());
  prey_vel_.assign(static_cast<std::size_t>(config_.num_prey), Point::Zero());
  for (auto& p : pred_pos_) p = free_point();
  for (auto& p : prey_pos_) p = free_point();
  captured_ = false;

  Observation o;
  for (int a = 0; a < config_.num_predators; ++a) o.observations.push_back(observe(a));
  o.state = state();
  return o;
}

void PredatorPrey::integrate(Point& pos, Point& vel, const Point& accel, Scalar max_speed) const {
  vel = vel * (1.0 - config_.damping) + accel * config_.dt;
  const Scalar speed = vel.norm();
  if (speed > max_speed) vel *= max_speed / speed;
  pos += vel * config_.dt;
  for (const Point& c : landmark_pos_) {
    const Point d = pos - c;
    const Scalar dist = d.norm();
    if (dist < config_.landmark_radius) {
      const Point n = dist > 0.0 ? Point(d / dist) : Point(1.0, 0.0);
      pos = c + n * config_.landmark_radius;
      const Scalar inward = vel.dot(n);
      if (inward < 0.0) vel -= inward * n;
    }
  }
  const Scalar L = config_.world_half_extent;
  for (int i = 0; i < 2; ++i) {
    if (pos(i) > L) {
      pos(i) = L;
      vel(i) = 0.0;
    } else if (pos(i) < -L) {
      pos(i) = -L;
      vel(i) = 0.0;
    }
  }
}

PredatorPrey::Point PredatorPrey::prey_accel(int prey) {
  const Point& p = prey_pos_[static_cast<std::size_t>(prey)];
  if (config_.random_prey) {
    std::uniform_real_distribution<Scalar> angle(0.0, 2.0 * M_PI);
    const Scalar th = angle(rng_);
    return config_.prey_accel * Point(std::cos(th), std::sin(th));
  }
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Point away = Point::Zero();
  for (const Point& q : pred_pos_) {
    const Point d = p - q;
    const Scalar dist = d.norm();
    if (dist <= config_.view_radius && dist < best) {
      best = dist;
      away = dist > 0.0 ? Point(d / dist) : Point(1.0, 0.0);
    }
  }
  return config_.prey_accel * away;
}

Scalar PredatorPrey::reward() const {
  bool cooperative = false;
  bool isolated = false;
  for (const Point& prey : prey_pos_) {
    bool caught = false;
    int near = 0;
    for (const Point& q : pred_pos_) {
      const Scalar dist = (prey - q).norm();
      if (dist <= config_.capture_radius) caught = true;
      if (dist <= config_.proximity_radius) ++near;
    }
    if (!caught) continue;
    if (near >= 2) {
      cooperative = true;
    } else {
      isolated = true;
    }
  }
  if (cooperative) return config_.cooperative_reward;
  if (isolated) return config_.isolated_penalty;
  return 0.0;
}

StepResult PredatorPrey::step(const JointAction& u) {
  check_joint_action(u);
  std::vector<Point> prey_acc(prey_pos_.size());
  for (int m = 0; m < config_.num_prey; ++m) prey_acc[static_cast<std::size_t>(m)] = prey_accel(m);
  for (std::size_t a = 0; a < pred_pos_.size(); ++a) {
    const Point act = u[a].head<2>().cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
    integrate(pred_pos_[a], pred_vel_[a], config_.predator_accel * act, config_.predator_max_speed);
  }
  for (std::size_t m = 0; m < prey_pos_.size(); ++m) {
    integrate(prey_pos_[m], prey_vel_[m], prey_acc[m], config_.prey_max_speed);
  }
  StepResult r;
  r.reward = reward();
  if (r.reward == config_.cooperative_reward) captured_ = true;
  r.terminal = false;
  for (int a = 0; a < config_.num_predators; ++a) r.observations.push_back(observe(a));
  r.state = state();
  return r;
}

Vec PredatorPrey::observe(int agent) const {
  if (agent < 0 || agent >= config_.num_predators) throw UsageError("agent index out of range");
  const auto self = static_cast<std::size_t>(agent);
  Vec o = Vec::Zero(config_.obs_dim());
  const Point& p = pred_pos_[self];
  o.segment<2>(0) = p;
  o.segment<2>(2) = pred_vel_[self];
  Index off = 4;
  auto entity = [&](const Point& q, const Point& v) {
    const Point rel = q - p;
    if (rel.norm() <= config_.view_radius) {
      o(off) = 1.0;
      o.segment<2>(off + 1) = rel;
      o.segment<2>(off + 3) = v - pred_vel_[self];
    }
    off += 5;
  };
  for (std::size_t j = 0; j < pred_pos_.size(); ++j) {
    if (j != self) entity(pred_pos_[j], pred_vel_[j]);
  }
  for (std::size_t m = 0; m < prey_pos_.size(); ++m) entity(prey_pos_[m], prey_vel_[m]);
  for (const Point& c : landmark_pos_) {
    const Point rel = c - p;
    if (rel.norm() <= config_.view_radius) {
      o(off) = 1.0;
      o.segment<2>(off + 1) = rel;
    }
    off += 3;
  }
  return o;
}

Vec PredatorPrey::state() const {
  Vec s(config_.state_dim());
  Index off = 0;
  for (std::size_t a = 0; a < pred_pos_.size(); ++a) {
    s.segment<2>(off) = pred_pos_[a];
    s.segment<2>(off + 2) = pred_vel_[a];
    off += 4;
  }
  for (std::size_t m = 0; m < prey_pos_.size(); ++m) {
    s.segment<2>(off) = prey_pos_[m];
    s.segment<2>(off + 2) = prey_vel_[m];
    off += 4;
  }
  for (const Point& c : landmark_pos_) {
    s.segment<2>(off) = c;
    off += 2;
  }
  return s;
}

}  // namespace mcem::envs
