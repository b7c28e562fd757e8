#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "xdrive/errors.hpp"
#include "xdrive/nn/init.hpp"
#include "xdrive/rl/ddpg.hpp"
#include "xdrive/rl/noise.hpp"
#include "xdrive/rl/observation.hpp"
#include "xdrive/rl/replay_buffer.hpp"
#include "xdrive/rl/trainer.hpp"
#include "xdrive/sim/route.hpp"
#include "xdrive/sim/transform.hpp"

using namespace xdrive;
using namespace xdrive::rl;
using nn::Index;

namespace {

sim::DrivingEnv make_env(const std::string& name) {
  sim::Track t(sim::builtin_track(name));
  sim::Route r = sim::default_route(t);
  return sim::DrivingEnv(std::move(t), std::move(r));
}

Transition numbered(int i, Index obs = 3, Index act = 2) {
  Transition t;
  t.s = nn::VectorF::Constant(obs, static_cast<float>(i));
  t.a = nn::VectorF::Constant(act, static_cast<float>(-i));
  t.r = static_cast<float>(i);
  t.s_next = t.s.array() + 1.0f;
  t.done = i % 2 == 0;
  return t;
}

Hyperparams small_hp() {
  Hyperparams hp;
  hp.hidden = 16;
  hp.batch_size = 8;
  hp.buffer_capacity = 1000;
  hp.warmup_steps = 50;
  return hp;
}

}  // namespace

TEST_CASE("observation layout") {
  const auto env = make_env("track-a");
  const auto cfg = ObservationConfig::for_env(env);
  CHECK(cfg.dim() == 33);

  SUBCASE("on the centre line, aligned") {
    const auto st = env.state_at(10.0, 4.0);
    const auto obs = observe(st, env.route(), cfg);
    CHECK(obs(0) == doctest::Approx(0.4));
    CHECK(std::abs(obs(1)) < 1e-12);
    CHECK(std::abs(obs(2)) < 1e-12);
  }
  SUBCASE("slots past the route end repeat the goal") {
    const auto st = env.state_at(env.route().length - 3.0);
    const auto obs = observe(st, env.route(), cfg);
    const sim::Vec2 goal = sim::to_ego(st.pose, env.route().goal) / cfg.position_scale;
    for (int k = static_cast<int>(env.route().size() - st.route_progress); k < cfg.waypoints; ++k) {
      CHECK(obs(3 + 2 * k) == goal.x());
      CHECK(obs(4 + 2 * k) == goal.y());
    }
  }
  SUBCASE("waypoint block equals transform_waypoints") {
    nn::Rng rng(12);
    for (int i = 0; i < 50; ++i) {
      auto st = env.state_at(rng.uniform(0.0, env.route().length), rng.uniform(0.0, 10.0));
      st.pose = sim::make_pose(st.pose.x + rng.uniform(-1, 1), st.pose.y + rng.uniform(-1, 1),
                               st.pose.yaw + rng.uniform(-0.5, 0.5));
      const auto obs = observe(st, env.route(), cfg);
      const auto ego = sim::transform_waypoints(st.pose, env.route());
      for (int k = 0; k < cfg.waypoints; ++k) {
        const std::size_t idx = std::min(st.route_progress + k, ego.size() - 1);
        CHECK(std::abs(obs(3 + 2 * k) - ego[idx].x() / cfg.position_scale) < 1e-9);
        CHECK(std::abs(obs(4 + 2 * k) - ego[idx].y() / cfg.position_scale) < 1e-9);
      }
    }
  }
}

TEST_CASE("exploration noise") {
  NoiseConfig cfg;
  CHECK(sigma_at(cfg, 0, 500) == doctest::Approx(0.3));
  CHECK(sigma_at(cfg, 499, 500) == doctest::Approx(0.05));
  CHECK(sigma_at(cfg, 250, 501) == doctest::Approx(0.175));

  ActionNoise a(cfg, 2, nn::Rng(5)), b(cfg, 2, nn::Rng(5));
  a.set_sigma(0.3);
  b.set_sigma(0.3);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 50000; ++i) {
    const auto x = a.sample();
    CHECK(x == b.sample());
    sum += x.sum();
    sq += x.squaredNorm();
  }
  CHECK(std::abs(sum / 1e5) < 0.005);
  CHECK(std::sqrt(sq / 1e5) == doctest::Approx(0.3).epsilon(0.02));

  NoiseConfig ou = cfg;
  ou.kind = NoiseKind::ornstein_uhlenbeck;
  ActionNoise c(ou, 2, nn::Rng(6));
  c.set_sigma(0.3);
  for (int i = 0; i < 100; ++i) CHECK(c.sample().allFinite());
}

TEST_CASE("select_action") {
  const DdpgAgent agent(33, 2, small_hp(), 3);
  nn::Rng rng(8);
  nn::VectorD obs(33);
  for (Index i = 0; i < 33; ++i) obs(i) = rng.uniform(-1, 1);

  ActionNoise quiet(NoiseConfig{}, 2, nn::Rng(1));
  quiet.set_sigma(0.0);
  CHECK(agent.select_action(obs, quiet, true) == agent.policy(obs));
  CHECK(agent.select_action(obs, quiet, false) == agent.policy(obs));

  // a huge perturbation pushes both components far outside [-1, 1]
  ActionNoise loud(NoiseConfig{}, 2, nn::Rng(2));
  loud.set_sigma(1e6);
  for (int i = 0; i < 200; ++i) {
    const auto a = agent.select_action(obs, loud, true);
    CHECK(std::abs(a(0)) == 1.0);
    CHECK(std::abs(a(1)) == 1.0);
  }
  nn::VectorD big(2);
  big << 2.0, -2.0;
  CHECK(to_action(big) == sim::Action{1.0, -1.0});
}

TEST_CASE("soft_update") {
  auto online = nn::make_mlp<double>({2, 3, 1}, nn::Activation::relu, nn::Activation::identity);
  auto target = online;
  auto op = online.parameters();
  auto tp = target.parameters();

  SUBCASE("one step from zero") {
    for (auto& p : op) p.map().setOnes();
    for (auto& p : tp) p.map().setZero();
    soft_update(op, tp, 0.001);
    for (auto& p : tp) CHECK((p.map().array() == 0.001).all());
  }
  SUBCASE("fixed point") {
    nn::Rng rng(1);
    nn::initialize(online, rng);
    hard_update(op, tp);
    soft_update(op, tp, 0.3);
    for (std::size_t i = 0; i < op.size(); ++i) CHECK(op[i].map() == tp[i].map());
  }
  SUBCASE("geometric decay and the interval property") {
    nn::Rng rng(2);
    for (auto& p : op)
      for (Index i = 0; i < p.size(); ++i) p.data[i] = rng.uniform(-1, 1);
    for (auto& p : tp)
      for (Index i = 0; i < p.size(); ++i) p.data[i] = rng.uniform(-1, 1);
    std::vector<nn::MatrixD> gap0;
    for (std::size_t i = 0; i < op.size(); ++i) gap0.push_back((tp[i].map() - op[i].map()).cwiseAbs());
    const double tau = 0.001;
    for (int n = 1; n <= 3000; ++n) {
      std::vector<nn::MatrixD> before;
      for (auto& p : tp) before.push_back(p.map());
      soft_update(op, tp, tau);
      for (std::size_t i = 0; i < op.size(); ++i) {
        const nn::MatrixD lo = before[i].cwiseMin(op[i].map()), hi = before[i].cwiseMax(op[i].map());
        CHECK(((tp[i].map().array() >= lo.array()) && (tp[i].map().array() <= hi.array())).all());
      }
      if (n % 1000 == 0)
        for (std::size_t i = 0; i < op.size(); ++i) {
          const nn::MatrixD expect = gap0[i] * std::pow(1.0 - tau, n);
          CHECK(((tp[i].map() - op[i].map()).cwiseAbs() - expect).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
  }
  SUBCASE("agent targets start as exact copies") {
    DdpgAgent agent(33, 2, small_hp(), 4);
    const auto a = agent.actor().online_params("a"), at = agent.actor().target_params("a");
    const auto c = agent.critic().online_params("c"), ct = agent.critic().target_params("c");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].map() == at[i].map());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].map() == ct[i].map());
  }
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(100, 3, 2, 9);
  for (int i = 0; i < 130; ++i) {
    buf.push(numbered(i));
    CHECK(buf.size() <= 100);
  }
  CHECK(buf.size() == 100);
  // the 30 oldest were evicted in order
  for (std::size_t i = 0; i < 100; ++i) CHECK(buf.at(i).r == static_cast<float>(30 + i));
  const auto t = buf.at(5);
  CHECK(t.s == numbered(35).s);
  CHECK(t.a == numbered(35).a);
  CHECK(t.s_next == numbered(35).s_next);
  CHECK(t.done == numbered(35).done);

  const auto idx = buf.sample_indices(32);
  CHECK(idx.size() == 32);
  CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
  CHECK(std::is_sorted(idx.begin(), idx.end()));

  std::vector<int> counts(100, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[buf.sample_indices(1)[0]];
  const double p = 0.01, tol = 10.0 * std::sqrt(draws * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - draws * p) <= tol);

  const Batch b = buf.sample(16);
  CHECK(b.s.cols() == 16);
  CHECK(b.done.rows() == 1);
  CHECK_THROWS(buf.sample(101));

  Transition wrong = numbered(1, 4, 2);
  CHECK_THROWS_AS(buf.push(wrong), ShapeMismatch);
}

TEST_CASE("Bellman targets") {
  nn::Rng rng(10);
  Batch b;
  b.s = nn::MatrixF::Random(33, 8);
  b.a = nn::MatrixF::Random(2, 8);
  b.r = nn::MatrixF::Random(1, 8);
  b.s_next = nn::MatrixF::Random(33, 8);

  b.done = nn::MatrixF::Ones(1, 8);
  DdpgAgent agent(33, 2, small_hp(), 11);
  CHECK(agent.bellman_target(b) == b.r);

  Hyperparams hp = small_hp();
  hp.gamma = 1e-300;  // smallest accepted discount: the bootstrap term vanishes in float
  b.done = nn::MatrixF::Zero(1, 8);
  CHECK(DdpgAgent(33, 2, hp, 11).bellman_target(b) == b.r);
  hp.gamma = 0.0;
  CHECK_THROWS_AS(DdpgAgent(33, 2, hp, 11), InvalidConfig);
}

TEST_CASE("a self-looping transition converges to 1 / (1 - gamma)") {
  Hyperparams hp = small_hp();
  hp.gamma = 0.9;
  hp.tau = 0.01;
  hp.actor_lr = 1e-12;  // keep mu fixed so the bootstrap action matches the stored one
  hp.preactivation_penalty = 0.0;
  DdpgAgent agent(4, 1, hp, 12);
  nn::VectorD s(4);
  s << 0.2, -0.1, 0.4, 0.0;
  Batch b;
  b.s = s.cast<float>().replicate(1, 32);
  b.s_next = b.s;
  b.a = agent.policy(s).cast<float>().replicate(1, 32);
  b.r = nn::MatrixF::Ones(1, 32);
  b.done = nn::MatrixF::Zero(1, 32);
  for (int i = 0; i < 5000; ++i) agent.train_on(b);
  nn::MatrixF sa(5, 1);
  sa << b.s.col(0), b.a.col(0);
  const double q = nn::forward(agent.critic().online, sa)(0, 0);
  CHECK(q == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK(hp.actor_lr == 1e-4);
  CHECK(hp.critic_lr == 1e-3);
  CHECK(hp.tau == 0.001);
  CHECK(hp.buffer_capacity == 100000);
  CHECK(hp.batch_size == 32);
  CHECK(hp.gamma == 0.99);
  CHECK(hp.episodes == 500);
  hp.tau = 1.0;
  CHECK_THROWS_AS(hp.validate(), InvalidConfig);
  hp = {};
  hp.gamma = 1.5;
  CHECK_THROWS_AS(hp.validate(), InvalidConfig);
  hp = {};
  hp.buffer_capacity = 10;
  CHECK_THROWS_AS(hp.validate(), InvalidConfig);
}

TEST_CASE("training") {
  const auto env = make_env("track-mini");
  Hyperparams hp = small_hp();

  SUBCASE("zero episodes returns the initial actor") {
    hp.episodes = 0;
    auto res = train(env, hp, {.seed = 4});
    CHECK(res.curve.empty());
    DdpgAgent fresh(33, 2, hp, 4);
    const auto a = res.agent.actor().online_params("a"), b = fresh.actor().online_params("a");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].map() == b[i].map());
  }
  SUBCASE("bit-reproducible for a fixed seed") {
    hp.episodes = 6;
    const auto dir = std::filesystem::temp_directory_path() / "xdrive_rl_test";
    std::filesystem::create_directories(dir);
    TrainOptions o1{.seed = 9, .curve = dir / "c1.jsonl"}, o2{.seed = 9, .curve = dir / "c2.jsonl"};
    auto r1 = train(env, hp, o1);
    auto r2 = train(env, hp, o2);
    CHECK(r1.curve == r2.curve);
    CHECK(r1.curve.size() == 6);
    auto read = [](const std::filesystem::path& p) {
      std::ifstream in(p);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(read(dir / "c1.jsonl") == read(dir / "c2.jsonl"));
    const auto a = r1.agent.parameters(), b = r2.agent.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].map() == b[i].map());

    // greedy rollouts of a frozen actor repeat exactly
    const auto pol = actor_policy(r1.agent, env.route(), ObservationConfig::for_env(env));
    const auto g1 = rollout(env, pol), g2 = rollout(env, pol);
    CHECK(g1.states == g2.states);
    CHECK(g1.termination == g2.termination);
    CHECK(g1.termination != sim::Termination::none);

    // checkpoint round-trip
    r1.agent.save(dir / "agent.ckpt");
    DdpgAgent other(33, 2, hp, 1);
    other.load(dir / "agent.ckpt");
    const auto c = other.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].map() == c[i].map());
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("learning-curve records round-trip") {
  const EpisodeLog log{7, -12.5, 311, sim::Termination::lane_departure};
  CHECK(parse_episode_log(to_json_line(log)) == log);
  CHECK_THROWS_AS(parse_episode_log("{\"episode\": 1}"), FormatError);
}

TEST_CASE("pure pursuit drives the built-in routes to their goals") {
  for (const char* name : {"track-a", "track-b", "track-mini"}) {
    CAPTURE(name);
    const auto env = make_env(name);
    CHECK(rollout(env, pure_pursuit_policy(env)).termination == sim::Termination::goal_reached);
  }
}
