#include <doctest.h>

#include "ogsbl/environment.hpp"

using namespace ogsbl;

namespace {

struct EnvFixture {
  Problem problem;
  ChannelSample sample;
};

EnvFixture make_fixture(std::uint64_t seed, int n = 8, int t = 6, int jhat = 12, double noise_var = 0.02,
                        CodecMode mode = CodecMode::diagonal, int max_layers = 6) {
  ArrayGeometry geom{n, 0.5};
  Grid grid = Grid::uniform(jhat);
  RngStream rng(seed);
  PilotMatrix pilot = generate_pilots(t, geom, 1.0, rng);
  ChannelGenConfig cfg;
  cfg.n_clusters = 2;
  ChannelSample sample = generate_channel(geom, cfg, rng);
  sample.noise_var = noise_var;
  sample.y = observe(pilot, sample.h, noise_var, rng);

  SblHyper hyper;
  EnvConfig env;
  env.max_layers = max_layers;
  EnvFixture fx{Problem::standard(geom, grid, pilot, hyper, env, mode, ActionScales{}), std::move(sample)};
  return fx;
}

DdpgAgent make_agent(const Problem& problem, std::uint64_t seed) {
  DdpgConfig cfg;
  cfg.actor_hidden = {32, 32};
  cfg.critic_hidden = {32, 32};
  cfg.halting_hidden = {16, 16};
  RngStream rng(seed);
  return DdpgAgent::create(problem.feature_dim(), problem.param_dim(), problem.residual_offset(),
                           problem.residual_len(), cfg, HaltingMode::score, rng);
}

}  // namespace

TEST_CASE("reset initializes beta to zero with the documented feature layout") {
  EnvFixture fx = make_fixture(1);
  const EnvState s1 = env_reset(fx.problem, fx.sample);
  const EnvState s2 = env_reset(fx.problem, fx.sample);
  CHECK(s1.sbl.beta.norm() == 0.0);
  CHECK(s1.t == 0);
  CHECK(s1.features.size() == 1 + 2 * 12 + 2 * 6);
  CHECK(s1.features == s2.features);  // deterministic
  CHECK(s1.residual.size() == 6);
  // Residual slice is the scaled observation residual.
  const double inv = 1.0 / fx.sample.y.norm();
  for (int i = 0; i < 6; ++i) {
    CHECK(s1.features(1 + 24 + i) == doctest::Approx(s1.residual(i).real() * inv));
    CHECK(s1.features(1 + 24 + 6 + i) == doctest::Approx(s1.residual(i).imag() * inv));
  }
}

TEST_CASE("stopping rule: halting at or below epsilon ends the episode") {
  EnvFixture fx = make_fixture(2);
  fx.problem.env.epsilon = 0.2;
  const EnvState state = env_reset(fx.problem, fx.sample);
  const LayerParams params =
      plain_equivalent_params(state.sbl, fx.problem.pilot, fx.problem.grid, fx.problem.geom, fx.sample.y,
                              fx.problem.hyper);
  const StepResult halted = env_step(fx.problem, state, params, 0.1, fx.sample);
  CHECK(halted.done);
  const StepResult continuing = env_step(fx.problem, state, params, 0.9, fx.sample);
  CHECK_FALSE(continuing.done);
}

TEST_CASE("layer budget forces done regardless of the halting score") {
  EnvFixture fx = make_fixture(3);
  fx.problem.env.max_layers = 1;
  const EnvState state = env_reset(fx.problem, fx.sample);
  const LayerParams params =
      plain_equivalent_params(state.sbl, fx.problem.pilot, fx.problem.grid, fx.problem.geom, fx.sample.y,
                              fx.problem.hyper);
  const StepResult res = env_step(fx.problem, state, params, 0.99, fx.sample);
  CHECK(res.done);
}

TEST_CASE("plain-SBL action yields exactly the one-iteration NMSE decrement as reward") {
  EnvFixture fx = make_fixture(4);
  fx.problem.env.lambda_halt = 0.0;
  fx.problem.env.eta_pen = 0.0;
  const EnvState state = env_reset(fx.problem, fx.sample);
  const LayerParams params =
      plain_equivalent_params(state.sbl, fx.problem.pilot, fx.problem.grid, fx.problem.geom, fx.sample.y,
                              fx.problem.hyper);
  const StepResult res = env_step(fx.problem, state, params, 0.5, fx.sample);

  const double nmse_before = nmse(state.h_hat, fx.sample.h);
  CHECK(res.reward == doctest::Approx(nmse_before - res.nmse_after).epsilon(1e-12));
}

TEST_CASE("rollout runs exactly one step when the budget is one") {
  EnvFixture fx = make_fixture(5);
  fx.problem.env.max_layers = 1;
  DdpgAgent agent = make_agent(fx.problem, 6);
  const EpisodeTrace trace = rollout(agent, fx.problem, fx.sample, false, nullptr);
  CHECK(trace.steps.size() == 1);
  CHECK(trace.layers_used == 1);
}

TEST_CASE("greedy rollouts are reproducible") {
  EnvFixture fx = make_fixture(7);
  DdpgAgent agent = make_agent(fx.problem, 8);
  const EpisodeTrace a = rollout(agent, fx.problem, fx.sample, false, nullptr);
  const EpisodeTrace b = rollout(agent, fx.problem, fx.sample, false, nullptr);
  REQUIRE(a.steps.size() == b.steps.size());
  CHECK(a.final_nmse == b.final_nmse);
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].action == b.steps[i].action);
    CHECK(a.steps[i].reward == b.steps[i].reward);
  }
}

TEST_CASE("plain policy never increases the error on a noiseless on-grid ray") {
  ArrayGeometry geom{8, 0.5};
  Grid grid = Grid::uniform(12);
  RngStream rng(9);
  PilotMatrix pilot = generate_pilots(8, geom, 1.0, rng);
  ChannelSample sample;
  sample.n_clusters = 1;
  sample.rays_per_cluster = 1;
  sample.ray_angles = VecR::Constant(1, grid.points(4));
  sample.ray_gains = VecC::Constant(1, Complex(1.0, -0.5));
  sample.h = sample.ray_gains(0) * steering_vector(geom, grid.points(4));
  sample.noise_var = 0.0;
  sample.y = pilot.x * sample.h;

  SblHyper hyper;
  EnvConfig env;
  env.max_layers = 10;
  env.epsilon = 0.0;  // never stop early
  Problem problem = Problem::standard(geom, grid, pilot, hyper, env, CodecMode::diagonal, ActionScales{});
  const EpisodeTrace trace = rollout_plain_policy(problem, sample, 10);
  double prev = trace.nmse0;
  for (const EpisodeStep& step : trace.steps) {
    CHECK(step.nmse_after <= prev + 1e-9);
    prev = step.nmse_after;
  }
  CHECK(trace.final_nmse < 1e-6);
}

TEST_CASE("with no halting terms the rewards telescope to the total NMSE improvement") {
  EnvFixture fx = make_fixture(10);
  fx.problem.env.lambda_halt = 0.0;
  fx.problem.env.eta_pen = 0.0;
  fx.problem.env.epsilon = 0.0;
  DdpgAgent agent = make_agent(fx.problem, 11);
  const EpisodeTrace trace = rollout(agent, fx.problem, fx.sample, false, nullptr);
  CHECK(trace.undiscounted_return ==
        doctest::Approx(trace.nmse0 - trace.final_nmse).epsilon(1e-10));
}

TEST_CASE("episode length is non-increasing in the halting constant") {
  EnvFixture base = make_fixture(12);
  DdpgAgent agent = make_agent(base.problem, 13);
  RngStream rng(14);
  const std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.4, 0.7};
  int degenerate = 0;
  for (int s = 0; s < 100; ++s) {
    ChannelGenConfig cfg;
    cfg.n_clusters = 1 + static_cast<int>(rng.integer(3));
    ChannelSample sample = generate_channel(base.problem.geom, cfg, rng);
    sample.noise_var = 0.02;
    sample.y = observe(base.problem.pilot, sample.h, 0.02, rng);

    int prev_layers = base.problem.env.max_layers + 1;
    for (double eps : eps_grid) {
      Problem p = base.problem;
      p.env.epsilon = eps;
      const EpisodeTrace trace = rollout(agent, p, sample, false, nullptr);
      CHECK(trace.layers_used <= prev_layers);
      CHECK(trace.layers_used <= p.env.max_layers);
      prev_layers = trace.layers_used;
      // done is true whenever some L_t <= eps fired before the cap.
      if (trace.ended_done && trace.layers_used < p.env.max_layers) {
        CHECK(trace.steps.back().halting <= eps);
      }
    }
    if (prev_layers == base.problem.env.max_layers) ++degenerate;
  }
  (void)degenerate;
}

TEST_CASE("action decoding recenters W1 on the steering-derivative operator") {
  EnvFixture fx = make_fixture(15, 8, 6, 12, 0.02, CodecMode::diagonal_rank1);
  const VecR neutral = VecR::Zero(fx.problem.param_dim());
  const LayerParams p = fx.problem.mapper.decode(neutral);
  const MatC expected = steering_derivative_operator(fx.problem.geom);
  CHECK((p.w1 - expected).norm() < 1e-12);
  CHECK(p.w2.norm() == 0.0);
  CHECK(p.o1.norm() == 0.0);
  CHECK(p.o2.norm() == 0.0);
  CHECK(p.b1.norm() == 0.0);
  CHECK(p.a == doctest::Approx(1e-3));  // log-scale midpoint
  for (int j = 0; j < 12; ++j) {
    CHECK(p.step_beta(j) == doctest::Approx(1e-3 * fx.problem.grid.resolution));
    CHECK(p.c1(j) == doctest::Approx(-1e-3 * fx.problem.scales.c1_scale));
  }

  // Extreme raws stay inside the documented boxes.
  const LayerParams lo = fx.problem.mapper.decode(VecR::Constant(fx.problem.param_dim(), -1.0));
  CHECK(lo.a == doctest::Approx(1e-6));
  CHECK(lo.step_beta.maxCoeff() == doctest::Approx(1e-6 * fx.problem.grid.resolution));
  CHECK(lo.c1.maxCoeff() == doctest::Approx(-1e-6 * fx.problem.scales.c1_scale));
  const LayerParams hi = fx.problem.mapper.decode(VecR::Constant(fx.problem.param_dim(), 1.0));
  CHECK(hi.a == doctest::Approx(1.0));
  CHECK(hi.step_beta.minCoeff() == doctest::Approx(fx.problem.grid.resolution));
  CHECK(hi.c1.minCoeff() == doctest::Approx(-fx.problem.scales.c1_scale));
}

TEST_CASE("malformed actions are rejected") {
  EnvFixture fx = make_fixture(16);
  const EnvState state = env_reset(fx.problem, fx.sample);
  CHECK_THROWS_AS(env_step_raw(fx.problem, state, VecR::Zero(3), fx.sample), DimensionError);
}

TEST_CASE("black-box transition respects the state box") {
  EnvFixture fx = make_fixture(17, 8, 6, 12, 0.02, CodecMode::diagonal, 6);
  fx.problem.kind = TransitionKind::blackbox;
  RngStream rng(18);
  SblState state = initial_state(fx.sample.y, 12);
  for (int trial = 0; trial < 10; ++trial) {
    VecR raw(blackbox_param_dim(12));
    for (int i = 0; i < raw.size(); ++i) raw(i) = rng.uniform(-1.0, 1.0);
    state = blackbox_transition(fx.problem, state, raw);
    CHECK(state.alpha > 0.0);
    CHECK(std::isfinite(state.alpha));
    for (int j = 0; j < 12; ++j) {
      CHECK(state.gamma(j) > 0.0);
      CHECK(std::abs(state.beta(j)) <= fx.problem.grid.resolution / 2.0 + 1e-15);
    }
  }

  // The raw-action step also works end to end for the black-box kind.
  DdpgAgent agent = make_agent(fx.problem, 19);
  const EpisodeTrace trace = rollout(agent, fx.problem, fx.sample, false, nullptr);
  CHECK(trace.layers_used >= 1);
  CHECK(std::isfinite(trace.final_nmse));
}
