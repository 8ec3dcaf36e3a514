#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qdas/model.hpp"
#include "support/finite_diff.hpp"

using namespace qdas;

namespace {

std::vector<double> random_obs(Rng& rng) {
  std::vector<double> obs(kObservationSize);
  for (double& v : obs) v = static_cast<double>(rng.uniform_int(0, 8));
  return obs;
}

}  // namespace

TEST_CASE("zero-initialized heads pass their biases through") {
  ActorCritic m = ActorCritic::search_model(4, 1);
  // Linear layers default to all-zero weights and biases; set the biases.
  for (int a = 0; a < kActionCount; ++a) m.policy_head.bias[static_cast<std::size_t>(a)] = a + 1.0;
  m.value_head.bias[0] = 7.5;

  const std::vector<double> obs(kObservationSize, 0.0);
  const auto fwd = model_forward(m, obs);
  for (int a = 0; a < kActionCount; ++a)
    CHECK(fwd.logits[static_cast<std::size_t>(a)] == a + 1.0);
  CHECK(fwd.value == 7.5);
}

TEST_CASE("forward output shapes are fixed") {
  Rng rng(2001);
  ActorCritic m = ActorCritic::search_model(4, 1);
  m.init_params(rng);
  const auto fwd = model_forward(m, random_obs(rng));
  CHECK(fwd.logits.size() == 6);
  CHECK(std::isfinite(fwd.value));

  const std::vector<double> short_obs(10, 0.0);
  CHECK_THROWS_AS(model_forward(m, short_obs), std::invalid_argument);
}

TEST_CASE("forward is deterministic") {
  Rng rng(2002);
  ActorCritic m = ActorCritic::search_model(4, 2);
  m.init_params(rng);
  const auto obs = random_obs(rng);
  const auto a = model_forward(m, obs);
  const auto b = model_forward(m, obs);
  for (int i = 0; i < kActionCount; ++i)
    CHECK(a.logits[static_cast<std::size_t>(i)] == b.logits[static_cast<std::size_t>(i)]);
  CHECK(a.value == b.value);
}

TEST_CASE("flatten/load round-trip and parameter partition") {
  Rng rng(2003);
  ActorCritic m = ActorCritic::search_model(8, 2, 1);
  m.init_params(rng);

  // Component arithmetic, assembled independently of param_count():
  //   input map 147*8+8, body 36 candidates * 16 angles + 36 weights,
  //   policy head 8*6+6, value head 8*1+1.
  const int expected = (147 * 8 + 8) + (36 * 16 + 36) + (8 * 6 + 6) + (8 * 1 + 1);
  CHECK(expected == 1859);
  const auto flat = flatten_params(m);
  CHECK(static_cast<int>(flat.size()) == expected);
  CHECK(m.param_count() == expected);

  const auto obs = random_obs(rng);
  const auto before = model_forward(m, obs);

  ActorCritic m2 = ActorCritic::search_model(8, 2, 1);
  load_params(m2, flat);
  const auto after = model_forward(m2, obs);
  for (int i = 0; i < kActionCount; ++i)
    CHECK(before.logits[static_cast<std::size_t>(i)] == after.logits[static_cast<std::size_t>(i)]);
  CHECK(before.value == after.value);
  CHECK(flatten_params(m2) == flat);

  SECTION("loading a zero vector zeroes every parameter") {
    load_params(m, std::vector<double>(flat.size(), 0.0));
    for (double v : flatten_params(m)) CHECK(v == 0.0);
  }

  SECTION("length mismatch is rejected") {
    CHECK_THROWS_AS(load_params(m, std::vector<double>(10, 0.0)), std::invalid_argument);
  }
}

TEST_CASE("fixed-circuit model excludes structural weights from the partition") {
  ActorCritic m = ActorCritic::fixed_model(baseline(1, 8, 2));
  CHECK(m.param_count() == (147 * 8 + 8) + 16 + (8 * 6 + 6) + (8 * 1 + 1));
}

TEST_CASE("a two-block stack flattens and reloads consistently") {
  Rng rng(2012);
  ActorCritic m = ActorCritic::search_model(4, 1, 2);
  m.init_params(rng);
  CHECK(m.param_count() == (147 * 4 + 4) + 2 * (36 * 4 + 36) + (4 * 6 + 6) + (4 * 1 + 1));

  const auto obs = random_obs(rng);
  const auto before = model_forward(m, obs);
  ActorCritic m2 = ActorCritic::search_model(4, 1, 2);
  load_params(m2, flatten_params(m));
  const auto after = model_forward(m2, obs);
  CHECK(before.logits == after.logits);
  CHECK(before.value == after.value);
}

TEST_CASE("backward matches finite differences on a reduced model") {
  Rng rng(2004);
  ActorCritic m = ActorCritic::search_model(4, 1);
  m.init_params(rng);
  const auto obs = random_obs(rng);

  std::vector<double> grad_logits(kActionCount);
  for (double& v : grad_logits) v = rng.uniform(-1.0, 1.0);
  const double grad_value = rng.uniform(-1.0, 1.0);

  const auto fwd = model_forward(m, obs);
  std::vector<double> grad(static_cast<std::size_t>(m.param_count()), 0.0);
  model_backward(m, fwd, grad_logits, grad_value, grad);

  const auto loss_at = [&](std::span<const double> flat) {
    ActorCritic probe = ActorCritic::search_model(4, 1);
    load_params(probe, flat);
    const auto f = model_forward(probe, obs);
    double loss = grad_value * f.value;
    for (int a = 0; a < kActionCount; ++a)
      loss += grad_logits[static_cast<std::size_t>(a)] * f.logits[static_cast<std::size_t>(a)];
    return loss;
  };

  const auto flat = flatten_params(m);
  for (std::size_t i = 0; i < flat.size(); i += 7) {  // stride keeps runtime modest
    const double fd = qdas::test::central_diff(loss_at, flat, i);
    CHECK(grad[i] == Catch::Approx(fd).epsilon(1e-4).margin(1e-7));
  }
}

TEST_CASE("zero upstream gradients produce zero parameter gradients") {
  Rng rng(2005);
  ActorCritic m = ActorCritic::search_model(4, 1);
  m.init_params(rng);
  const auto fwd = model_forward(m, random_obs(rng));
  std::vector<double> grad(static_cast<std::size_t>(m.param_count()), 0.0);
  model_backward(m, fwd, std::vector<double>(kActionCount, 0.0), 0.0, grad);
  for (double v : grad) CHECK(v == 0.0);
}

TEST_CASE("value-head gradients do not depend on grad_logits") {
  Rng rng(2006);
  ActorCritic m = ActorCritic::search_model(4, 1);
  m.init_params(rng);
  const auto fwd = model_forward(m, random_obs(rng));

  std::vector<double> gl1(kActionCount), gl2(kActionCount);
  for (double& v : gl1) v = rng.uniform(-1.0, 1.0);
  for (double& v : gl2) v = rng.uniform(-1.0, 1.0);

  std::vector<double> g1(static_cast<std::size_t>(m.param_count()), 0.0), g2 = g1;
  model_backward(m, fwd, gl1, 0.4, g1);
  model_backward(m, fwd, gl2, 0.4, g2);

  const std::size_t value_head_size = 4 + 1;
  for (std::size_t i = g1.size() - value_head_size; i < g1.size(); ++i)
    CHECK(g1[i] == g2[i]);
}

TEST_CASE("sample_action saturates on a dominant logit") {
  Rng rng(2007);
  const std::vector<double> logits{1000.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_action(logits, rng);
    CHECK(s.action == 0);
    CHECK(s.logprob <= 0.0);
  }
}

TEST_CASE("uniform logits sample uniformly") {
  Rng rng(2008);
  const std::vector<double> logits(kActionCount, 0.25);
  std::array<int, kActionCount> counts{};
  const int draws = 60000;
  for (int i = 0; i < draws; ++i)
    counts[static_cast<std::size_t>(sample_action(logits, rng).action)]++;
  for (int a = 0; a < kActionCount; ++a) {
    const double freq = static_cast<double>(counts[static_cast<std::size_t>(a)]) / draws;
    CHECK(freq == Catch::Approx(1.0 / 6.0).margin(0.01));
  }
}

TEST_CASE("logprob is never positive") {
  Rng rng(2009);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(kActionCount);
    for (double& v : logits) v = rng.uniform(-30.0, 30.0);
    CHECK(sample_action(logits, rng).logprob <= 0.0);
  }
}

TEST_CASE("non-finite logits are a numerical fault") {
  Rng rng(2010);
  std::vector<double> logits(kActionCount, 0.0);
  logits[2] = std::nan("");
  CHECK_THROWS_AS(sample_action(logits, rng), std::runtime_error);
}

TEST_CASE("softmax is invariant under constant logit shifts") {
  Rng rng(2011);
  std::vector<double> logits(kActionCount);
  for (double& v : logits) v = rng.uniform(-5.0, 5.0);
  std::vector<double> shifted = logits;
  for (double& v : shifted) v += 123.456;

  const auto p = softmax(logits);
  const auto q = softmax(shifted);
  double kl = 0.0;
  for (int a = 0; a < kActionCount; ++a) {
    const auto sa = static_cast<std::size_t>(a);
    CHECK(p[sa] == Catch::Approx(q[sa]).margin(1e-15));
    kl += p[sa] * std::log(p[sa] / q[sa]);
  }
  CHECK(std::abs(kl) < 1e-12);
}
