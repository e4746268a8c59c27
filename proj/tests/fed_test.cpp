#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "qhe/dataset.hpp"
#include "qhe/federated.hpp"
#include "qhe/training.hpp"

namespace qhe::test {
namespace {

// ---------------------------------------------------------------------------
// Aggregation

PartialResult partial(const std::string& id, double loss, Weights grad,
                      std::size_t n) {
  PartialResult p;
  p.id = id;
  p.loss = loss;
  p.grad = std::move(grad);
  p.n_samples = n;
  return p;
}

TEST(AggregateTest, SingleClientIsDegenerateFederation) {
  const auto agg = aggregate({partial("a", 1.4, {2.0, -4.0}, 2)});
  EXPECT_DOUBLE_EQ(agg.loss, 0.7);
  EXPECT_DOUBLE_EQ(agg.grad[0], 1.0);
  EXPECT_DOUBLE_EQ(agg.grad[1], -2.0);
  EXPECT_EQ(agg.n_samples, 2u);
}

TEST(AggregateTest, OppositeGradientsCancel) {
  const auto agg = aggregate({partial("a", 0.5, {1.0, 2.0}, 1),
                              partial("b", 0.5, {-1.0, -2.0}, 1)});
  EXPECT_DOUBLE_EQ(agg.grad[0], 0.0);
  EXPECT_DOUBLE_EQ(agg.grad[1], 0.0);
}

TEST(AggregateTest, TwoClientLossArithmetic) {
  const auto agg =
      aggregate({partial("a", 1.0, {0.0}, 1), partial("b", 0.4, {0.0}, 1)});
  EXPECT_DOUBLE_EQ(agg.loss, 0.7);
}

TEST(AggregateTest, OrderIndependentAndValidates) {
  const auto fwd = aggregate({partial("a", 1.0, {1.0}, 1),
                              partial("b", 2.0, {2.0}, 3)});
  const auto rev = aggregate({partial("b", 2.0, {2.0}, 3),
                              partial("a", 1.0, {1.0}, 1)});
  EXPECT_DOUBLE_EQ(fwd.loss, rev.loss);
  EXPECT_DOUBLE_EQ(fwd.grad[0], rev.grad[0]);

  EXPECT_THROW(aggregate({}), std::invalid_argument);
  EXPECT_THROW(aggregate({partial("a", 1.0, {1.0}, 1),
                          partial("b", 1.0, {1.0, 2.0}, 1)}),
               std::invalid_argument);
  EXPECT_THROW(aggregate({partial("a", 1.0, {1.0}, 0)}),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Shift schedule

TEST(ScheduleTest, EnumeratesTheTwoQubitEvaluationCount) {
  const auto spec = build_ansatz(2);
  const auto sched = shift_schedule(spec);
  // 6 plain rotations x 2 shifts + 2 controlled x 4 shifts; with the base
  // evaluation this is the 21-circuit schedule for one gradient.
  EXPECT_EQ(sched.size(), 20u);
  std::set<int> params;
  for (const auto& t : sched) params.insert(t.param);
  EXPECT_EQ(params.size(), 8u);
  double coeff_sum = 0.0;
  for (const auto& t : sched) coeff_sum += t.coeff;
  EXPECT_NEAR(coeff_sum, 0.0, 1e-15);
}

TEST(ScheduleTest, GrowsWithOccurrences) {
  const auto sched = shift_schedule(build_ansatz(4));
  // n=4: 30 shared-parameter rotation occurrences and 6 controlled ones.
  EXPECT_EQ(sched.size(), 30u * 2 + 6u * 4);
}

// ---------------------------------------------------------------------------
// client_round against the unencrypted oracle

ClientDataset one_sample_client(std::vector<double> x, int y) {
  ClientDataset c;
  c.id = "client";
  c.samples.push_back({std::move(x), y});
  return c;
}

TEST(ClientRoundTest, ExactModeMatchesDirectGradient) {
  const auto spec = build_ansatz(2);
  Rng init(77);
  Weights theta(8);
  for (double& t : theta) t = init.uniform(0.0, 2.0 * std::numbers::pi);

  const std::vector<double> x{0.8, 2.1};
  for (int y : {0, 1}) {
    const auto client = one_sample_client(x, y);
    RoundOptions opt;
    opt.exact = true;
    Rng rng(1);
    const auto part = client_round(client, {0}, spec, theta,
                                   shift_schedule(spec), opt, rng);

    StateVector st(2);
    st.apply(encode_qubit(x));
    const double f = forward(st, spec, theta, EvalMode::exact());
    EXPECT_NEAR(part.loss, cross_entropy(f, y), 1e-12);

    const Weights df =
        grad_parameter_shift(st, spec, theta, EvalMode::exact());
    const double fc = clip_prob(f);
    const double factor = (fc - y) / (fc * (1.0 - fc));
    ASSERT_EQ(part.grad.size(), df.size());
    for (std::size_t i = 0; i < df.size(); ++i)
      EXPECT_NEAR(part.grad[i], factor * df[i], 1e-10) << "component " << i;
    EXPECT_TRUE(std::isnan(part.encrypted_loss));
  }
}

TEST(ClientRoundTest, BatchIsSumOverSamples) {
  const auto spec = build_ansatz(2);
  Weights theta(8, 0.4);
  ClientDataset c;
  c.id = "c";
  c.samples.push_back({{0.3, 1.0}, 0});
  c.samples.push_back({{2.0, 2.8}, 1});
  RoundOptions opt;
  opt.exact = true;
  Rng rng(1);
  const auto sched = shift_schedule(spec);
  const auto both = client_round(c, {0, 1}, spec, theta, sched, opt, rng);
  const auto first = client_round(c, {0}, spec, theta, sched, opt, rng);
  const auto second = client_round(c, {1}, spec, theta, sched, opt, rng);
  EXPECT_NEAR(both.loss, first.loss + second.loss, 1e-12);
  for (std::size_t i = 0; i < both.grad.size(); ++i)
    EXPECT_NEAR(both.grad[i], first.grad[i] + second.grad[i], 1e-12);
  EXPECT_EQ(both.n_samples, 2u);
}

TEST(ClientRoundTest, AggregatingAPartitionMatchesWholeClient) {
  const auto spec = build_ansatz(2);
  Weights theta(8, 1.1);
  ClientDataset whole;
  whole.id = "whole";
  Rng data_rng(5);
  for (int i = 0; i < 4; ++i)
    whole.samples.push_back(
        {{data_rng.uniform(0.0, 3.0), data_rng.uniform(0.0, 3.0)}, i % 2});

  RoundOptions opt;
  opt.exact = true;
  Rng rng(1);
  const auto sched = shift_schedule(spec);
  const auto one = aggregate(
      {client_round(whole, {0, 1, 2, 3}, spec, theta, sched, opt, rng)});

  ClientDataset part_a{"pa", {whole.samples[0], whole.samples[1]}};
  ClientDataset part_b{"pb", {whole.samples[2], whole.samples[3]}};
  const auto two = aggregate(
      {client_round(part_a, {0, 1}, spec, theta, sched, opt, rng),
       client_round(part_b, {0, 1}, spec, theta, sched, opt, rng)});

  EXPECT_NEAR(one.loss, two.loss, 1e-12);
  for (std::size_t i = 0; i < one.grad.size(); ++i)
    EXPECT_NEAR(one.grad[i], two.grad[i], 1e-12);
}

TEST(ClientRoundTest, Validates) {
  const auto spec = build_ansatz(2);
  const Weights theta(8, 0.0);
  const auto sched = shift_schedule(spec);
  RoundOptions opt;
  opt.exact = true;
  Rng rng(1);
  const auto client = one_sample_client({0.5, 0.5}, 0);
  EXPECT_THROW(client_round(client, {}, spec, theta, sched, opt, rng),
               std::invalid_argument);
  EXPECT_THROW(client_round(client, {3}, spec, theta, sched, opt, rng),
               std::out_of_range);
  ClientDataset empty;
  empty.id = "e";
  EXPECT_THROW(client_round(empty, {0}, spec, theta, sched, opt, rng),
               std::invalid_argument);
}

// Without decryption the parameter-shift differences see only QOTP-mixed
// bits, so every gradient component is statistically centered at zero.
TEST(ClientRoundTest, EncryptedReadoutYieldsNullGradient) {
  const auto spec = build_ansatz(2);
  Rng init(3);
  Weights theta(8);
  for (double& t : theta) t = init.uniform(0.0, 2.0 * std::numbers::pi);
  const auto client = one_sample_client({0.9, 2.2}, 1);
  const auto sched = shift_schedule(spec);

  RoundOptions opt;
  opt.exact = false;
  opt.decrypt = false;
  opt.shots = 64;
  opt.base_shots_per_key = 64;    // one key per evaluation: the raw
  opt.shift_shots_per_key = 64;   // readout is p or 1-p, uniformly
  opt.epsilon_budget = 0.2;

  const int kRepeats = 50;
  std::vector<Weights> grads;
  Rng rng(2024);
  for (int r = 0; r < kRepeats; ++r)
    grads.push_back(
        client_round(client, {0}, spec, theta, sched, opt, rng).grad);

  for (std::size_t i = 0; i < 8; ++i) {
    double mean = 0.0;
    for (const auto& g : grads) mean += g[i] / kRepeats;
    double var = 0.0;
    for (const auto& g : grads)
      var += (g[i] - mean) * (g[i] - mean) / (kRepeats - 1);
    const double se = std::sqrt(var / kRepeats);
    EXPECT_LE(std::abs(mean), 3.0 * se + 1e-12) << "component " << i;
  }
}

// ---------------------------------------------------------------------------
// run_reverse_training

std::vector<ClientDataset> blob_providers(std::size_t n_per_class,
                                          std::uint64_t seed) {
  const Dataset ds = synth_blobs(n_per_class, {0.8, 0.8}, {2.3, 2.3}, 0.25,
                                 seed);
  return {client_from_dataset(filter_label(ds, 0), "provider0"),
          client_from_dataset(filter_label(ds, 1), "provider1")};
}

TrainConfig fast_config(int iterations) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.shots = 128;
  cfg.shots_per_key = 16;  // fast keying for CI
  cfg.epsilon_budget = 0.1;
  cfg.seed = 42;
  return cfg;
}

TEST(ReverseTrainingTest, ZeroIterationsLeaveThetaUntouched) {
  const auto spec = build_ansatz(2);
  const Weights theta0(8, 0.3);
  const auto [theta, log] =
      run_reverse_training(spec, blob_providers(4, 1), fast_config(0), theta0);
  EXPECT_EQ(theta, theta0);
  EXPECT_TRUE(log.records.empty());
}

TEST(ReverseTrainingTest, DeterministicAcrossRunsAndClientOrders) {
  const auto spec = build_ansatz(2);
  auto clients = blob_providers(4, 9);
  const auto cfg = fast_config(2);

  const auto [ta, la] = run_reverse_training(spec, clients, cfg);
  const auto [tb, lb] = run_reverse_training(spec, clients, cfg);
  std::swap(clients[0], clients[1]);
  const auto [tc, lc] = run_reverse_training(spec, clients, cfg);

  EXPECT_EQ(ta, tb);
  EXPECT_EQ(ta, tc);
  ASSERT_EQ(la.records.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(la.records[i].theta, lc.records[i].theta);
    EXPECT_EQ(la.records[i].decrypted_loss, lc.records[i].decrypted_loss);
    EXPECT_EQ(la.records[i].encrypted_loss, lc.records[i].encrypted_loss);
    ASSERT_EQ(la.records[i].contributions.size(), 2u);
    EXPECT_EQ(la.records[i].contributions[0].id, "provider0");
    EXPECT_EQ(la.records[i].contributions[1].id, "provider1");
  }
}

TEST(ReverseTrainingTest, MessagesRespectThePrivacyBoundary) {
  const auto spec = build_ansatz(2);
  const auto clients = blob_providers(3, 11);
  std::vector<RoundMessage> trace;
  run_reverse_training(spec, clients, fast_config(1), {}, &trace);

  ASSERT_FALSE(trace.empty());
  int to_server = 0;
  for (const auto& m : trace) {
    if (m.direction == RoundMessage::Direction::server_to_client) {
      EXPECT_EQ(m.kind, "eval_request");
      continue;
    }
    ++to_server;
    // Whitelist: client->server payloads carry aggregates only.
    if (m.kind == "partial_loss") {
      EXPECT_EQ(m.payload.size(), 1u);
      EXPECT_TRUE(m.payload.contains("loss"));
    } else if (m.kind == "partial_gradient") {
      EXPECT_EQ(m.payload.size(), 1u);
      ASSERT_TRUE(m.payload.contains("gradient"));
      EXPECT_EQ(m.payload["gradient"].size(), 8u);  // carries the dimension
    } else if (m.kind == "sample_size") {
      EXPECT_EQ(m.payload.size(), 1u);
      EXPECT_TRUE(m.payload.contains("count"));
    } else {
      FAIL() << "unexpected client->server message kind " << m.kind;
    }
    const std::string dump = m.payload.dump();
    for (const char* banned : {"feature", "label", "\"x\"", "\"y\"", "state",
                               "key"})
      EXPECT_EQ(dump.find(banned), std::string::npos) << dump;
  }
  EXPECT_EQ(to_server, 2 * 3);  // two clients, three payload kinds each
}

TEST(ReverseTrainingTest, LossTrendsDownOnSeparableBlobs) {
  const auto spec = build_ansatz(2);
  const auto clients = blob_providers(8, 21);
  auto cfg = fast_config(30);
  // The undecrypted fraction carries a Jensen bias of about
  // (2p-1)^2 / (2 * n_keys) through the log loss, so keep the key count
  // per loss evaluation high enough for the 0.693 check.
  cfg.shots_per_key = 2;
  const auto [theta, log] = run_reverse_training(spec, clients, cfg);

  ASSERT_EQ(log.records.size(), 30u);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += log.records[static_cast<std::size_t>(i)].decrypted_loss / 10;
    tail += log.records[log.records.size() - 1 - static_cast<std::size_t>(i)]
                .decrypted_loss /
            10;
  }
  EXPECT_LT(tail, head);

  // The undecrypted trace hovers at ln 2 throughout.
  double enc_mean = 0.0;
  for (const auto& r : log.records) enc_mean += r.encrypted_loss / 30;
  EXPECT_NEAR(enc_mean, std::log(2.0), 0.05);
}

TEST(ReverseTrainingTest, ValidatesInputs) {
  const auto spec = build_ansatz(2);
  const auto clients = blob_providers(2, 1);
  auto cfg = fast_config(1);

  EXPECT_THROW(run_reverse_training(spec, {}, cfg), std::invalid_argument);
  cfg.alpha = 0.0;
  EXPECT_THROW(run_reverse_training(spec, clients, cfg),
               std::invalid_argument);
  cfg = fast_config(1);
  cfg.encoding = "dense";
  EXPECT_THROW(run_reverse_training(spec, clients, cfg),
               std::invalid_argument);
  cfg = fast_config(1);
  EXPECT_THROW(run_reverse_training(spec, clients, cfg, Weights(5, 0.0)),
               std::invalid_argument);

  auto bad = clients;
  bad.push_back(ClientDataset{"empty", {}});
  EXPECT_THROW(run_reverse_training(spec, bad, cfg), std::invalid_argument);
}

TEST(ReverseTrainingTest, ClientFailureNamesTheIteration) {
  // Three features on a 2-qubit spec: consistent across clients, but the
  // qubit encoder rejects it inside the first round.
  const auto spec = build_ansatz(2);
  ClientDataset c;
  c.id = "wide";
  c.samples.push_back({{0.1, 0.2, 0.3}, 0});
  c.samples.push_back({{0.1, 0.2, 0.4}, 1});
  try {
    run_reverse_training(spec, {c}, fast_config(1));
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("iteration 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("wide"), std::string::npos) << msg;
  }
}

TEST(ReverseTrainingTest, CsvAndTraceSerializeRoundTrippably) {
  const auto spec = build_ansatz(2);
  std::vector<RoundMessage> trace;
  const auto [theta, log] = run_reverse_training(
      spec, blob_providers(2, 33), fast_config(2), {}, &trace);

  const std::string csv = log_to_csv(log);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 3u);  // header + 2 records
  EXPECT_EQ(csv.rfind("iteration,loss_decrypted,loss_encrypted,grad_norm,"
                      "theta0",
                      0),
            0u);

  const nlohmann::json j = trace_to_json(trace);
  EXPECT_EQ(j.size(), trace.size());
  EXPECT_EQ(j[0]["kind"], "eval_request");
  EXPECT_TRUE(j[0]["payload"].contains("schedule"));
}

}  // namespace
}  // namespace qhe::test
