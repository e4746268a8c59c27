#pragma once

// Reverse delegated training: the network owner (server) holds the ansatz
// parameters; data providers (clients) supply training samples only in
// encrypted form.  Per round, each client encodes and encrypts a batch, the
// server evaluates the transpiled bound circuit homomorphically, and the
// client returns partial loss and gradient contributions assembled from the
// decrypted readouts.  Raw features and labels never leave a client.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhe/ansatz.hpp"
#include "qhe/dataset.hpp"
#include "qhe/encoding.hpp"
#include "qhe/protocol.hpp"
#include "qhe/training.hpp"
#include "qhe/transpile.hpp"

namespace qhe {

struct Sample {
  std::vector<double> x;
  int y = 0;
};

struct ClientDataset {
  std::string id;
  std::vector<Sample> samples;
};

inline ClientDataset client_from_dataset(const Dataset& ds,
                                         const std::string& id) {
  ClientDataset c;
  c.id = id;
  for (std::size_t i = 0; i < ds.size(); ++i)
    c.samples.push_back({ds.features[i], ds.labels[i]});
  return c;
}

struct TrainConfig {
  int iterations = 0;
  int batch_per_client = 1;
  int shots = 1024;
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double epsilon_budget = 0.1;  // transpile accuracy budget per circuit
  std::uint64_t seed = 0;
  std::string encoding = "qubit";
  // 1 = fresh key per shot on every evaluation (full Step-1 randomization).
  // k > 1 = fast mode: the loss evaluation refreshes keys every k shots and
  // gradient-shift evaluations reuse one key, relying on the decryption
  // identity being key-independent.
  int shots_per_key = 1;
  // Bypass transpilation and encryption and train on exact plaintext
  // probabilities (infinite-shot plain simulator).  Encrypted losses log as
  // NaN in this mode.
  bool exact = false;
};

inline void validate_config(const TrainConfig& cfg) {
  if (cfg.iterations < 0)
    throw std::invalid_argument("train config: iterations must be >= 0");
  if (cfg.batch_per_client < 1 || cfg.shots < 1 || cfg.shots_per_key < 1)
    throw std::invalid_argument("train config: counts must be positive");
  if (!(cfg.alpha > 0.0))
    throw std::invalid_argument("train config: alpha must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.eps_adam > 0.0))
    throw std::invalid_argument("train config: bad adam constants");
  if (!(cfg.epsilon_budget > 0.0))
    throw std::invalid_argument("train config: epsilon_budget must be > 0");
  if (cfg.encoding != "qubit" && cfg.encoding != "amplitude")
    throw std::invalid_argument("train config: unknown encoding");
}

// One term of the parameter-shift schedule: evaluate f with `occurrence`
// shifted by `delta` and add `coeff * f` to d f / d theta_{param}.
struct ShiftTerm {
  int param = 0;
  int occurrence = 0;
  double delta = 0.0;
  double coeff = 0.0;
};

// Mirrors grad_parameter_shift's evaluation order exactly: occurrence-major,
// positive shift first, two-point rule for plain rotations and the
// four-point rule for controlled ones.
inline std::vector<ShiftTerm> shift_schedule(const AnsatzSpec& spec) {
  constexpr double kPi = std::numbers::pi;
  const double c1 = (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0));
  const double c2 = (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0));
  std::vector<ShiftTerm> terms;
  int ordinal = 0;
  for (const AnsatzGate& ag : ansatz_gates(spec)) {
    if (ag.param < 0) continue;
    const int o = ordinal++;
    if (ag.kind == GateKind::RY) {
      terms.push_back({ag.param, o, kPi / 2, 0.5});
      terms.push_back({ag.param, o, -kPi / 2, -0.5});
    } else {
      terms.push_back({ag.param, o, kPi / 2, c1});
      terms.push_back({ag.param, o, -kPi / 2, -c1});
      terms.push_back({ag.param, o, 3 * kPi / 2, -c2});
      terms.push_back({ag.param, o, -3 * kPi / 2, c2});
    }
  }
  return terms;
}

struct RoundMessage {
  enum class Direction { server_to_client, client_to_server };
  Direction direction = Direction::server_to_client;
  std::string client_id;
  std::string kind;  // eval_request | partial_loss | partial_gradient | sample_size
  nlohmann::json payload;
};

struct RoundOptions {
  int shots = 1024;
  int base_shots_per_key = 1;   // loss evaluation key refresh interval
  int shift_shots_per_key = 1;  // gradient evaluation key refresh interval
  double epsilon_budget = 0.1;
  std::string encoding = "qubit";
  bool exact = false;    // bypass transpilation + encryption (oracle mode)
  bool decrypt = true;   // false models a server reading raw ciphertext bits
};

struct PartialResult {
  std::string id;
  double loss = 0.0;            // summed over the batch, not averaged
  double encrypted_loss = 0.0;  // from undecrypted readouts
  Weights grad;                 // summed over the batch
  std::size_t n_samples = 0;
};

namespace fed_detail {

inline StateVector encoded_state(const std::vector<double>& x,
                                 const AnsatzSpec& spec,
                                 const std::string& encoding) {
  if (encoding == "amplitude") return encode_amplitude(x, spec.n_qubits);
  if (static_cast<int>(x.size()) != spec.n_qubits)
    throw std::invalid_argument(
        "qubit encoding: feature count must equal qubit count");
  StateVector st(spec.n_qubits);
  st.apply(encode_qubit(x));
  return st;
}

inline double one_fraction(const std::vector<std::string>& bits) {
  std::size_t ones = 0;
  for (const auto& b : bits) ones += b == "1";
  return static_cast<double>(ones) / static_cast<double>(bits.size());
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fed_detail

// One training round for one client: evaluate the base circuit plus every
// scheduled shift on each batch sample, then assemble the summed loss and
// the summed gradient d l / d theta_i = (f - y) / (f (1 - f)) * d f / d
// theta_i with clipped f.
inline PartialResult client_round(const ClientDataset& client,
                                  const std::vector<std::size_t>& batch,
                                  const AnsatzSpec& spec, const Weights& theta,
                                  const std::vector<ShiftTerm>& schedule,
                                  const RoundOptions& opt, Rng& rng,
                                  std::vector<RoundMessage>* trace = nullptr) {
  if (client.samples.empty())
    throw std::invalid_argument("client_round: empty client dataset");
  if (batch.empty()) throw std::invalid_argument("client_round: empty batch");
  for (std::size_t i : batch)
    if (i >= client.samples.size())
      throw std::out_of_range("client_round: batch index out of range");

  if (trace) {
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& t : schedule)
      sched.push_back({{"param", t.param},
                       {"occurrence", t.occurrence},
                       {"delta", t.delta},
                       {"coeff", t.coeff}});
    trace->push_back({RoundMessage::Direction::server_to_client, client.id,
                      "eval_request",
                      {{"circuit_id", "qcnn_ansatz"},
                       {"n_params", spec.n_params()},
                       {"shots", opt.shots},
                       {"schedule", std::move(sched)}}});
  }

  // f[v][s]: readout-1 fraction for scheduled vector v (0 = base) on batch
  // sample s; f_enc only for the base evaluation.
  const std::size_t n_vec = 1 + schedule.size();
  std::vector<std::vector<double>> f(n_vec,
                                     std::vector<double>(batch.size(), 0.0));
  std::vector<double> f_enc(batch.size(),
                            std::numeric_limits<double>::quiet_NaN());

  std::vector<StateVector> states;
  states.reserve(batch.size());
  for (std::size_t i : batch)
    states.push_back(
        fed_detail::encoded_state(client.samples[i].x, spec, opt.encoding));

  for (std::size_t v = 0; v < n_vec; ++v) {
    const int occ = v == 0 ? -1 : schedule[v - 1].occurrence;
    const double delta = v == 0 ? 0.0 : schedule[v - 1].delta;
    const Circuit bound = bind_shifted(spec, theta, occ, delta);

    if (opt.exact) {
      for (std::size_t s = 0; s < batch.size(); ++s) {
        StateVector st = states[s];
        st.apply(bound);
        f[v][s] = st.prob_one(spec.readout_qubit);
      }
      continue;
    }

    SynthConfig synth_cfg;
    const Circuit evaluated = transpile(bound, opt.epsilon_budget, synth_cfg).first;
    const std::size_t spk = static_cast<std::size_t>(
        v == 0 ? opt.base_shots_per_key : opt.shift_shots_per_key);
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const ProtocolTranscript tr = run_protocol_grouped(
          evaluated, states[s], {spec.readout_qubit},
          static_cast<std::size_t>(opt.shots), spk, rng);
      std::vector<std::string> dec, enc;
      for (const auto& g : tr.groups) {
        dec.insert(dec.end(), g.decrypted.begin(), g.decrypted.end());
        enc.insert(enc.end(), g.encrypted.begin(), g.encrypted.end());
      }
      f[v][s] = fed_detail::one_fraction(opt.decrypt ? dec : enc);
      if (v == 0) f_enc[s] = fed_detail::one_fraction(enc);
    }
  }

  PartialResult out;
  out.id = client.id;
  out.grad.assign(static_cast<std::size_t>(spec.n_params()), 0.0);
  out.n_samples = batch.size();
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const int y = client.samples[batch[s]].y;
    out.loss += cross_entropy(f[0][s], y);
    if (!opt.exact) out.encrypted_loss += cross_entropy(f_enc[s], y);
    const double fc = clip_prob(f[0][s]);
    const double factor = (fc - y) / (fc * (1.0 - fc));
    for (std::size_t t = 0; t < schedule.size(); ++t)
      out.grad[static_cast<std::size_t>(schedule[t].param)] +=
          factor * schedule[t].coeff * f[t + 1][s];
  }
  if (opt.exact)
    out.encrypted_loss = std::numeric_limits<double>::quiet_NaN();

  if (trace) {
    trace->push_back({RoundMessage::Direction::client_to_server, client.id,
                      "partial_loss", {{"loss", out.loss}}});
    trace->push_back({RoundMessage::Direction::client_to_server, client.id,
                      "partial_gradient", {{"gradient", out.grad}}});
    trace->push_back({RoundMessage::Direction::client_to_server, client.id,
                      "sample_size", {{"count", out.n_samples}}});
  }
  return out;
}

struct AggregateResult {
  double loss = 0.0;
  double encrypted_loss = 0.0;
  Weights grad;
  std::size_t n_samples = 0;
};

// L = sum L_k / sum |X_k| and likewise per gradient component, summing in
// ascending client-id order.
inline AggregateResult aggregate(std::vector<PartialResult> partials) {
  if (partials.empty()) throw std::invalid_argument("aggregate: no partials");
  std::sort(partials.begin(), partials.end(),
            [](const PartialResult& a, const PartialResult& b) {
              return a.id < b.id;
            });
  AggregateResult out;
  out.grad.assign(partials[0].grad.size(), 0.0);
  for (const auto& p : partials) {
    if (p.grad.size() != out.grad.size())
      throw std::invalid_argument("aggregate: gradient dimension mismatch");
    if (p.n_samples == 0)
      throw std::invalid_argument("aggregate: empty partial");
    out.loss += p.loss;
    out.encrypted_loss += p.encrypted_loss;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += p.grad[i];
    out.n_samples += p.n_samples;
  }
  const double n = static_cast<double>(out.n_samples);
  out.loss /= n;
  out.encrypted_loss /= n;
  for (double& g : out.grad) g /= n;
  return out;
}

struct IterationRecord {
  int iteration = 0;
  double decrypted_loss = 0.0;
  double encrypted_loss = 0.0;
  double grad_norm = 0.0;
  Weights theta;  // snapshot after the update
  std::vector<PartialResult> contributions;  // id-sorted, gradients omitted
};

struct TrainingLog {
  std::vector<IterationRecord> records;
};

// Per iteration: each client draws `batch_per_client` samples round-robin
// from its own seeded shuffle, runs a client round, the server aggregates in
// id order and applies one Adam step.  All randomness derives from
// (seed, client id, iteration), so the log is bit-identical across runs and
// across client execution orders.
inline std::pair<Weights, TrainingLog> run_reverse_training(
    const AnsatzSpec& spec, const std::vector<ClientDataset>& clients,
    const TrainConfig& cfg, Weights theta = {},
    std::vector<RoundMessage>* trace = nullptr) {
  validate_config(cfg);
  if (clients.empty())
    throw std::invalid_argument("run_reverse_training: no clients");
  for (const auto& c : clients) {
    if (c.samples.empty())
      throw std::invalid_argument("run_reverse_training: client '" + c.id +
                                  "' has no samples");
    for (const auto& s : c.samples)
      if (s.x.size() != c.samples[0].x.size() ||
          s.x.size() != clients[0].samples[0].x.size())
        throw std::invalid_argument(
            "run_reverse_training: inconsistent feature dimensions");
  }

  if (theta.empty()) {
    Rng init = Rng(cfg.seed).child(0x1A17u);
    theta.resize(static_cast<std::size_t>(spec.n_params()));
    for (double& t : theta) t = init.uniform(0.0, 2.0 * std::numbers::pi);
  }
  if (theta.size() != static_cast<std::size_t>(spec.n_params()))
    throw std::invalid_argument("run_reverse_training: theta dimension");

  const std::vector<ShiftTerm> schedule = shift_schedule(spec);
  RoundOptions opt;
  opt.shots = cfg.shots;
  opt.base_shots_per_key = cfg.shots_per_key;
  opt.shift_shots_per_key = cfg.shots_per_key > 1 ? cfg.shots : 1;
  opt.epsilon_budget = cfg.epsilon_budget;
  opt.encoding = cfg.encoding;
  opt.exact = cfg.exact;

  // Fixed per-client sample orders, derived from (seed, id) only.
  std::vector<std::vector<std::size_t>> order(clients.size());
  for (std::size_t k = 0; k < clients.size(); ++k) {
    auto& ord = order[k];
    ord.resize(clients[k].samples.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    Rng shuffle_rng =
        Rng(cfg.seed).child(fed_detail::fnv1a(clients[k].id)).child(0);
    for (std::size_t i = ord.size(); i > 1; --i)
      std::swap(ord[i - 1], ord[shuffle_rng.index(i)]);
  }

  AdamState adam(theta.size(), cfg.alpha);
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.eps_adam = cfg.eps_adam;

  TrainingLog log;
  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<PartialResult> partials;
    for (std::size_t k = 0; k < clients.size(); ++k) {
      std::vector<std::size_t> batch;
      for (int b = 0; b < cfg.batch_per_client; ++b) {
        const std::size_t pos =
            (static_cast<std::size_t>(it) *
                 static_cast<std::size_t>(cfg.batch_per_client) +
             static_cast<std::size_t>(b)) %
            order[k].size();
        batch.push_back(order[k][pos]);
      }
      Rng round_rng = Rng(cfg.seed)
                          .child(fed_detail::fnv1a(clients[k].id))
                          .child(static_cast<std::uint64_t>(it) + 1);
      try {
        partials.push_back(client_round(clients[k], batch, spec, theta,
                                        schedule, opt, round_rng, trace));
      } catch (const std::exception& e) {
        throw std::runtime_error("reverse training aborted at iteration " +
                                 std::to_string(it) + ": client '" +
                                 clients[k].id + "': " + e.what());
      }
    }
    IterationRecord rec;
    for (const auto& p : partials) {
      PartialResult c;
      c.id = p.id;
      c.loss = p.loss;
      c.encrypted_loss = p.encrypted_loss;
      c.n_samples = p.n_samples;
      rec.contributions.push_back(std::move(c));
    }
    std::sort(rec.contributions.begin(), rec.contributions.end(),
              [](const PartialResult& a, const PartialResult& b) {
                return a.id < b.id;
              });
    AggregateResult agg = aggregate(std::move(partials));

    rec.iteration = it;
    rec.decrypted_loss = agg.loss;
    rec.encrypted_loss = agg.encrypted_loss;
    for (double g : agg.grad) rec.grad_norm += g * g;
    rec.grad_norm = std::sqrt(rec.grad_norm);

    adam_step(adam, agg.grad, theta);
    rec.theta = theta;
    log.records.push_back(std::move(rec));
  }
  return {std::move(theta), std::move(log)};
}

inline std::string log_to_csv(const TrainingLog& log) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,loss_decrypted,loss_encrypted,grad_norm";
  const std::size_t dim =
      log.records.empty() ? 0 : log.records[0].theta.size();
  for (std::size_t i = 0; i < dim; ++i) out << ",theta" << i;
  out << "\n";
  for (const auto& r : log.records) {
    out << r.iteration << "," << r.decrypted_loss << "," << r.encrypted_loss
        << "," << r.grad_norm;
    for (double t : r.theta) out << "," << t;
    out << "\n";
  }
  return out.str();
}

inline nlohmann::json trace_to_json(const std::vector<RoundMessage>& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : trace)
    arr.push_back(
        {{"direction", m.direction == RoundMessage::Direction::server_to_client
                           ? "server_to_client"
                           : "client_to_server"},
         {"client", m.client_id},
         {"kind", m.kind},
         {"payload", m.payload}});
  return arr;
}

}  // namespace qhe
