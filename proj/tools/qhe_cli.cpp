// Command-line front end: reproducible runs over the protocol demo, gate
// synthesis, transpilation, reverse training, private inference, and the
// Pauli-stripping privacy audit.  Every file-writing command drops a
// run-manifest JSON (seed + config hash + versions) beside its output.
//
// Exit codes: 0 success, 1 usage, 2 contract violation, 3 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qhe/circuit_io.hpp"
#include "qhe/dataset.hpp"
#include "qhe/encoding.hpp"
#include "qhe/federated.hpp"
#include "qhe/inference.hpp"
#include "qhe/model.hpp"
#include "qhe/protocol.hpp"
#include "qhe/rz_synth.hpp"
#include "qhe/transpile.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kArtifactFormat = 1;

using nlohmann::json;

// ---------------------------------------------------------------------------
// Small file / manifest helpers

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Canonical config string: sorted key=value lines.  Hash goes into the
// manifest so a run can be matched to its exact configuration.
std::string canonical_config(const std::map<std::string, std::string>& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

void write_manifest(const std::string& out_path, std::uint64_t seed,
                    const std::map<std::string, std::string>& config) {
  std::ostringstream hash;
  hash << "0x" << std::hex << fnv1a_hash(canonical_config(config));
  const json manifest = {
      {"seed", seed},
      {"config_hash", hash.str()},
      {"config", config},
      {"versions",
       {{"qhe", kToolVersion}, {"artifact_format", kArtifactFormat}}}};
  write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

void emit(const std::string& out_path, const json& payload) {
  if (out_path.empty())
    std::cout << payload.dump(2) << "\n";
  else
    write_file(out_path, payload.dump(2) + "\n");
}

std::string fmt_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Flat TOML subset: `key = value` lines, # comments, quoted strings.

std::map<std::string, std::string> parse_flat_toml(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    std::string clean;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      clean += c;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    clean = trim(clean);
    if (clean.empty()) continue;
    if (clean[0] == '[')
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": sections are not supported");
    const auto eq = clean.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(clean.substr(0, eq));
    std::string val = trim(clean.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size())
    throw std::invalid_argument("config: key '" + key +
                                "' expects an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size())
    throw std::invalid_argument("config: key '" + key +
                                "' expects a number, got '" + v + "'");
  return out;
}

// ---------------------------------------------------------------------------
// demo

qhe::Circuit random_demo_circuit(int n, int t_gates, qhe::Rng& rng) {
  const int n_clifford = 6 * n;
  const int total = n_clifford + t_gates;
  std::vector<bool> is_t(static_cast<std::size_t>(total), false);
  for (int placed = 0, i = 0; i < total && placed < t_gates; ++i) {
    // Reservoir-style exact placement of t_gates T slots.
    if (rng.index(static_cast<std::uint64_t>(total - i)) <
        static_cast<std::uint64_t>(t_gates - placed)) {
      is_t[static_cast<std::size_t>(i)] = true;
      ++placed;
    }
  }
  qhe::Circuit c(n);
  for (int i = 0; i < total; ++i) {
    const int q = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    if (is_t[static_cast<std::size_t>(i)]) {
      c.append(qhe::Gate::t(q));
      continue;
    }
    switch (rng.index(n > 1 ? 6 : 5)) {
      case 0: c.append(qhe::Gate::x(q)); break;
      case 1: c.append(qhe::Gate::z(q)); break;
      case 2: c.append(qhe::Gate::h(q)); break;
      case 3: c.append(qhe::Gate::s(q)); break;
      case 4: c.append(qhe::Gate::h(q)); break;
      default: {
        int t = static_cast<int>(rng.index(static_cast<std::uint64_t>(n - 1)));
        if (t >= q) ++t;
        c.append(qhe::Gate::cnot(q, t));
      }
    }
  }
  return c;
}

int cmd_demo(int qubits, int t_gates, std::uint64_t seed, int shots,
             const std::string& out_path) {
  qhe::Rng rng(seed);
  const qhe::Circuit circuit = random_demo_circuit(qubits, t_gates, rng);

  // Self-check: one full protocol pass, decrypted state against plaintext.
  qhe::StateVector plain(qubits);
  qhe::StateVector want = plain;
  want.apply(circuit);

  qhe::PauliKey key = qhe::keygen(qubits, rng);
  qhe::StateVector enc = plain;
  qhe::qotp_apply(enc, key);
  qhe::ClientKeyTracker tracker(key);
  qhe::EvalResult res = qhe::server_evaluate(circuit, enc, tracker, rng);
  const qhe::PauliKey replayed =
      qhe::replay_key(res.program, key, res.bell);
  qhe::StateVector got =
      qhe::extract_logical_state(res.enc_final, res.wire, qubits);
  qhe::qotp_apply(got, replayed);
  const double fidelity = got.fidelity(want);
  const bool replay_ok =
      replayed.x == tracker.key().x && replayed.z == tracker.key().z;
  const bool pass = fidelity >= 1.0 - 1e-10 && replay_ok;

  // Sampled counts, fresh key per shot.
  std::vector<int> readout(static_cast<std::size_t>(qubits));
  for (int q = 0; q < qubits; ++q) readout[static_cast<std::size_t>(q)] = q;
  const qhe::ProtocolTranscript tr = qhe::run_protocol_grouped(
      circuit, plain, readout, static_cast<std::size_t>(shots), 1, rng);
  std::map<std::string, int> enc_counts, dec_counts;
  for (const auto& g : tr.groups) {
    for (const auto& b : g.encrypted) ++enc_counts[b];
    for (const auto& b : g.decrypted) ++dec_counts[b];
  }

  const json payload = {
      {"qubits", qubits},
      {"t_gates", t_gates},
      {"seed", seed},
      {"shots", shots},
      {"circuit", qhe::circuit_to_json(circuit)},
      {"program", qhe::program_to_json(res.program)},
      {"bell_outcome_count", res.bell.size()},
      {"counts", {{"encrypted", enc_counts}, {"decrypted", dec_counts}}},
      {"self_check",
       {{"fidelity", fidelity}, {"replay_ok", replay_ok}, {"pass", pass}}}};
  emit(out_path, payload);
  if (!out_path.empty())
    write_manifest(out_path, seed,
                   {{"command", "demo"},
                    {"qubits", std::to_string(qubits)},
                    {"t_gates", std::to_string(t_gates)},
                    {"shots", std::to_string(shots)},
                    {"seed", std::to_string(seed)}});
  return pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(double theta, double epsilon, int max_depth,
              const std::string& out_path) {
  qhe::SynthConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_search_depth = max_depth;
  const qhe::SynthResult r = qhe::synthesize_rz(theta, cfg);
  json word = json::array();
  for (qhe::GateKind k : r.word) word.push_back(qhe::kind_name(k));
  emit(out_path, json{{"theta", theta},
                      {"epsilon", epsilon},
                      {"word", std::move(word)},
                      {"length", r.word.size()},
                      {"t_count", r.t_count},
                      {"distance", r.dist},
                      {"search_length", r.search_length}});
  if (!out_path.empty())
    write_manifest(out_path, 0,
                   {{"command", "synth"},
                    {"theta", fmt_double(theta)},
                    {"epsilon", fmt_double(epsilon)},
                    {"max_depth", std::to_string(max_depth)}});
  return 0;
}

// ---------------------------------------------------------------------------
// transpile

int cmd_transpile(const std::string& in_path, double budget,
                  const std::string& out_path,
                  const std::string& report_path) {
  const qhe::Circuit circuit =
      qhe::circuit_from_json(json::parse(read_file(in_path)));
  const auto [compiled, report] = qhe::transpile(circuit, budget);
  write_file(out_path,
             qhe::circuit_to_json(compiled).dump(2) + "\n");
  const json rep = {{"r_z_count", report.r_z_count},
                    {"t_count", report.t_count},
                    {"per_gate_epsilon", report.per_gate_epsilon},
                    {"total_budget", report.total_budget},
                    {"per_rotation_t", report.per_rotation_t}};
  write_file(report_path.empty() ? out_path + ".report.json" : report_path,
             rep.dump(2) + "\n");
  write_manifest(out_path, 0,
                 {{"command", "transpile"},
                  {"in", in_path},
                  {"budget", fmt_double(budget)}});
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainSettings {
  qhe::TrainConfig cfg;
  int qubits = 2;
  std::string data = "blobs";
  int pca_components = 2;
  double train_ratio = 0.8;
  long blobs_per_class = 40;
  double blobs_sigma = 0.25;
};

std::map<std::string, std::string> settings_to_map(const TrainSettings& s) {
  return {{"command", "train"},
          {"qubits", std::to_string(s.qubits)},
          {"iterations", std::to_string(s.cfg.iterations)},
          {"batch_per_client", std::to_string(s.cfg.batch_per_client)},
          {"shots", std::to_string(s.cfg.shots)},
          {"alpha", fmt_double(s.cfg.alpha)},
          {"beta1", fmt_double(s.cfg.beta1)},
          {"beta2", fmt_double(s.cfg.beta2)},
          {"eps_adam", fmt_double(s.cfg.eps_adam)},
          {"epsilon_budget", fmt_double(s.cfg.epsilon_budget)},
          {"seed", std::to_string(s.cfg.seed)},
          {"encoding", s.cfg.encoding},
          {"shots_per_key", std::to_string(s.cfg.shots_per_key)},
          {"exact", s.cfg.exact ? "true" : "false"},
          {"data", s.data},
          {"pca_components", std::to_string(s.pca_components)},
          {"train_ratio", fmt_double(s.train_ratio)},
          {"blobs_per_class", std::to_string(s.blobs_per_class)},
          {"blobs_sigma", fmt_double(s.blobs_sigma)}};
}

void apply_train_config(TrainSettings& s,
                        const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "qubits") s.qubits = static_cast<int>(to_long(key, val));
    else if (key == "iterations") s.cfg.iterations = static_cast<int>(to_long(key, val));
    else if (key == "batch_per_client") s.cfg.batch_per_client = static_cast<int>(to_long(key, val));
    else if (key == "shots") s.cfg.shots = static_cast<int>(to_long(key, val));
    else if (key == "alpha") s.cfg.alpha = to_double(key, val);
    else if (key == "beta1") s.cfg.beta1 = to_double(key, val);
    else if (key == "beta2") s.cfg.beta2 = to_double(key, val);
    else if (key == "eps_adam") s.cfg.eps_adam = to_double(key, val);
    else if (key == "epsilon_budget") s.cfg.epsilon_budget = to_double(key, val);
    else if (key == "seed") s.cfg.seed = static_cast<std::uint64_t>(to_long(key, val));
    else if (key == "encoding") s.cfg.encoding = val;
    else if (key == "shots_per_key") s.cfg.shots_per_key = static_cast<int>(to_long(key, val));
    else if (key == "exact") {
      if (val != "true" && val != "false")
        throw std::invalid_argument("config: key 'exact' expects true/false");
      s.cfg.exact = (val == "true");
    }
    else if (key == "data") s.data = val;
    else if (key == "pca_components") s.pca_components = static_cast<int>(to_long(key, val));
    else if (key == "train_ratio") s.train_ratio = to_double(key, val);
    else if (key == "blobs_per_class") s.blobs_per_class = to_long(key, val);
    else if (key == "blobs_sigma") s.blobs_sigma = to_double(key, val);
    else
      throw std::invalid_argument("train config: unknown key '" + key + "'");
  }
}

std::pair<qhe::Dataset, qhe::Dataset> prepare_split(
    const std::string& data, const std::string& encoding, int qubits,
    int pca_components, double train_ratio, long blobs_per_class,
    double blobs_sigma, std::uint64_t seed) {
  constexpr double kPi = std::numbers::pi;
  qhe::Dataset ds;
  if (data == "blobs") {
    ds = qhe::synth_blobs(static_cast<std::size_t>(blobs_per_class),
                          {kPi / 4, kPi / 4}, {3 * kPi / 4, 3 * kPi / 4},
                          blobs_sigma, seed);
  } else {
    ds = qhe::load_csv(data);
    if (encoding == "qubit") {
      if (pca_components != qubits)
        throw std::invalid_argument(
            "qubit encoding needs pca_components == qubits");
      const qhe::PcaModel pca = qhe::pca_fit(ds.features, static_cast<std::size_t>(pca_components));
      ds.features = qhe::normalize_minmax(qhe::pca_transform(pca, ds.features));
    }
  }
  return qhe::split(ds, train_ratio, seed);
}

int cmd_train(const std::string& config_path, const std::string& out_path,
              const std::string& trace_path, const std::string& model_path,
              const std::map<std::string, std::string>& overrides) {
  TrainSettings s;
  s.cfg.iterations = 300;
  if (!config_path.empty())
    apply_train_config(s, parse_flat_toml(read_file(config_path)));
  apply_train_config(s, overrides);  // flags win over file values

  const auto [train, test] = prepare_split(
      s.data, s.cfg.encoding, s.qubits, s.pca_components, s.train_ratio,
      s.blobs_per_class, s.blobs_sigma, s.cfg.seed);
  const std::vector<qhe::ClientDataset> clients = {
      qhe::client_from_dataset(qhe::filter_label(train, 0), "provider0"),
      qhe::client_from_dataset(qhe::filter_label(train, 1), "provider1")};

  const qhe::AnsatzSpec spec = qhe::build_ansatz(s.qubits);
  std::vector<qhe::RoundMessage> trace;
  const auto [theta, log] = qhe::run_reverse_training(
      spec, clients, s.cfg, {}, trace_path.empty() ? nullptr : &trace);

  write_file(out_path, qhe::log_to_csv(log));
  if (!trace_path.empty())
    write_file(trace_path, qhe::trace_to_json(trace).dump(2) + "\n");
  if (!model_path.empty()) {
    qhe::Model model;
    model.n_qubits = s.qubits;
    model.encoding = s.cfg.encoding;
    model.theta = theta;
    model.readout = spec.readout_qubit;
    write_file(model_path, qhe::model_to_json(model).dump(2) + "\n");
  }
  write_manifest(out_path, s.cfg.seed, settings_to_map(s));

  const qhe::Circuit compiled =
      qhe::transpile(qhe::bind_ansatz(spec, theta), s.cfg.epsilon_budget)
          .first;
  json summary = {
      {"iterations", s.cfg.iterations},
      {"final_test_accuracy",
       qhe::dataset_accuracy(compiled, spec.readout_qubit, test,
                             s.cfg.encoding)},
      {"log", out_path}};
  if (!log.records.empty()) {
    const std::size_t n = log.records.size();
    const std::size_t w = std::min<std::size_t>(20, n);
    double first = 0.0, last = 0.0, enc = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      first += log.records[i].decrypted_loss / static_cast<double>(w);
      last += log.records[n - 1 - i].decrypted_loss / static_cast<double>(w);
    }
    for (const auto& r : log.records)
      enc += r.encrypted_loss / static_cast<double>(n);
    summary["decrypted_loss_first_window"] = first;
    summary["decrypted_loss_last_window"] = last;
    summary["encrypted_loss_mean"] = enc;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// infer

int cmd_infer(const std::string& model_path, const std::string& data_path,
              int samples, int shots, int shots_per_key, double budget,
              std::uint64_t seed, const std::string& out_path) {
  const qhe::Model model =
      qhe::model_from_json(json::parse(read_file(model_path)));
  const qhe::Dataset ds = qhe::load_csv(data_path);
  if (samples < 1 || static_cast<std::size_t>(samples) > ds.size())
    throw std::invalid_argument("infer: --samples outside the dataset size");

  qhe::InferOptions opt;
  opt.epsilon_budget = budget;
  opt.shots = static_cast<std::size_t>(shots);
  opt.shots_per_key = static_cast<std::size_t>(shots_per_key);
  qhe::Rng rng(seed);

  json rows = json::array();
  for (int i = 0; i < samples; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const qhe::InferenceResult r = qhe::private_infer(
        ds.features[idx], model, opt, rng, ds.labels[idx]);
    rows.push_back({{"index", i},
                    {"encrypted_prob", r.encrypted_prob},
                    {"decrypted_prob", r.decrypted_prob},
                    {"predicted_label", r.predicted_label},
                    {"true_label", r.true_label}});
  }
  emit(out_path, json{{"model", model_path}, {"results", std::move(rows)}});
  if (!out_path.empty())
    write_manifest(out_path, seed,
                   {{"command", "infer"},
                    {"model", model_path},
                    {"data", data_path},
                    {"samples", std::to_string(samples)},
                    {"shots", std::to_string(shots)},
                    {"shots_per_key", std::to_string(shots_per_key)},
                    {"epsilon_budget", fmt_double(budget)},
                    {"seed", std::to_string(seed)}});
  return 0;
}

// ---------------------------------------------------------------------------
// audit

int cmd_audit(int instances, const std::string& encoding,
              const std::string& data_path, int qubits, int iterations,
              double alpha, double budget, double train_ratio,
              std::uint64_t seed, const std::string& out_path) {
  qhe::Dataset ds = qhe::load_csv(data_path);
  if (encoding == "qubit") {
    const qhe::PcaModel pca =
        qhe::pca_fit(ds.features, static_cast<std::size_t>(qubits));
    ds.features = qhe::normalize_minmax(qhe::pca_transform(pca, ds.features));
  }
  const auto [train, test] = qhe::split(ds, train_ratio, seed);

  qhe::AuditConfig cfg;
  cfg.n_qubits = qubits;
  cfg.iterations = iterations;
  cfg.alpha = alpha;
  cfg.epsilon_budget = budget;
  cfg.seed = seed;
  const auto records =
      qhe::privacy_audit(instances, encoding, train, test, cfg);
  write_file(out_path, qhe::audit_to_csv(records));
  write_manifest(out_path, seed,
                 {{"command", "audit"},
                  {"instances", std::to_string(instances)},
                  {"encoding", encoding},
                  {"data", data_path},
                  {"qubits", std::to_string(qubits)},
                  {"iterations", std::to_string(iterations)},
                  {"alpha", fmt_double(alpha)},
                  {"epsilon_budget", fmt_double(budget)},
                  {"train_ratio", fmt_double(train_ratio)},
                  {"seed", std::to_string(seed)}});

  int failed = 0, selected = -1;
  for (const auto& r : records) {
    failed += r.failed;
    if (r.selected) selected = r.instance;
  }
  std::cout << json{{"instances", instances},
                    {"failed", failed},
                    {"selected_instance", selected},
                    {"table", out_path}}
                   .dump(2)
            << "\n";
  return 0;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const qhe::SynthExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {  // invalid_argument, out_of_range...
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perfectly secure delegated quantum computation: protocol "
               "demo, Clifford+T synthesis, encrypted training, private "
               "inference, and the circuit-privacy audit."};
  app.require_subcommand(1);

  // demo
  auto* demo = app.add_subcommand(
      "demo", "Random Clifford+T circuit through the full protocol with a "
              "decryption self-check");
  int demo_qubits = 2, demo_t = 3, demo_shots = 256;
  std::uint64_t demo_seed = 1;
  std::string demo_out;
  demo->add_option("--qubits", demo_qubits, "logical qubits")
      ->check(CLI::Range(1, 10));
  demo->add_option("--t-gates", demo_t, "number of T gates")
      ->check(CLI::Range(0, 64));
  demo->add_option("--seed", demo_seed, "master seed");
  demo->add_option("--shots", demo_shots, "sampled shots")
      ->check(CLI::Range(1, 1 << 20));
  demo->add_option("--out", demo_out, "write the JSON transcript here");

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Approximate R_Z(theta) over {H, S, T, Z}");
  double synth_theta = 0.0, synth_eps = 1e-2;
  int synth_depth = 40;
  std::string synth_out;
  synth->add_option("--theta", synth_theta, "rotation angle (radians)")
      ->required();
  synth->add_option("--epsilon", synth_eps, "accuracy target");
  synth->add_option("--max-depth", synth_depth,
                    "search depth cap per meet-in-the-middle half");
  synth->add_option("--out", synth_out, "write the JSON result here");

  // transpile
  auto* transpile = app.add_subcommand(
      "transpile", "Rewrite a circuit JSON into Clifford+T under a budget");
  std::string tr_in, tr_out, tr_report;
  double tr_budget = 0.1;
  transpile->add_option("--in", tr_in, "input circuit JSON")->required();
  transpile->add_option("--budget", tr_budget, "total accuracy budget")
      ->required();
  transpile->add_option("--out", tr_out, "output circuit JSON")->required();
  transpile->add_option("--report", tr_report,
                        "report path (default: <out>.report.json)");

  // train
  auto* train = app.add_subcommand(
      "train", "Reverse delegated training over encrypted providers");
  std::string train_config, train_out = "log.csv", train_trace, train_model;
  long ov_iterations = -1, ov_shots = -1, ov_spk = -1, ov_seed = -1;
  double ov_alpha = -1.0, ov_budget = -1.0;
  std::string ov_data;
  train->add_option("--config", train_config, "flat TOML config");
  train->add_option("--out", train_out, "training log CSV path");
  train->add_option("--trace", train_trace, "round-message JSON transcript");
  train->add_option("--model-out", train_model, "trained model JSON path");
  train->add_option("--iterations", ov_iterations, "override: iterations");
  train->add_option("--shots", ov_shots, "override: shots per evaluation");
  train->add_option("--shots-per-key", ov_spk, "override: key reuse");
  train->add_option("--seed", ov_seed, "override: master seed");
  train->add_option("--alpha", ov_alpha, "override: learning rate");
  train->add_option("--epsilon-budget", ov_budget,
                    "override: transpile budget");
  train->add_option("--data", ov_data, "override: 'blobs' or a CSV path");
  bool ov_exact = false;
  train->add_flag("--exact", ov_exact,
                  "override: plain simulator, no encryption");

  // infer
  auto* infer = app.add_subcommand(
      "infer", "Private inference on a trained model over encrypted inputs");
  std::string inf_model, inf_data, inf_out;
  int inf_samples = 5, inf_shots = 1024, inf_spk = 1;
  double inf_budget = 0.1;
  std::uint64_t inf_seed = 1;
  infer->add_option("--model", inf_model, "model JSON")->required();
  infer->add_option("--data", inf_data, "feature CSV")->required();
  infer->add_option("--samples", inf_samples, "how many rows to infer")
      ->check(CLI::PositiveNumber);
  infer->add_option("--shots", inf_shots, "shots per sample")
      ->check(CLI::PositiveNumber);
  infer->add_option("--shots-per-key", inf_spk, "key reuse interval")
      ->check(CLI::PositiveNumber);
  infer->add_option("--epsilon-budget", inf_budget, "transpile budget");
  infer->add_option("--seed", inf_seed, "master seed");
  infer->add_option("--out", inf_out, "results JSON path");

  // audit
  auto* audit = app.add_subcommand(
      "audit", "Train fresh instances and measure the Pauli-stripping "
               "accuracy drop");
  int au_instances = 10, au_qubits = 8, au_iterations = 150;
  double au_alpha = 0.01, au_budget = 0.1, au_ratio = 0.8;
  std::uint64_t au_seed = 1;
  std::string au_encoding = "amplitude", au_data = "data/digits01.csv",
              au_out = "table.csv";
  audit->add_option("--instances", au_instances, "models to train")
      ->check(CLI::PositiveNumber);
  audit->add_option("--encoding", au_encoding, "amplitude or qubit");
  audit->add_option("--data", au_data, "source CSV");
  audit->add_option("--qubits", au_qubits, "ansatz width");
  audit->add_option("--iterations", au_iterations, "training iterations");
  audit->add_option("--alpha", au_alpha, "learning rate");
  audit->add_option("--epsilon-budget", au_budget, "transpile budget");
  audit->add_option("--train-ratio", au_ratio, "train split fraction");
  audit->add_option("--seed", au_seed, "master seed");
  audit->add_option("--out", au_out, "audit table CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors are exit 1, uniformly
  }

  if (demo->parsed())
    return guarded([&] {
      return cmd_demo(demo_qubits, demo_t, demo_seed, demo_shots, demo_out);
    });
  if (synth->parsed())
    return guarded(
        [&] { return cmd_synth(synth_theta, synth_eps, synth_depth, synth_out); });
  if (transpile->parsed())
    return guarded(
        [&] { return cmd_transpile(tr_in, tr_budget, tr_out, tr_report); });
  if (train->parsed())
    return guarded([&] {
      std::map<std::string, std::string> overrides;
      if (ov_iterations >= 0)
        overrides["iterations"] = std::to_string(ov_iterations);
      if (ov_shots >= 0) overrides["shots"] = std::to_string(ov_shots);
      if (ov_spk >= 0) overrides["shots_per_key"] = std::to_string(ov_spk);
      if (ov_seed >= 0) overrides["seed"] = std::to_string(ov_seed);
      if (ov_alpha >= 0) overrides["alpha"] = fmt_double(ov_alpha);
      if (ov_budget >= 0) overrides["epsilon_budget"] = fmt_double(ov_budget);
      if (!ov_data.empty()) overrides["data"] = ov_data;
      if (ov_exact) overrides["exact"] = "true";
      return cmd_train(train_config, train_out, train_trace, train_model,
                       overrides);
    });
  if (infer->parsed())
    return guarded([&] {
      return cmd_infer(inf_model, inf_data, inf_samples, inf_shots, inf_spk,
                       inf_budget, inf_seed, inf_out);
    });
  if (audit->parsed())
    return guarded([&] {
      return cmd_audit(au_instances, au_encoding, au_data, au_qubits,
                       au_iterations, au_alpha, au_budget, au_ratio, au_seed,
                       au_out);
    });
  return 1;
}
