// Copyright 2026 The flowpredict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// flowpredict: trace generation, offline simulation, training, and the live
// controller / mock switch pair.
//
// Exit codes: 0 success, 1 data error, 2 usage error.
// FLOWPREDICT_LOG=quiet|info|debug sets stderr verbosity (default info).

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "flowpredict/controller.h"
#include "flowpredict/ffnn.h"
#include "flowpredict/gradcheck.h"
#include "flowpredict/mock_switch.h"
#include "flowpredict/simulator.h"
#include "flowpredict/tracegen.h"
#include "json.hpp"

namespace fp = flowpredict;

namespace {

enum class Verbosity { kQuiet, kInfo, kDebug };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Verbosity verbosity() {
  const char* v = std::getenv("FLOWPREDICT_LOG");
  if (v == nullptr) return Verbosity::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "0" || s == "error") return Verbosity::kQuiet;
  if (s == "debug" || s == "2") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

void info(const std::string& line) {
  if (verbosity() != Verbosity::kQuiet) std::cerr << line << '\n';
}

void debug(const std::string& line) {
  if (verbosity() == Verbosity::kDebug) std::cerr << line << '\n';
}

fp::encoder::BinBoundaries parse_bins(const std::string& text) {
  if (text.empty()) return {};
  try {
    return fp::encoder::BinBoundaries::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--bins: ") + e.what());
  }
}

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

Endpoint parse_endpoint(const std::string& text, const char* flag) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw UsageError(std::string(flag) + ": expected host:port");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  char* end = nullptr;
  const unsigned long p = std::strtoul(port.c_str(), &end, 10);
  if (port.empty() || *end != '\0' || p > 65535) {
    throw UsageError(std::string(flag) + ": bad port '" + port + "'");
  }
  ep.port = static_cast<std::uint16_t>(p);
  try {
    fp::ofwire::parse_ipv4(ep.host);
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + ": bad IPv4 address '" + ep.host + "'");
  }
  return ep;
}

struct NetOptions {
  std::vector<std::size_t> dims = fp::ffnn::NetworkConfig{}.dims;
  double dropout = 0.2;
  std::string loss = "cce";
  std::string model_in;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dims", dims, "layer sizes, input first")->delimiter(',')->capture_default_str();
    cmd->add_option("--dropout", dropout, "hidden-layer dropout rate")->capture_default_str();
    cmd->add_option("--loss", loss, "cce or mse")->capture_default_str();
    cmd->add_option("--model-in", model_in, "start from a saved model instead of a fresh net");
  }

  fp::ffnn::NetworkConfig config() const {
    fp::ffnn::NetworkConfig c;
    c.dims = dims;
    c.dropout = dropout;
    try {
      c.loss = fp::ffnn::parse_loss_mode(loss);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--loss: ") + e.what());
    }
    if (dims.size() < 2 || dims.front() != fp::encoder::kNumFeatures ||
        dims.back() != fp::encoder::kNumClasses) {
      throw UsageError("--dims must start with 16 and end with 5");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("--dropout must be in [0,1)");
    return c;
  }

  fp::ffnn::Network make(std::uint64_t seed) const {
    const fp::ffnn::NetworkConfig c = config();
    if (!model_in.empty()) return fp::ffnn::load_file(model_in);
    return fp::ffnn::Network::init(c, seed);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }

// ---- subcommands ----

struct GenTraceCmd {
  std::uint64_t flows = 100000;
  std::uint64_t seed = 0;
  std::string out;
  double signal = 0.95;
  std::vector<double> class_mix;
  std::string bins;
  double rate = 1000.0;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("gen-trace", "write a synthetic trace CSV");
    c->add_option("--flows", flows, "number of flows")->capture_default_str();
    c->add_option("--seed", seed, "generator seed")->required();
    c->add_option("--out", out, "output CSV path")->required();
    c->add_option("--signal", signal, "probability a flow carries its class signature")
        ->capture_default_str();
    c->add_option("--class-mix", class_mix, "five class probabilities")->delimiter(',')->expected(5);
    c->add_option("--bins", bins, "class size thresholds t1,t2,t3,t4");
    c->add_option("--rate", rate, "flow arrivals per second")->capture_default_str();
    c->callback([this] { run(); });
  }

  void run() {
    fp::tracegen::TraceConfig cfg;
    cfg.n_flows = flows;
    cfg.seed = seed;
    cfg.signal_strength = signal;
    cfg.arrivals_per_second = rate;
    if (!class_mix.empty()) std::copy(class_mix.begin(), class_mix.end(), cfg.class_mix.begin());
    cfg.sizes = fp::tracegen::sizes_for_bins(parse_bins(bins));
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto trace = fp::tracegen::generate(cfg);
    fp::tracegen::write_csv_file(trace, out);
    const auto hist = fp::tracegen::class_histogram(trace, parse_bins(bins));
    std::ostringstream h;
    for (std::size_t k = 0; k < hist.size(); ++k) h << (k ? "," : "") << hist[k];
    info("wrote " + std::to_string(trace.size()) + " flows to " + out + " (seed " +
         std::to_string(seed) + ", classes " + h.str() + ")");
  }
};

struct SimulateCmd {
  std::string trace;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  fp::sim::SimConfig sim;
  std::string bins;
  std::string model_out;
  NetOptions net;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("simulate", "windowed online training and admission speedup");
    c->add_option("--trace", trace, "trace CSV")->required();
    c->add_option("--seed", seed, "network init and shuffle seed")->required();
    c->add_option("--out-dir", out_dir, "directory for report.json and report.csv")
        ->capture_default_str();
    c->add_option("--window", sim.window_size, "flows per window")->capture_default_str();
    c->add_option("--test-size", sim.test_size, "held-out records at the trace head")
        ->capture_default_str();
    c->add_option("--epochs", sim.epochs, "epochs per window")->capture_default_str();
    c->add_option("--capacity-frac", sim.capacity_frac, "flow-table size over window size")
        ->capture_default_str();
    c->add_option("--bins", bins, "class size thresholds t1,t2,t3,t4");
    c->add_option("--model-out", model_out, "save the trained network here");
    net.add_to(c);
    c->callback([this] { run(); });
  }

  void run() {
    sim.seed = seed;
    sim.bins = parse_bins(bins);
    if (sim.window_size == 0) throw UsageError("--window must be >= 1");
    if (!(sim.capacity_frac >= 0.0 && sim.capacity_frac <= 1.0)) {
      throw UsageError("--capacity-frac must be in [0,1]");
    }
    net.config();
    if (!std::filesystem::is_directory(out_dir)) {
      throw UsageError("--out-dir: not a directory: " + out_dir);
    }
    const auto records = fp::tracegen::read_csv_file(trace);
    fp::ffnn::Network nn = net.make(seed);
    debug("simulating " + std::to_string(records.size()) + " records");
    const fp::sim::SimReport report = fp::sim::run_online(records, nn, sim);
    const std::filesystem::path dir(out_dir);
    write_text((dir / "report.json").string(), fp::sim::to_json(report));
    std::ostringstream csv;
    fp::sim::write_report_csv(report, csv);
    write_text((dir / "report.csv").string(), csv.str());
    if (!model_out.empty()) fp::ffnn::save_file(nn, model_out);
    std::cout << fp::sim::to_table(report);
    info("wrote " + (dir / "report.json").string() + " and " + (dir / "report.csv").string());
  }
};

struct TrainCmd {
  std::string trace;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t epochs = 10;
  std::string bins;
  NetOptions net;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("train", "train a model on a whole trace");
    c->add_option("--trace", trace, "trace CSV")->required();
    c->add_option("--seed", seed, "network init and shuffle seed")->required();
    c->add_option("--out", out, "model output path")->required();
    c->add_option("--epochs", epochs, "passes over the trace")->capture_default_str();
    c->add_option("--bins", bins, "class size thresholds t1,t2,t3,t4");
    net.add_to(c);
    c->callback([this] { run(); });
  }

  void run() {
    const fp::encoder::BinBoundaries b = parse_bins(bins);
    net.config();
    const auto records = fp::tracegen::read_csv_file(trace);
    if (records.empty()) throw std::runtime_error("trace is empty: " + trace);
    fp::ffnn::Network nn = net.make(seed);
    const auto samples = fp::sim::make_samples(records, b);
    std::mt19937_64 seeds(seed);
    for (std::size_t e = 0; e < epochs; ++e) {
      const double l = fp::ffnn::train_epoch(nn, samples, seeds());
      std::printf("epoch %zu loss %.6f\n", e + 1, l);
    }
    std::printf("training accuracy %.4f\n", fp::sim::accuracy(nn, samples));
    fp::ffnn::save_file(nn, out);
    info("wrote model to " + out);
  }
};

struct ServeCmd {
  std::string listen = "127.0.0.1:6653";
  std::uint64_t seed = 0;
  std::string bins;
  std::uint16_t idle = 10;
  std::uint16_t hard = 30;
  std::size_t train_trigger = 256;
  std::vector<std::uint32_t> ports = {1, 2};
  std::string checkpoint;
  std::string port_file;
  std::string log_file;
  bool once = false;
  NetOptions net;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("serve", "run the OpenFlow controller");
    c->add_option("--listen", listen, "host:port (port 0 picks one)")->capture_default_str();
    c->add_option("--seed", seed, "network init and shuffle seed")->capture_default_str();
    c->add_option("--bins", bins, "class size thresholds t1,t2,t3,t4");
    c->add_option("--idle-timeout", idle, "installed flow idle timeout, seconds")
        ->capture_default_str();
    c->add_option("--hard-timeout", hard, "installed flow hard timeout, seconds")
        ->capture_default_str();
    c->add_option("--train-trigger", train_trigger, "removals per training flush")
        ->capture_default_str();
    c->add_option("--ports", ports, "output ports, chosen by 5-tuple hash")->delimiter(',');
    c->add_option("--checkpoint", checkpoint, "save the model here on shutdown");
    c->add_option("--port-file", port_file, "write the bound port to this file");
    c->add_option("--log-file", log_file, "JSON event log destination (default stderr)");
    c->add_flag("--once", once, "exit after the first switch disconnects");
    net.add_to(c);
    c->callback([this] { run(); });
  }

  void run() {
    const Endpoint ep = parse_endpoint(listen, "--listen");
    fp::controller::ControllerConfig cfg;
    cfg.listen_host = ep.host;
    cfg.listen_port = ep.port;
    cfg.idle_timeout_s = idle;
    cfg.hard_timeout_s = hard;
    cfg.bins = parse_bins(bins);
    cfg.train_trigger = train_trigger;
    cfg.output_ports = ports;
    cfg.model_path = checkpoint;
    cfg.seed = seed;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    net.config();

    std::ofstream log_out;
    std::ostream* log_stream = nullptr;
    if (!log_file.empty()) {
      log_out.open(log_file);
      if (!log_out) throw std::runtime_error("cannot write " + log_file);
      log_stream = &log_out;
    } else if (verbosity() != Verbosity::kQuiet) {
      log_stream = &std::cerr;
    }

    fp::controller::Controller ctl(cfg, net.make(seed), fp::controller::EventLog(log_stream));
    const std::uint16_t port = ctl.bind();
    if (!port_file.empty()) write_text(port_file, std::to_string(port) + "\n");
    std::printf("listening %s:%u\n", ep.host.c_str(), port);
    std::fflush(stdout);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    ctl.run(g_stop, once);
    const auto& st = ctl.core().stats();
    std::printf("packet_ins %llu flow_mods %llu flow_removed %llu samples %llu\n",
                static_cast<unsigned long long>(st.packet_ins),
                static_cast<unsigned long long>(st.flow_mods),
                static_cast<unsigned long long>(st.flow_removed),
                static_cast<unsigned long long>(st.samples_total));
  }
};

struct MockSwitchCmd {
  std::string trace;
  std::string connect = "127.0.0.1:6653";
  std::size_t table_capacity = fp::controller::MockSwitchConfig{}.table_capacity;
  std::string transcript;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("mock-switch", "replay a trace against a controller");
    c->add_option("--trace", trace, "trace CSV")->required();
    c->add_option("--connect", connect, "controller host:port")->capture_default_str();
    c->add_option("--table-capacity", table_capacity, "local flow-table size")
        ->capture_default_str();
    c->add_option("--transcript", transcript, "write the message transcript here");
    c->callback([this] { run(); });
  }

  void run() {
    const Endpoint ep = parse_endpoint(connect, "--connect");
    if (table_capacity == 0) throw UsageError("--table-capacity must be >= 1");
    const auto records = fp::tracegen::read_csv_file(trace);
    auto channel = fp::controller::connect_tcp(ep.host, ep.port);
    fp::controller::MockSwitchConfig cfg;
    cfg.table_capacity = table_capacity;
    fp::controller::Transcript lines;
    const auto r = fp::controller::run_mock_switch(*channel, records, cfg,
                                                   transcript.empty() ? nullptr : &lines);
    channel.reset();
    if (!transcript.empty()) {
      std::ostringstream t;
      for (const auto& l : lines) t << l << '\n';
      write_text(transcript, t.str());
    }
    nlohmann::json j{{"completed", r.completed},
                     {"packet_ins_sent", r.packet_ins_sent},
                     {"flow_mods_received", r.flow_mods_received},
                     {"flows_installed", r.flows_installed},
                     {"install_failures", r.install_failures},
                     {"flow_removed_sent", r.flow_removed_sent},
                     {"expirations", r.expirations},
                     {"evictions", r.evictions},
                     {"errors_received", r.errors_received}};
    if (!r.completed) j["error"] = r.error;
    if (!transcript.empty()) {
      char digest[32];
      std::snprintf(digest, sizeof digest, "%016llx",
                    static_cast<unsigned long long>(fp::controller::transcript_digest(lines)));
      j["transcript_digest"] = digest;
    }
    std::cout << j.dump(2) << '\n';
    if (!r.completed) throw std::runtime_error("run aborted: " + r.error);
  }
};

struct GradCheckCmd {
  std::size_t count = 100;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("grad-check", "compare backprop with finite differences");
    c->add_option("--count", count, "random nets per loss mode")->capture_default_str();
    c->add_option("--seed", seed, "draw seed")->capture_default_str();
    c->callback([this] { run(); });
  }

  void run() {
    if (count == 0) throw UsageError("--count must be >= 1");
    const auto r = fp::ffnn::run_gradient_check(count, seed);
    std::printf("seed %llu trials %zu parameters %zu\n", static_cast<unsigned long long>(seed),
                r.trials, r.parameters);
    std::printf("max relative error mse %.3e cce %.3e\n", r.max_rel_error_mse,
                r.max_rel_error_cce);
    const bool ok = r.max_rel_error() < fp::ffnn::kGradCheckTolerance;
    std::printf("max relative error %.3e %s %.0e\n", r.max_rel_error(), ok ? "<" : ">=",
                fp::ffnn::kGradCheckTolerance);
    if (!ok) throw std::runtime_error("gradient check failed");
  }
};

struct ReportCmd {
  std::string in;
  bool csv = false;

  void add(CLI::App& app) {
    CLI::App* c = app.add_subcommand("report", "render a report.json");
    c->add_option("--in", in, "report.json path")->required();
    c->add_flag("--csv", csv, "print per-window CSV instead of a table");
    c->callback([this] { run(); });
  }

  void run() {
    const fp::sim::SimReport r = fp::sim::from_json(read_text(in));
    if (csv) {
      fp::sim::write_report_csv(r, std::cout);
    } else {
      std::cout << fp::sim::to_table(r);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-size prediction for flow-table admission"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override it");
  app.set_version_flag("--version", "flowpredict 1.0.0");

  GenTraceCmd gen;
  SimulateCmd simulate;
  TrainCmd train;
  ServeCmd serve;
  MockSwitchCmd mock;
  GradCheckCmd grad;
  ReportCmd report;
  gen.add(app);
  simulate.add(app);
  train.add(app);
  serve.add(app);
  mock.add(app);
  grad.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
