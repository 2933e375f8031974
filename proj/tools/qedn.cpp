// Command-line front end: simulate | path | keyrate.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qedn/error.hpp"
#include "qedn/key_rate.hpp"
#include "qedn/path_search.hpp"
#include "qedn/simulation.hpp"
#include "qedn/topology_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParse = 2;
constexpr int kSemantic = 3;
constexpr int kNoPath = 4;

int exit_code(const qedn::Error& e) {
  switch (e.kind()) {
    case qedn::ErrorKind::Parse:
    case qedn::ErrorKind::Invalid: return kParse;
    case qedn::ErrorKind::NoPath: return kNoPath;
    default: return kSemantic;
  }
}

void add_param_flags(CLI::App* cmd, qedn::QkdParams& p) {
  cmd->add_option("--bch", p.brightness_per_pair, "pair brightness per channel pair (counts/s)");
  cmd->add_option("--tcc", p.coincidence_window_s, "coincidence window (s)");
  cmd->add_option("--eta-tcc", p.eta_tcc, "coincidence-window detection efficiency");
  cmd->add_option("--epol", p.e_pol, "polarization error probability");
  cmd->add_option("--dcr", p.dark_count_cps, "dark count rate per user (counts/s)");
  cmd->add_option("--user-loss", p.user_loss_db, "internal loss per user (dB)");
  cmd->add_option("--fec", p.f_ec, "error-correction inefficiency");
}

std::string num(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement distribution network simulator"};
  app.require_subcommand(1);

  qedn::QkdParams params;

  std::string topo, requests, out_dir, mode = "dser";
  auto* sim = app.add_subcommand("simulate", "replay a request script");
  sim->add_option("topology", topo, "topology file")->required();
  sim->add_option("requests", requests, "request script (JSON lines)")->required();
  sim->add_option("-o,--out", out_dir, "output directory")->required();
  sim->add_option("--mode", mode, "dser or frfs")->check(CLI::IsMember({"dser", "frfs"}));
  add_param_flags(sim, params);

  std::string path_topo, user;
  auto* path = app.add_subcommand("path", "lowest-loss path from the source to a user");
  path->add_option("topology", path_topo, "topology file")->required();
  path->add_option("user", user, "user name or label")->required();

  double loss_a = 0.0, loss_b = 0.0;
  int channels = 1, curve_points = 200;
  double bmin = 1e5, bmax = 1e9;
  auto* keyrate = app.add_subcommand("keyrate", "secure key rate for one link budget");
  keyrate->add_option("loss_a", loss_a, "path loss to the first user (dB)")->required();
  keyrate->add_option("loss_b", loss_b, "path loss to the second user (dB)")->required();
  keyrate->add_option("channels", channels, "allocated channel pairs")->required()->check(CLI::PositiveNumber);
  keyrate->add_option("--points", curve_points, "points on the brightness curve")->check(CLI::Range(2, 100000));
  keyrate->add_option("--bmin", bmin, "lowest brightness on the curve");
  keyrate->add_option("--bmax", bmax, "highest brightness on the curve");
  add_param_flags(keyrate, params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    params.validate();
    if (*sim) {
      const qedn::Graph g = qedn::load_topology(topo);
      const auto script = qedn::load_script(requests);
      const auto reqs = qedn::resolve_script(g, script);
      const auto policy = mode == "frfs" ? qedn::Policy::Frfs : qedn::Policy::Dser;
      const qedn::RunResult run = qedn::run_requests(g, reqs, params, policy);
      qedn::write_run(run, out_dir);
      std::cout << run.events.size() << " events, steady-state key rate "
                << num(qedn::steady_state_rate(run), "%.4f") << " cps\n";
    } else if (*path) {
      const qedn::Graph g = qedn::load_topology(path_topo);
      auto id = g.find_node_or_label(user);
      if (!id) throw qedn::Error(qedn::ErrorKind::NotFound, "unknown user '" + user + "'");
      const qedn::PathRecord rec = qedn::path_search(g, g.source_id(), *id);
      std::cout << qedn::describe_path(g, rec) << "\n";
      std::cout << "path " << [&] {
        std::string s;
        for (int v : rec.path.flat()) s += (s.empty() ? "" : ",") + std::to_string(v);
        return s;
      }() << "\n";
      std::cout << "available " << qedn::format_channels(rec.available) << "\n";
      std::cout << "occupied " << qedn::format_channels(rec.occupied) << "\n";
    } else if (*keyrate) {
      const int n_max = 4;
      const double r = qedn::secure_key_rate(qedn::LinkBudget{loss_a, loss_b, channels}, params);
      std::cout << "rate_cps " << num(r, "%.4f") << "\n";
      std::cout << "n,rate_cps\n";
      for (int n = 1; n <= n_max; ++n) {
        std::cout << n << "," << num(qedn::secure_key_rate(qedn::LinkBudget{loss_a, loss_b, n}, params), "%.4f")
                  << "\n";
      }
      std::cout << "optimal " << qedn::optimal_channel_count(loss_a, loss_b, params, n_max) << "\n";
      std::cout << "brightness_cps,rate_cps\n";
      for (const auto& p : qedn::rate_curve(loss_a, loss_b, params, qedn::log_grid(bmin, bmax, curve_points))) {
        std::cout << num(p.brightness, "%.6e") << "," << num(p.rate_cps, "%.6f") << "\n";
      }
    }
  } catch (const qedn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSemantic;
  }
  return kOk;
}
