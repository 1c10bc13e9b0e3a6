// halfline: batch front end for the exact ASEP / delta-Bose evaluators.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "halfline/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw halfline::InvalidArgument(std::string("bad number '") + item + "' in " + flag);
    }
  }
  if (out.empty()) throw halfline::InvalidArgument(std::string(flag) + " needs a comma-separated list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using halfline::cli::json;
  namespace hc = halfline::cli;

  CLI::App app{"Exact transition probabilities and propagators on the half-line"};
  std::string command, y_text, x_text, radii_text, config_path;
  double p = 0, c = 0, t = 0, tau = 0, tol = 0;
  long max_points = 0, trials = 0;
  std::uint64_t seed = 0;
  int window = 0, threads = 0, n = 0;
  std::string geometry, out, format;
  bool deterministic = false;

  std::string names;
  for (const auto& s : hc::commands()) names += (names.empty() ? "" : ", ") + s;
  app.add_option("command", command, "One of: " + names);
  auto* o_p = app.add_option("--p", p, "ASEP right rate (q = 1 - p)");
  auto* o_c = app.add_option("--c", c, "Bose coupling c >= 0");
  auto* o_y = app.add_option("--Y", y_text, "Initial configuration, comma-separated");
  auto* o_x = app.add_option("--X", x_text, "Final configuration, comma-separated");
  auto* o_t = app.add_option("--t", t, "Time (ASEP)");
  auto* o_tau = app.add_option("--tau", tau, "Imaginary time t = -i tau (Bose)");
  auto* o_tol = app.add_option("--tol", tol, "Quadrature tolerance");
  auto* o_mp = app.add_option("--max-points", max_points, "Per-dimension quadrature budget");
  auto* o_radii = app.add_option("--radii", radii_text, "Contour radii, comma-separated");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_trials = app.add_option("--trials", trials, "Monte Carlo trials");
  auto* o_window = app.add_option("--window", window, "Lattice window {0..L} for oracle sweeps");
  auto* o_det = app.add_flag("--deterministic", deterministic, "Single-threaded fixed-order reductions");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads when not deterministic (0 = all cores)");
  auto* o_n = app.add_option("--N", n, "Particle number for validate-identities");
  auto* o_geom = app.add_option("--geometry", geometry, "half or full");
  auto* o_out = app.add_option("--out", out, "Output file (default stdout)");
  auto* o_format = app.add_option("--format", format, "json or csv");
  app.add_option("--config", config_path, "JSON run spec; flags override its fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hc::kOk : hc::kUsage;
  }

  json merged = json::object();
  hc::RunSpec spec;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw halfline::InvalidArgument("cannot read config '" + config_path + "'");
      merged = json::parse(in);
      if (!merged.is_object()) throw halfline::InvalidArgument("config must be a JSON object");
    }
    if (!command.empty()) merged["command"] = command;
    if (o_p->count()) merged["p"] = p;
    if (o_c->count()) merged["c"] = c;
    if (o_y->count()) merged["Y"] = parse_list(y_text, "--Y");
    if (o_x->count()) merged["X"] = parse_list(x_text, "--X");
    if (o_t->count()) merged["t"] = t;
    if (o_tau->count()) merged["tau"] = tau;
    if (o_tol->count()) merged["tol"] = tol;
    if (o_mp->count()) merged["max_points"] = max_points;
    if (o_radii->count()) merged["radii"] = parse_list(radii_text, "--radii");
    if (o_seed->count()) merged["seed"] = seed;
    if (o_trials->count()) merged["trials"] = trials;
    if (o_window->count()) merged["window"] = window;
    if (o_det->count()) merged["deterministic"] = deterministic;
    if (o_threads->count()) merged["threads"] = threads;
    if (o_n->count()) merged["N"] = n;
    if (o_geom->count()) merged["geometry"] = geometry;
    if (o_out->count()) merged["out"] = out;
    if (o_format->count()) merged["format"] = format;
    spec = hc::from_json(merged);
    if (spec.command.empty()) throw halfline::InvalidArgument("no command given");
    if (spec.format != "json" && spec.format != "csv") throw halfline::InvalidArgument("--format must be json or csv");
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hc::kUsage;
  }

  json record;
  try {
    const std::string key = hc::cache_key(spec);
    const auto dir = hc::cache_dir();
    std::optional<json> hit = dir ? hc::cache_lookup(*dir, key) : std::nullopt;
    if (hit) {
      record = *hit;
    } else {
      record = hc::run(spec);
      if (dir) hc::cache_store(*dir, key, record);
    }
  } catch (const halfline::ConvergenceError& e) {
    json diag{{"error", "no_convergence"}, {"message", e.what()}, {"points", e.points()},
              {"previous", {e.previous().real(), e.previous().imag()}},
              {"last", {e.last().real(), e.last().imag()}}};
    std::cerr << diag.dump() << "\n";
    return hc::kNoConvergence;
  } catch (const halfline::SizeLimitError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hc::kUsage;
  } catch (const halfline::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hc::kUsage;
  } catch (const halfline::SingularityError& e) {
    std::cerr << "singular integrand (choose other radii): " << e.what() << "\n";
    return hc::kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hc::kUsage;
  }

  try {
    if (spec.out.empty()) {
      std::cout << (spec.format == "json" ? hc::to_jsonl({record}) : hc::to_csv({record}));
    } else {
      hc::export_records({record}, spec.format, spec.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return hc::kUsage;
  }
  return record.value("passed", true) ? hc::kOk : hc::kCheckFailed;
}
