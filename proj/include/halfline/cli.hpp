#pragma once

// Batch front end shared by the command-line tool and its tests: a run
// specification with a canonical JSON form, dispatch to the library, report
// records with named invariant checks, a result cache keyed by a digest of
// the canonical spec, and JSON-lines / CSV export.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "halfline/asep_exact.hpp"
#include "halfline/bose_exact.hpp"
#include "halfline/errors.hpp"
#include "halfline/identities.hpp"
#include "halfline/oracles.hpp"

namespace halfline::cli {

using nlohmann::json;

inline constexpr const char* kLibraryVersion = "0.1.0";

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"asep-prob",       "asep-fullline",       "asep-n1",
                                              "bose-prop",       "validate-identities", "validate-asep",
                                              "validate-bose",   "mc-compare"};
  return names;
}

/// Exit status: 0 success, 1 a named invariant failed, 2 usage error,
/// 3 numerical non-convergence.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kNoConvergence = 3 };

struct RunSpec {
  std::string command;
  double p = 0.4;
  double c = 1.0;
  std::vector<double> y;
  std::vector<double> x;
  std::optional<double> t;
  std::optional<double> tau;
  double tol = 1e-10;
  long max_points = 4096;
  std::vector<double> radii;
  std::uint64_t seed = 1;
  long trials = 200000;
  std::optional<int> window;
  bool deterministic = false;
  int threads = 1;
  int n = 3;
  std::string geometry = "half";
  std::string out;
  std::string format = "json";
};

inline json to_json(const RunSpec& s) {
  json j;
  j["command"] = s.command;
  j["p"] = s.p;
  j["c"] = s.c;
  j["Y"] = s.y;
  j["X"] = s.x;
  j["t"] = s.t ? json(*s.t) : json(nullptr);
  j["tau"] = s.tau ? json(*s.tau) : json(nullptr);
  j["tol"] = s.tol;
  j["max_points"] = s.max_points;
  j["radii"] = s.radii;
  j["seed"] = s.seed;
  j["trials"] = s.trials;
  j["window"] = s.window ? json(*s.window) : json(nullptr);
  j["deterministic"] = s.deterministic;
  j["threads"] = s.threads;
  j["N"] = s.n;
  j["geometry"] = s.geometry;
  j["out"] = s.out;
  j["format"] = s.format;
  return j;
}

/// Missing keys keep their defaults; unknown keys are a usage error.
inline RunSpec from_json(const json& j) {
  static const std::vector<std::string> known{"command", "p",     "c",      "Y",     "X",       "t",
                                              "tau",     "tol",   "max_points", "radii", "seed", "trials",
                                              "window",  "deterministic", "threads", "N", "geometry", "out",
                                              "format"};
  if (!j.is_object()) throw InvalidArgument("run spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument("unknown run spec field '" + key + "'");
  RunSpec s;
  try {
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(dst);
    };
    auto get_opt = [&](const char* key, auto& dst) {
      if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<typename std::decay_t<decltype(dst)>::value_type>();
    };
    get("command", s.command);
    get("p", s.p);
    get("c", s.c);
    get("Y", s.y);
    get("X", s.x);
    get_opt("t", s.t);
    get_opt("tau", s.tau);
    get("tol", s.tol);
    get("max_points", s.max_points);
    get("radii", s.radii);
    get("seed", s.seed);
    get("trials", s.trials);
    get_opt("window", s.window);
    get("deterministic", s.deterministic);
    get("threads", s.threads);
    get("N", s.n);
    get("geometry", s.geometry);
    get("out", s.out);
    get("format", s.format);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed run spec: ") + e.what());
  }
  return s;
}

/// FNV-1a 64 over the canonical serialization (object keys sorted, numbers
/// in shortest round-trip form), as 16 hex digits.
inline std::string cache_key(const RunSpec& s) {
  const std::string canonical = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline std::vector<int> as_sites(const std::vector<double>& v, const char* what) {
  std::vector<int> out;
  for (double d : v) {
    if (d != std::round(d) || std::abs(d) > 1e9) throw InvalidArgument(std::string(what) + " must hold integer sites");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

inline QuadOptions quad_options(const RunSpec& s) {
  QuadOptions o;
  o.tol = s.tol;
  o.max_points = s.max_points;
  o.threads = s.deterministic ? 1 : s.threads;
  o.validate();
  return o;
}

inline double need_t(const RunSpec& s) {
  require(s.t.has_value(), s.command + " needs --t");
  return *s.t;
}

inline double need_tau(const RunSpec& s) {
  require(s.tau.has_value(), s.command + " needs --tau (imaginary time t = -i tau)");
  require(*s.tau > 0.0, "--tau must be positive");
  return *s.tau;
}

inline std::optional<RadiiScheme> radii_override(const RunSpec& s, const AsepParams& params, int n) {
  if (s.radii.empty()) return std::nullopt;
  require(static_cast<int>(s.radii.size()) == n, "--radii needs one radius per particle");
  return RadiiScheme(1.0 / (2.0 * params.q), s.radii, 0.0);
}

class Checks {
public:
  void add(const std::string& invariant, double value, double threshold) {
    const bool ok = std::isfinite(value) && value < threshold;
    all_ = all_ && ok;
    items_.push_back({{"invariant", invariant}, {"value", value}, {"threshold", threshold}, {"passed", ok}});
  }
  bool all() const { return all_; }
  json items() const { return items_; }

private:
  json items_ = json::array();
  bool all_ = true;
};

inline json run_asep_prob(const RunSpec& s) {
  const auto params = AsepParams::from_p(s.p);
  const LatticeConfig y(as_sites(s.y, "Y"));
  const LatticeConfig x(as_sites(s.x, "X"));
  const auto r = prob_halfline(y, x, need_t(s), params, quad_options(s), radii_override(s, params, y.size()));
  return {{"value", r.value},
          {"value_imag", r.imag_residual},
          {"error_estimate", r.error_estimate},
          {"roundoff_floor", r.roundoff_floor},
          {"points_used", r.points_used},
          {"term_count", r.term_count}};
}

inline json run_asep_fullline(const RunSpec& s) {
  const auto params = AsepParams::from_p(s.p);
  const LatticeConfig y(as_sites(s.y, "Y"));
  const LatticeConfig x(as_sites(s.x, "X"));
  std::optional<double> radius;
  if (!s.radii.empty()) {
    require(s.radii.size() == 1, "asep-fullline takes a single --radii value");
    radius = s.radii.front();
  }
  const auto r = prob_fullline(y, x, need_t(s), params, quad_options(s), radius);
  return {{"value", r.value},
          {"value_imag", r.imag_residual},
          {"error_estimate", r.error_estimate},
          {"roundoff_floor", r.roundoff_floor},
          {"points_used", r.points_used},
          {"term_count", r.term_count}};
}

inline json run_asep_n1(const RunSpec& s) {
  const auto params = AsepParams::from_p(s.p);
  const auto y = as_sites(s.y, "Y");
  const auto x = as_sites(s.x, "X");
  require(y.size() == 1 && x.size() == 1, "asep-n1 takes one site in --Y and one in --X");
  std::optional<CircleContour> contour;
  if (!s.radii.empty()) {
    require(s.radii.size() == 1, "asep-n1 takes a single --radii value");
    contour = CircleContour(1.0 / (2.0 * params.q), s.radii.front());
  }
  const auto r = prob_n1_closed(y[0], x[0], need_t(s), params, quad_options(s), contour);
  return {{"value", r.value},
          {"value_imag", r.imag_residual},
          {"error_estimate", r.error_estimate},
          {"roundoff_floor", r.roundoff_floor},
          {"points_used", r.points_used},
          {"term_count", r.term_count}};
}

inline json run_bose_prop(const RunSpec& s) {
  require(!s.t.has_value(), "bose-prop evaluates at imaginary time only; pass --tau instead of --t");
  const DampedTime t = DampedTime::imaginary(need_tau(s));
  const RealConfig y(s.y);
  const RealConfig x(s.x);
  const BoseParams params(s.c);
  require(s.geometry == "half" || s.geometry == "full", "--geometry must be half or full");
  const auto r = s.geometry == "half" ? propagator_halfline(y, x, t, params, quad_options(s))
                                      : propagator_fullline(y, x, t, params, quad_options(s));
  return {{"value", r.value.real()},
          {"value_imag", r.value.imag()},
          {"error_estimate", r.error_estimate},
          {"points_used", r.points_used},
          {"term_count", r.term_count}};
}

inline json run_validate_identities(const RunSpec& s) {
  require(s.n >= 1 && s.n <= 4, "validate-identities supports 1 <= N <= 4");
  IdentityOptions o;
  o.seed = s.seed;
  o.bose_c = s.c;
  o.asep_p = s.p;
  Checks checks;
  for (const auto& r : identity_suite(s.n, o)) checks.add(r.name, r.max_residual, r.threshold);
  return {{"checks", checks.items()}, {"passed", checks.all()}};
}

inline json run_validate_asep(const RunSpec& s) {
  const auto params = AsepParams::from_p(s.p);
  const LatticeConfig y(s.y.empty() ? std::vector<int>{0, 2} : as_sites(s.y, "Y"));
  const int n = y.size();
  require(n <= 2, "validate-asep runs the full suite for N <= 2");
  require(y.on_halfline(), "Y must lie on the half-line");
  const double t = s.t.value_or(1.0);
  require(t > 0.0, "validate-asep needs t > 0");
  const int window = s.window.value_or(y.sites().back() + static_cast<int>(std::ceil(4.0 * std::sqrt(t))) + 8);
  const auto opts = quad_options(s);
  const auto radii = radii_override(s, params, n);

  Checks checks;
  double max_imag = 0.0, max_delta = 0.0, min_value = INFINITY;
  long configs = 0;
  for (const auto& z : ordered_subsets(0, window, n)) {
    const double oracle = ctmc_prob(y.sites(), z, t, params);
    const auto r = prob_halfline(y, LatticeConfig(z), t, params, opts, radii);
    max_imag = std::max(max_imag, r.imag_residual);
    min_value = std::min(min_value, r.value);
    if (oracle > 1e-9) {
      max_delta = std::max(max_delta, std::abs(r.value - oracle));
      ++configs;
    }
  }
  checks.add("realness", max_imag, 100.0 * s.tol);
  checks.add("oracle_equivalence", max_delta, 1e-6);
  checks.add("nonnegativity", std::max(0.0, -min_value), 1e-8);
  checks.add("normalization", std::abs(total_mass(y, t, params, window, opts, radii) - 1.0), 1e-6);

  std::vector<int> other(y.sites().begin(), y.sites().end());
  other.back() += 1;
  const double at_y = prob_halfline(y, y, 0.0, params, opts, radii).value;
  const double off_y = prob_halfline(y, LatticeConfig(other), 0.0, params, opts, radii).value;
  checks.add("delta_initial_condition", std::max(std::abs(at_y - 1.0), std::abs(off_y)), 1e-8);

  const RadiiScheme base = radii ? *radii : compact_radii(params, n);
  std::vector<int> probe(y.sites().begin(), y.sites().end());
  for (auto& v : probe) v += 1;
  const LatticeConfig px(probe);
  const double v0 = prob_halfline(y, px, t, params, opts, base).value;
  const double v1 = prob_halfline(y, px, t, params, opts, base.scaled(1.1)).value;
  const double v2 = prob_halfline(y, px, t, params, opts, base.with_gaps_scaled(2.0)).value;
  checks.add("contour_invariance", std::max(std::abs(v1 - v0), std::abs(v2 - v0)), 1e-8);

  std::vector<int> rest(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rest[static_cast<std::size_t>(i)] = 3 * i;
  checks.add("wall_boundary_bc4", std::abs(wall_boundary_residual(y, rest, t, params, opts, radii)), 1e-8);
  if (n >= 2) {
    checks.add("exclusion_boundary_bc2",
               std::abs(exclusion_boundary_residual(y, rest, 1, 2, t, params, opts, radii)), 1e-8);
    checks.add("master_equation_adjacent",
               master_equation_residual(y, LatticeConfig({1, 2}), t, params, opts, radii), 1e-8);
    checks.add("master_equation_separated",
               master_equation_residual(y, LatticeConfig({0, 3}), t, params, opts, radii), 1e-8);
  } else {
    checks.add("master_equation", master_equation_residual(y, LatticeConfig({0}), t, params, opts, radii), 1e-8);
  }
  return {{"checks", checks.items()}, {"passed", checks.all()}, {"configs_compared", configs},
          {"delta", max_delta}, {"window", window}};
}

inline json run_validate_bose(const RunSpec& s) {
  require(!s.t.has_value(), "validate-bose uses imaginary time; pass --tau");
  const double tau = s.tau.value_or(0.5);
  require(tau > 0.0, "--tau must be positive");
  const DampedTime t = DampedTime::imaginary(tau);
  const RealConfig y(s.y.empty() ? std::vector<double>{0.4, 1.1} : s.y);
  const int n = y.size();
  require(n <= 3, "validate-bose supports N <= 3");
  require(y.on_halfline(), "Y must lie on the half-line");
  std::vector<double> xv = s.x;
  if (xv.empty())
    for (double v : y.positions()) xv.push_back(v + 0.3);
  const RealConfig x(xv);
  require(x.size() == n && x.on_halfline(), "X must have N positive entries");
  const BoseParams params(s.c);
  const auto opts = quad_options(s);
  const double scale = bose_scale(n, tau);
  Checks checks;

  std::vector<double> rest(x.positions().begin() + 1, x.positions().end());
  checks.add("wall_vanishing", std::abs(wall_residual(y, rest, t, params, opts).value) / scale, 1e-10);
  if (n >= 2) {
    double worst = 0.0;
    for (int j = 1; j < n; ++j) {
      std::vector<double> diag(x.positions().begin(), x.positions().end());
      diag.erase(diag.begin() + j);
      worst = std::max(worst, std::abs(bc1_residual(y, RealConfig(diag), j, t, params, opts).value));
    }
    checks.add("contact_condition_bc1", worst / (scale * (s.c + 1.0 / std::sqrt(tau))), 1e-8);
  }
  checks.add("equation_residual", std::abs(pde_residual(y, x, t, params, opts).value) / (scale / tau), 1e-12);
  const auto free = propagator_halfline(y, x, t, BoseParams(0.0), opts);
  checks.add("free_limit_c0", std::abs(free.value - free_limit_c0(y, x, tau)) / scale, 1e-10);
  if (n == 1) {
    const auto r = propagator_halfline(y, x, t, params, opts);
    checks.add("method_of_images", std::abs(r.value - image_kernel(x[0], y[0], tau)), 1e-10);
  }
  const double value = propagator_halfline(y, x, t, params, opts).value.real();
  return {{"checks", checks.items()}, {"passed", checks.all()}, {"value", value}};
}

inline json run_mc_compare(const RunSpec& s) {
  const auto params = AsepParams::from_p(s.p);
  const LatticeConfig y(as_sites(s.y, "Y"));
  const LatticeConfig x(as_sites(s.x, "X"));
  const double t = need_t(s);
  require(s.geometry == "half" || s.geometry == "full", "--geometry must be half or full");
  const bool half = s.geometry == "half";
  const auto opts = quad_options(s);
  const double exact = half ? prob_halfline(y, x, t, params, opts).value : prob_fullline(y, x, t, params, opts).value;
  McConfig cfg;
  cfg.trials = s.trials;
  cfg.seed = s.seed;
  cfg.t = t;
  cfg.threads = s.deterministic ? 1 : s.threads;
  const auto mc = mc_estimate(y.sites(), x.sites(), cfg, params, half);
  const double se = std::sqrt(std::max(exact * (1.0 - exact), 0.0) / static_cast<double>(s.trials));
  const double z = se > 0.0 ? std::abs(mc.estimate - exact) / se : (mc.estimate == exact ? 0.0 : INFINITY);
  Checks checks;
  checks.add("mc_within_4_standard_errors", z, 4.0);
  return {{"value", exact},
          {"oracle", mc.estimate},
          {"delta", mc.estimate - exact},
          {"mc_std_error", mc.std_error},
          {"standard_error_at_exact", se},
          {"z_score", z},
          {"hits", mc.hits},
          {"checks", checks.items()},
          {"passed", checks.all()}};
}

}  // namespace detail

/// Dispatches `spec.command`; the record echoes the spec and carries the
/// results. Library errors propagate to the caller.
inline json run(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  json body;
  if (spec.command == "asep-prob") body = detail::run_asep_prob(spec);
  else if (spec.command == "asep-fullline") body = detail::run_asep_fullline(spec);
  else if (spec.command == "asep-n1") body = detail::run_asep_n1(spec);
  else if (spec.command == "bose-prop") body = detail::run_bose_prop(spec);
  else if (spec.command == "validate-identities") body = detail::run_validate_identities(spec);
  else if (spec.command == "validate-asep") body = detail::run_validate_asep(spec);
  else if (spec.command == "validate-bose") body = detail::run_validate_bose(spec);
  else if (spec.command == "mc-compare") body = detail::run_mc_compare(spec);
  else throw InvalidArgument("unknown command '" + spec.command + "'");

  json record = body;
  record["command"] = spec.command;
  record["spec"] = to_json(spec);
  record["cache_key"] = cache_key(spec);
  if (!record.contains("passed")) record["passed"] = true;
  record["cached"] = false;
  record["version"] = kLibraryVersion;
  record["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

/// Cache directory from HALFLINE_CACHE_DIR, if set.
inline std::optional<std::filesystem::path> cache_dir() {
  const char* dir = std::getenv("HALFLINE_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  return std::filesystem::path(dir);
}

inline std::optional<json> cache_lookup(const std::filesystem::path& dir, const std::string& key) {
  std::ifstream in(dir / (key + ".json"));
  if (!in) return std::nullopt;
  try {
    json record = json::parse(in);
    record["cached"] = true;
    return record;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

inline void cache_store(const std::filesystem::path& dir, const std::string& key, const json& record) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / (key + ".json"));
  if (!out) throw Error("cannot write cache entry in " + dir.string());
  out << record.dump() << '\n';
}

/// Columns of the CSV export, in order.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "command", "cache_key", "value", "value_imag", "error_estimate", "roundoff_floor", "points_used", "term_count", "oracle",
      "delta",   "passed",    "checks_passed", "checks_total", "cached", "wall_clock_s", "version", "p", "c", "t",
      "tau",     "seed",      "trials", "Y", "X"};
  return cols;
}

namespace detail {
inline std::string csv_scalar(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + csv_scalar(v[i]);
    return out;
  }
  return v.dump();
}

inline json csv_field(const json& rec, const std::string& col) {
  if (col == "checks_passed" || col == "checks_total") {
    if (!rec.contains("checks")) return nullptr;
    long passed = 0;
    for (const auto& c : rec["checks"]) passed += c.value("passed", false) ? 1 : 0;
    return col == "checks_total" ? json(rec["checks"].size()) : json(passed);
  }
  static const std::vector<std::string> from_spec{"p", "c", "t", "tau", "seed", "trials", "Y", "X"};
  if (std::find(from_spec.begin(), from_spec.end(), col) != from_spec.end())
    return rec.contains("spec") && rec["spec"].contains(col) ? rec["spec"][col] : json(nullptr);
  return rec.contains(col) ? rec[col] : json(nullptr);
}
}  // namespace detail

inline std::string to_csv(const std::vector<json>& records) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << detail::csv_scalar(detail::csv_field(rec, cols[i]));
    os << '\n';
  }
  return os.str();
}

inline std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& rec : records) out += rec.dump() + '\n';
  return out;
}

/// Writes records as JSON lines or CSV. An empty CSV export still
/// contains no bytes, matching the empty JSON-lines file.
inline void export_records(const std::vector<json>& records, const std::string& format, const std::string& path) {
  if (format != "json" && format != "csv") throw InvalidArgument("--format must be json or csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (records.empty()) return;
  out << (format == "json" ? to_jsonl(records) : to_csv(records));
  if (!out) throw Error("write to '" + path + "' failed");
}

inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

}  // namespace halfline::cli
