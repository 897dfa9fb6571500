/*
   Copyright 2026 The vortlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"
#include "vortlab/field_io.hpp"

namespace vortlab::cli {
namespace fs = std::filesystem;

namespace {

constexpr std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::kSpectralRun, "spectral-run"},
    {ScenarioKind::kParticleRun, "particle-run"},
    {ScenarioKind::kVerifyWeak, "verify-weak"},
    {ScenarioKind::kVerifyUniqueness, "verify-uniqueness"},
    {ScenarioKind::kFlowCheck, "flow-check"},
    {ScenarioKind::kMarkovProbe, "markov-probe"},
    {ScenarioKind::kKernelBench, "kernel-bench"},
    {ScenarioKind::kConvergenceStudy, "convergence-study"},
};

constexpr std::pair<InitialCondition::Type, const char*> kInitialNames[] = {
    {InitialCondition::Type::kLambOseen, "lamb-oseen"},
    {InitialCondition::Type::kGaussians, "gaussians"},
    {InitialCondition::Type::kAtoms, "atoms"},
    {InitialCondition::Type::kField, "field"},
};

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::string initial_name(InitialCondition::Type t) {
  for (const auto& [type, name] : kInitialNames) {
    if (type == t) return name;
  }
  return "?";
}

InitialCondition::Type parse_initial(const std::string& s) {
  for (const auto& [type, name] : kInitialNames) {
    if (s == name) return type;
  }
  throw std::invalid_argument("expected lamb-oseen, gaussians, atoms or field, got '" + s + "'");
}

std::vector<double> uniform_times(double t_end, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(t_end * k / count);
  return out;
}

// One TOML table plus the dotted path leading to it. Every key read is
// recorded so leftovers can be reported as unknown fields.
class Section {
 public:
  Section(const toml::table* table, std::string path, std::string source)
      : table_(table), path_(std::move(path)), source_(std::move(source)) {}

  bool present() const { return table_ != nullptr; }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    throw SchemaError(where(lookup(key)) + ": field '" + full(key) + "': " + message);
  }

  double number(std::string_view key, double fallback) {
    const auto* n = use(key);
    if (n == nullptr) return fallback;
    if (!n->is_number()) fail(key, "expected a number");
    return *n->value<double>();
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) {
    const auto* n = use(key);
    if (n == nullptr) return fallback;
    if (n->is_integer()) return *n->value<std::int64_t>();
    // 1e5 is a natural way to write a particle count.
    if (n->is_floating_point()) {
      const double v = *n->value<double>();
      if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    }
    fail(key, "expected an integer");
  }

  bool boolean(std::string_view key, bool fallback) {
    const auto* n = use(key);
    if (n == nullptr) return fallback;
    if (!n->is_boolean()) fail(key, "expected true or false");
    return *n->value<bool>();
  }

  std::string string(std::string_view key, const std::string& fallback) {
    const auto* n = use(key);
    if (n == nullptr) return fallback;
    if (!n->is_string()) fail(key, "expected a string");
    return *n->value<std::string>();
  }

  std::optional<std::vector<double>> numbers(std::string_view key) {
    const auto* n = use(key);
    if (n == nullptr) return std::nullopt;
    const auto* arr = n->as_array();
    if (arr == nullptr) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : *arr) {
      if (!v.is_number()) fail(key, "expected an array of numbers");
      out.push_back(*v.value<double>());
    }
    return out;
  }

  // Array of fixed-width numeric tuples, e.g. [[x, y, w], ...].
  std::optional<std::vector<std::vector<double>>> tuples(std::string_view key, std::size_t width) {
    const auto* n = use(key);
    if (n == nullptr) return std::nullopt;
    const auto* arr = n->as_array();
    const std::string shape = "expected an array of " + std::to_string(width) + "-number arrays";
    if (arr == nullptr || arr->empty()) fail(key, shape);
    std::vector<std::vector<double>> out;
    for (const auto& row : *arr) {
      const auto* r = row.as_array();
      if (r == nullptr || r->size() != width) fail(key, shape);
      std::vector<double> values;
      for (const auto& v : *r) {
        if (!v.is_number()) fail(key, shape);
        values.push_back(*v.value<double>());
      }
      out.push_back(std::move(values));
    }
    return out;
  }

  Section child(std::string_view key) {
    const auto* n = use(key);
    if (n == nullptr) return Section(nullptr, full(key), source_);
    if (!n->is_table()) fail(key, "expected a table");
    return Section(n->as_table(), full(key), source_);
  }

  void reject_unknown() const {
    if (table_ == nullptr) return;
    for (const auto& [k, v] : *table_) {
      if (used_.count(std::string(k.str())) == 0) {
        throw SchemaError(where(&v) + ": field '" + full(k.str()) + "': unknown field");
      }
    }
  }

 private:
  const toml::node* lookup(std::string_view key) const { return table_ ? table_->get(key) : nullptr; }

  const toml::node* use(std::string_view key) {
    used_.insert(std::string(key));
    return lookup(key);
  }

  std::string full(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  std::string where(const toml::node* n) const {
    const toml::node* at = n != nullptr ? n : table_;
    if (at == nullptr || at->source().begin.line == 0) return source_;
    std::ostringstream os;
    os << source_ << ':' << at->source().begin.line << ':' << at->source().begin.column;
    return os.str();
  }

  const toml::table* table_;
  std::string path_;
  std::string source_;
  std::set<std::string> used_;
};

void read_initial(Section s, InitialCondition& ic, const fs::path& base_dir) {
  const auto type = s.string("type", "lamb-oseen");
  try {
    ic.type = parse_initial(type);
  } catch (const std::invalid_argument& e) {
    s.fail("type", e.what());
  }
  ic.t0 = s.number("t0", ic.t0);
  if (ic.type == InitialCondition::Type::kLambOseen && !(ic.t0 >= 0.0)) s.fail("t0", "must be >= 0");
  if (auto blobs = s.tuples("blobs", 4)) {
    for (const auto& b : *blobs) {
      if (!(b[2] > 0.0)) s.fail("blobs", "variance must be positive");
      ic.blobs.push_back({{b[0], b[1]}, b[2], b[3]});
    }
  }
  if (auto atoms = s.tuples("atoms", 3)) {
    for (const auto& a : *atoms) {
      if (!(a[2] >= 0.0)) s.fail("atoms", "weights must be >= 0");
      ic.atoms.push_back({{a[0], a[1]}, a[2]});
    }
  }
  const auto file = s.string("file", "");
  if (!file.empty()) ic.file = fs::absolute(base_dir / file).lexically_normal();
  if (ic.type == InitialCondition::Type::kGaussians && ic.blobs.empty()) s.fail("blobs", "required for type 'gaussians'");
  if (ic.type == InitialCondition::Type::kAtoms && ic.atoms.empty()) s.fail("atoms", "required for type 'atoms'");
  if (ic.type == InitialCondition::Type::kField && ic.file.empty()) s.fail("file", "required for type 'field'");
  s.reject_unknown();
}

DtPolicy::Kind read_policy(Section& s, std::string_view key, DtPolicy::Kind fallback) {
  const auto policy = s.string(key, fallback == DtPolicy::Kind::kCfl ? "cfl" : "fixed");
  if (policy == "cfl") return DtPolicy::Kind::kCfl;
  if (policy == "fixed") return DtPolicy::Kind::kFixed;
  s.fail(key, "expected 'fixed' or 'cfl', got '" + policy + "'");
}

int read_resolution(Section& s, int fallback) {
  const auto n = s.integer("resolution", fallback);
  if (n < 16 || !is_power_of_two(n)) s.fail("resolution", "must be a power of two >= 16, got " + std::to_string(n));
  return static_cast<int>(n);
}

void read_solver(Section s, SolverConfig& c) {
  c.nu = s.number("nu", c.nu);
  if (!(c.nu > 0.0)) s.fail("nu", "must be positive");
  c.box_size = s.number("box_size", c.box_size);
  if (!(c.box_size > 0.0)) s.fail("box_size", "must be positive");
  c.resolution = read_resolution(s, c.resolution);
  c.t_end = s.number("t_end", c.t_end);
  if (!(c.t_end > 0.0)) s.fail("t_end", "must be positive");
  c.dt.dt = s.number("dt", c.dt.dt);
  if (!(c.dt.dt > 0.0)) s.fail("dt", "must be positive");
  c.dt.kind = read_policy(s, "dt_policy", c.dt.kind);
  c.dt.safety = s.number("safety", c.dt.safety);
  if (!(c.dt.safety > 0.0)) s.fail("safety", "must be positive");
  c.dealias = s.boolean("dealias", c.dealias);
  c.blowup_factor = s.number("blowup_factor", c.blowup_factor);
  if (!(c.blowup_factor > 1.0)) s.fail("blowup_factor", "must exceed 1");
  const auto count = s.integer("snapshots", 10);
  if (count < 1) s.fail("snapshots", "must be >= 1");
  if (auto times = s.numbers("snapshot_times")) {
    for (std::size_t k = 0; k < times->size(); ++k) {
      const double t = (*times)[k];
      if (!(t >= 0.0 && t <= c.t_end)) s.fail("snapshot_times", "times must lie in [0, t_end]");
      if (k > 0 && !(t > (*times)[k - 1])) s.fail("snapshot_times", "times must be strictly increasing");
    }
    c.snapshot_times = *times;
  } else {
    c = c.with_uniform_snapshots(static_cast<int>(count));
  }
  s.reject_unknown();
}

void read_particles(Section s, SdeConfig& c, const SolverConfig& solver, std::uint64_t seed) {
  c.nu = s.number("nu", solver.nu);
  if (!(c.nu >= 0.0)) s.fail("nu", "must be >= 0");
  c.box_size = s.number("box_size", solver.box_size);
  if (!(c.box_size > 0.0)) s.fail("box_size", "must be positive");
  c.resolution = read_resolution(s, solver.resolution);
  c.t_end = s.number("t_end", solver.t_end);
  if (!(c.t_end > 0.0)) s.fail("t_end", "must be positive");
  c.dt = s.number("dt", c.dt);
  if (!(c.dt > 0.0)) s.fail("dt", "must be positive");
  c.dt_policy = read_policy(s, "dt_policy", c.dt_policy);
  const auto method = s.string("method", to_string(c.method));
  try {
    c.method = parse_drift_method(method);
  } catch (const std::invalid_argument&) {
    s.fail("method", "expected direct, treecode or grid, got '" + method + "'");
  }
  c.delta = s.number("delta", 0.0);
  if (c.delta < 0.0) s.fail("delta", "must be >= 0 (0 selects the default)");
  c.bandwidth = s.number("bandwidth", 0.0);
  if (c.bandwidth < 0.0) s.fail("bandwidth", "must be >= 0 (0 selects the default)");
  c.tree.theta = s.number("theta", c.tree.theta);
  if (!(c.tree.theta > 0.0 && c.tree.theta <= 1.0)) s.fail("theta", "must lie in (0, 1]");
  c.tree.order = static_cast<int>(s.integer("order", c.tree.order));
  if (c.tree.order < 0 || c.tree.order > 30) s.fail("order", "must lie in [0, 30]");
  c.tree.leaf_capacity = static_cast<int>(s.integer("leaf_capacity", c.tree.leaf_capacity));
  if (c.tree.leaf_capacity < 1) s.fail("leaf_capacity", "must be >= 1");
  const auto count = s.integer("count", static_cast<std::int64_t>(c.particles));
  if (count < 1) s.fail("count", "must be >= 1");
  c.particles = static_cast<std::size_t>(count);
  c.seed = seed;
  const auto snapshots = s.integer("snapshots", 4);
  if (snapshots < 1) s.fail("snapshots", "must be >= 1");
  if (auto times = s.numbers("snapshot_times")) {
    for (std::size_t k = 0; k < times->size(); ++k) {
      const double t = (*times)[k];
      if (!(t >= 0.0 && t <= c.t_end)) s.fail("snapshot_times", "times must lie in [0, t_end]");
      if (k > 0 && !(t > (*times)[k - 1])) s.fail("snapshot_times", "times must be strictly increasing");
    }
    c.snapshot_times = *times;
  } else {
    c.snapshot_times = uniform_times(c.t_end, static_cast<int>(snapshots));
  }
  s.reject_unknown();
}

void read_verify(Section s, ScenarioConfig& c) {
  auto& w = c.weak;
  w.horizon = s.number("horizon", w.horizon);
  if (w.horizon < 0.0) s.fail("horizon", "must be >= 0 (0 selects t_end)");
  w.base_radius = s.number("base_radius", w.base_radius);
  if (!(w.base_radius > 0.0)) s.fail("base_radius", "must be positive");
  w.max_normalized = s.number("max_normalized", w.max_normalized);
  if (!(w.max_normalized > 0.0)) s.fail("max_normalized", "must be positive");
  w.linearized = s.boolean("linearized", w.linearized);
  if (const double v = s.number("max_l1_error", -1.0); v >= 0.0) c.max_l1_error = v;
  if (const double v = s.number("max_discrepancy", -1.0); v >= 0.0) c.max_discrepancy = v;
  s.reject_unknown();
}

void read_uniqueness(Section s, UniquenessOptions& u) {
  if (auto res = s.numbers("resolutions")) {
    u.resolutions.clear();
    for (double r : *res) {
      if (r != std::floor(r) || r < 16 || !is_power_of_two(static_cast<std::int64_t>(r))) {
        s.fail("resolutions", "entries must be powers of two >= 16");
      }
      u.resolutions.push_back(static_cast<int>(r));
    }
    for (std::size_t k = 1; k < u.resolutions.size(); ++k) {
      if (u.resolutions[k] != 2 * u.resolutions[k - 1]) s.fail("resolutions", "each entry must double the previous");
    }
    if (u.resolutions.size() < 2) s.fail("resolutions", "need at least two");
  }
  if (auto eps = s.numbers("eps")) {
    for (double e : *eps) {
      if (!(e > 0.0)) s.fail("eps", "entries must be positive");
    }
    if (eps->empty()) s.fail("eps", "need at least one");
    u.eps = *eps;
  }
  u.ratio_eps = s.number("ratio_eps", u.ratio_eps);
  if (std::find(u.eps.begin(), u.eps.end(), u.ratio_eps) == u.eps.end()) s.fail("ratio_eps", "must be one of eps");
  u.min_ratio = s.number("min_ratio", u.min_ratio);
  s.reject_unknown();
}

void read_flow(Section s, FlowOptions& f) {
  f.s = s.number("s", f.s);
  f.r = s.number("r", f.r);
  f.t = s.number("t", f.t);
  if (!(f.s >= 0.0 && f.s < f.r && f.r < f.t)) s.fail("r", "need 0 <= s < r < t");
  f.factor = s.number("factor", f.factor);
  if (!(f.factor > 0.0)) s.fail("factor", "must be positive");
  s.reject_unknown();
}

void read_markov(Section s, MarkovOptions& m) {
  m.r = s.number("r", m.r);
  m.t = s.number("t", m.t);
  if (!(m.r > 0.0 && m.r < m.t)) s.fail("r", "need 0 < r < t");
  m.dt = s.number("dt", m.dt);
  if (!(m.dt > 0.0)) s.fail("dt", "must be positive");
  const auto n = s.integer("particles", static_cast<std::int64_t>(m.particles));
  if (n < 1) s.fail("particles", "must be >= 1");
  m.particles = static_cast<std::size_t>(n);
  m.bin_radius_factor = s.number("bin_radius_factor", m.bin_radius_factor);
  if (!(m.bin_radius_factor > 0.0)) s.fail("bin_radius_factor", "must be positive");
  m.coarse_bins = static_cast<int>(s.integer("coarse_bins", m.coarse_bins));
  if (m.coarse_bins < 2) s.fail("coarse_bins", "must be >= 2");
  const auto pop = s.integer("min_population", static_cast<std::int64_t>(m.min_population));
  if (pop < 1) s.fail("min_population", "must be >= 1");
  m.min_population = static_cast<std::size_t>(pop);
  m.reference_snapshots = static_cast<int>(s.integer("reference_snapshots", m.reference_snapshots));
  if (m.reference_snapshots < 2) s.fail("reference_snapshots", "must be >= 2");
  s.reject_unknown();
}

void read_bench(Section s, BenchOptions& b) {
  if (auto sizes = s.numbers("sizes")) {
    b.sizes.clear();
    for (double v : *sizes) {
      if (!(v >= 2.0) || v != std::floor(v)) s.fail("sizes", "entries must be integers >= 2");
      b.sizes.push_back(static_cast<std::size_t>(v));
    }
    if (b.sizes.empty()) s.fail("sizes", "need at least one");
  }
  b.max_rel_err = s.number("max_rel_err", b.max_rel_err);
  const auto targets = s.integer("direct_targets", static_cast<std::int64_t>(b.direct_targets));
  if (targets < 1) s.fail("direct_targets", "must be >= 1");
  b.direct_targets = static_cast<std::size_t>(targets);
  s.reject_unknown();
}

void read_convergence(Section s, ConvergenceOptions& c) {
  const auto p = s.string("parameter", "resolution");
  if (p == "resolution") {
    c.parameter = ConvergenceOptions::Parameter::kResolution;
  } else if (p == "particles") {
    c.parameter = ConvergenceOptions::Parameter::kParticles;
    c.min_order = 0.0;
  } else {
    s.fail("parameter", "expected 'resolution' or 'particles', got '" + p + "'");
  }
  c.levels = static_cast<int>(s.integer("levels", c.levels));
  if (c.levels < 3) s.fail("levels", "a convergence study needs at least 3 levels");
  c.min_order = s.number("min_order", c.min_order);
  if (c.min_order < 0.0) s.fail("min_order", "must be >= 0");
  s.reject_unknown();
}

nlohmann::json initial_to_json(const InitialCondition& ic) {
  nlohmann::json j = {{"type", initial_name(ic.type)}, {"t0", ic.t0}};
  nlohmann::json blobs = nlohmann::json::array(), atoms = nlohmann::json::array();
  for (const auto& b : ic.blobs) blobs.push_back({b.center[0], b.center[1], b.variance, b.mass});
  for (const auto& a : ic.atoms) atoms.push_back({a.position[0], a.position[1], a.weight});
  j["blobs"] = blobs;
  j["atoms"] = atoms;
  j["file"] = ic.file.generic_string();
  return j;
}

InitialCondition initial_from_json(const nlohmann::json& j) {
  InitialCondition ic;
  ic.type = parse_initial(j.at("type").get<std::string>());
  ic.t0 = j.at("t0").get<double>();
  for (const auto& b : j.at("blobs")) {
    ic.blobs.push_back({{b.at(0).get<double>(), b.at(1).get<double>()}, b.at(2).get<double>(), b.at(3).get<double>()});
  }
  for (const auto& a : j.at("atoms")) {
    ic.atoms.push_back({{a.at(0).get<double>(), a.at(1).get<double>()}, a.at(2).get<double>()});
  }
  ic.file = j.at("file").get<std::string>();
  return ic;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

ScenarioKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

std::size_t parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a count: '" + text + "'");
  }
  if (used != text.size() || !(v >= 1.0) || v != std::floor(v) || v > 1e12) {
    throw std::invalid_argument("not a count: '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

void ScenarioConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& msg) {
    throw SchemaError("field '" + field + "': " + msg);
  };
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    fail("solver", e.what());
  }
  try {
    particles.validate();
  } catch (const std::invalid_argument& e) {
    fail("particles", e.what());
  }
  if (kind == ScenarioKind::kMarkovProbe) {
    if (initial.type == InitialCondition::Type::kAtoms) fail("initial.type", "markov-probe needs a density");
    if (markov.t > solver.t_end + 1e-12) fail("markov.t", "must not exceed solver.t_end");
  }
  if (kind == ScenarioKind::kVerifyUniqueness && uniqueness.resolutions.front() != solver.resolution) {
    fail("uniqueness.resolutions", "must start at solver.resolution");
  }
  if (kind == ScenarioKind::kConvergenceStudy && convergence.parameter == ConvergenceOptions::Parameter::kParticles &&
      initial.type != InitialCondition::Type::kLambOseen && initial.type != InitialCondition::Type::kAtoms) {
    fail("initial.type", "a particle convergence study needs Lamb-Oseen data or a single atom");
  }
  if (convergence.levels < 3) fail("convergence.levels", "a convergence study needs at least 3 levels");
  if (initial.type == InitialCondition::Type::kField && !fs::exists(initial.file)) {
    throw MissingInput("initial field file not found: " + initial.file.string());
  }
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j = {
      {"kind", to_string(kind)},
      {"seed", seed},
      {"name", name},
      {"output_dir", output_dir.generic_string()},
      {"initial", initial_to_json(initial)},
      {"solver", solver.to_json()},
      {"particles", particles.to_json()},
      {"verify",
       {{"horizon", weak.horizon},
        {"base_radius", weak.base_radius},
        {"max_normalized", weak.max_normalized},
        {"linearized", weak.linearized},
        {"max_l1_error", max_l1_error ? nlohmann::json(*max_l1_error) : nlohmann::json()},
        {"max_discrepancy", max_discrepancy ? nlohmann::json(*max_discrepancy) : nlohmann::json()}}},
      {"uniqueness",
       {{"resolutions", uniqueness.resolutions},
        {"eps", uniqueness.eps},
        {"ratio_eps", uniqueness.ratio_eps},
        {"min_ratio", uniqueness.min_ratio}}},
      {"flow", {{"s", flow.s}, {"r", flow.r}, {"t", flow.t}, {"factor", flow.factor}}},
      {"markov",
       {{"r", markov.r},
        {"t", markov.t},
        {"dt", markov.dt},
        {"particles", markov.particles},
        {"bin_radius_factor", markov.bin_radius_factor},
        {"coarse_bins", markov.coarse_bins},
        {"min_population", markov.min_population},
        {"reference_snapshots", markov.reference_snapshots}}},
      {"bench",
       {{"sizes", bench.sizes}, {"max_rel_err", bench.max_rel_err}, {"direct_targets", bench.direct_targets}}},
      {"convergence",
       {{"parameter", convergence.parameter == ConvergenceOptions::Parameter::kResolution ? "resolution" : "particles"},
        {"levels", convergence.levels},
        {"min_order", convergence.min_order}}},
  };
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.name = j.value("name", std::string());
  c.output_dir = j.value("output_dir", std::string());
  c.initial = initial_from_json(j.at("initial"));
  c.solver = SolverConfig::from_json(j.at("solver"));
  c.particles = SdeConfig::from_json(j.at("particles"));
  const auto& v = j.at("verify");
  c.weak = {v.at("horizon").get<double>(), v.at("base_radius").get<double>(), v.at("max_normalized").get<double>(),
            v.at("linearized").get<bool>()};
  if (!v.at("max_l1_error").is_null()) c.max_l1_error = v.at("max_l1_error").get<double>();
  if (!v.at("max_discrepancy").is_null()) c.max_discrepancy = v.at("max_discrepancy").get<double>();
  const auto& u = j.at("uniqueness");
  c.uniqueness = {u.at("resolutions").get<std::vector<int>>(), u.at("eps").get<std::vector<double>>(),
                  u.at("ratio_eps").get<double>(), u.at("min_ratio").get<double>()};
  const auto& f = j.at("flow");
  c.flow = {f.at("s").get<double>(), f.at("r").get<double>(), f.at("t").get<double>(), f.at("factor").get<double>()};
  const auto& m = j.at("markov");
  c.markov = {m.at("r").get<double>(),
              m.at("t").get<double>(),
              m.at("dt").get<double>(),
              m.at("particles").get<std::size_t>(),
              m.at("bin_radius_factor").get<double>(),
              m.at("coarse_bins").get<int>(),
              m.at("min_population").get<std::size_t>(),
              m.at("reference_snapshots").get<int>()};
  const auto& b = j.at("bench");
  c.bench = {b.at("sizes").get<std::vector<std::size_t>>(), b.at("max_rel_err").get<double>(),
             b.at("direct_targets").get<std::size_t>()};
  const auto& cv = j.at("convergence");
  c.convergence.parameter = cv.at("parameter").get<std::string>() == "particles"
                                ? ConvergenceOptions::Parameter::kParticles
                                : ConvergenceOptions::Parameter::kResolution;
  c.convergence.levels = cv.at("levels").get<int>();
  c.convergence.min_order = cv.at("min_order").get<double>();
  return c;
}

std::string ScenarioConfig::hash() const {
  auto j = to_json();
  j.erase("output_dir");
  return hex64(fnv1a(j.dump()));
}

ScenarioConfig parse_scenario(std::string_view toml_text, const std::string& source_name, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
    throw SchemaError(os.str());
  }
  Section top(&root, "", source_name);
  ScenarioConfig c;
  c.name = fs::path(source_name).stem().string();
  const auto kind = top.string("kind", "");
  if (kind.empty()) top.fail("kind", "required");
  try {
    c.kind = parse_kind(kind);
  } catch (const std::invalid_argument& e) {
    top.fail("kind", e.what());
  }
  const auto seed = top.integer("seed", 0);
  if (seed < 0) top.fail("seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  const auto out = top.string("output_dir", "");
  if (!out.empty()) c.output_dir = out;
  read_initial(top.child("initial"), c.initial, base_dir);
  read_solver(top.child("solver"), c.solver);
  read_particles(top.child("particles"), c.particles, c.solver, c.seed);
  read_verify(top.child("verify"), c);
  auto uniqueness = top.child("uniqueness");
  if (!uniqueness.present()) c.uniqueness.resolutions = {c.solver.resolution, 2 * c.solver.resolution, 4 * c.solver.resolution};
  read_uniqueness(std::move(uniqueness), c.uniqueness);
  read_flow(top.child("flow"), c.flow);
  read_markov(top.child("markov"), c.markov);
  read_bench(top.child("bench"), c.bench);
  read_convergence(top.child("convergence"), c.convergence);
  top.reject_unknown();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("scenario file not found: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string(), path.parent_path());
}

}  // namespace vortlab::cli
