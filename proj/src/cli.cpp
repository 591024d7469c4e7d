#include "particle_limits/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "particle_limits/harness.hpp"
#include "particle_limits/parallel.hpp"
#include "particle_limits/serialize.hpp"
#include "particle_limits/ssep.hpp"
#include "particle_limits/svg.hpp"

namespace particle_limits::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

std::string join_context(const std::string& context, const std::string& key) {
  return context.empty() ? key : context + "." + key;
}

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(context + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* candidate : allowed) {
      if (key == candidate) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key \"" + join_context(context, key) + "\"");
  }
}

double get_number(const json& obj, const std::string& context, const char* key,
                  double lo, double hi, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail("missing required key \"" + join_context(context, key) + "\"");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("\"" + join_context(context, key) + "\" must be a number");
  const double value = v.get<double>();
  if (value < lo || value > hi) {
    fail("\"" + join_context(context, key) + "\" = " + format_double(value) +
         " outside allowed range [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
  return value;
}

std::int64_t get_integer(const json& obj, const std::string& context, const char* key,
                         std::int64_t lo, std::int64_t hi,
                         std::optional<std::int64_t> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail("missing required key \"" + join_context(context, key) + "\"");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail("\"" + join_context(context, key) + "\" must be an integer");
  }
  const auto value = v.get<std::int64_t>();
  if (value < lo || value > hi) {
    fail("\"" + join_context(context, key) + "\" = " + std::to_string(value) +
         " outside allowed range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

std::string get_string(const json& obj, const std::string& context, const char* key,
                       std::initializer_list<const char*> allowed,
                       std::optional<std::string> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail("missing required key \"" + join_context(context, key) + "\"");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) fail("\"" + join_context(context, key) + "\" must be a string");
  const auto value = v.get<std::string>();
  if (allowed.size() > 0) {
    bool ok = false;
    std::string options;
    for (const char* candidate : allowed) {
      if (value == candidate) ok = true;
      if (!options.empty()) options += "|";
      options += candidate;
    }
    if (!ok) {
      fail("\"" + join_context(context, key) + "\" = \"" + value +
           "\" not one of " + options);
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// Section parsers: each consumes one config block, rejecting unknown keys.

Profile parse_profile(const json& settings) {
  if (!settings.contains("profile")) fail("missing required section \"profile\"");
  const auto& spec = settings.at("profile");
  const std::string name = get_string(spec, "profile", "name",
                                      {"constant", "cosine", "logistic", "tabulated"}, {});
  if (name == "constant") {
    check_keys(spec, "profile", {"name", "value"});
    get_number(spec, "profile", "value", 0.0, 1e12, {});
  } else if (name == "cosine") {
    check_keys(spec, "profile", {"name", "mean", "amp", "mode", "phase"});
    get_number(spec, "profile", "mean", 0.0, 1e12, {});
    get_number(spec, "profile", "amp", -1e12, 1e12, {});
    get_integer(spec, "profile", "mode", 1, 64, std::int64_t{1});
    get_number(spec, "profile", "phase", -1.0, 1.0, 0.0);
  } else if (name == "logistic") {
    check_keys(spec, "profile", {"name", "base", "height", "center", "half_width", "steepness"});
    get_number(spec, "profile", "height", -1e12, 1e12, {});
    get_number(spec, "profile", "half_width", 0.0, 0.5, {});
  } else {
    check_keys(spec, "profile", {"name", "values"});
    if (!spec.contains("values") || !spec.at("values").is_array()) {
      fail("\"profile.values\" must be an array of numbers");
    }
  }
  try {
    return Profile::from_json(spec);
  } catch (const std::exception& e) {
    fail(std::string("invalid profile: ") + e.what());
  }
}

RateFunction parse_rate(const json& model, const std::string& context, const char* key) {
  if (!model.contains(key)) return RateFunction::zero();
  const auto& spec = model.at(key);
  const std::string ctx = join_context(context, key);
  const std::string family = get_string(
      spec, ctx, "family", {"constant", "linear", "power", "logistic", "tabulated"}, {});
  if (family == "constant") {
    check_keys(spec, ctx, {"family", "value"});
  } else if (family == "linear") {
    check_keys(spec, ctx, {"family", "slope"});
  } else if (family == "power") {
    check_keys(spec, ctx, {"family", "coefficient", "exponent"});
    get_number(spec, ctx, "exponent", 0.0, 16.0, {});
  } else if (family == "logistic") {
    check_keys(spec, ctx, {"family", "scale", "midpoint", "steepness"});
  } else {
    check_keys(spec, ctx, {"family", "values", "s_max"});
  }
  try {
    return RateFunction::from_json(spec);
  } catch (const std::exception& e) {
    fail("invalid \"" + ctx + "\": " + e.what());
  }
}

RateFunctions parse_rates(const json& model, const std::string& context) {
  RateFunctions rates{parse_rate(model, context, "birth"), parse_rate(model, context, "death")};
  try {
    rates.validate();
  } catch (const std::exception& e) {
    fail("invalid \"" + context + "\" rates: " + e.what());
  }
  return rates;
}

PdeGrid parse_grid(const json& settings) {
  PdeGrid grid;
  if (!settings.contains("grid")) return grid;
  const auto& spec = settings.at("grid");
  check_keys(spec, "grid", {"m", "dt", "norm_ceiling", "dt_floor"});
  grid.m = static_cast<int>(get_integer(spec, "grid", "m", 8, 65536, std::int64_t{256}));
  if (spec.contains("dt")) grid.fixed_dt = get_number(spec, "grid", "dt", 1e-15, 1.0, {});
  grid.norm_ceiling = get_number(spec, "grid", "norm_ceiling", 1.0, 1e300, 1e8);
  grid.dt_floor = get_number(spec, "grid", "dt_floor", 1e-300, 1.0, 1e-14);
  try {
    grid.validate();
  } catch (const std::exception& e) {
    fail(std::string("invalid \"grid\": ") + e.what());
  }
  return grid;
}

struct TimeBlock {
  double horizon = 0.0;
  std::vector<double> checkpoints;
};

TimeBlock parse_time(const json& settings, double default_horizon,
                     bool default_checkpoints) {
  TimeBlock block;
  block.horizon = default_horizon;
  if (settings.contains("time")) {
    const auto& spec = settings.at("time");
    check_keys(spec, "time", {"horizon", "checkpoints"});
    block.horizon = get_number(spec, "time", "horizon", 0.0, 1e6, default_horizon);
    if (spec.contains("checkpoints")) {
      if (!spec.at("checkpoints").is_array()) fail("\"time.checkpoints\" must be an array");
      block.checkpoints = spec.at("checkpoints").get<std::vector<double>>();
    }
  }
  if (block.checkpoints.empty() && default_checkpoints) {
    for (int k = 1; k <= 4; ++k) block.checkpoints.push_back(block.horizon * k / 4.0);
  }
  try {
    validate_checkpoints(block.checkpoints, block.horizon);
  } catch (const std::exception& e) {
    fail(std::string("invalid \"time.checkpoints\": ") + e.what());
  }
  return block;
}

ScalingSchedule parse_schedule(const json& settings, bool require_unit_ell) {
  if (!settings.contains("schedule")) fail("missing required section \"schedule\"");
  const auto& spec = settings.at("schedule");
  check_keys(spec, "schedule", {"sizes", "ell_rule"});
  if (!spec.contains("sizes") || !spec.at("sizes").is_array()) {
    fail("\"schedule.sizes\" must be an array of integers");
  }
  ScalingSchedule schedule;
  schedule.sizes = spec.at("sizes").get<std::vector<int>>();
  schedule.ell_rule = EllRule::constant(1.0);
  if (spec.contains("ell_rule")) {
    const auto& rule = spec.at("ell_rule");
    check_keys(rule, "schedule.ell_rule", {"family", "value", "alpha", "beta"});
    try {
      schedule.ell_rule = EllRule::from_json(rule);
    } catch (const std::exception& e) {
      fail(std::string("invalid \"schedule.ell_rule\": ") + e.what());
    }
  }
  if (require_unit_ell &&
      (schedule.ell_rule.family != EllRule::Family::constant ||
       schedule.ell_rule.parameter != 1.0)) {
    fail("hydrodynamic studies require schedule.ell_rule = constant 1");
  }
  try {
    schedule.validate();
  } catch (const std::exception& e) {
    fail(std::string("invalid \"schedule\": ") + e.what());
  }
  return schedule;
}

struct OutputBlock {
  std::filesystem::path dir = ".";
  std::string prefix = "run";

  std::filesystem::path path(const std::string& suffix) const {
    return dir / (prefix + suffix);
  }
};

OutputBlock parse_output(const json& settings) {
  OutputBlock block;
  if (!settings.contains("output")) return block;
  const auto& spec = settings.at("output");
  check_keys(spec, "output", {"dir", "prefix"});
  if (spec.contains("dir")) block.dir = get_string(spec, "output", "dir", {}, {});
  if (spec.contains("prefix")) block.prefix = get_string(spec, "output", "prefix", {}, {});
  return block;
}

// ---------------------------------------------------------------------------
// Subcommand validators: reject unknown sections up front.

const std::vector<std::string> kSubcommands = {"simulate", "solve", "converge", "blowup",
                                               "check"};

void validate_sections(const RunConfig& config) {
  const auto& s = config.settings;
  if (config.subcommand == "simulate") {
    check_keys(s, "", {"seed", "threads", "output", "model", "profile", "time", "replicas"});
  } else if (config.subcommand == "solve") {
    check_keys(s, "", {"seed", "threads", "output", "solve", "model", "profile", "time", "grid"});
  } else if (config.subcommand == "converge") {
    check_keys(s, "",
               {"seed", "threads", "output", "study", "model", "profile", "schedule",
                "time", "replicas", "grid"});
  } else if (config.subcommand == "blowup") {
    check_keys(s, "",
               {"seed", "threads", "output", "model", "profile", "schedule", "replicas",
                "grid", "time", "check"});
  } else if (config.subcommand == "check") {
    check_keys(s, "", {"seed", "threads", "output", "model", "schedule", "check"});
  } else {
    std::string options;
    for (const auto& name : kSubcommands) {
      if (!options.empty()) options += "|";
      options += name;
    }
    fail("unknown subcommand \"" + config.subcommand + "\" (expected " + options + ")");
  }
}

std::uint64_t parse_seed(const json& settings) {
  return static_cast<std::uint64_t>(
      get_integer(settings, "", "seed", 0, std::numeric_limits<std::int64_t>::max(),
                  std::int64_t{1}));
}

int parse_threads(const json& settings) {
  return static_cast<int>(get_integer(settings, "", "threads", 0, 4096, std::int64_t{0}));
}

int parse_replicas(const json& settings, int fallback) {
  return static_cast<int>(
      get_integer(settings, "", "replicas", 1, 10'000'000, std::int64_t{fallback}));
}

struct ModelBlock {
  std::string type;
  int n = 0;
  double ell = 1.0;
  RateFunctions rates;
  double cap_scale = 1e4;
  std::uint64_t event_budget = 4'000'000'000;
};

ModelBlock parse_model(const json& settings, const Profile* profile_for_range_check) {
  if (!settings.contains("model")) fail("missing required section \"model\"");
  const auto& spec = settings.at("model");
  ModelBlock model;
  model.type = get_string(spec, "model", "type", {"ssep", "bdrw"}, {});
  if (model.type == "ssep") {
    check_keys(spec, "model", {"type", "n"});
    model.n = static_cast<int>(get_integer(spec, "model", "n", 2, 1 << 24, {}));
    if (profile_for_range_check &&
        (profile_for_range_check->grid_min() < 0.0 ||
         profile_for_range_check->grid_max() > 1.0)) {
      fail("model ssep requires a profile with range inside [0,1]");
    }
  } else {
    check_keys(spec, "model",
               {"type", "n", "ell", "birth", "death", "cap_scale", "event_budget"});
    model.n = static_cast<int>(get_integer(spec, "model", "n", 2, 1 << 24, {}));
    model.ell = get_number(spec, "model", "ell", 1.0, 1e12, 1.0);
    model.rates = parse_rates(spec, "model");
    model.cap_scale = get_number(spec, "model", "cap_scale", 1.0, 1e15, 1e4);
    model.event_budget = static_cast<std::uint64_t>(get_integer(
        spec, "model", "event_budget", 1, std::numeric_limits<std::int64_t>::max(),
        std::int64_t{4'000'000'000}));
    if (profile_for_range_check && profile_for_range_check->grid_min() < 0.0) {
      fail("model bdrw requires a nonnegative profile");
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Artifact writers shared by the subcommand runners.

void write_json(const OutputBlock& output, const std::string& suffix, const json& payload) {
  atomic_write_file(output.path(suffix), payload.dump(2) + "\n");
}

std::string fixed3(double v) {
  char buffer[48];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), v, std::chars_format::fixed, 3);
  return std::string(buffer, result.ptr);
}

// ---------------------------------------------------------------------------
// Typed job builders: all validation happens here, so parse_config can fail
// fast and run() can reuse the same bundles.

struct SimulateJob {
  OutputBlock output;
  std::uint64_t seed = 1;
  int threads = 0;
  Profile profile = Profile::constant(0.5);
  ModelBlock model;
  TimeBlock time;
  int replicas = 1;
};

SimulateJob prepare_simulate(const json& s) {
  SimulateJob job;
  job.output = parse_output(s);
  job.seed = parse_seed(s);
  job.threads = parse_threads(s);
  job.profile = parse_profile(s);
  job.model = parse_model(s, &job.profile);
  job.time = parse_time(s, 0.1, true);
  job.replicas = parse_replicas(s, 1);
  return job;
}

struct SolveJob {
  OutputBlock output;
  Profile profile = Profile::constant(0.5);
  PdeGrid grid;
  TimeBlock time;
  std::string equation = "heat";
  RateFunctions rates;
};

SolveJob prepare_solve(const json& s) {
  SolveJob job;
  job.output = parse_output(s);
  job.profile = parse_profile(s);
  job.grid = parse_grid(s);
  job.time = parse_time(s, 0.1, true);
  if (s.contains("solve")) {
    const auto& spec = s.at("solve");
    check_keys(spec, "solve", {"equation"});
    job.equation = get_string(spec, "solve", "equation", {"heat", "reaction_diffusion"},
                              std::string("heat"));
  }
  if (job.equation == "reaction_diffusion") {
    if (!s.contains("model")) fail("reaction_diffusion solve needs a \"model\" section");
    const auto& model_spec = s.at("model");
    check_keys(model_spec, "model", {"birth", "death"});
    job.rates = parse_rates(model_spec, "model");
    if (job.profile.grid_min() < 0.0) fail("reaction_diffusion needs a nonnegative profile");
  }
  return job;
}

struct ConvergeJob {
  OutputBlock output;
  std::string kind = "hydrodynamic";
  HydrodynamicStudyConfig hydro;
  HighDensityStudyConfig high;
};

ConvergeJob prepare_converge(const json& s) {
  ConvergeJob job;
  job.output = parse_output(s);
  int test_modes = 3;
  if (s.contains("study")) {
    const auto& spec = s.at("study");
    check_keys(spec, "study", {"kind", "test_modes"});
    job.kind = get_string(spec, "study", "kind", {"hydrodynamic", "high_density"},
                          std::string("hydrodynamic"));
    test_modes =
        static_cast<int>(get_integer(spec, "study", "test_modes", 0, 16, std::int64_t{3}));
  }
  if (job.kind == "hydrodynamic") {
    auto& study = job.hydro;
    study.profile = parse_profile(s);
    study.sizes = parse_schedule(s, true).sizes;
    const auto time = parse_time(s, 0.05, true);
    study.horizon = time.horizon;
    study.checkpoints = time.checkpoints;
    study.replicas = parse_replicas(s, 200);
    study.test_modes = test_modes;
    study.master_seed = parse_seed(s);
    study.grid = parse_grid(s);
    study.threads = parse_threads(s);
    if (study.profile.grid_min() < 0.0 || study.profile.grid_max() > 1.0) {
      fail("hydrodynamic study requires a profile with range inside [0,1]");
    }
  } else {
    auto& study = job.high;
    study.profile = parse_profile(s);
    study.schedule = parse_schedule(s, false);
    const auto time = parse_time(s, 0.5, true);
    study.horizon = time.horizon;
    study.checkpoints = time.checkpoints;
    study.replicas = parse_replicas(s, 100);
    study.master_seed = parse_seed(s);
    study.grid = parse_grid(s);
    study.threads = parse_threads(s);
    if (!s.contains("model")) fail("high_density study needs a \"model\" section");
    const auto& model_spec = s.at("model");
    check_keys(model_spec, "model", {"birth", "death", "cap_scale", "event_budget"});
    study.rates = parse_rates(model_spec, "model");
    study.cap_scale = get_number(model_spec, "model", "cap_scale", 1.0, 1e15, 1e6);
    study.event_budget = static_cast<std::uint64_t>(get_integer(
        model_spec, "model", "event_budget", 1,
        std::numeric_limits<std::int64_t>::max(), std::int64_t{4'000'000'000}));
    if (study.profile.grid_min() < 0.0) {
      fail("high_density study requires a nonnegative profile");
    }
  }
  return job;
}

struct BlowupJob {
  OutputBlock output;
  BlowupStudyConfig study;
};

BlowupJob prepare_blowup(const json& s) {
  BlowupJob job;
  job.output = parse_output(s);
  auto& study = job.study;
  study.profile = parse_profile(s);
  study.schedule = parse_schedule(s, false);
  study.replicas = parse_replicas(s, 100);
  study.master_seed = parse_seed(s);
  study.grid = parse_grid(s);
  study.threads = parse_threads(s);
  study.horizon = parse_time(s, 64.0, false).horizon;
  if (!s.contains("model")) fail("blowup study needs a \"model\" section");
  const auto& model_spec = s.at("model");
  check_keys(model_spec, "model", {"birth", "death", "cap_scale", "event_budget"});
  study.rates = parse_rates(model_spec, "model");
  study.cap_scale = get_number(model_spec, "model", "cap_scale", 1.0, 1e15, 1e4);
  study.event_budget = static_cast<std::uint64_t>(
      get_integer(model_spec, "model", "event_budget", 1,
                  std::numeric_limits<std::int64_t>::max(), std::int64_t{4'000'000'000}));
  if (study.profile.grid_min() < 0.0) fail("blowup study requires a nonnegative profile");
  if (s.contains("check")) {
    const auto& check_spec = s.at("check");
    check_keys(check_spec, "check", {"criterion"});
    if (check_spec.contains("criterion")) {
      const auto& criterion = check_spec.at("criterion");
      check_keys(criterion, "check.criterion", {"tail_start", "s_max"});
      study.criterion_tail_start =
          get_number(criterion, "check.criterion", "tail_start", 0.0, 1e12, 1.0);
      study.criterion_s_max =
          get_number(criterion, "check.criterion", "s_max", 1e-6, 1e15, 1e6);
      if (study.criterion_s_max <= study.criterion_tail_start) {
        fail("\"check.criterion.s_max\" must exceed \"check.criterion.tail_start\"");
      }
    }
  }
  return job;
}

struct CheckJob {
  OutputBlock output;
  bool has_criterion = false;
  RateFunctions rates;
  double tail_start = 1.0;
  double s_max = 1e6;
  bool has_a2 = false;
  EllRule rule = EllRule::constant(1.0);
  std::vector<double> c_grid{0.01, 0.1, 1.0, 4.0};
  double n_max = 1e6;
};

CheckJob prepare_check(const json& s) {
  CheckJob job;
  job.output = parse_output(s);
  if (!s.contains("check")) {
    fail("check subcommand needs a \"check\" section with \"criterion\" and/or \"a2\"");
  }
  const auto& check_spec = s.at("check");
  check_keys(check_spec, "check", {"criterion", "a2"});
  if (check_spec.contains("criterion")) {
    job.has_criterion = true;
    if (!s.contains("model")) fail("criterion check needs a \"model\" section");
    const auto& model_spec = s.at("model");
    check_keys(model_spec, "model", {"birth", "death"});
    job.rates = parse_rates(model_spec, "model");
    const auto& criterion = check_spec.at("criterion");
    check_keys(criterion, "check.criterion", {"tail_start", "s_max"});
    job.tail_start = get_number(criterion, "check.criterion", "tail_start", 0.0, 1e12, 1.0);
    job.s_max = get_number(criterion, "check.criterion", "s_max", 1e-6, 1e15, 1e6);
    if (job.s_max <= job.tail_start) {
      fail("\"check.criterion.s_max\" must exceed \"check.criterion.tail_start\"");
    }
  }
  if (check_spec.contains("a2")) {
    job.has_a2 = true;
    if (!s.contains("schedule")) fail("a2 check needs a \"schedule\" section (ell_rule)");
    job.rule = parse_schedule(s, false).ell_rule;
    const auto& a2 = check_spec.at("a2");
    check_keys(a2, "check.a2", {"c_grid", "n_max"});
    if (a2.contains("c_grid")) {
      if (!a2.at("c_grid").is_array()) fail("\"check.a2.c_grid\" must be an array");
      job.c_grid = a2.at("c_grid").get<std::vector<double>>();
    }
    job.n_max = get_number(a2, "check.a2", "n_max", 64.0, 1e300, 1e6);
    for (const double c : job.c_grid) {
      if (!(c > 0.0)) fail("\"check.a2.c_grid\" entries must be positive");
    }
  }
  if (!job.has_criterion && !job.has_a2) {
    fail("check subcommand needs \"check.criterion\" and/or \"check.a2\"");
  }
  return job;
}

void validate_typed(const RunConfig& config) {
  const auto& s = config.settings;
  if (config.subcommand == "simulate") {
    (void)prepare_simulate(s);
  } else if (config.subcommand == "solve") {
    (void)prepare_solve(s);
  } else if (config.subcommand == "converge") {
    (void)prepare_converge(s);
  } else if (config.subcommand == "blowup") {
    (void)prepare_blowup(s);
  } else if (config.subcommand == "check") {
    (void)prepare_check(s);
  }
}

// ---------------------------------------------------------------------------
// Subcommand runners.

int run_simulate(const RunConfig& config, std::ostream& out) {
  const auto& s = config.settings;
  const auto job = prepare_simulate(s);
  const auto& output = job.output;
  const auto seed = job.seed;
  const auto& profile = job.profile;
  const auto& model = job.model;
  const auto& time = job.time;
  const int replicas = job.replicas;
  const int threads = job.threads;

  std::string trajectories = "replica,checkpoint_time,site,occupation\n";
  std::string summary;
  json replica_rows = json::array();

  if (model.type == "ssep") {
    summary = "replica,events,total_particles\n";
    std::vector<Trajectory> results(replicas);
    parallel_for_replicas(replicas, threads, [&](int r) {
      RngStream init(seed, static_cast<std::uint32_t>(r),
                     RngStream::Channel::initial_condition);
      const auto start = sample_initial_exclusion(model.n, profile, init);
      SsepParams params{model.n, time.horizon, time.checkpoints};
      RngStream dyn(seed, static_cast<std::uint32_t>(r), RngStream::Channel::dynamics);
      results[r] = ssep_run(start, params, dyn);
    });
    for (int r = 0; r < replicas; ++r) {
      const auto csv = trajectory_csv(results[r], r);
      trajectories.append(csv, csv.find('\n') + 1, std::string::npos);
      summary += std::to_string(r) + "," + std::to_string(results[r].event_count) + "," +
                 std::to_string(results[r].snapshots.back().config.total_particles()) +
                 "\n";
      replica_rows.push_back({{"replica", r},
                              {"status", "completed"},
                              {"events", results[r].event_count}});
    }
    out << "simulate ssep n=" << model.n << " replicas=" << replicas << "\n";
  } else {
    summary = "replica,outcome,tau_estimate,events,max_occupation\n";
    std::vector<RunOutcome> results(replicas);
    parallel_for_replicas(replicas, threads, [&](int r) {
      RngStream init(seed, static_cast<std::uint32_t>(r),
                     RngStream::Channel::initial_condition);
      const auto start = sample_initial_density(model.n, model.ell, profile, init);
      BdrwParams params;
      params.n = model.n;
      params.ell = model.ell;
      params.horizon = time.horizon;
      params.checkpoints = time.checkpoints;
      params.cap = model.cap_scale * model.ell;
      params.event_budget = model.event_budget;
      RngStream dyn(seed, static_cast<std::uint32_t>(r), RngStream::Channel::dynamics);
      results[r] = bdrw_run(start, model.rates, params, dyn);
    });
    for (int r = 0; r < replicas; ++r) {
      const auto& outcome = results[r];
      const auto csv = trajectory_csv(outcome.trajectory, r);
      trajectories.append(csv, csv.find('\n') + 1, std::string::npos);
      summary += std::to_string(r) + "," + std::string(run_status_name(outcome.status)) +
                 "," +
                 (outcome.tau_estimate ? format_double(*outcome.tau_estimate) : "") + "," +
                 std::to_string(outcome.trajectory.event_count) + "," +
                 std::to_string(outcome.final_max_occupation) + "\n";
      replica_rows.push_back({{"replica", r},
                              {"status", run_status_name(outcome.status)},
                              {"tau_estimate", outcome.tau_estimate
                                                   ? json(*outcome.tau_estimate)
                                                   : json(nullptr)},
                              {"events", outcome.trajectory.event_count},
                              {"max_occupation", outcome.final_max_occupation}});
    }
    out << "simulate bdrw n=" << model.n << " ell=" << format_double(model.ell)
        << " replicas=" << replicas << "\n";
  }

  atomic_write_file(output.path("_trajectories.csv"), trajectories);
  atomic_write_file(output.path("_summary.csv"), summary);
  write_json(output, "_run.json",
             json{{"schema_version", kSchemaVersion},
                  {"subcommand", "simulate"},
                  {"config", s},
                  {"replicas", replica_rows}});
  return 0;
}

int run_solve(const RunConfig& config, std::ostream& out) {
  const auto& s = config.settings;
  const auto job = prepare_solve(s);
  const auto& output = job.output;
  const auto& grid = job.grid;
  const auto& equation = job.equation;

  PdeSolution solution;
  if (equation == "heat") {
    solution = solve_heat(job.profile, job.time.horizon, grid, job.time.checkpoints);
  } else {
    solution = solve_reaction_diffusion(job.profile, job.rates, job.time.horizon, grid,
                                        job.time.checkpoints);
  }

  atomic_write_file(output.path("_solution.csv"), pde_csv(solution));
  auto payload = pde_solution_to_json(solution);
  payload["config"] = s;
  write_json(output, "_solution.json", payload);

  std::vector<SvgSeries> series;
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    SvgSeries line;
    line.label = "t = " + format_double(solution.times[k]);
    for (int i = 0; i < solution.m; ++i) {
      line.points.emplace_back(double(i) / solution.m, solution.values[k][i]);
    }
    series.push_back(std::move(line));
  }
  if (!series.empty()) {
    SvgAxes axes;
    axes.title = equation == "heat" ? "heat profile snapshots" : "reaction-diffusion snapshots";
    axes.x_label = "u";
    axes.y_label = "rho";
    atomic_write_file(output.path("_profiles.svg"), emit_svg(series, axes));
  }

  out << "solve " << equation << " m=" << grid.m << " status="
      << pde_status_name(solution.status);
  if (solution.status == PdeStatus::blew_up) {
    out << " blowup_estimate=" << format_double(solution.blowup_estimate);
  }
  out << "\n";
  return 0;
}

int run_converge(const RunConfig& config, std::ostream& out) {
  const auto& s = config.settings;
  const auto job = prepare_converge(s);
  const auto& output = job.output;
  const ConvergenceReport report =
      job.kind == "hydrodynamic" ? hydrodynamic_study(job.hydro) : high_density_study(job.high);

  write_json(output, "_report.json", convergence_report_to_json(report));
  atomic_write_file(output.path("_summary.csv"), convergence_csv(report));

  SvgSeries median_series{"median error", {}};
  SvgSeries max_series{"max error", {}};
  for (const auto& level : report.levels) {
    if (level.overall.count == 0) continue;
    median_series.points.emplace_back(double(level.n), level.overall.median);
    max_series.points.emplace_back(double(level.n), level.overall.max);
  }
  if (!median_series.points.empty()) {
    SvgAxes axes;
    axes.title = report.study + " convergence";
    axes.x_label = "n";
    axes.y_label = "error";
    axes.x_log = true;
    axes.y_log = true;
    axes.annotation = "slope = " + fixed3(report.fitted_slope);
    atomic_write_file(output.path("_error_vs_n.svg"),
                      emit_svg({median_series, max_series}, axes));
  }

  for (const auto& level : report.levels) {
    out << "converge " << report.study << " n=" << level.n
        << " ell=" << format_double(level.ell) << " replicas=" << level.replicas_used
        << " median=" << format_double(level.overall.median)
        << " max=" << format_double(level.overall.max);
    if (level.exploded > 0) out << " exploded=" << level.exploded;
    out << "\n";
  }
  out << "converge " << report.study << " fitted_slope=" << fixed3(report.fitted_slope)
      << "\n";
  return 0;
}

int run_blowup(const RunConfig& config, std::ostream& out) {
  const auto& s = config.settings;
  const auto job = prepare_blowup(s);
  const auto& output = job.output;
  const auto& study = job.study;
  const auto comparison = blowup_study(study);
  write_json(output, "_report.json", blowup_comparison_to_json(comparison));
  atomic_write_file(output.path("_summary.csv"), blowup_csv(comparison));

  // Ladder plot: inverse density scale against the first-hit times, one
  // series per level, for the first exploded replica at that level.
  std::vector<SvgSeries> ladder_series;
  for (std::size_t level_index = 0; level_index < comparison.levels.size(); ++level_index) {
    const auto& level = comparison.levels[level_index];
    if (level.exploded == 0) continue;
    const auto base = static_cast<std::uint32_t>(level_index) *
                      static_cast<std::uint32_t>(study.replicas);
    for (int r = 0; r < study.replicas; ++r) {
      RngStream init(study.master_seed, base + static_cast<std::uint32_t>(r),
                     RngStream::Channel::initial_condition);
      const auto start = sample_initial_density(level.n, level.ell, study.profile, init);
      BdrwParams params;
      params.n = level.n;
      params.ell = level.ell;
      params.horizon = study.horizon;
      params.cap = study.cap_scale * level.ell;
      params.event_budget = study.event_budget;
      RngStream dyn(study.master_seed, base + static_cast<std::uint32_t>(r),
                    RngStream::Channel::dynamics);
      const auto outcome = bdrw_run(start, study.rates, params, dyn);
      if (outcome.status != RunStatus::exploded) continue;
      SvgSeries series;
      series.label = "n=" + std::to_string(level.n) + " ell=" + format_double(level.ell);
      for (const auto& hit : outcome.threshold_hits) {
        series.points.emplace_back(hit.time, level.ell / hit.threshold);
      }
      ladder_series.push_back(std::move(series));
      break;
    }
  }
  if (!ladder_series.empty()) {
    SvgAxes axes;
    axes.title = "explosion threshold ladder";
    axes.x_label = "first-hit time";
    axes.y_label = "ell / threshold";
    axes.y_log = true;
    if (comparison.pde_blowup_estimate > 0.0) {
      axes.annotation =
          "pde blow-up estimate = " + fixed3(comparison.pde_blowup_estimate);
    }
    atomic_write_file(output.path("_ladder.svg"), emit_svg(ladder_series, axes));
  }

  for (const auto& level : comparison.levels) {
    out << "blowup n=" << level.n << " ell=" << format_double(level.ell)
        << " exploded=" << level.exploded << "/" << level.replicas_requested
        << " tau_median=" << format_double(level.tau.median)
        << " pde=" << format_double(comparison.pde_blowup_estimate)
        << " offset=" << fixed3(level.relative_offset) << "\n";
  }
  return 0;
}

int run_check(const RunConfig& config, std::ostream& out) {
  const auto& s = config.settings;
  const auto job = prepare_check(s);
  const auto& output = job.output;

  if (job.has_criterion) {
    const auto report = check_blowup_criterion(job.rates, job.tail_start, job.s_max);
    auto payload = criterion_report_to_json(report);
    payload["config"] = s;
    write_json(output, "_criterion.json", payload);
    out << "check criterion verdict=" << criterion_verdict_name(report.verdict)
        << " convex=" << (report.convex_on_tail ? "yes" : "no")
        << " positive=" << (report.positive_on_tail ? "yes" : "no")
        << " integral_finite=" << (report.integral_finite ? "yes" : "no") << "\n";
  }

  if (job.has_a2) {
    const auto report = check_a2(job.rule, job.c_grid, job.n_max);
    auto payload = a2_report_to_json(report);
    payload["config"] = s;
    write_json(output, "_a2.json", payload);
    out << "check a2 rule=" << job.rule.name()
        << " convergent=" << (report.overall_convergent ? "yes" : "no")
        << " grid_relative=yes\n";
  }
  return 0;
}

}  // namespace

RunConfig parse_config(const std::string& subcommand, const std::vector<std::string>& args) {
  json settings = json::object();
  std::vector<std::pair<std::string, std::string>> overrides;

  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0) {
      fail("expected --key value pairs, got \"" + arg + "\"");
    }
    const std::string key = arg.substr(2);
    if (i + 1 >= args.size()) fail("flag \"" + arg + "\" is missing a value");
    const std::string& value = args[++i];
    if (key == "config") {
      std::ifstream in(value);
      if (!in) fail("cannot open config file \"" + value + "\"");
      try {
        settings = json::parse(in);
      } catch (const json::parse_error& e) {
        fail("config file \"" + value + "\" is not valid JSON: " + e.what());
      }
      if (!settings.is_object()) fail("config file must hold a JSON object");
    } else {
      overrides.emplace_back(key, value);
    }
  }

  // Flags mirror config keys one-to-one; apply them over the file document.
  for (const auto& [key, value] : overrides) {
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    json* node = &settings;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty()) fail("malformed flag key \"--" + key + "\"");
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
      node = &(*node)[part];
      start = dot + 1;
    }
  }

  RunConfig config{subcommand, std::move(settings)};
  validate_sections(config);
  validate_typed(config);
  return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.subcommand == "simulate") return run_simulate(config, out);
    if (config.subcommand == "solve") return run_solve(config, out);
    if (config.subcommand == "converge") return run_converge(config, out);
    if (config.subcommand == "blowup") return run_blowup(config, out);
    if (config.subcommand == "check") return run_check(config, out);
    fail("unknown subcommand \"" + config.subcommand + "\"");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    try {
      const auto output = parse_output(config.settings);
      write_json(output, "_error.json",
                 json{{"schema_version", kSchemaVersion},
                      {"subcommand", config.subcommand},
                      {"error", e.what()},
                      {"config", config.settings}});
    } catch (...) {
      // Error reports are best effort.
    }
    return 1;
  }
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    if (argc < 2) {
      err << "usage: particle-limits <simulate|solve|converge|blowup|check> "
             "[--config file.json] [--key.path value ...]\n";
      return 2;
    }
    std::vector<std::string> args;
    for (int i = 2; i < argc; ++i) args.emplace_back(argv[i]);
    const auto config = parse_config(argv[1], args);
    return run(config, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace particle_limits::cli
