#pragma once

// Experiment harness: suite files, single experiments, and their reports.
//
// A suite file is UTF-8 text made of blocks. Each block starts with a
// `[name]` header followed by `key = value` lines; `#` starts a comment.
//
//   [bilateral-smoothing]
//   input = procedural:256
//   op = bilat:ss=2,sr=1.5
//   noise = 0.05
//   max_iters = 200
//
// Keys: input, op, noise, noise_seed, gamma, mu, tau, max_iters, mode, lambda,
// denoiser, epsilon, probe_samples, probe_seed, outputs.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rendition/image.hpp"
#include "rendition/image_io.hpp"
#include "rendition/lipschitz.hpp"
#include "rendition/metrics.hpp"
#include "rendition/noise.hpp"
#include "rendition/operator_spec.hpp"
#include "rendition/solver.hpp"
#include "rendition/test_image.hpp"

namespace rendition {

class SuiteParseError : public std::runtime_error {
 public:
  SuiteParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + msg),
        line_(line), column_(column) {}
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  int line_;
  int column_;
};

inline std::optional<SolverMode> parse_solver_mode(std::string_view s) {
  if (s == "approximate") return SolverMode::approximate;
  if (s == "exact_gradient") return SolverMode::exact_gradient;
  if (s == "red") return SolverMode::red;
  return std::nullopt;
}

struct SolverOverrides {
  std::optional<double> gamma, mu, tau, lambda, epsilon;
  std::optional<int> max_iters;
  std::optional<SolverMode> mode;
  std::optional<OperatorSpec> denoiser;  // red mode
};

struct ExperimentSpec {
  std::string name;
  std::string input = "procedural";  // "procedural[:size[:channels]]" or an image path
  OperatorSpec op;
  std::optional<NoiseSpec> noise;
  SolverOverrides solver;
  int probe_samples = ProbeConfig{}.n_samples;
  std::uint64_t probe_seed = ProbeConfig{}.seed;
  std::string outputs;  // directory for images and the row JSON; empty = none
};

struct ExperimentReport {
  std::string name;
  std::string op;
  std::string input;
  double noise_sigma = 0.0;
  double m_hat = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  double psnr_degraded = 0.0;
  // Best PSNR over iterates 0..k (iterate 0 is the observation itself).
  double psnr_rendered_best = 0.0;
  double psnr_rendered_final = 0.0;
  // PSNR of the solver's own output (minimum-residual iterate, clamped).
  double psnr_estimate = 0.0;
  int iterations = 0;
  int best_psnr_iteration = 0;
  std::string stop_reason;
  std::uint64_t activations = 0;
  double wall_time = 0.0;  // seconds
  std::string error;       // empty when the row ran

  [[nodiscard]] bool ok() const { return error.empty(); }
  [[nodiscard]] double delta_psnr() const { return psnr_rendered_best - psnr_degraded; }
};

// ---------------------------------------------------------------------------
// Inputs

/// Loads `input` relative to `base_dir`, or synthesizes the procedural image
/// for "procedural", "procedural:SIZE" and "procedural:SIZE:CHANNELS".
inline Image resolve_input(const std::string& input, const std::filesystem::path& base_dir = {}) {
  constexpr std::string_view kProcedural = "procedural";
  if (input.rfind(kProcedural, 0) == 0 &&
      (input.size() == kProcedural.size() || input[kProcedural.size()] == ':')) {
    int size = 256, channels = 1;
    if (input.size() > kProcedural.size()) {
      const std::string rest = input.substr(kProcedural.size() + 1);
      const auto colon = rest.find(':');
      try {
        std::size_t used = 0;
        size = std::stoi(rest.substr(0, colon), &used);
        if (used != rest.substr(0, colon).size()) throw std::invalid_argument(rest);
        if (colon != std::string::npos) {
          channels = std::stoi(rest.substr(colon + 1), &used);
          if (used != rest.size() - colon - 1) throw std::invalid_argument(rest);
        }
      } catch (const std::exception&) {
        throw std::invalid_argument("bad procedural input '" + input + "'");
      }
    }
    if (size < 8 || (channels != 1 && channels != 3)) {
      throw std::invalid_argument("bad procedural input '" + input + "'");
    }
    return procedural_test_image(size, channels);
  }
  std::filesystem::path p(input);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return load_image(p);
}

// ---------------------------------------------------------------------------
// Suite parsing

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_suite_number(std::string_view text, int line, int column) {
  T v{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw SuiteParseError("expected a number, got '" + std::string(text) + "'", line, column);
  }
  return v;
}

}  // namespace detail

inline std::vector<ExperimentSpec> parse_suite(std::string_view text) {
  std::vector<ExperimentSpec> specs;
  std::vector<std::set<std::string>> seen_keys;
  std::vector<int> header_lines;
  std::set<std::string> names;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;

    if (line.front() == '[') {
      if (line.back() != ']') throw SuiteParseError("unterminated block header", line_no, indent);
      const std::string name(detail::trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw SuiteParseError("empty experiment name", line_no, indent + 1);
      if (!names.insert(name).second) {
        throw SuiteParseError("duplicate experiment name '" + name + "'", line_no, indent + 1);
      }
      specs.emplace_back().name = name;
      seen_keys.emplace_back();
      header_lines.push_back(line_no);
      continue;
    }
    if (specs.empty()) throw SuiteParseError("expected a [name] block header", line_no, indent);

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw SuiteParseError("expected key = value", line_no, indent);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const int vcol = indent + static_cast<int>(line.size() - line.substr(eq + 1).size()) +
                     static_cast<int>(line.substr(eq + 1).find_first_not_of(" \t"));
    if (!seen_keys.back().insert(key).second) {
      throw SuiteParseError("duplicate key '" + key + "'", line_no, indent);
    }
    if (value.empty()) throw SuiteParseError("missing value for '" + key + "'", line_no, vcol);

    ExperimentSpec& spec = specs.back();
    auto real = [&] { return detail::parse_suite_number<double>(value, line_no, vcol); };
    auto whole = [&] { return detail::parse_suite_number<long long>(value, line_no, vcol); };
    auto op_spec = [&] {
      try {
        return parse_spec(value);
      } catch (const SpecParseError& e) {
        throw SuiteParseError(e.message(), line_no, vcol + e.column() - 1);
      }
    };
    if (key == "input") {
      spec.input = std::string(value);
    } else if (key == "op") {
      spec.op = op_spec();
    } else if (key == "noise") {
      if (!spec.noise) spec.noise = NoiseSpec{0.0, 1};
      spec.noise->sigma = real();
      if (!(spec.noise->sigma >= 0.0)) throw SuiteParseError("noise must be >= 0", line_no, vcol);
    } else if (key == "noise_seed") {
      if (!spec.noise) spec.noise = NoiseSpec{0.0, 1};
      spec.noise->seed = static_cast<std::uint64_t>(whole());
    } else if (key == "gamma") {
      spec.solver.gamma = real();
    } else if (key == "mu") {
      spec.solver.mu = real();
    } else if (key == "tau") {
      spec.solver.tau = real();
    } else if (key == "lambda") {
      spec.solver.lambda = real();
    } else if (key == "epsilon") {
      spec.solver.epsilon = real();
    } else if (key == "max_iters") {
      spec.solver.max_iters = static_cast<int>(whole());
    } else if (key == "mode") {
      spec.solver.mode = parse_solver_mode(value);
      if (!spec.solver.mode) throw SuiteParseError("unknown mode '" + std::string(value) + "'", line_no, vcol);
    } else if (key == "denoiser") {
      spec.solver.denoiser = op_spec();
    } else if (key == "probe_samples") {
      spec.probe_samples = static_cast<int>(whole());
      if (spec.probe_samples < 1) throw SuiteParseError("probe_samples must be >= 1", line_no, vcol);
    } else if (key == "probe_seed") {
      spec.probe_seed = static_cast<std::uint64_t>(whole());
    } else if (key == "outputs") {
      spec.outputs = std::string(value);
    } else {
      throw SuiteParseError("unknown key '" + key + "'", line_no, indent);
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!seen_keys[i].count("op")) {
      throw SuiteParseError("experiment '" + specs[i].name + "' has no op", header_lines[i], 1);
    }
  }
  return specs;
}

inline std::vector<ExperimentSpec> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read suite file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite(buf.str());
}

// ---------------------------------------------------------------------------
// Running

/// Solver configuration for an observation whose operator has estimate m_hat:
/// defaults, then mu from derive_mu_for_tolerance, then explicit overrides.
inline SolverConfig resolve_solver_config(const SolverOverrides& o, double m_hat) {
  SolverConfig cfg;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.tau) cfg.tau = *o.tau;
  cfg.mu = o.mu ? *o.mu : derive_mu_for_tolerance(m_hat, cfg.tau);
  if (o.max_iters) cfg.max_iters = *o.max_iters;
  if (o.mode) cfg.mode = *o.mode;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  return cfg;
}

struct RenderRun {
  LipschitzEstimate estimate;
  SolverConfig config;
  RenditionResult result;
};

/// estimate_lipschitz -> mu -> solve. `truth` enables PSNR tracking.
inline RenderRun render_observation(const BlackBoxOperator& f, const Image& y,
                                    const SolverOverrides& overrides, const ProbeConfig& probe,
                                    const std::optional<Image>& truth = std::nullopt) {
  RenderRun run;
  run.estimate = estimate_lipschitz(f, probe);
  run.config = resolve_solver_config(overrides, run.estimate.m_hat);
  std::optional<BlackBoxOperator> denoiser;
  if (overrides.denoiser) denoiser = build_operator(*overrides.denoiser);
  run.result = solve(f, y, run.config, denoiser, truth);
  return run;
}

/// Fills the PSNR and iteration fields of `report` from a finished run.
inline void summarize_run(const RenderRun& run, ExperimentReport& report) {
  const RenditionResult& r = run.result;
  report.m_hat = run.estimate.m_hat;
  report.mu = run.config.mu;
  report.gamma = run.config.gamma;
  report.iterations = r.iterations_run;
  report.stop_reason = to_string(r.stop_reason);
  report.activations = r.activations_used;
  if (r.psnr_initial) {
    report.psnr_degraded = *r.psnr_initial;
    report.psnr_rendered_best = *r.psnr_initial;
    report.best_psnr_iteration = 0;
    const auto& traj = *r.psnr_trajectory;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj[k] > report.psnr_rendered_best) {
        report.psnr_rendered_best = traj[k];
        report.best_psnr_iteration = static_cast<int>(k) + 1;
      }
    }
    report.psnr_rendered_final = *r.psnr_final;
    report.psnr_estimate = *r.psnr_best;
  }
}

inline nlohmann::json to_json(const Shape& s) {
  return {{"width", s.width}, {"height", s.height}, {"channels", s.channels}};
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j = {
      {"name", r.name},
      {"op", r.op},
      {"input", r.input},
      {"noise_sigma", r.noise_sigma},
      {"m_hat", r.m_hat},
      {"mu", r.mu},
      {"gamma", r.gamma},
      {"psnr_degraded", r.psnr_degraded},
      {"psnr_rendered_best", r.psnr_rendered_best},
      {"psnr_rendered_final", r.psnr_rendered_final},
      {"psnr_estimate", r.psnr_estimate},
      {"delta_psnr", r.delta_psnr()},
      {"iterations", r.iterations},
      {"best_psnr_iteration", r.best_psnr_iteration},
      {"stop_reason", r.stop_reason},
      {"activations", r.activations},
      {"wall_time", r.wall_time},
  };
  if (!r.ok()) j["error"] = r.error;
  return j;
}

inline nlohmann::json to_json(const RenditionResult& r) {
  nlohmann::json j = {
      {"stop_reason", to_string(r.stop_reason)},
      {"iterations", r.iterations_run},
      {"activations", r.activations_used},
      {"initial_residual", r.initial_residual},
      {"best_iteration", r.best_iteration},
      {"best_residual", r.best_residual},
      {"residuals", r.residual_trajectory},
  };
  if (r.psnr_trajectory) j["psnrs"] = *r.psnr_trajectory;
  return j;
}

inline nlohmann::json to_json(const LipschitzEstimate& e) {
  return {{"m_hat", e.m_hat},
          {"n_samples", e.n_samples},
          {"seed", e.seed},
          {"shape", to_json(e.shape)},
          {"argmax_index", e.argmax_index}};
}

/// Runs one experiment. Failures are captured in report.error, never thrown.
inline ExperimentReport run_experiment(const ExperimentSpec& spec,
                                       const std::filesystem::path& base_dir = {}) {
  ExperimentReport report;
  report.name = spec.name;
  report.op = format_spec(spec.op);
  report.input = spec.input;
  report.noise_sigma = spec.noise ? spec.noise->sigma : 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Image truth = resolve_input(spec.input, base_dir);
    const BlackBoxOperator f = build_operator(spec.op);
    Image y = f(truth);
    if (spec.noise) y = add_noise(y, *spec.noise);
    ProbeConfig probe;
    probe.n_samples = spec.probe_samples;
    probe.seed = spec.probe_seed;
    const RenderRun run = render_observation(f, y, spec.solver, probe, truth);
    summarize_run(run, report);
    if (!spec.outputs.empty()) {
      std::filesystem::path dir(spec.outputs);
      if (dir.is_relative() && !base_dir.empty()) dir = base_dir / dir;
      std::filesystem::create_directories(dir);
      save_image(clamp01(y), dir / (spec.name + "_degraded.pgm"), 16);
      save_image(run.result.estimate, dir / (spec.name + "_rendered.pgm"), 16);
      nlohmann::json j = to_json(report);
      j["result"] = to_json(run.result);
      j["lipschitz"] = to_json(run.estimate);
      std::ofstream(dir / (spec.name + ".json")) << j.dump(2) << '\n';
    }
  } catch (const RenditionFailure& e) {
    report.error = e.what();
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Runs every experiment, up to `jobs` at a time; reports keep suite order.
inline std::vector<ExperimentReport> run_suite(const std::vector<ExperimentSpec>& specs,
                                               const std::filesystem::path& base_dir = {},
                                               unsigned jobs = 1) {
  std::vector<ExperimentReport> reports(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      reports[i] = run_experiment(specs[i], base_dir);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(specs.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return reports;
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {
      "name",          "op",           "input",
      "noise_sigma",   "m_hat",        "mu",
      "gamma",         "psnr_degraded", "psnr_rendered_best",
      "psnr_rendered_final", "psnr_estimate", "delta_psnr",
      "iterations",    "best_psnr_iteration", "stop_reason",
      "activations",   "error",        "wall_time"};
  return cols;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One header line plus one row per report. wall_time is the last column so
/// determinism checks can drop it.
inline void write_reports_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : reports) {
    const std::vector<std::string> cells = {
        csv_escape(r.name),
        csv_escape(r.op),
        csv_escape(r.input),
        detail::format_number(r.noise_sigma),
        detail::format_number(r.m_hat),
        detail::format_number(r.mu),
        detail::format_number(r.gamma),
        detail::format_number(r.psnr_degraded),
        detail::format_number(r.psnr_rendered_best),
        detail::format_number(r.psnr_rendered_final),
        detail::format_number(r.psnr_estimate),
        detail::format_number(r.delta_psnr()),
        std::to_string(r.iterations),
        std::to_string(r.best_psnr_iteration),
        r.stop_reason,
        std::to_string(r.activations),
        csv_escape(r.error),
        detail::format_number(r.wall_time)};
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Verbs shared by the CLI

/// Process exit code for a finished rendition.
inline int exit_code_for(StopReason r) {
  switch (r) {
    case StopReason::converged: return 0;
    case StopReason::max_iters: return 2;
    case StopReason::diverged: return 3;
  }
  return 1;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
  std::filesystem::path p = image_path;
  p += ".json";
  return p;
}

/// Writes f(x) (+ noise) to `out` at 16 bits and a sidecar JSON next to it.
/// Returns the sidecar record.
inline nlohmann::json cmd_degrade(const std::filesystem::path& input, const OperatorSpec& op,
                                  const std::optional<NoiseSpec>& noise,
                                  const std::filesystem::path& out) {
  const Image x = resolve_input(input.string());
  Image y = build_operator(op)(x);
  if (noise) y = add_noise(y, *noise);
  save_image(y, out, 16);
  nlohmann::json j = {{"input", input.string()},
                      {"op", format_spec(op)},
                      {"output", out.string()},
                      {"shape", to_json(x.shape())},
                      {"psnr_vs_input", psnr(clamp01(y), x)},
                      {"noise", nullptr}};
  if (noise) j["noise"] = {{"sigma", noise->sigma}, {"seed", noise->seed}};
  std::ofstream side(sidecar_path(out));
  if (!side) throw ImageWriteError("cannot write " + sidecar_path(out).string());
  side << j.dump(2) << '\n';
  return j;
}

struct RenderCommandResult {
  ExperimentReport report;
  RenderRun run;
};

/// Renders a degraded file. With `truth`, PSNR fields are filled in. Writes
/// the estimate to `out` (16-bit) and the report to a sidecar JSON.
inline RenderCommandResult cmd_render(const std::filesystem::path& degraded, const OperatorSpec& op,
                                      const std::optional<std::filesystem::path>& truth_path,
                                      const SolverOverrides& overrides, const ProbeConfig& probe,
                                      const std::filesystem::path& out) {
  RenderCommandResult res;
  const auto t0 = std::chrono::steady_clock::now();
  const Image y = load_image(degraded);
  std::optional<Image> truth;
  if (truth_path) truth = resolve_input(truth_path->string());
  ProbeConfig p = probe;
  p.shape.channels = y.channels();
  res.run = render_observation(build_operator(op), y, overrides, p, truth);
  res.report.name = degraded.stem().string();
  res.report.op = format_spec(op);
  res.report.input = degraded.string();
  summarize_run(res.run, res.report);
  res.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_image(res.run.result.estimate, out, 16);
  nlohmann::json j = to_json(res.report);
  j["result"] = to_json(res.run.result);
  j["lipschitz"] = to_json(res.run.estimate);
  std::ofstream side(sidecar_path(out));
  if (!side) throw ImageWriteError("cannot write " + sidecar_path(out).string());
  side << j.dump(2) << '\n';
  return res;
}

}  // namespace rendition
