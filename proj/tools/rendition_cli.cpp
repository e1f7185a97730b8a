// Command-line front end: degrade, render, estimate, suite, metrics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rendition/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rendition;

namespace {

struct Globals {
  std::uint64_t seed = ProbeConfig{}.seed;
  bool seed_given = false;
  std::string out;
  std::string format = "json";
};

Shape parse_shape(const std::string& text) {
  Shape s{0, 0, 1};
  char x1 = 0, x2 = 0;
  std::istringstream in(text);
  in >> s.width >> x1 >> s.height;
  if (!in || x1 != 'x') throw CLI::ValidationError("--shape", "expected WxH or WxHxC");
  if (in >> x2) {
    if (x2 != 'x' || !(in >> s.channels)) throw CLI::ValidationError("--shape", "expected WxH or WxHxC");
  }
  return s;
}

void emit(const Globals& g, const json& record) {
  if (g.format == "json") {
    std::cout << record.dump(2) << '\n';
    return;
  }
  // Flat records only: header line then value line, keys in sorted order.
  std::string header, row;
  for (const auto& [key, value] : record.items()) {
    if (value.is_structured()) continue;
    header += (header.empty() ? "" : ",") + key;
    const std::string cell = value.is_string() ? value.get<std::string>() : value.dump();
    row += (row.empty() && header == key ? "" : ",") + csv_escape(cell);
  }
  std::cout << header << '\n' << row << '\n';
}

std::string require_out(const Globals& g, const char* verb) {
  if (g.out.empty()) throw CLI::RequiredError(std::string("--out (needed by ") + verb + ")");
  return g.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover images from black-box operator outputs."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for probes and noise")->each([&](const std::string&) {
    g.seed_given = true;
  });
  app.add_option("--out", g.out, "Output file (degrade, render) or directory (suite)");
  app.add_option("--format", g.format, "Record format on stdout")
      ->check(CLI::IsMember({"json", "csv"}));

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Apply an operator (and optional noise) to an image");
  std::string d_input, d_op;
  double d_noise = 0.0;
  degrade->add_option("--input", d_input, "Image path or procedural[:SIZE[:CHANNELS]]")->required();
  degrade->add_option("--op", d_op, "Operator spec, e.g. gauss:size=5,sigma=1")->required();
  degrade->add_option("--noise", d_noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);

  // render
  auto* render_cmd = app.add_subcommand("render", "Render an estimate of the undegraded image");
  std::string r_degraded, r_op, r_truth, r_mode, r_denoiser;
  SolverOverrides ov;
  int r_samples = ProbeConfig{}.n_samples;
  render_cmd->add_option("--degraded", r_degraded, "Degraded image")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--op", r_op, "Operator spec that produced the image")->required();
  render_cmd->add_option("--truth", r_truth, "Ground truth image for PSNR tracking");
  render_cmd->add_option("--gamma", ov.gamma, "Step size");
  render_cmd->add_option("--mu", ov.mu, "Damping (default: derived from the Lipschitz estimate)");
  render_cmd->add_option("--tau", ov.tau, "Relative residual threshold");
  render_cmd->add_option("--max-iters", ov.max_iters, "Iteration budget");
  render_cmd->add_option("--mode", r_mode, "approximate | exact_gradient | red")
      ->check(CLI::IsMember({"approximate", "exact_gradient", "red"}));
  render_cmd->add_option("--lambda", ov.lambda, "RED strength");
  render_cmd->add_option("--denoiser", r_denoiser, "RED denoiser spec");
  render_cmd->add_option("--epsilon", ov.epsilon, "Radial finite-difference scale");
  render_cmd->add_option("--samples", r_samples, "Lipschitz probe samples")->check(CLI::PositiveNumber);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Empirical Lipschitz constant of an operator");
  std::string e_op, e_shape = "64x64";
  int e_samples = ProbeConfig{}.n_samples;
  estimate->add_option("--op", e_op, "Operator spec")->required();
  estimate->add_option("--samples", e_samples, "Number of probe pairs")->check(CLI::PositiveNumber);
  estimate->add_option("--shape", e_shape, "Probe shape WxH or WxHxC");

  // suite
  auto* suite = app.add_subcommand("suite", "Run every experiment in a suite file");
  std::string s_file;
  unsigned s_jobs = 1;
  suite->add_option("suite_file", s_file, "Suite file")->required()->check(CLI::ExistingFile);
  suite->add_option("--jobs", s_jobs, "Experiments run concurrently (0 = hardware threads)");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "PSNR and MSE between two images");
  std::string m_a, m_b;
  metrics->add_option("a", m_a, "First image")->required()->check(CLI::ExistingFile);
  metrics->add_option("b", m_b, "Second image")->required()->check(CLI::ExistingFile);

  for (auto* sub : {degrade, render_cmd, estimate, suite, metrics}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*degrade) {
      std::optional<NoiseSpec> noise;
      if (d_noise > 0.0) noise = NoiseSpec{d_noise, g.seed};
      emit(g, cmd_degrade(d_input, parse_spec(d_op), noise, require_out(g, "degrade")));
      return 0;
    }
    if (*render_cmd) {
      if (!r_mode.empty()) ov.mode = parse_solver_mode(r_mode);
      if (!r_denoiser.empty()) ov.denoiser = parse_spec(r_denoiser);
      ProbeConfig probe;
      probe.n_samples = r_samples;
      probe.seed = g.seed;
      std::optional<fs::path> truth;
      if (!r_truth.empty()) truth = r_truth;
      const auto res = cmd_render(r_degraded, parse_spec(r_op), truth, ov, probe,
                                  require_out(g, "render"));
      json j = to_json(res.report);
      if (g.format == "json") j["result"] = to_json(res.run.result);
      emit(g, j);
      return exit_code_for(res.run.result.stop_reason);
    }
    if (*estimate) {
      ProbeConfig probe;
      probe.n_samples = e_samples;
      probe.seed = g.seed;
      probe.shape = parse_shape(e_shape);
      const auto est = estimate_lipschitz(build_operator(e_op), probe);
      json j = {{"m_hat", est.m_hat},
                {"n_samples", est.n_samples},
                {"seed", est.seed},
                {"shape", std::to_string(est.shape.width) + "x" + std::to_string(est.shape.height) +
                              (est.shape.channels == 1 ? "" : "x" + std::to_string(est.shape.channels))}};
      emit(g, j);
      return 0;
    }
    if (*suite) {
      const fs::path out_dir = require_out(g, "suite");
      auto specs = load_suite(s_file);
      if (g.seed_given) {
        for (auto& s : specs) s.probe_seed = g.seed;
      }
      if (s_jobs == 0) s_jobs = std::max(1u, std::thread::hardware_concurrency());
      const auto reports = run_suite(specs, fs::path(s_file).parent_path(), s_jobs);
      fs::create_directories(out_dir);
      {
        std::ofstream csv(out_dir / "summary.csv");
        write_reports_csv(csv, reports);
      }
      json summary = json::array();
      bool failed = false;
      for (const auto& r : reports) {
        summary.push_back(to_json(r));
        failed = failed || !r.ok();
      }
      std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
      if (g.format == "csv") {
        write_reports_csv(std::cout, reports);
      } else {
        std::cout << summary.dump(2) << '\n';
      }
      return failed ? 1 : 0;
    }
    if (*metrics) {
      const Image a = load_image(m_a);
      const Image b = load_image(m_b);
      emit(g, json{{"mse", mse(a, b)}, {"psnr", psnr(a, b)}});
      return 0;
    }
  } catch (const SpecParseError& e) {
    std::cerr << "error: operator spec, " << e.what() << '\n';
    return 1;
  } catch (const SuiteParseError& e) {
    std::cerr << "error: suite file, " << e.what() << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
