#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bqlab/constants.hpp"
#include "bqlab/harness.hpp"
#include "bqlab/profiles.hpp"
#include "bqlab/solver.hpp"

namespace bqlab {

inline constexpr int kSchemaVersion = 1;

struct GridSpec {
  double L = 1024.0;
  std::size_t N = 8192;
};

struct DataSpec {
  ProfileSpec u0;
  ProfileSpec v0;
  /// Added to u0 for the second run of the stability suite.
  ProfileSpec perturbation;
};

struct CorpusSpec {
  std::uint64_t seed = 1;
  std::size_t size = 8;
  /// 0 picks the wrap-around-safe cutoff for the window end.
  double cutoff = 0.0;
  std::vector<std::string> kinds{"gaussian", "packet", "noise"};
};

struct WindowSpec {
  double t0 = 5.0;
  double t1 = 50.0;
  std::size_t samples = 20;
  double dt = 0.5;
};

struct DecaySpec {
  double p = 4.0;
  std::vector<std::string> operators{"B1", "B2", "B3_as_DinvJ", "l2"};
  std::vector<std::string> variants{"Lp", "Msq_smooth"};
  double overclaim = 0.2;
};

struct EstimatesSpec {
  std::vector<std::string> kinds{"bilinear_s_nonneg", "bilinear_Ib1", "power_Ib2", "multilinear_box"};
  ProductParams bilinear_s_nonneg{.s = 0.0, .p = 2.0, .sigma = 1.0, .p1 = 4.0, .sigma1 = 1.0, .p2 = 4.0, .sigma2 = 1.0};
  ProductParams bilinear_Ib1{.s = 0.5, .p = 2.0, .sigma = 1.5, .p1 = 4.0, .sigma1 = 1.5, .p2 = 4.0, .sigma2 = 1.5};
  ProductParams power_Ib2{};
  ProductParams multilinear_box{};
};

struct StrichartzSpec {
  std::vector<std::string> operators{"B1", "B2", "l2", "B1_DinvJ", "B3_DinvJ", "inhom_B1", "inhom_B2", "inhom_l2"};
  double q = 1.0, gamma = 6.0, sigma = 6.0;
  std::size_t substeps = 10;
  bool energy_target = false;
};

struct Tolerances {
  double slope_rel = 0.15;
  double stability = 0.25;
  double trend = 0.1;
  double cross_validation = 1e-6;
  double residual_order = 2.0;
  double residual_order_tol = 0.3;
  double contraction_slope_rel = 0.1;
  double scatter_rel = 0.2;
  double scaling_rel = 0.1;
  double identity = 1e-14;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string experiment = "unnamed";
  /// simulate | decay | estimates | strichartz | scatter | stability | validate
  std::string kind = "simulate";
  TheoremKind theorem = TheoremKind::Global1;
  GridSpec grid;
  SolverConfig solver;
  /// Amplitudes for the contraction-ratio sweep of the simulate suite; empty skips it.
  std::vector<double> amplitude_sweep;
  DataSpec data;
  CorpusSpec corpus;
  WindowSpec window;
  DecaySpec decay;
  EstimatesSpec estimates;
  StrichartzSpec strichartz;
  Tolerances tol;
  std::size_t threads = 1;
};

/// Parses schema v1 JSON. Overrides are "dotted.path=value" applied before parsing;
/// values are read as JSON when they parse, as strings otherwise.
ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical JSON with every default filled in; keys sorted.
std::string canonical_json(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of the canonical JSON, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);

struct Verdict {
  std::string check;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

/// Numeric table written as CSV with a header row.
struct SeriesTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  std::vector<Violation> hypotheses;
  std::vector<Verdict> verdicts;
  std::vector<SeriesTable> tables;
  /// Scalar diagnostics copied into the manifest.
  std::map<std::string, double> summary;

  bool all_pass() const;
};

RunResult run_experiment(const ExperimentConfig& cfg);

/// CSV per table plus manifest.json and verdict.json; each file written to a temporary and renamed.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const RunResult& res,
                                                 const std::filesystem::path& out_dir);

/// Fixed-format CSV rendering (shortest round-trip digits).
std::string render_csv(const SeriesTable& t);

}  // namespace bqlab
