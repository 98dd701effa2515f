/**
 * @file experiment.hpp
 * @brief The sweep harness behind the `experiment` subcommand: generate
 *        seeded instances, run the lower- and upper-bound pipelines per
 *        sign pattern, and append one CSV row per instance.
 *
 * Rows are written atomically (one serialized append per finished
 * instance), keyed by (ensemble, m, n, pattern, seed), so an interrupted
 * sweep resumes by skipping the keys already present in the output file.
 * All stage results are pure functions of the instance seed; with
 * --jobs > 1 only the append order can vary, never row contents.
 *
 * Column layout follows the comparison tables: identity columns, then the
 * incoherence floor, the unsigned and sign-aware lower bounds, the two
 * heuristic upper bounds, then per-stage seconds, the seed and a failure
 * note (empty when the instance ran clean).
 */

#pragma once

#include "sparsecert/ensembles.hpp"
#include "sparsecert/io.hpp"
#include "sparsecert/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparsecert {

/// A sign-pattern recipe that materializes against a concrete matrix:
/// "unsigned" and "nonnegative" expand to the full index range, explicit
/// sets go through normalize_sign_restrictions (which also flips the
/// nonpositive columns).
struct PatternRecipe {
  enum class Kind { Unsigned, Nonnegative, Explicit };
  Kind kind = Kind::Unsigned;
  PatternSets sets;  ///< Explicit only.

  NormalizedProblem materialize(const Mat& a) const;
};

struct ExperimentConfig {
  std::vector<EnsembleSpec> ensembles;  ///< Per-spec seeds are ignored; see `seeds`.
  std::vector<PatternRecipe> patterns;
  double xi = 0.9999;
  double theta = 10.0;
  int restarts = 20;    ///< Upper-bound restarts per level.
  double tol = 1e-6;    ///< Upper-bound stall tolerance.
  ResidualNorm residual = ResidualNorm::Linf;
  /// Explicit instance seeds.  When empty, `repetitions` generates 1..r.
  std::vector<std::uint64_t> seeds;
  /// Instance repetitions per (ensemble, pattern).  0 defers to `seeds`;
  /// nonzero must match the seed count when both are given.
  int repetitions = 0;
  std::string output_dir = ".";
  std::string csv_name = "results.csv";
  int s_cap = 0;  ///< Lower-bound level cap, 0 = up to n.
  bool run_upper = true;
  int jobs = 1;

  void validate() const;
  /// The seed per repetition after resolving the seeds/repetitions rules.
  std::vector<std::uint64_t> effective_seeds() const;
};

/// Parses the declarative config document.  Unknown keys are rejected:
/// configs are written by hand and a silently ignored misspelling would
/// change the experiment.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig read_experiment_config(const std::string& path);

struct ResultRow {
  std::string ensemble;
  int m = 0;
  int n = 0;
  std::string pattern;  ///< "unsigned", "nonneg" or "mixed".
  int s_mu = 0;
  int s_unsigned = 0;
  int s_signed = 0;
  /// Smallest disproved level minus nothing: the bound itself is s_ub with
  /// s* < s_ub.  Empty when no disproof was found up to n ("NONE" in CSV).
  std::optional<int> s_ub_unsigned;
  std::optional<int> s_ub_signed;
  double cpu_mu = 0.0;
  double cpu_unsigned = 0.0;
  double cpu_signed = 0.0;
  double cpu_ub_unsigned = 0.0;
  double cpu_ub_signed = 0.0;
  std::uint64_t seed = 0;
  std::string failure;  ///< Stage-annotated problems; empty when clean.
};

/// The fixed, documented CSV header.
const std::string& result_csv_header();

std::string result_row_to_csv(const ResultRow& row);
ResultRow result_row_from_csv(const std::string& line);

/// Resume identity: ensemble|m|n|pattern|seed.
std::string result_row_key(const ResultRow& row);

/// Runs the sweep: for every (ensemble spec, seed, pattern) generates the
/// matrix, runs the incoherence floor + unsigned + sign-aware lower bounds
/// (warm-started internally), then the heuristic upper bound twice (once
/// unrestricted, once under the actual pattern, each starting one level
/// above the matching lower bound).  Per-instance failures are recorded in
/// the row's failure column, never abort the sweep.  Returns all rows,
/// resumed ones included, in deterministic instance order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

}  // namespace sparsecert
