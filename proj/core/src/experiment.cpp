#include "sparsecert/experiment.hpp"

#include "sparsecert/cert_lower.hpp"
#include "sparsecert/cert_upper.hpp"
#include "sparsecert/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace sparsecert {
namespace {

using Json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// The row label a recipe will produce, computable without a matrix so
/// failed instances still get stable resume keys.  Matches
/// SignPattern::kind() after normalization: p_minus columns are flipped
/// into the nonnegative part.
std::string recipe_label(const PatternRecipe& recipe, int n) {
  switch (recipe.kind) {
    case PatternRecipe::Kind::Unsigned: return "unsigned";
    case PatternRecipe::Kind::Nonnegative: return "nonneg";
    case PatternRecipe::Kind::Explicit: break;
  }
  std::set<int> covered(recipe.sets.p_plus.begin(), recipe.sets.p_plus.end());
  covered.insert(recipe.sets.p_minus.begin(), recipe.sets.p_minus.end());
  if (covered.empty()) return "unsigned";
  if (static_cast<int>(covered.size()) == n) return "nonneg";
  return "mixed";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("result csv: unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

std::string fmt_opt(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string("NONE");
}

int parse_int(const std::string& ctx, const std::string& s) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(ctx + ": not an integer: \"" + s + "\"");
  }
}

double parse_double(const std::string& ctx, const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(ctx + ": not a number: \"" + s + "\"");
  }
}

void append_failure(ResultRow& row, const std::string& note) {
  if (!row.failure.empty()) row.failure += "; ";
  row.failure += note;
}

ResultRow run_instance(const ExperimentConfig& cfg, const EnsembleSpec& spec,
                       const PatternRecipe& recipe) {
  ResultRow row;
  row.ensemble = to_string(spec.kind);
  row.m = spec.m;
  row.n = spec.n;
  row.seed = spec.seed;
  row.pattern = recipe_label(recipe, spec.n);

  SenseMatrix mat;
  try {
    mat = generate(spec);
  } catch (const std::exception& e) {
    append_failure(row, std::string("generate: ") + e.what());
    return row;
  }

  NormalizedProblem prob{Mat(), SignPattern::unrestricted(1)};
  try {
    prob = recipe.materialize(mat.a);
  } catch (const std::exception& e) {
    append_failure(row, std::string("pattern: ") + e.what());
    return row;
  }

  LowerBoundOptions lopt;
  lopt.xi = cfg.xi;
  lopt.theta = cfg.theta;
  lopt.residual = cfg.residual;
  lopt.s_cap = cfg.s_cap;
  try {
    const LowerBoundReport rep = max_certified_s(prob.a, prob.pattern, lopt);
    row.s_mu = rep.s_mu;
    row.s_unsigned = rep.s_unsigned;
    row.s_signed = rep.s_signed;
    row.cpu_mu = rep.seconds_mu;
    row.cpu_unsigned = rep.seconds_unsigned;
    row.cpu_signed = rep.seconds_signed;
    if (!rep.failure.empty()) append_failure(row, "lower: " + rep.failure);
  } catch (const std::exception& e) {
    append_failure(row, std::string("lower: ") + e.what());
    return row;
  }

  if (cfg.run_upper) {
    // Disproofs cannot exist at or below a sound lower bound, so each
    // search starts one level above the matching certificate.
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const UpperBoundOutcome out = upper_bound_s(
          prob.a, SignPattern::unrestricted(spec.n), cfg.xi, cfg.theta, row.s_unsigned + 1,
          cfg.restarts, Rng::stream(spec.seed, "experiment-upper-unsigned").next_u64());
      row.cpu_ub_unsigned = seconds_since(t0);
      if (out.found) row.s_ub_unsigned = out.s_ub;
    } catch (const std::exception& e) {
      append_failure(row, std::string("upper-unsigned: ") + e.what());
    }
    if (prob.pattern.all_unrestricted()) {
      // The actual pattern is the unrestricted one; rerunning would redo
      // the identical search under a different seed.
      row.s_ub_signed = row.s_ub_unsigned;
    } else {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const UpperBoundOutcome out = upper_bound_s(
            prob.a, prob.pattern, cfg.xi, cfg.theta, row.s_signed + 1, cfg.restarts,
            Rng::stream(spec.seed, "experiment-upper-signed").next_u64());
        row.cpu_ub_signed = seconds_since(t0);
        if (out.found) row.s_ub_signed = out.s_ub;
      } catch (const std::exception& e) {
        append_failure(row, std::string("upper-signed: ") + e.what());
      }
    }
  }

  if (row.s_mu > row.s_signed) append_failure(row, "invariant: s_mu > s_signed");
  if (row.s_ub_unsigned && row.s_unsigned > *row.s_ub_unsigned - 1) {
    append_failure(row, "invariant: s_unsigned above its upper bound");
  }
  if (row.s_ub_signed && row.s_signed > *row.s_ub_signed - 1) {
    append_failure(row, "invariant: s_signed above its upper bound");
  }
  return row;
}

}  // namespace

NormalizedProblem PatternRecipe::materialize(const Mat& a) const {
  const int n = static_cast<int>(a.cols());
  switch (kind) {
    case Kind::Unsigned: return {a, SignPattern::unrestricted(n)};
    case Kind::Nonnegative: return {a, SignPattern::nonnegative(n)};
    case Kind::Explicit: break;
  }
  return normalize_sign_restrictions(a, sets.p_plus, sets.p_minus);
}

void ExperimentConfig::validate() const {
  if (ensembles.empty()) throw std::invalid_argument("experiment config: no ensembles");
  for (const EnsembleSpec& spec : ensembles) spec.validate();
  if (patterns.empty()) throw std::invalid_argument("experiment config: no patterns");
  CertParams probe;
  probe.s = 1;
  probe.xi = xi;
  probe.theta = theta;
  probe.residual = residual;
  probe.validate(1);
  if (restarts < 1) throw std::invalid_argument("experiment config: restarts must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("experiment config: tol must be positive");
  if (repetitions < 0) throw std::invalid_argument("experiment config: repetitions must be >= 0");
  if (!seeds.empty() && repetitions != 0 && repetitions != static_cast<int>(seeds.size())) {
    throw std::invalid_argument(
        "experiment config: repetitions disagrees with the explicit seed count");
  }
  if (s_cap < 0) throw std::invalid_argument("experiment config: s_cap must be >= 0");
  if (jobs < 1) throw std::invalid_argument("experiment config: jobs must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("experiment config: output_dir is empty");
  if (csv_name.empty() || csv_name.find('/') != std::string::npos) {
    throw std::invalid_argument("experiment config: csv_name must be a bare file name");
  }
}

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  const int reps = repetitions > 0 ? repetitions : 1;
  for (int r = 1; r <= reps; ++r) out.push_back(static_cast<std::uint64_t>(r));
  return out;
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const std::string ctx = "experiment config";
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(ctx + ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument(ctx + ": document must be an object");

  ExperimentConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "ensembles") {
      if (!value.is_array()) throw std::invalid_argument(ctx + ": \"ensembles\" must be an array");
      for (const auto& e : value) {
        if (!e.is_object()) {
          throw std::invalid_argument(ctx + ": ensemble entries must be objects");
        }
        EnsembleSpec spec;
        bool have_kind = false, have_m = false, have_n = false;
        for (const auto& [ekey, evalue] : e.items()) {
          if (ekey == "kind" && evalue.is_string()) {
            spec.kind = ensemble_kind_from_string(evalue.get<std::string>());
            have_kind = true;
          } else if (ekey == "m" && evalue.is_number_integer()) {
            spec.m = evalue.get<int>();
            have_m = true;
          } else if (ekey == "n" && evalue.is_number_integer()) {
            spec.n = evalue.get<int>();
            have_n = true;
          } else if (ekey == "d" && evalue.is_number_integer()) {
            spec.d = evalue.get<int>();
          } else {
            throw std::invalid_argument(ctx + ": bad ensemble field \"" + ekey +
                                        "\" (allowed: kind, m, n, d; seeds are set top-level)");
          }
        }
        if (!have_kind || !have_m || !have_n) {
          throw std::invalid_argument(ctx + ": ensemble entries need kind, m and n");
        }
        cfg.ensembles.push_back(spec);
      }
    } else if (key == "patterns") {
      if (!value.is_array()) throw std::invalid_argument(ctx + ": \"patterns\" must be an array");
      for (const auto& p : value) {
        PatternRecipe recipe;
        if (p.is_string()) {
          const std::string name = p.get<std::string>();
          if (name == "unsigned") {
            recipe.kind = PatternRecipe::Kind::Unsigned;
          } else if (name == "nonnegative" || name == "nonneg") {
            recipe.kind = PatternRecipe::Kind::Nonnegative;
          } else {
            throw std::invalid_argument(ctx + ": unknown pattern recipe \"" + name + "\"");
          }
        } else if (p.is_object()) {
          recipe.kind = PatternRecipe::Kind::Explicit;
          recipe.sets = pattern_from_json(p.dump());
        } else {
          throw std::invalid_argument(ctx + ": pattern entries are recipe names or set objects");
        }
        cfg.patterns.push_back(std::move(recipe));
      }
    } else if (key == "xi" && value.is_number()) {
      cfg.xi = value.get<double>();
    } else if (key == "theta" && value.is_number()) {
      cfg.theta = value.get<double>();
    } else if (key == "restarts" && value.is_number_integer()) {
      cfg.restarts = value.get<int>();
    } else if (key == "tol" && value.is_number()) {
      cfg.tol = value.get<double>();
    } else if (key == "residual" && value.is_string()) {
      cfg.residual = residual_norm_from_string(value.get<std::string>());
    } else if (key == "seeds" && value.is_array()) {
      for (const auto& s : value) {
        if (!s.is_number_integer()) {
          throw std::invalid_argument(ctx + ": \"seeds\" must be an array of integers");
        }
        cfg.seeds.push_back(s.get<std::uint64_t>());
      }
    } else if (key == "repetitions" && value.is_number_integer()) {
      cfg.repetitions = value.get<int>();
    } else if (key == "output_dir" && value.is_string()) {
      cfg.output_dir = value.get<std::string>();
    } else if (key == "csv_name" && value.is_string()) {
      cfg.csv_name = value.get<std::string>();
    } else if (key == "s_cap" && value.is_number_integer()) {
      cfg.s_cap = value.get<int>();
    } else if (key == "run_upper" && value.is_boolean()) {
      cfg.run_upper = value.get<bool>();
    } else if (key == "jobs" && value.is_number_integer()) {
      cfg.jobs = value.get<int>();
    } else {
      throw std::invalid_argument(ctx + ": unknown or mistyped key \"" + key + "\"");
    }
  }
  return cfg;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  try {
    return experiment_config_from_json(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

const std::string& result_csv_header() {
  static const std::string header =
      "ensemble,m,n,pattern,s_mu,s_unsigned,s_signed,s_ub_unsigned,s_ub_signed,"
      "cpu_mu,cpu_unsigned,cpu_signed,cpu_ub_unsigned,cpu_ub_signed,seed,failure";
  return header;
}

std::string result_row_to_csv(const ResultRow& row) {
  std::ostringstream out;
  out << csv_escape(row.ensemble) << ',' << row.m << ',' << row.n << ','
      << csv_escape(row.pattern) << ',' << row.s_mu << ',' << row.s_unsigned << ','
      << row.s_signed << ',' << fmt_opt(row.s_ub_unsigned) << ',' << fmt_opt(row.s_ub_signed)
      << ',' << fmt_seconds(row.cpu_mu) << ',' << fmt_seconds(row.cpu_unsigned) << ','
      << fmt_seconds(row.cpu_signed) << ',' << fmt_seconds(row.cpu_ub_unsigned) << ','
      << fmt_seconds(row.cpu_ub_signed) << ',' << row.seed << ',' << csv_escape(row.failure);
  return out.str();
}

ResultRow result_row_from_csv(const std::string& line) {
  const std::string ctx = "result csv";
  const std::vector<std::string> f = split_csv_line(line);
  if (f.size() != 16) {
    throw std::invalid_argument(ctx + ": expected 16 fields, got " + std::to_string(f.size()));
  }
  ResultRow row;
  row.ensemble = f[0];
  row.m = parse_int(ctx, f[1]);
  row.n = parse_int(ctx, f[2]);
  row.pattern = f[3];
  row.s_mu = parse_int(ctx, f[4]);
  row.s_unsigned = parse_int(ctx, f[5]);
  row.s_signed = parse_int(ctx, f[6]);
  if (f[7] != "NONE") row.s_ub_unsigned = parse_int(ctx, f[7]);
  if (f[8] != "NONE") row.s_ub_signed = parse_int(ctx, f[8]);
  row.cpu_mu = parse_double(ctx, f[9]);
  row.cpu_unsigned = parse_double(ctx, f[10]);
  row.cpu_signed = parse_double(ctx, f[11]);
  row.cpu_ub_unsigned = parse_double(ctx, f[12]);
  row.cpu_ub_signed = parse_double(ctx, f[13]);
  try {
    row.seed = std::stoull(f[14]);
  } catch (const std::exception&) {
    throw std::invalid_argument(ctx + ": bad seed \"" + f[14] + "\"");
  }
  row.failure = f[15];
  return row;
}

std::string result_row_key(const ResultRow& row) {
  return row.ensemble + "|" + std::to_string(row.m) + "|" + std::to_string(row.n) + "|" +
         row.pattern + "|" + std::to_string(row.seed);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  struct Instance {
    EnsembleSpec spec;
    const PatternRecipe* recipe;
    std::string key;
  };
  std::vector<Instance> instances;
  for (const EnsembleSpec& base : cfg.ensembles) {
    for (std::uint64_t seed : cfg.effective_seeds()) {
      for (const PatternRecipe& recipe : cfg.patterns) {
        Instance inst;
        inst.spec = base;
        inst.spec.seed = seed;
        ResultRow skeleton;
        skeleton.ensemble = to_string(inst.spec.kind);
        skeleton.m = inst.spec.m;
        skeleton.n = inst.spec.n;
        skeleton.pattern = recipe_label(recipe, inst.spec.n);
        skeleton.seed = seed;
        inst.key = result_row_key(skeleton);
        inst.recipe = &recipe;
        instances.push_back(std::move(inst));
      }
    }
  }

  // The CSV key must identify the instance; two distinct explicit recipes
  // that share a label would collide silently, so refuse them up front.
  {
    std::map<std::string, const PatternRecipe*> seen;
    for (const Instance& inst : instances) {
      auto [it, fresh] = seen.emplace(inst.key, inst.recipe);
      if (!fresh && it->second != inst.recipe) {
        throw std::invalid_argument("experiment config: two pattern recipes both label rows \"" +
                                    inst.key + "\"; split them into separate sweeps");
      }
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path csv_path = fs::path(cfg.output_dir) / cfg.csv_name;

  std::map<std::string, ResultRow> resumed;
  if (fs::exists(csv_path)) {
    std::istringstream lines(read_text_file(csv_path.string()));
    std::string line;
    if (!std::getline(lines, line) || line != result_csv_header()) {
      throw std::invalid_argument(csv_path.string() + ": header does not match the result schema");
    }
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      ResultRow row = result_row_from_csv(line);
      resumed[result_row_key(row)] = std::move(row);
    }
  } else {
    write_text_file(csv_path.string(), result_csv_header() + "\n");
  }

  std::vector<ResultRow> results(instances.size());
  std::vector<size_t> todo;
  std::vector<char> done(instances.size(), 0);
  for (size_t i = 0; i < instances.size(); ++i) {
    if (auto it = resumed.find(instances[i].key); it != resumed.end()) {
      results[i] = it->second;
      done[i] = 1;
    } else if (std::none_of(todo.begin(), todo.end(), [&](size_t j) {
                 return instances[j].key == instances[i].key;
               })) {
      todo.push_back(i);
    }
  }

  std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
  if (!csv) throw std::runtime_error("cannot append to " + csv_path.string());

  std::atomic<size_t> cursor{0};
  std::mutex sink_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const size_t slot = cursor.fetch_add(1);
      if (slot >= todo.size()) break;
      const size_t i = todo[slot];
      ResultRow row = run_instance(cfg, instances[i].spec, *instances[i].recipe);
      std::lock_guard<std::mutex> guard(sink_mutex);
      if (first_error) break;
      csv << result_row_to_csv(row) << '\n';
      csv.flush();
      if (!csv.good()) {
        first_error = std::make_exception_ptr(
            std::runtime_error("error while appending to " + csv_path.string()));
        break;
      }
      results[i] = row;
      done[i] = 1;
    }
  };

  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(std::max<size_t>(todo.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Duplicated instances (identical key and recipe) reuse the row computed
  // for their twin.
  for (size_t i = 0; i < instances.size(); ++i) {
    if (done[i]) continue;
    for (size_t j = 0; j < instances.size(); ++j) {
      if (done[j] && instances[j].key == instances[i].key) {
        results[i] = results[j];
        done[i] = 1;
        break;
      }
    }
  }
  return results;
}

}  // namespace sparsecert
