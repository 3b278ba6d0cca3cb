#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmpinn/common.hpp"
#include "mmpinn/trainer.hpp"

namespace mmpinn {

namespace cfgdetail {

struct Entry {
  std::string key;  // "section.key" or bare top-level key
  std::string value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<Entry> parse_text(const std::string& text) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    entries.push_back({section.empty() ? key : section + "." + key, value, lineno});
  }
  return entries;
}

inline double to_double(const Entry& e) {
  char* end = nullptr;
  double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0')
    throw ConfigError(e.key + ": expected a number, got '" + e.value + "'");
  return v;
}

inline long to_long(const Entry& e) {
  double v = to_double(e);
  long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw ConfigError(e.key + ": expected an integer, got '" + e.value + "'");
  return l;
}

inline bool to_bool(const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError(e.key + ": expected true or false, got '" + e.value + "'");
}

inline std::vector<double> to_double_list(const Entry& e) {
  std::vector<double> out;
  std::istringstream in(e.value);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError(e.key + ": expected numbers, got '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(e.key + ": expected at least one number");
  return out;
}

inline std::vector<int> to_int_list(const Entry& e) {
  auto d = to_double_list(e);
  std::vector<int> out;
  for (double v : d) {
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError(e.key + ": expected integers");
    out.push_back(i);
  }
  return out;
}

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "benchmark", "precision", "repeats", "seed",
      "architecture.family", "architecture.hidden_layers", "architecture.width",
      "architecture.combine", "architecture.embed_sigmas", "architecture.embed_targets",
      "architecture.embed_rows",
      "sampling.n_initial", "sampling.n_boundary", "sampling.n_residual",
      "sampling.minibatch", "sampling.batch_initial", "sampling.batch_boundary",
      "sampling.batch_residual", "sampling.grid",
      "grouping.axis", "grouping.cuts", "grouping.equalize",
      "loss.w_s", "loss.w_r", "loss.m", "loss.n", "loss.group_n", "loss.group_w",
      "loss.smoothing_eps",
      "adam.iterations", "adam.lr", "adam.beta1", "adam.beta2", "adam.eps", "adam.decay",
      "adam.decay_rate", "adam.decay_interval",
      "lbfgs.memory", "lbfgs.max_iterations", "lbfgs.c1", "lbfgs.c2", "lbfgs.f_tol",
      "lbfgs.g_tol",
  };
  return keys;
}

inline std::string nearest_known_key(const std::string& key,
                                     const std::vector<std::string>& extra) {
  std::string best;
  int best_d = 1 << 20;
  auto consider = [&](const std::string& k) {
    int d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  };
  for (const auto& k : known_keys()) consider(k);
  for (const auto& k : extra) consider(k);
  return best;
}

}  // namespace cfgdetail

/// Table-faithful defaults per benchmark; heat-large-gradient resolves its
/// network size and point counts from epsilon (nearest tabulated row).
inline RunConfig default_config(const std::string& benchmark,
                                const std::map<std::string, double>& problem_params) {
  PdeProblem problem = make_problem(benchmark, problem_params);
  RunConfig cfg;
  cfg.benchmark = benchmark;
  cfg.problem_params = problem.params;  // defaults merged
  cfg.arch.input_dim = problem.dim;
  cfg.grid_resolution.assign(problem.dim, problem.dim == 1 ? 2048 : 256);
  cfg.repeats = 5;
  cfg.master_seed = 1;

  auto mff = [&](int hidden, int width, std::vector<double> sigmas,
                 std::vector<std::vector<int>> targets, CombineRule combine) {
    cfg.arch.family = Family::Mff;
    cfg.arch.hidden_layers = hidden;
    cfg.arch.width = width;
    cfg.arch.combine = combine;
    cfg.arch.embeddings.clear();
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      FourierEmbedding e;
      e.sigma = sigmas[i];
      e.rows = width / 2;
      e.target_coords = targets[i];
      cfg.arch.embeddings.push_back(std::move(e));
    }
  };

  switch (problem.id) {
    case BenchmarkId::HeatLargeGradient: {
      struct Row { double eps; int width, n0, nb, nr; };
      static const Row rows[] = {
          {0.30, 20, 700, 1400, 3000},    {0.15, 50, 1200, 2400, 10000},
          {0.14, 100, 1600, 3200, 20000}, {0.13, 320, 2000, 4000, 60000},
          {0.12, 400, 3000, 6000, 90000}, {0.11, 400, 4000, 8000, 100000},
      };
      const double eps = problem.param("epsilon");
      const Row* pick = &rows[0];
      for (const Row& r : rows)
        if (std::abs(r.eps - eps) < std::abs(pick->eps - eps)) pick = &r;
      cfg.arch.family = Family::Dnn;
      cfg.arch.hidden_layers = 4;
      cfg.arch.width = pick->width;
      cfg.counts = {pick->n0, pick->nb, pick->nr};
      cfg.loss.m = 1;
      cfg.loss.n = 3;
      break;
    }
    case BenchmarkId::PoissonMultifreq: {
      mff(3, 100, {1.0, 25.0}, {{0}, {0}}, CombineRule::Concat);
      cfg.counts = {0, 512, 4096};  // full set for the L-BFGS phase
      cfg.minibatch = true;
      cfg.batch = {0, 512, 512};
      cfg.loss.m = 3;
      cfg.loss.n = 3;
      cfg.adam.decay = true;
      break;
    }
    case BenchmarkId::HelmholtzHighfreq: {
      mff(4, 50, {1.0, 10.0}, {{0}, {1}}, CombineRule::CoordinateProduct);
      cfg.counts = {0, 2400, 10000};
      cfg.loss.m = 3;
      cfg.loss.n = 3;
      break;
    }
    case BenchmarkId::KleinGordon: {
      // sigma 5 on t, sigma 1 on x.
      mff(5, 150, {5.0, 1.0}, {{1}, {0}}, CombineRule::CoordinateProduct);
      cfg.counts = {1000, 1000, 10000};
      cfg.minibatch = true;
      cfg.batch = {256, 256, 256};
      cfg.loss.m = 3;
      cfg.loss.n = 3;
      cfg.adam.iterations = 40000;
      cfg.adam.decay = true;
      cfg.levels = {LevelSpec{3.0, 3.0, {}, true, false}};  // Adam only
      break;
    }
    case BenchmarkId::HeatVaryingFreq: {
      mff(4, 300, {10.0}, {{0, 1}}, CombineRule::Concat);
      cfg.counts = {1200, 1200, 120000};
      cfg.loss.m = 3;
      cfg.loss.n = 3;
      break;
    }
    case BenchmarkId::PoissonGaussianSpike: {
      cfg.arch.family = Family::Dnn;
      cfg.arch.hidden_layers = 4;
      cfg.arch.width = 50;
      cfg.counts = {0, 4800, 30000};
      cfg.loss.m = 1;
      cfg.loss.n = 3;
      break;
    }
  }
  return cfg;
}

/// Resolves flat entries into a validated RunConfig: benchmark and problem
/// constants first (they drive the defaults), then every remaining key.
/// Unknown keys and malformed values are hard errors.
inline RunConfig resolve_config(const std::vector<cfgdetail::Entry>& entries) {
  using namespace cfgdetail;

  std::string benchmark;
  std::map<std::string, double> problem_params;
  std::vector<std::string> problem_keys;
  for (const auto& e : entries) {
    if (e.key == "benchmark") benchmark = e.value;
    if (e.key.rfind("problem.", 0) == 0)
      problem_params[e.key.substr(8)] = to_double(e);
  }
  if (benchmark.empty()) throw ConfigError("config: missing required key 'benchmark'");

  RunConfig cfg = default_config(benchmark, problem_params);
  for (const auto& [k, v] : cfg.problem_params) problem_keys.push_back("problem." + k);

  // Level sections present in the file replace the default schedule; they are
  // applied after everything else so per-level defaults come from the final
  // [loss] values.
  int max_level = 0;
  for (const auto& e : entries) {
    if (e.key.rfind("level", 0) != 0) continue;
    std::size_t dot = e.key.find('.');
    if (dot == std::string::npos) continue;
    std::string num = e.key.substr(5, dot - 5);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      continue;
    max_level = std::max(max_level, std::stoi(num));
  }
  std::vector<std::string> level_keys;
  for (int l = 1; l <= std::max(max_level, 1); ++l) {
    std::string p = "level" + std::to_string(l) + ".";
    for (const char* f : {"m", "n", "group_n", "adam", "lbfgs"})
      level_keys.push_back(p + f);
  }
  std::vector<Entry> level_entries;

  std::map<std::string, int> seen;
  for (const auto& e : entries) {
    if (++seen[e.key] > 1)
      throw ConfigError("config line " + std::to_string(e.line) + ": duplicate key '" +
                        e.key + "'");
    const std::string& k = e.key;
    if (k == "benchmark") continue;
    if (k.rfind("problem.", 0) == 0) {
      // validated by make_problem inside default_config
      continue;
    }
    if (k == "precision") {
      if (e.value != "float32" && e.value != "float64")
        throw ConfigError("precision: expected float32 or float64, got '" + e.value + "'");
      cfg.precision = e.value;
    } else if (k == "repeats") {
      cfg.repeats = static_cast<int>(to_long(e));
      if (cfg.repeats < 1) throw ConfigError("repeats: must be >= 1");
    } else if (k == "seed") {
      cfg.master_seed = static_cast<std::uint64_t>(to_long(e));
    } else if (k == "architecture.family") {
      if (e.value == "dnn") cfg.arch.family = Family::Dnn;
      else if (e.value == "mff") cfg.arch.family = Family::Mff;
      else if (e.value == "inn") cfg.arch.family = Family::Inn;
      else throw ConfigError("architecture.family: expected dnn, mff or inn");
      if (cfg.arch.family == Family::Dnn) cfg.arch.embeddings.clear();
      if (cfg.arch.family != Family::Dnn && cfg.arch.embeddings.empty()) {
        FourierEmbedding emb;
        emb.sigma = 1.0;
        emb.rows = cfg.arch.width / 2;
        for (int c = 0; c < cfg.arch.input_dim; ++c) emb.target_coords.push_back(c);
        cfg.arch.embeddings.push_back(std::move(emb));
      }
    } else if (k == "architecture.hidden_layers") {
      cfg.arch.hidden_layers = static_cast<int>(to_long(e));
    } else if (k == "architecture.width") {
      int w = static_cast<int>(to_long(e));
      for (auto& emb : cfg.arch.embeddings)
        if (emb.rows == cfg.arch.width / 2) emb.rows = w / 2;  // keep the default coupling
      cfg.arch.width = w;
    } else if (k == "architecture.combine") {
      if (e.value == "concat") cfg.arch.combine = CombineRule::Concat;
      else if (e.value == "product") cfg.arch.combine = CombineRule::CoordinateProduct;
      else throw ConfigError("architecture.combine: expected concat or product");
    } else if (k == "architecture.embed_sigmas") {
      auto sig = to_double_list(e);
      std::vector<FourierEmbedding> embs;
      for (std::size_t i = 0; i < sig.size(); ++i) {
        FourierEmbedding emb;
        emb.sigma = sig[i];
        emb.rows = i < cfg.arch.embeddings.size() ? cfg.arch.embeddings[i].rows
                                                  : cfg.arch.width / 2;
        if (i < cfg.arch.embeddings.size())
          emb.target_coords = cfg.arch.embeddings[i].target_coords;
        else
          for (int c = 0; c < cfg.arch.input_dim; ++c) emb.target_coords.push_back(c);
        embs.push_back(std::move(emb));
      }
      cfg.arch.embeddings = std::move(embs);
    } else if (k == "architecture.embed_targets") {
      std::istringstream in(e.value);
      std::string tok;
      std::size_t i = 0;
      for (; in >> tok; ++i) {
        if (i >= cfg.arch.embeddings.size())
          throw ConfigError("architecture.embed_targets: more target groups than embeddings");
        std::vector<int> coords;
        if (tok == "all") {
          for (int c = 0; c < cfg.arch.input_dim; ++c) coords.push_back(c);
        } else {
          std::istringstream ts(tok);
          std::string part;
          while (std::getline(ts, part, ','))
            coords.push_back(std::stoi(part));
        }
        cfg.arch.embeddings[i].target_coords = std::move(coords);
      }
      if (i != cfg.arch.embeddings.size())
        throw ConfigError("architecture.embed_targets: one target group per embedding");
    } else if (k == "architecture.embed_rows") {
      int rows = static_cast<int>(to_long(e));
      for (auto& emb : cfg.arch.embeddings) emb.rows = rows;
    } else if (k == "sampling.n_initial") {
      cfg.counts.n_initial = static_cast<int>(to_long(e));
    } else if (k == "sampling.n_boundary") {
      cfg.counts.n_boundary = static_cast<int>(to_long(e));
    } else if (k == "sampling.n_residual") {
      cfg.counts.n_residual = static_cast<int>(to_long(e));
    } else if (k == "sampling.minibatch") {
      cfg.minibatch = to_bool(e);
    } else if (k == "sampling.batch_initial") {
      cfg.batch.n_initial = static_cast<int>(to_long(e));
    } else if (k == "sampling.batch_boundary") {
      cfg.batch.n_boundary = static_cast<int>(to_long(e));
    } else if (k == "sampling.batch_residual") {
      cfg.batch.n_residual = static_cast<int>(to_long(e));
    } else if (k == "sampling.grid") {
      cfg.grid_resolution = to_int_list(e);
    } else if (k == "grouping.axis") {
      if (!cfg.grouping) cfg.grouping.emplace();
      cfg.grouping->axis = static_cast<int>(to_long(e));
    } else if (k == "grouping.cuts") {
      if (!cfg.grouping) cfg.grouping.emplace();
      cfg.grouping->cut_points = to_double_list(e);
    } else if (k == "grouping.equalize") {
      cfg.equalize = to_bool(e);
    } else if (k == "loss.w_s") {
      cfg.loss.w_s = to_double(e);
    } else if (k == "loss.w_r") {
      cfg.loss.w_r = to_double(e);
    } else if (k == "loss.m") {
      cfg.loss.m = to_double(e);
    } else if (k == "loss.n") {
      cfg.loss.n = to_double(e);
    } else if (k == "loss.group_n") {
      cfg.loss.group_n = to_double_list(e);
    } else if (k == "loss.group_w") {
      cfg.loss.group_w = to_double_list(e);
    } else if (k == "loss.smoothing_eps") {
      cfg.loss.smoothing_eps = to_double(e);
    } else if (k == "adam.iterations") {
      cfg.adam.iterations = to_long(e);
    } else if (k == "adam.lr") {
      cfg.adam.lr = to_double(e);
    } else if (k == "adam.beta1") {
      cfg.adam.beta1 = to_double(e);
    } else if (k == "adam.beta2") {
      cfg.adam.beta2 = to_double(e);
    } else if (k == "adam.eps") {
      cfg.adam.eps = to_double(e);
    } else if (k == "adam.decay") {
      cfg.adam.decay = to_bool(e);
    } else if (k == "adam.decay_rate") {
      cfg.adam.decay_rate = to_double(e);
    } else if (k == "adam.decay_interval") {
      cfg.adam.decay_interval = to_long(e);
    } else if (k == "lbfgs.memory") {
      cfg.lbfgs.memory = static_cast<int>(to_long(e));
    } else if (k == "lbfgs.max_iterations") {
      cfg.lbfgs.max_iterations = to_long(e);
    } else if (k == "lbfgs.c1") {
      cfg.lbfgs.c1 = to_double(e);
    } else if (k == "lbfgs.c2") {
      cfg.lbfgs.c2 = to_double(e);
    } else if (k == "lbfgs.f_tol") {
      cfg.lbfgs.f_tol = to_double(e);
    } else if (k == "lbfgs.g_tol") {
      cfg.lbfgs.g_tol = to_double(e);
    } else if (k.rfind("level", 0) == 0 && k.find('.') != std::string::npos) {
      level_entries.push_back(e);
    } else {
      std::vector<std::string> extra = problem_keys;
      extra.insert(extra.end(), level_keys.begin(), level_keys.end());
      throw ConfigError("unknown key '" + k + "'; did you mean '" +
                        nearest_known_key(k, extra) + "'?");
    }
  }

  if (max_level > 0) {
    cfg.levels.assign(max_level,
                      LevelSpec{cfg.loss.m, cfg.loss.n, cfg.loss.group_n, false, true});
    cfg.levels.front().run_adam = true;
  }
  for (const auto& e : level_entries) {
    const std::string& k = e.key;
    std::size_t dot = k.find('.');
    std::string num = k.substr(5, dot - 5);
    std::string field = k.substr(dot + 1);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("unknown key '" + k + "'; did you mean '" +
                        nearest_known_key(k, level_keys) + "'?");
    int idx = std::stoi(num) - 1;
    if (idx < 0 || idx >= static_cast<int>(cfg.levels.size()))
      throw ConfigError(k + ": level numbers must be contiguous from 1");
    if (field == "m") cfg.levels[idx].m = to_double(e);
    else if (field == "n") cfg.levels[idx].n = to_double(e);
    else if (field == "group_n") cfg.levels[idx].group_n = to_double_list(e);
    else if (field == "adam") cfg.levels[idx].run_adam = to_bool(e);
    else if (field == "lbfgs") cfg.levels[idx].run_lbfgs = to_bool(e);
    else
      throw ConfigError("unknown key '" + k + "'; did you mean '" +
                        nearest_known_key(k, level_keys) + "'?");
  }

  // Cross-field validation with field-path diagnostics.
  validate(cfg.loss);
  validate(cfg.adam);
  validate(cfg.lbfgs);
  validate_spec(cfg.arch);
  if (static_cast<int>(cfg.grid_resolution.size()) != cfg.arch.input_dim)
    throw ConfigError("sampling.grid: needs one resolution per input coordinate");
  if (cfg.minibatch && cfg.batch.n_residual <= 0)
    throw ConfigError("sampling.batch_residual: must be > 0 in minibatch mode");
  if (cfg.grouping) {
    const int k = static_cast<int>(cfg.grouping->cut_points.size()) + 1;
    auto check_arity = [&](const std::vector<double>& v, const std::string& field) {
      if (!v.empty() && static_cast<int>(v.size()) != k)
        throw ConfigError(field + ": expected " + std::to_string(k) +
                          " entries (one per subdomain)");
    };
    check_arity(cfg.loss.group_n, "loss.group_n");
    check_arity(cfg.loss.group_w, "loss.group_w");
    for (const auto& level : cfg.levels) check_arity(level.group_n, "levelN.group_n");
  } else if (!cfg.loss.group_n.empty()) {
    throw ConfigError("loss.group_n: set but no [grouping] section present");
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  return resolve_config(cfgdetail::parse_text(text));
}

/// Applies command-line overrides ("section.key=value") on top of the file.
inline RunConfig parse_config_file(const std::string& path,
                                   const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto entries = cfgdetail::parse_text(buf.str());
  for (const auto& ov : overrides) {
    std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "': expected key=value");
    cfgdetail::Entry e{cfgdetail::trim(ov.substr(0, eq)), cfgdetail::trim(ov.substr(eq + 1)),
                       0};
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [&](const cfgdetail::Entry& x) { return x.key == e.key; }),
                  entries.end());
    entries.push_back(std::move(e));
  }
  return resolve_config(entries);
}

/// Canonical text form with every resolved field; re-parses to the same run.
inline std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto num = [](double v) { return format_shortest(v); };
  out << "benchmark = " << cfg.benchmark << "\n";
  out << "precision = " << cfg.precision << "\n";
  out << "repeats = " << cfg.repeats << "\n";
  out << "seed = " << cfg.master_seed << "\n";
  out << "\n[problem]\n";
  for (const auto& [k, v] : cfg.problem_params) out << k << " = " << num(v) << "\n";
  out << "\n[architecture]\n";
  out << "family = " << family_name(cfg.arch.family) << "\n";
  out << "hidden_layers = " << cfg.arch.hidden_layers << "\n";
  out << "width = " << cfg.arch.width << "\n";
  if (!cfg.arch.embeddings.empty()) {
    out << "combine = "
        << (cfg.arch.combine == CombineRule::Concat ? "concat" : "product") << "\n";
    out << "embed_sigmas =";
    for (const auto& e : cfg.arch.embeddings) out << ' ' << num(e.sigma);
    out << "\n";
    out << "embed_rows = " << cfg.arch.embeddings.front().rows << "\n";
    out << "embed_targets =";
    for (const auto& e : cfg.arch.embeddings) {
      out << ' ';
      for (std::size_t c = 0; c < e.target_coords.size(); ++c)
        out << (c ? "," : "") << e.target_coords[c];
    }
    out << "\n";
  }
  out << "\n[sampling]\n";
  out << "n_initial = " << cfg.counts.n_initial << "\n";
  out << "n_boundary = " << cfg.counts.n_boundary << "\n";
  out << "n_residual = " << cfg.counts.n_residual << "\n";
  out << "minibatch = " << (cfg.minibatch ? "true" : "false") << "\n";
  if (cfg.minibatch) {
    out << "batch_initial = " << cfg.batch.n_initial << "\n";
    out << "batch_boundary = " << cfg.batch.n_boundary << "\n";
    out << "batch_residual = " << cfg.batch.n_residual << "\n";
  }
  out << "grid =";
  for (int r : cfg.grid_resolution) out << ' ' << r;
  out << "\n";
  if (cfg.grouping) {
    out << "\n[grouping]\n";
    out << "axis = " << cfg.grouping->axis << "\n";
    out << "cuts =";
    for (double c : cfg.grouping->cut_points) out << ' ' << num(c);
    out << "\n";
    out << "equalize = " << (cfg.equalize ? "true" : "false") << "\n";
  }
  out << "\n[loss]\n";
  out << "w_s = " << num(cfg.loss.w_s) << "\n";
  out << "w_r = " << num(cfg.loss.w_r) << "\n";
  out << "m = " << num(cfg.loss.m) << "\n";
  out << "n = " << num(cfg.loss.n) << "\n";
  if (!cfg.loss.group_n.empty()) {
    out << "group_n =";
    for (double v : cfg.loss.group_n) out << ' ' << num(v);
    out << "\n";
  }
  if (!cfg.loss.group_w.empty()) {
    out << "group_w =";
    for (double v : cfg.loss.group_w) out << ' ' << num(v);
    out << "\n";
  }
  out << "smoothing_eps = " << num(cfg.loss.smoothing_eps) << "\n";
  out << "\n[adam]\n";
  out << "iterations = " << cfg.adam.iterations << "\n";
  out << "lr = " << num(cfg.adam.lr) << "\n";
  out << "beta1 = " << num(cfg.adam.beta1) << "\n";
  out << "beta2 = " << num(cfg.adam.beta2) << "\n";
  out << "eps = " << num(cfg.adam.eps) << "\n";
  out << "decay = " << (cfg.adam.decay ? "true" : "false") << "\n";
  out << "decay_rate = " << num(cfg.adam.decay_rate) << "\n";
  out << "decay_interval = " << cfg.adam.decay_interval << "\n";
  out << "\n[lbfgs]\n";
  out << "memory = " << cfg.lbfgs.memory << "\n";
  out << "max_iterations = " << cfg.lbfgs.max_iterations << "\n";
  out << "c1 = " << num(cfg.lbfgs.c1) << "\n";
  out << "c2 = " << num(cfg.lbfgs.c2) << "\n";
  out << "f_tol = " << num(cfg.lbfgs.f_tol) << "\n";
  out << "g_tol = " << num(cfg.lbfgs.g_tol) << "\n";
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const LevelSpec& lv = cfg.levels[l];
    out << "\n[level" << (l + 1) << "]\n";
    out << "m = " << num(lv.m) << "\n";
    out << "n = " << num(lv.n) << "\n";
    if (!lv.group_n.empty()) {
      out << "group_n =";
      for (double v : lv.group_n) out << ' ' << num(v);
      out << "\n";
    }
    out << "adam = " << (lv.run_adam ? "true" : "false") << "\n";
    out << "lbfgs = " << (lv.run_lbfgs ? "true" : "false") << "\n";
  }
  return out.str();
}

}  // namespace mmpinn
