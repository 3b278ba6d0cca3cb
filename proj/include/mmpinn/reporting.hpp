#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mmpinn/common.hpp"
#include "mmpinn/trainer.hpp"

namespace mmpinn {

/// sqrt(sum |pred - exact|^2) / sqrt(sum |exact|^2).
inline double relative_l2(const std::vector<double>& predictions,
                          const std::vector<double>& exact) {
  if (predictions.size() != exact.size() || exact.empty())
    throw ConfigError("relative_l2: inputs must be equal-length and non-empty");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double d = predictions[i] - exact[i];
    num += d * d;
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw ConfigError("relative_l2: exact values are identically zero");
  return std::sqrt(num) / std::sqrt(den);
}

struct MetricsSummary {
  double mean_l2 = 0.0;
  double std_l2 = 0.0;  // sample standard deviation (n-1); 0 for one repeat
  std::vector<double> per_repeat_l2;
  int failed_count = 0;
  bool single_sample = false;
  bool all_failed = false;
};

/// Mean and sample standard deviation over successful repeats.
inline MetricsSummary summarize_repeats(const TrainResult& result) {
  MetricsSummary s;
  for (const auto& r : result.repeats) {
    if (r.failed) {
      s.failed_count++;
      continue;
    }
    s.per_repeat_l2.push_back(r.relative_l2);
  }
  if (s.per_repeat_l2.empty()) {
    s.all_failed = true;
    return s;
  }
  double sum = 0.0;
  for (double v : s.per_repeat_l2) sum += v;
  s.mean_l2 = sum / static_cast<double>(s.per_repeat_l2.size());
  if (s.per_repeat_l2.size() == 1) {
    s.single_sample = true;
    s.std_l2 = 0.0;
  } else {
    double acc = 0.0;
    for (double v : s.per_repeat_l2) acc += (v - s.mean_l2) * (v - s.mean_l2);
    s.std_l2 = std::sqrt(acc / static_cast<double>(s.per_repeat_l2.size() - 1));
  }
  return s;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings on every platform
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace detail

/// Writes the machine-readable artifacts of one run:
///   <dir>/repeat<k>/losses.csv   iteration,phase,level,L_s,L_r,group_*,regularized_total,lr_effective
///   <dir>/repeat<k>/grid.csv     x0..x{d-1},prediction,exact,abs_error
///   <dir>/summary.csv            one row per repeat
///   <dir>/metrics.csv            aggregate over successful repeats
///   <dir>/config.cfg             config echo (re-parses to the same run)
/// Numbers use shortest round-trip decimals, so re-export of the same result
/// is byte-identical.
inline void export_run(const TrainResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  for (std::size_t k = 0; k < result.repeats.size(); ++k) {
    const RepeatResult& rep = result.repeats[k];
    const fs::path rd = out_dir / ("repeat" + std::to_string(k));
    fs::create_directories(rd, ec);
    if (ec) throw IoError("cannot create output directory '" + rd.string() + "'");

    {
      auto out = detail::open_out(rd / "losses.csv");
      out << "iteration,phase,level,L_s,L_r";
      for (int h = 0; h < result.group_count; ++h) out << ",group_" << h;
      out << ",regularized_total,lr_effective\n";
      for (const auto& row : rep.rows) {
        out << row.iteration << ',' << row.phase << ',' << row.level << ','
            << format_shortest(row.ls) << ',' << format_shortest(row.lr);
        for (int h = 0; h < result.group_count; ++h) {
          double g = h < static_cast<int>(row.groups.size()) ? row.groups[h] : row.lr;
          out << ',' << format_shortest(g);
        }
        out << ',' << format_shortest(row.regularized) << ','
            << format_shortest(row.lr_effective) << '\n';
      }
    }

    if (!rep.grid_predictions.empty()) {
      auto out = detail::open_out(rd / "grid.csv");
      const int dim = result.grid.dim;
      for (int d = 0; d < dim; ++d) out << 'x' << d << ',';
      out << "prediction,exact,abs_error\n";
      for (std::size_t i = 0; i < rep.grid_predictions.size(); ++i) {
        for (int d = 0; d < dim; ++d)
          out << format_shortest(result.grid.points[i * dim + d]) << ',';
        const double pred = rep.grid_predictions[i];
        const double ex = result.grid.exact[i];
        out << format_shortest(pred) << ',' << format_shortest(ex) << ','
            << format_shortest(std::abs(pred - ex)) << '\n';
      }
    }
  }

  {
    auto out = detail::open_out(out_dir / "summary.csv");
    out << "repeat,seed,status,relative_l2,wall_clock_seconds,iterations,lbfgs_stop\n";
    for (std::size_t k = 0; k < result.repeats.size(); ++k) {
      const RepeatResult& rep = result.repeats[k];
      out << k << ',' << rep.seed << ',' << (rep.failed ? "failed" : "ok") << ','
          << format_shortest(rep.relative_l2) << ',' << format_shortest(rep.wall_seconds)
          << ',' << rep.rows.size() << ',' << (rep.lbfgs_stop.empty() ? "-" : rep.lbfgs_stop)
          << '\n';
    }
  }

  {
    MetricsSummary s = summarize_repeats(result);
    auto out = detail::open_out(out_dir / "metrics.csv");
    out << "mean_l2,std_l2,successes,failed_count\n";
    out << format_shortest(s.mean_l2) << ',' << format_shortest(s.std_l2) << ','
        << s.per_repeat_l2.size() << ',' << s.failed_count << '\n';
  }

  if (!result.config_echo.empty()) {
    auto out = detail::open_out(out_dir / "config.cfg");
    out << result.config_echo;
  }
}

}  // namespace mmpinn
