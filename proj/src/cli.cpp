#include "mipt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mipt/analysis.hpp"
#include "mipt/ed.hpp"
#include "mipt/gaussian.hpp"
#include "mipt/lattice.hpp"
#include "mipt/region.hpp"
#include "mipt/vqa.hpp"

namespace mipt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string num(int v) { return std::to_string(v); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// typed config access with strict unknown-key detection; paths are
// dotted ("model.boundary"), one level of nesting
class ConfigReader {
 public:
  explicit ConfigReader(json root) : root_(std::move(root)) {}

  const json* find(const std::string& path) {
    used_.insert(path);
    const auto dot = path.find('.');
    const json* node = &root_;
    if (dot != std::string::npos) {
      const std::string head = path.substr(0, dot);
      auto it = root_.find(head);
      if (it == root_.end()) return nullptr;
      if (!it->is_object()) {
        error(head + " must be an object");
        return nullptr;
      }
      node = &*it;
      auto leaf = node->find(path.substr(dot + 1));
      return leaf == node->end() ? nullptr : &*leaf;
    }
    auto it = root_.find(path);
    return it == root_.end() ? nullptr : &*it;
  }

  std::string get_string(const std::string& path, const std::string& fallback,
                         bool required = false) {
    const json* v = find(path);
    if (!v) {
      if (required) error("missing required key: " + path);
      return fallback;
    }
    if (!v->is_string()) {
      error(path + " must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  double get_number(const std::string& path, double fallback, bool required = false) {
    const json* v = find(path);
    if (!v) {
      if (required) error("missing required key: " + path);
      return fallback;
    }
    if (!v->is_number()) {
      error(path + " must be a number");
      return fallback;
    }
    return v->get<double>();
  }

  int get_int(const std::string& path, int fallback, bool required = false) {
    const json* v = find(path);
    if (!v) {
      if (required) error("missing required key: " + path);
      return fallback;
    }
    if (!v->is_number_integer()) {
      error(path + " must be an integer");
      return fallback;
    }
    return v->get<int>();
  }

  bool get_bool(const std::string& path, bool fallback) {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      error(path + " must be a boolean");
      return fallback;
    }
    return v->get<bool>();
  }

  std::vector<double> get_numbers(const std::string& path, std::vector<double> fallback,
                                  bool required = false) {
    const json* v = find(path);
    if (!v) {
      if (required) error("missing required key: " + path);
      return fallback;
    }
    if (!v->is_array()) {
      error(path + " must be an array of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number()) {
        error(path + " must be an array of numbers");
        return fallback;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> get_ints(const std::string& path, std::vector<int> fallback,
                            bool required = false) {
    const json* v = find(path);
    if (!v) {
      if (required) error("missing required key: " + path);
      return fallback;
    }
    if (!v->is_array()) {
      error(path + " must be an array of integers");
      return fallback;
    }
    std::vector<int> out;
    for (const json& e : *v) {
      if (!e.is_number_integer()) {
        error(path + " must be an array of integers");
        return fallback;
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  void error(const std::string& message) { errors_.push_back(message); }

  void reject_unknown() {
    for (const auto& [key, value] : root_.items()) {
      if (value.is_object()) {
        bool any = false;
        for (const auto& [sub, ignored] : value.items()) {
          (void)ignored;
          const std::string path = key + "." + sub;
          if (!used_.count(path)) {
            errors_.push_back("unknown key: " + path);
          }
          any = true;
        }
        if (!any && !used_prefix(key)) errors_.push_back("unknown key: " + key);
      } else if (!used_.count(key)) {
        errors_.push_back("unknown key: " + key);
      }
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }
  const json& root() const { return root_; }

 private:
  bool used_prefix(const std::string& key) const {
    const std::string prefix = key + ".";
    for (const std::string& u : used_) {
      if (u.rfind(prefix, 0) == 0) return true;
    }
    return false;
  }

  json root_;
  std::set<std::string> used_;
  std::vector<std::string> errors_;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& experiment, const std::string& hash,
            const std::string& units, const std::vector<std::string>& columns)
      : stream_(path, std::ios::binary) {
    if (!stream_) throw std::runtime_error("cannot open output file " + path.string());
    stream_ << "# experiment: " << experiment << "\n";
    stream_ << "# units: " << units << "\n";
    stream_ << "# config_hash: " << hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      stream_ << (i ? "," : "") << columns[i];
    }
    stream_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      stream_ << (i ? "," : "") << cells[i];
    }
    stream_ << "\n";
  }

 private:
  std::ofstream stream_;
};

struct PointError {
  std::string point;
  std::string message;
};

struct RunContext {
  std::string experiment;
  std::string hash;
  fs::path prefix; // directory + basename stem
  std::vector<std::string> outputs; // file names relative to the prefix directory
  std::vector<PointError> errors;
  json details = json::object();
};

fs::path output_file(RunContext& ctx, const std::string& suffix) {
  const std::string name = ctx.prefix.filename().string() + suffix;
  ctx.outputs.push_back(name);
  return ctx.prefix.parent_path() / name;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

lattice::Boundary boundary_from(ConfigReader& cfg, const std::string& fallback) {
  const std::string b = cfg.get_string("model.boundary", fallback);
  if (b == "periodic") return lattice::Boundary::periodic;
  if (b == "open") return lattice::Boundary::open;
  cfg.error("model.boundary must be \"periodic\" or \"open\"");
  return lattice::Boundary::open;
}

lattice::MeasurementKind kind_from(ConfigReader& cfg, const std::string& fallback) {
  const std::string k = cfg.get_string("measurement.kind", fallback);
  try {
    return lattice::measurement_kind_from_string(k);
  } catch (const std::exception& e) {
    cfg.error(e.what());
    return lattice::MeasurementKind::density_staggered;
  }
}

// measurement at sweep strength w: density_pattern scales the base
// pattern by w, every other kind uses w directly
lattice::MeasurementSpec measurement_at(lattice::MeasurementKind kind,
                                        const std::vector<double>& base_pattern, double w) {
  lattice::MeasurementSpec meas;
  meas.kind = kind;
  meas.strength = w;
  if (kind == lattice::MeasurementKind::density_pattern) {
    meas.pattern = base_pattern;
    for (double& p : meas.pattern) p *= w;
  }
  return meas;
}

std::vector<double> base_pattern_from(ConfigReader& cfg, lattice::MeasurementKind kind) {
  std::vector<double> pattern = cfg.get_numbers("measurement.pattern", {});
  if (kind == lattice::MeasurementKind::density_pattern && pattern.empty()) {
    cfg.error("measurement.pattern is required for the density_pattern kind");
  }
  return pattern;
}

double checked_entropy_half(const gaussian::GaussianState& state, int n_sites) {
  return gaussian::entanglement_entropy(state, Region::range(0, n_sites / 2));
}

// ---- experiments -------------------------------------------------------

void run_ceff_scan(ConfigReader& cfg, RunContext& ctx, const RunOptions& opt) {
  const std::vector<int> l_grid = cfg.get_ints("grids.L", {}, true);
  const std::vector<double> w_grid = cfg.get_numbers("grids.W", {}, true);
  const lattice::Boundary boundary = boundary_from(cfg, "periodic");
  const double delta = cfg.get_number("model.delta", 0.0);
  const double filling = cfg.get_number("model.filling", 0.5);
  const lattice::MeasurementKind kind = kind_from(cfg, "density_staggered");
  const std::vector<double> base_pattern = base_pattern_from(cfg, kind);
  const int fit_min_l = cfg.get_int("analysis.fit_min_L", 0);
  const std::string engine = cfg.get_string("engine", "gaussian");
  if (engine != "gaussian") cfg.error("ceff_scan supports engine \"gaussian\" only");
  if (delta != 0.0) cfg.error("the gaussian engine requires model.delta = 0");
  if (l_grid.size() < 3) cfg.error("grids.L needs at least 3 sizes");
  if (!cfg.errors().empty()) return;

  struct WResult {
    std::vector<double> entropy; // per L, NaN on failure
    std::vector<std::string> point_errors;
    bool fit_ok = false;
    double a = 0, b = 0, c_fit = 0, r2 = 0;
  };
  const int nw = static_cast<int>(w_grid.size());
  std::vector<WResult> results(nw);

  parallel_for(nw, opt.workers, [&](int wi) {
    WResult& res = results[wi];
    const double w = w_grid[wi];
    res.entropy.assign(l_grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<analysis::SeriesPoint> fit_pts;
    for (std::size_t li = 0; li < l_grid.size(); ++li) {
      const int l = l_grid[li];
      try {
        lattice::ModelSpec model{l, boundary, delta, 1.0, filling};
        gaussian::GaussianState state = gaussian::ground_state_quadratic(model);
        state = gaussian::apply_measurement(state, measurement_at(kind, base_pattern, w),
                                            boundary);
        res.entropy[li] = checked_entropy_half(state, l);
        if (l >= fit_min_l) fit_pts.push_back({static_cast<double>(l), res.entropy[li]});
      } catch (const std::exception& e) {
        res.point_errors.push_back("W=" + num(w) + " L=" + num(l) + ": " + e.what());
      }
    }
    try {
      const analysis::FitResult fit = analysis::fit_log_law(fit_pts);
      res.a = fit.params.at("a");
      res.b = fit.params.at("b");
      res.c_fit = fit.params.at("c_eff");
      res.r2 = fit.r_squared;
      res.fit_ok = true;
    } catch (const std::exception& e) {
      res.point_errors.push_back("W=" + num(w) + " fit: " + e.what());
    }
  });

  CsvWriter raw(output_file(ctx, "_raw.csv"), ctx.experiment, ctx.hash,
                "L in sites, entropy in nats", {"W", "L", "entropy"});
  CsvWriter fits(output_file(ctx, "_fits.csv"), ctx.experiment, ctx.hash,
                 "entropy in nats; c_eff dimensionless",
                 {"W", "a", "b", "c_eff_fit", "c_eff_theory", "r_squared"});
  for (int wi = 0; wi < nw; ++wi) {
    const WResult& res = results[wi];
    for (std::size_t li = 0; li < l_grid.size(); ++li) {
      raw.row({num(w_grid[wi]), num(l_grid[li]), num(res.entropy[li])});
    }
    if (res.fit_ok) {
      fits.row({num(w_grid[wi]), num(res.a), num(res.b), num(res.c_fit),
                num(lattice::c_eff_theory(w_grid[wi])), num(res.r2)});
    }
    for (const std::string& msg : res.point_errors) ctx.errors.push_back({"ceff_scan", msg});
  }
}

void run_ee_scan(ConfigReader& cfg, RunContext& ctx, const RunOptions& opt) {
  const std::string engine = cfg.get_string("engine", "gaussian");
  const std::vector<double> w_grid = cfg.get_numbers("grids.W", {}, true);
  const std::vector<int> l_grid = cfg.get_ints("grids.L", {});
  const std::vector<int> sub_grid = cfg.get_ints("grids.subsystem", {});
  const int n_sites = cfg.get_int("model.n_sites", 0);
  const lattice::Boundary boundary = boundary_from(cfg, "periodic");
  const double delta = cfg.get_number("model.delta", 0.0);
  const double filling = cfg.get_number("model.filling", 0.5);
  const lattice::MeasurementKind kind = kind_from(cfg, "density_staggered");
  const std::vector<double> base_pattern = base_pattern_from(cfg, kind);
  const bool do_fit = cfg.get_bool("analysis.fit", false);
  const int fit_min_l = cfg.get_int("analysis.fit_min_L", 0);

  const bool profile_mode = !sub_grid.empty();
  if (engine != "gaussian" && engine != "ed") {
    cfg.error("ee_scan supports engine \"gaussian\" or \"ed\"");
  }
  if (engine == "gaussian" && delta != 0.0) {
    cfg.error("the gaussian engine requires model.delta = 0");
  }
  if (profile_mode && n_sites <= 0) {
    cfg.error("model.n_sites is required with grids.subsystem");
  }
  if (profile_mode && !l_grid.empty()) {
    cfg.error("give either grids.L (half-cut scan) or grids.subsystem (profile), not both");
  }
  if (!profile_mode && l_grid.empty()) {
    cfg.error("one of grids.L or grids.subsystem is required");
  }
  if (!cfg.errors().empty()) return;

  struct Row {
    double w = 0;
    int length = 0; // system size or subsystem size
    double entropy = std::numeric_limits<double>::quiet_NaN();
  };
  struct WResult {
    std::vector<Row> rows;
    std::vector<std::string> point_errors;
    bool fit_ok = false;
    double a = 0, b = 0, c_fit = 0, r2 = 0;
  };
  const int nw = static_cast<int>(w_grid.size());
  std::vector<WResult> results(nw);

  const auto half_entropy = [&](int l, double w) {
    lattice::ModelSpec model{l, boundary, delta, 1.0, filling};
    const lattice::MeasurementSpec meas = measurement_at(kind, base_pattern, w);
    const Region cut = Region::range(0, l / 2);
    if (engine == "gaussian") {
      gaussian::GaussianState state = gaussian::ground_state_quadratic(model);
      state = gaussian::apply_measurement(state, meas, boundary);
      return gaussian::entanglement_entropy(state, cut);
    }
    ed::DenseState state = ed::ground_state_ed(model);
    state = ed::apply_measurement_ed(state, meas, boundary);
    return ed::ee_ed(state, cut);
  };

  parallel_for(nw, opt.workers, [&](int wi) {
    WResult& res = results[wi];
    const double w = w_grid[wi];
    std::vector<analysis::SeriesPoint> fit_pts;
    if (profile_mode) {
      try {
        lattice::ModelSpec model{n_sites, boundary, delta, 1.0, filling};
        const lattice::MeasurementSpec meas = measurement_at(kind, base_pattern, w);
        if (engine == "gaussian") {
          gaussian::GaussianState state = gaussian::ground_state_quadratic(model);
          state = gaussian::apply_measurement(state, meas, boundary);
          for (int l : sub_grid) {
            res.rows.push_back(
                {w, l, gaussian::entanglement_entropy(state, Region::range(0, l))});
          }
        } else {
          ed::DenseState state = ed::ground_state_ed(model);
          state = ed::apply_measurement_ed(state, meas, boundary);
          for (int l : sub_grid) {
            res.rows.push_back({w, l, ed::ee_ed(state, Region::range(0, l))});
          }
        }
      } catch (const std::exception& e) {
        res.point_errors.push_back("W=" + num(w) + ": " + e.what());
      }
    } else {
      for (int l : l_grid) {
        Row row{w, l, std::numeric_limits<double>::quiet_NaN()};
        try {
          row.entropy = half_entropy(l, w);
          if (l >= fit_min_l) fit_pts.push_back({static_cast<double>(l), row.entropy});
        } catch (const std::exception& e) {
          res.point_errors.push_back("W=" + num(w) + " L=" + num(l) + ": " + e.what());
        }
        res.rows.push_back(row);
      }
      if (do_fit) {
        try {
          const analysis::FitResult fit = analysis::fit_log_law(fit_pts);
          res.a = fit.params.at("a");
          res.b = fit.params.at("b");
          res.c_fit = fit.params.at("c_eff");
          res.r2 = fit.r_squared;
          res.fit_ok = true;
        } catch (const std::exception& e) {
          res.point_errors.push_back("W=" + num(w) + " fit: " + e.what());
        }
      }
    }
  });

  const std::string len_col = profile_mode ? "subsystem" : "L";
  CsvWriter raw(output_file(ctx, "_raw.csv"), ctx.experiment, ctx.hash,
                len_col + " in sites, entropy in nats", {"W", len_col, "entropy"});
  std::unique_ptr<CsvWriter> fits;
  if (do_fit && !profile_mode) {
    fits = std::make_unique<CsvWriter>(output_file(ctx, "_fits.csv"), ctx.experiment, ctx.hash,
                                       "entropy in nats; c_eff dimensionless",
                                       std::vector<std::string>{"W", "a", "b", "c_eff_fit",
                                                                "r_squared"});
  }
  for (int wi = 0; wi < nw; ++wi) {
    const WResult& res = results[wi];
    for (const Row& row : res.rows) raw.row({num(row.w), num(row.length), num(row.entropy)});
    if (fits && res.fit_ok) {
      fits->row({num(w_grid[wi]), num(res.a), num(res.b), num(res.c_fit), num(res.r2)});
    }
    for (const std::string& msg : res.point_errors) ctx.errors.push_back({"ee_scan", msg});
  }
}

void run_mutual_info(ConfigReader& cfg, RunContext& ctx, const RunOptions& opt) {
  const int n_sites = cfg.get_int("model.n_sites", 0, true);
  const std::vector<double> w_grid = cfg.get_numbers("grids.W", {}, true);
  const std::vector<int> sub_grid = cfg.get_ints("grids.subsystem", {}, true);
  const lattice::Boundary boundary = boundary_from(cfg, "periodic");
  const double delta = cfg.get_number("model.delta", 0.0);
  const double filling = cfg.get_number("model.filling", 0.5);
  const lattice::MeasurementKind kind = kind_from(cfg, "density_staggered");
  const std::vector<double> base_pattern = base_pattern_from(cfg, kind);
  const bool do_fit = cfg.get_bool("analysis.fit", true);
  const std::string engine = cfg.get_string("engine", "gaussian");
  if (engine != "gaussian") cfg.error("mutual_info supports engine \"gaussian\" only");
  if (delta != 0.0) cfg.error("the gaussian engine requires model.delta = 0");
  for (int l : sub_grid) {
    if (l <= 0 || n_sites / 2 + l > n_sites) {
      cfg.error("grids.subsystem entries must fit antipodal regions into the chain");
      break;
    }
  }
  if (!cfg.errors().empty()) return;

  struct WResult {
    std::vector<double> mi; // per subsystem size, NaN on failure
    std::vector<std::string> point_errors;
    bool fit_ok = false;
    double eta = 0, amplitude = 0, c_curve = 0, r2 = 0;
  };
  const int nw = static_cast<int>(w_grid.size());
  std::vector<WResult> results(nw);

  parallel_for(nw, opt.workers, [&](int wi) {
    WResult& res = results[wi];
    const double w = w_grid[wi];
    res.mi.assign(sub_grid.size(), std::numeric_limits<double>::quiet_NaN());
    try {
      lattice::ModelSpec model{n_sites, boundary, delta, 1.0, filling};
      gaussian::GaussianState state = gaussian::ground_state_quadratic(model);
      state = gaussian::apply_measurement(state, measurement_at(kind, base_pattern, w),
                                          boundary);
      std::vector<analysis::SeriesPoint> fit_pts;
      for (std::size_t si = 0; si < sub_grid.size(); ++si) {
        const int l = sub_grid[si];
        const Region a = Region::range(0, l);
        const Region b = Region::range(n_sites / 2, n_sites / 2 + l);
        res.mi[si] = gaussian::mutual_information(state, a, b);
        fit_pts.push_back({static_cast<double>(l) / n_sites, res.mi[si]});
      }
      if (do_fit) {
        const analysis::FitResult fit = analysis::fit_mutual_information(fit_pts);
        res.eta = fit.params.at("eta");
        res.amplitude = fit.params.at("amplitude");
        res.c_curve = fit.params.at("c_eff_curve");
        res.r2 = fit.r_squared;
        res.fit_ok = true;
      }
    } catch (const std::exception& e) {
      res.point_errors.push_back("W=" + num(w) + ": " + e.what());
    }
  });

  CsvWriter raw(output_file(ctx, "_raw.csv"), ctx.experiment, ctx.hash,
                "subsystem in sites, mutual information in nats",
                {"W", "subsystem", "ratio", "mi", "mi_theory"});
  std::unique_ptr<CsvWriter> fits;
  if (do_fit) {
    fits = std::make_unique<CsvWriter>(
        output_file(ctx, "_fits.csv"), ctx.experiment, ctx.hash,
        "amplitude in nats; eta and c_eff dimensionless",
        std::vector<std::string>{"W", "eta", "amplitude", "c_eff_curve", "c_eff_theory",
                                 "r_squared"});
  }
  for (int wi = 0; wi < nw; ++wi) {
    const WResult& res = results[wi];
    const double c_th = lattice::c_eff_theory(w_grid[wi]);
    for (std::size_t si = 0; si < sub_grid.size(); ++si) {
      const double ratio = static_cast<double>(sub_grid[si]) / n_sites;
      raw.row({num(w_grid[wi]), num(sub_grid[si]), num(ratio), num(res.mi[si]),
               num(analysis::theory_mutual_information(c_th, ratio))});
    }
    if (fits && res.fit_ok) {
      fits->row({num(w_grid[wi]), num(res.eta), num(res.amplitude), num(res.c_curve),
                 num(c_th), num(res.r2)});
    }
    for (const std::string& msg : res.point_errors) ctx.errors.push_back({"mutual_info", msg});
  }
}

void run_collapse(ConfigReader& cfg, RunContext& ctx, const RunOptions& opt) {
  const std::vector<int> l_grid = cfg.get_ints("grids.L", {}, true);
  const std::vector<double> d_grid = cfg.get_numbers("grids.delta", {}, true);
  const double strength = cfg.get_number("measurement.strength", 0.0, true);
  const lattice::Boundary boundary = boundary_from(cfg, "periodic");
  const double filling = cfg.get_number("model.filling", 0.5);
  const lattice::MeasurementKind kind = kind_from(cfg, "density_staggered");
  std::vector<double> pattern = cfg.get_numbers("measurement.pattern", {});
  const double delta_c = cfg.get_number("analysis.delta_c", 0.0);
  const double nu = cfg.get_number("analysis.nu", 1.0);
  const std::string engine = cfg.get_string("engine", "ed");
  if (engine != "ed") cfg.error("collapse supports engine \"ed\" only");
  if (kind == lattice::MeasurementKind::density_pattern && pattern.empty()) {
    cfg.error("measurement.pattern is required for the density_pattern kind");
  }
  if (l_grid.size() < 3) cfg.error("grids.L needs at least 3 sizes");
  if (!cfg.errors().empty()) return;

  lattice::MeasurementSpec meas;
  meas.kind = kind;
  meas.strength = strength;
  meas.pattern = pattern;

  const int nl = static_cast<int>(l_grid.size());
  const int nd = static_cast<int>(d_grid.size());
  const int npts = nl * nd;
  std::vector<double> entropy(npts, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> point_errors(npts);

  parallel_for(npts, opt.workers, [&](int idx) {
    const int li = idx / nd;
    const int di = idx % nd;
    try {
      lattice::ModelSpec model{l_grid[li], boundary, d_grid[di], 1.0, filling};
      ed::DenseState state = ed::ground_state_ed(model);
      state = ed::apply_measurement_ed(state, meas, boundary);
      entropy[idx] = ed::ee_ed(state, Region::range(0, l_grid[li] / 2));
    } catch (const std::exception& e) {
      point_errors[idx] =
          "L=" + num(l_grid[li]) + " delta=" + num(d_grid[di]) + ": " + e.what();
    }
  });

  CsvWriter curves(output_file(ctx, "_curves.csv"), ctx.experiment, ctx.hash,
                   "L in sites, entropy in nats", {"L", "delta", "entropy"});
  std::vector<analysis::CollapseCurve> collapse_curves;
  for (int li = 0; li < nl; ++li) {
    analysis::CollapseCurve curve;
    curve.system_size = l_grid[li];
    for (int di = 0; di < nd; ++di) {
      const int idx = li * nd + di;
      curves.row({num(l_grid[li]), num(d_grid[di]), num(entropy[idx])});
      if (!point_errors[idx].empty()) {
        ctx.errors.push_back({"collapse", point_errors[idx]});
      } else {
        curve.points.push_back({d_grid[di], entropy[idx]});
      }
    }
    collapse_curves.push_back(std::move(curve));
  }

  CsvWriter resid(output_file(ctx, "_residuals.csv"), ctx.experiment, ctx.hash,
                  "residual dimensionless (cross-curve variance / mean-curve variance)",
                  {"scaling", "residual"});
  for (const auto& [name, mode] :
       {std::pair<std::string, analysis::CollapseScaling>{"log_L",
                                                          analysis::CollapseScaling::log_L},
        {"power_L", analysis::CollapseScaling::power_L}}) {
    try {
      const double r = analysis::data_collapse(collapse_curves, delta_c, mode, nu);
      resid.row({name, num(r)});
    } catch (const std::exception& e) {
      ctx.errors.push_back({"collapse " + name, e.what()});
    }
  }
}

void run_vqa_experiment(ConfigReader& cfg, RunContext& ctx, const RunOptions&) {
  const int n_sites = cfg.get_int("model.n_sites", 0, true);
  const double delta = cfg.get_number("model.delta", 0.0);
  const lattice::Boundary boundary = boundary_from(cfg, "open");
  const double filling = cfg.get_number("model.filling", 0.5);
  const lattice::MeasurementKind kind = kind_from(cfg, "density_staggered");
  const double strength = cfg.get_number("measurement.strength", 0.0);
  std::vector<double> pattern = cfg.get_numbers("measurement.pattern", {});
  vqa::AnsatzSpec ansatz;
  ansatz.n_qubits = n_sites;
  ansatz.n_layers = cfg.get_int("vqa.n_layers", n_sites);
  vqa::VqaRunConfig run;
  run.step_size = cfg.get_number("vqa.step_size", 0.01);
  run.regularization = cfg.get_number("vqa.regularization", 1e-6);
  run.seed_trick = cfg.get_bool("vqa.seed_trick", true);
  run.track_fidelity = cfg.get_bool("vqa.track_fidelity", true);
  const std::string integ = cfg.get_string("vqa.integrator", "rk4");
  if (integ == "rk4") {
    run.integrator = vqa::Integrator::rk4;
  } else if (integ == "euler") {
    run.integrator = vqa::Integrator::euler;
  } else {
    cfg.error("vqa.integrator must be \"rk4\" or \"euler\"");
  }
  const std::string engine = cfg.get_string("engine", "vqa");
  if (engine != "vqa") cfg.error("vqa_run supports engine \"vqa\" only");
  if (kind == lattice::MeasurementKind::density_staggered) {
    run.total_tau = strength;
  } else if (kind == lattice::MeasurementKind::density_pattern) {
    run.total_tau = 1.0;
    if (pattern.empty()) {
      cfg.error("measurement.pattern is required for the density_pattern kind");
    }
  } else {
    cfg.error("vqa_run requires a density measurement kind");
  }
  if (!cfg.errors().empty()) return;

  lattice::MeasurementSpec meas;
  meas.kind = kind;
  meas.strength = strength;
  meas.pattern = pattern;
  lattice::ModelSpec model{n_sites, boundary, delta, 1.0, filling};

  try {
    const vqa::VqaResult result = vqa::run_vqa(model, meas, ansatz, run);
    {
      std::ofstream traj(output_file(ctx, "_trajectory.csv"), std::ios::binary);
      traj << "# experiment: " << ctx.experiment << "\n";
      traj << "# units: tau in inverse hopping, norms in nats\n";
      traj << "# config_hash: " << ctx.hash << "\n";
      vqa::write_trajectory_csv(result.trajectory, traj);
    }
    CsvWriter profile(output_file(ctx, "_profile.csv"), ctx.experiment, ctx.hash,
                      "subsystem in sites, entropy in nats",
                      {"subsystem", "entropy", "chord_theory_c1"});
    for (int l = 1; l < n_sites; ++l) {
      const double s = ed::ee_ed(result.state, Region::range(0, l));
      profile.row({num(l), num(s), num(analysis::theory_chord_entropy(1.0, l, n_sites, 0.0))});
    }
    ctx.details["parameter_count"] = vqa::parameter_count(ansatz);
    if (!result.trajectory.empty() && run.track_fidelity) {
      ctx.details["final_fidelity"] = result.trajectory.back().fidelity;
    }
  } catch (const std::exception& e) {
    ctx.errors.push_back({"vqa_run", e.what()});
  }
}

void run_protocol_prob(ConfigReader& cfg, RunContext& ctx, const RunOptions&) {
  const int n_sites = cfg.get_int("model.n_sites", 80);
  const double filling = cfg.get_number("protocol.filling", 0.25);
  const std::vector<double> base =
      cfg.get_numbers("protocol.base_pattern", {2.0, 1.0, 0.0, 1.0});
  const std::vector<double> w_grid = cfg.get_numbers("grids.W", {}, true);
  if (!cfg.errors().empty()) return;

  CsvWriter out(output_file(ctx, ".csv"), ctx.experiment, ctx.hash,
                "W in inverse hopping, probabilities dimensionless",
                {"W", "P", "lower_bound"});
  for (double w : w_grid) {
    try {
      lattice::ProtocolSpec proto;
      proto.filling = filling;
      proto.chain_length = n_sites;
      proto.period_weights = base;
      for (double& x : proto.period_weights) x *= w;
      const lattice::SuccessProbability p = lattice::success_probability(proto);
      out.row({num(w), num(p.probability), num(p.lower_bound)});
    } catch (const std::exception& e) {
      ctx.errors.push_back({"protocol_prob W=" + num(w), e.what()});
    }
  }
}

void run_oracle_check(ConfigReader& cfg, RunContext& ctx, const RunOptions& opt) {
  const std::vector<int> l_grid = cfg.get_ints("grids.L", {4, 6, 8, 10, 12});
  const double strength = cfg.get_number("measurement.strength", 0.7);
  std::vector<double> pattern = cfg.get_numbers("measurement.pattern", {0.3, 0.7});
  if (!cfg.errors().empty()) return;

  struct Case {
    lattice::MeasurementKind kind;
    lattice::Boundary boundary;
    int n_sites;
  };
  std::vector<Case> cases;
  for (lattice::MeasurementKind kind :
       {lattice::MeasurementKind::density_staggered, lattice::MeasurementKind::density_pattern,
        lattice::MeasurementKind::bond_xx_yy_paired, lattice::MeasurementKind::bond_xx}) {
    for (int l : l_grid) {
      if (l % 2 == 0) cases.push_back({kind, lattice::Boundary::open, l});
    }
    for (int l : l_grid) {
      // periodic half filling is degenerate unless L = 2 (mod 4)
      if (l % 4 == 2) cases.push_back({kind, lattice::Boundary::periodic, l});
    }
  }

  struct CaseResult {
    double max_diff = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  std::vector<CaseResult> results(cases.size());

  parallel_for(static_cast<int>(cases.size()), opt.workers, [&](int ci) {
    const Case& c = cases[ci];
    try {
      lattice::MeasurementSpec meas;
      meas.kind = c.kind;
      meas.strength = strength;
      if (c.kind == lattice::MeasurementKind::density_pattern) meas.pattern = pattern;
      lattice::ModelSpec model{c.n_sites, c.boundary, 0.0, 1.0, 0.5};

      gaussian::GaussianState gstate = gaussian::ground_state_quadratic(model);
      gstate = gaussian::apply_measurement(gstate, meas, c.boundary);
      ed::DenseState estate = ed::ground_state_ed(model);
      estate = ed::apply_measurement_ed(estate, meas, c.boundary);

      const int half = c.n_sites / 2;
      const int max_start =
          c.boundary == lattice::Boundary::periodic ? c.n_sites - 1 : c.n_sites - half;
      double worst = 0.0;
      for (int start = 0; start <= max_start; ++start) {
        const Region region = Region::contiguous(start, half, c.n_sites);
        const double sg = gaussian::entanglement_entropy(gstate, region);
        const double se = ed::ee_ed(estate, region);
        worst = std::max(worst, std::abs(sg - se));
      }
      results[ci].max_diff = worst;
    } catch (const std::exception& e) {
      results[ci].error = e.what();
    }
  });

  CsvWriter out(output_file(ctx, ".csv"), ctx.experiment, ctx.hash,
                "L in sites, max_abs_diff in nats", {"kind", "boundary", "L", "max_abs_diff",
                                                     "pass"});
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const Case& c = cases[ci];
    const CaseResult& res = results[ci];
    const std::string label = lattice::to_string(c.kind) + "/" +
                              (c.boundary == lattice::Boundary::periodic ? "periodic" : "open") +
                              "/L=" + num(c.n_sites);
    if (!res.error.empty()) {
      ctx.errors.push_back({"oracle_check " + label, res.error});
      continue;
    }
    const bool pass = res.max_diff < 1e-8;
    out.row({lattice::to_string(c.kind),
             c.boundary == lattice::Boundary::periodic ? "periodic" : "open", num(c.n_sites),
             num(res.max_diff), pass ? "1" : "0"});
    if (!pass) {
      ctx.errors.push_back(
          {"oracle_check " + label, "engines disagree by " + num(res.max_diff)});
    }
  }
}

void emit_plot_script(RunContext& ctx) {
  std::ofstream f(output_file(ctx, "_plot.py"), std::ios::binary);
  f << "#!/usr/bin/env python3\n"
    << "\"\"\"Quick-look plots for the CSV files of one run.\"\"\"\n"
    << "import csv\n"
    << "import sys\n\n"
    << "import matplotlib\n"
    << "matplotlib.use(\"Agg\")\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "FILES = [\n";
  for (const std::string& name : ctx.outputs) {
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
      f << "    \"" << name << "\",\n";
    }
  }
  f << "]\n\n"
    << "for path in FILES:\n"
    << "    with open(path) as fh:\n"
    << "        rows = [r for r in csv.reader(fh) if r and not r[0].startswith(\"#\")]\n"
    << "    header, body = rows[0], rows[1:]\n"
    << "    cols = list(zip(*body))\n"
    << "    numeric = []\n"
    << "    for name, col in zip(header, cols):\n"
    << "        try:\n"
    << "            numeric.append((name, [float(v) for v in col]))\n"
    << "        except ValueError:\n"
    << "            continue\n"
    << "    if len(numeric) < 2:\n"
    << "        continue\n"
    << "    x_name, x = numeric[0]\n"
    << "    plt.figure()\n"
    << "    for name, col in numeric[1:]:\n"
    << "        plt.plot(x, col, \"o-\", label=name, markersize=3)\n"
    << "    plt.xlabel(x_name)\n"
    << "    plt.legend()\n"
    << "    plt.title(path)\n"
    << "    out = path[:-4] + \".png\"\n"
    << "    plt.savefig(out, dpi=150)\n"
    << "    print(\"wrote\", out, file=sys.stderr)\n";
}

int finish(RunContext& ctx, ConfigReader& cfg, const RunOptions& opt, double wall_seconds) {
  json manifest;
  manifest["experiment"] = ctx.experiment;
  manifest["config_hash"] = ctx.hash;
  manifest["config"] = cfg.root();
  manifest["outputs"] = ctx.outputs;
  json errs = json::array();
  for (const PointError& e : ctx.errors) {
    errs.push_back({{"point", e.point}, {"message", e.message}});
  }
  manifest["errors"] = errs;
  manifest["wall_time_s"] = wall_seconds;
  manifest["workers"] = opt.workers;
  manifest["versions"] = {{"miptlab", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}};
  if (!ctx.details.empty()) manifest["details"] = ctx.details;

  const fs::path manifest_path = output_file(ctx, "_manifest.json");
  std::ofstream out(manifest_path, std::ios::binary);
  out << manifest.dump(2) << "\n";
  return ctx.errors.empty() ? 0 : 3;
}

int report_validation(const std::vector<std::string>& details) {
  json report;
  report["error"] = "validation";
  report["details"] = details;
  std::cerr << report.dump(2) << "\n";
  return 2;
}

} // namespace

int run_config_file(const std::string& path, const RunOptions& options) {
  json root;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) return report_validation({"cannot open config file: " + path});
    try {
      in >> root;
    } catch (const std::exception& e) {
      return report_validation({std::string("config is not valid JSON: ") + e.what()});
    }
  }
  if (!root.is_object()) return report_validation({"config must be a JSON object"});

  ConfigReader cfg(std::move(root));
  const std::string experiment = cfg.get_string("experiment", "", true);
  const std::string output = cfg.get_string("output", "", true);

  RunContext ctx;
  ctx.experiment = experiment;
  ctx.hash = hex64(fnv1a(cfg.root().dump()));

  fs::path prefix(output);
  if (prefix.is_relative()) {
    if (const char* base = std::getenv("MIPTLAB_OUT")) prefix = fs::path(base) / prefix;
  }
  ctx.prefix = prefix;

  const auto start = std::chrono::steady_clock::now();
  using Runner = void (*)(ConfigReader&, RunContext&, const RunOptions&);
  static const std::map<std::string, Runner> runners = {
      {"ceff_scan", &run_ceff_scan},     {"ee_scan", &run_ee_scan},
      {"mutual_info", &run_mutual_info}, {"collapse", &run_collapse},
      {"vqa_run", &run_vqa_experiment},  {"protocol_prob", &run_protocol_prob},
      {"oracle_check", &run_oracle_check}};
  const auto it = runners.find(experiment);
  if (it == runners.end()) {
    cfg.error("unknown experiment: " + experiment);
    return report_validation(cfg.errors());
  }
  if (options.workers < 1) {
    cfg.error("--workers must be at least 1");
    return report_validation(cfg.errors());
  }

  std::error_code ec;
  if (!ctx.prefix.parent_path().empty()) {
    fs::create_directories(ctx.prefix.parent_path(), ec);
    if (ec) return report_validation({"cannot create output directory: " + ec.message()});
  }

  try {
    it->second(cfg, ctx, options);
  } catch (const std::exception& e) {
    cfg.error(e.what());
  }
  cfg.reject_unknown();
  if (!cfg.errors().empty()) return report_validation(cfg.errors());

  if (options.emit_plot_script) emit_plot_script(ctx);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish(ctx, cfg, options, wall);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"measurement-induced critical states: batch experiment runner"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  CLI::App* run = app.add_subcommand("run", "execute one experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--workers", options.workers, "worker threads for grid sweeps");
  run->add_flag("--emit-plot-script", options.emit_plot_script,
                "also write a matplotlib quick-look script");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run_config_file(config_path, options);
}

} // namespace mipt::cli
