#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elastid/features.hpp"
#include "elastid/gibbs.hpp"
#include "elastid/materials.hpp"
#include "elastid/paths.hpp"
#include "json.hpp"

namespace elastid {

struct ActivityMode {
  std::array<bool, FeatureLibrary::n_features> z{};
  long count = 0;
  double frequency = 0.0;
  Eigen::Matrix<double, FeatureLibrary::n_features, 1> theta_mean =
      Eigen::Matrix<double, FeatureLibrary::n_features, 1>::Zero();
};

struct ActivityReport {
  std::array<double, FeatureLibrary::n_features> z_avg{};
  std::vector<ActivityMode> modes;  // descending frequency, ties by indicator pattern
};

inline ActivityReport average_activity(const PosteriorSamples& samples) {
  constexpr int n_f = FeatureLibrary::n_features;
  if (samples.size() == 0) throw ConfigError("average_activity: no samples");
  ActivityReport report;
  std::map<std::array<bool, n_f>, ActivityMode> groups;
  for (const ChainState& st : samples.states) {
    ActivityMode& mode = groups[st.z];
    mode.z = st.z;
    mode.count += 1;
    mode.theta_mean += st.theta;
    for (int i = 0; i < n_f; ++i) report.z_avg[i] += st.z[i] ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(samples.size());
  for (double& v : report.z_avg) v /= n;
  for (auto& [key, mode] : groups) {
    mode.frequency = mode.count / n;
    mode.theta_mean /= static_cast<double>(mode.count);
    report.modes.push_back(mode);
  }
  std::sort(report.modes.begin(), report.modes.end(),
            [](const ActivityMode& a, const ActivityMode& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.z < b.z;
            });
  return report;
}

struct EnergyEnvelope {
  PathKind kind = PathKind::UT;
  std::vector<double> gamma;
  std::vector<double> mean;
  std::vector<double> p2_5;
  std::vector<double> p97_5;
  std::vector<double> true_w;  // empty when no ground truth was supplied
};

namespace detail {

// Linear-interpolation empirical percentile on an already sorted vector.
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

inline Eigen::Matrix3d embed_plane(const Eigen::Matrix2d& F2) {
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F.topLeftCorner<2, 2>() = F2;
  return F;
}

}  // namespace detail

// Energy-density band along one deformation path. Every curve is gauged by
// its own value at the identity, so models whose features carry constant
// offsets (the two-sided Ogden terms) remain comparable and start at zero.
inline EnergyEnvelope energy_envelope(
    const PosteriorSamples& samples, const FeatureLibrary& lib, const DeformationPath& path,
    const std::optional<FiberPair>& fibers = std::nullopt,
    const std::optional<BenchmarkMaterial>& true_model = std::nullopt) {
  constexpr int n_f = FeatureLibrary::n_features;
  if (samples.size() == 0) throw ConfigError("energy_envelope: no samples");
  if (path.gamma_grid.empty()) throw ConfigError("energy_envelope: empty gamma grid");

  EnergyEnvelope env;
  env.kind = path.kind;
  env.gamma = path.gamma_grid;
  const std::size_t n_pts = path.gamma_grid.size();
  env.mean.resize(n_pts);
  env.p2_5.resize(n_pts);
  env.p97_5.resize(n_pts);

  const auto q_ref =
      evaluate(lib, make_state(Eigen::Matrix3d::Identity(), fibers)).values;
  const double true_ref =
      true_model ? material_energy_at(*true_model, Eigen::Matrix3d::Identity()) : 0.0;
  if (true_model) env.true_w.resize(n_pts);

  std::vector<double> w(samples.size());
  for (std::size_t g = 0; g < n_pts; ++g) {
    const Eigen::Matrix3d F = detail::embed_plane(path.deformation(path.gamma_grid[g]));
    const auto q = evaluate(lib, make_state(F, fibers)).values;
    Eigen::Matrix<double, n_f, 1> dq;
    for (int i = 0; i < n_f; ++i) dq[i] = q[i] - q_ref[i];

    double sum = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      w[k] = samples.states[k].theta.dot(dq);
      sum += w[k];
    }
    env.mean[g] = sum / samples.size();
    std::sort(w.begin(), w.end());
    env.p2_5[g] = detail::percentile_sorted(w, 0.025);
    env.p97_5[g] = detail::percentile_sorted(w, 0.975);
    if (true_model) env.true_w[g] = material_energy_at(*true_model, F) - true_ref;
  }
  return env;
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct SvgCanvas {
  std::string body;
  double width, height;

  SvgCanvas(double w, double h) : width(w), height(h) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double sw = 1.0, const std::string& dash = "") {
    body += "<line x1=\"" + fmt(x1, "%.2f") + "\" y1=\"" + fmt(y1, "%.2f") + "\" x2=\"" +
            fmt(x2, "%.2f") + "\" y2=\"" + fmt(y2, "%.2f") + "\" stroke=\"" + stroke +
            "\" stroke-width=\"" + fmt(sw, "%.2f") + "\"";
    if (!dash.empty()) body += " stroke-dasharray=\"" + dash + "\"";
    body += "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double sw = 1.5, const std::string& dash = "") {
    if (pts.size() < 2) return;
    body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
            fmt(sw, "%.2f") + "\"";
    if (!dash.empty()) body += " stroke-dasharray=\"" + dash + "\"";
    body += " points=\"";
    for (const auto& [x, y] : pts) body += fmt(x, "%.2f") + "," + fmt(y, "%.2f") + " ";
    body += "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill) {
    if (pts.size() < 3) return;
    body += "<polygon fill=\"" + fill + "\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) body += fmt(x, "%.2f") + "," + fmt(y, "%.2f") + " ";
    body += "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body += "<rect x=\"" + fmt(x, "%.2f") + "\" y=\"" + fmt(y, "%.2f") + "\" width=\"" +
            fmt(w, "%.2f") + "\" height=\"" + fmt(h, "%.2f") + "\" fill=\"" + fill + "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body += "<circle cx=\"" + fmt(x, "%.2f") + "\" cy=\"" + fmt(y, "%.2f") + "\" r=\"" +
            fmt(r, "%.2f") + "\" fill=\"" + fill + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "middle") {
    body += "<text x=\"" + fmt(x, "%.2f") + "\" y=\"" + fmt(y, "%.2f") + "\" font-size=\"" +
            fmt(size, "%.1f") + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
            "\">" + s + "</text>\n";
  }

  std::string finish() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, "%.0f") +
           "\" height=\"" + fmt(height, "%.0f") + "\" viewBox=\"0 0 " + fmt(width, "%.0f") +
           " " + fmt(height, "%.0f") + "\">\n<rect width=\"100%\" height=\"100%\" "
           "fill=\"white\"/>\n" + body + "</svg>\n";
  }
};

// Marginal posterior silhouettes: a kernel density over the active draws of
// each coefficient plus a disc at zero whose size encodes the spike mass.
inline std::string render_violin_svg(const PosteriorSamples& samples) {
  constexpr int n_f = FeatureLibrary::n_features;
  const double slot = 30.0, left = 52.0, top = 16.0, plot_h = 300.0;
  SvgCanvas svg(left + slot * n_f + 16.0, top + plot_h + 40.0);

  double theta_max = 0.0;
  for (const ChainState& st : samples.states)
    theta_max = std::max(theta_max, st.theta.maxCoeff());
  if (theta_max <= 0.0) theta_max = 1.0;
  const double y_hi = theta_max * 1.08;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_hi); };

  svg.line(left - 8.0, y_of(0.0), left + slot * n_f, y_of(0.0), "#444444");
  svg.line(left - 8.0, y_of(0.0), left - 8.0, y_of(y_hi * 0.999), "#444444");
  for (double frac : {0.0, 0.5, 1.0}) {
    const double v = frac * theta_max;
    svg.line(left - 12.0, y_of(v), left - 8.0, y_of(v), "#444444");
    svg.text(left - 15.0, y_of(v) + 4.0, fmt(v, "%.3g"), 10.0, "end");
  }

  const double n_states = static_cast<double>(samples.size());
  for (int i = 0; i < n_f; ++i) {
    const double cx = left + slot * (i + 0.5);
    std::vector<double> active;
    for (const ChainState& st : samples.states)
      if (st.z[i]) active.push_back(st.theta[i]);
    const double inactive_frac = 1.0 - active.size() / n_states;
    svg.text(cx, top + plot_h + 16.0, std::to_string(i + 1), 9.0);

    if (inactive_frac > 0.0)
      svg.circle(cx, y_of(0.0), 1.5 + 5.0 * std::sqrt(inactive_frac), "#d08030");
    if (active.empty()) continue;

    std::sort(active.begin(), active.end());
    const double n_a = static_cast<double>(active.size());
    double mean = 0.0;
    for (double v : active) mean += v;
    mean /= n_a;
    double var = 0.0;
    for (double v : active) var += (v - mean) * (v - mean);
    const double sd = n_a > 1 ? std::sqrt(var / (n_a - 1)) : 0.0;
    const double iqr = percentile_sorted(active, 0.75) - percentile_sorted(active, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    const double bw = 0.9 * spread * std::pow(n_a, -0.2);  // Silverman's rule

    if (bw <= 0.0 || active.size() < 5) {
      svg.line(cx - 6.0, y_of(mean), cx + 6.0, y_of(mean), "#3a6ea5", 2.0);
      continue;
    }

    const int n_kde = 41;
    const double lo = std::max(0.0, active.front() - 2.5 * bw);
    const double hi = active.back() + 2.5 * bw;
    std::vector<double> dens(n_kde, 0.0);
    double dens_max = 0.0;
    for (int k = 0; k < n_kde; ++k) {
      const double y = lo + (hi - lo) * k / (n_kde - 1);
      double d = 0.0;
      for (double v : active) {
        const double u = (y - v) / bw;
        d += std::exp(-0.5 * u * u);
      }
      dens[k] = d;
      dens_max = std::max(dens_max, d);
    }
    const double half_max = (slot * 0.45) * std::sqrt(1.0 - inactive_frac);
    std::vector<std::pair<double, double>> outline;
    for (int k = 0; k < n_kde; ++k) {
      const double y = lo + (hi - lo) * k / (n_kde - 1);
      outline.emplace_back(cx + half_max * dens[k] / dens_max, y_of(y));
    }
    for (int k = n_kde - 1; k >= 0; --k) {
      const double y = lo + (hi - lo) * k / (n_kde - 1);
      outline.emplace_back(cx - half_max * dens[k] / dens_max, y_of(y));
    }
    svg.polygon(outline, "#9bb7d4");
  }
  return svg.finish();
}

inline std::string render_activity_svg(const ActivityReport& activity) {
  constexpr int n_f = FeatureLibrary::n_features;
  const double slot = 30.0, left = 52.0, top = 16.0, plot_h = 220.0;
  SvgCanvas svg(left + slot * n_f + 16.0, top + plot_h + 40.0);
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v); };

  svg.line(left - 8.0, y_of(0.0), left + slot * n_f, y_of(0.0), "#444444");
  svg.line(left - 8.0, y_of(0.0), left - 8.0, y_of(1.0), "#444444");
  for (double v : {0.0, 0.5, 1.0}) {
    svg.line(left - 12.0, y_of(v), left - 8.0, y_of(v), "#444444");
    svg.text(left - 15.0, y_of(v) + 4.0, fmt(v, "%.1f"), 10.0, "end");
  }
  for (int i = 0; i < n_f; ++i) {
    const double h = activity.z_avg[i] * plot_h;
    svg.rect(left + slot * i + 4.0, y_of(activity.z_avg[i]), slot - 8.0, h, "#3a6ea5");
    svg.text(left + slot * (i + 0.5), top + plot_h + 16.0, std::to_string(i + 1), 9.0);
  }
  return svg.finish();
}

inline std::string render_envelope_grid_svg(const std::vector<EnergyEnvelope>& envelopes) {
  const double panel_w = 230.0, panel_h = 170.0, gap = 46.0, left = 56.0, top = 30.0;
  const int cols = 3;
  const int rows = (static_cast<int>(envelopes.size()) + cols - 1) / cols;
  SvgCanvas svg(left + cols * (panel_w + gap), top + rows * (panel_h + gap) + 10.0);

  for (std::size_t e = 0; e < envelopes.size(); ++e) {
    const EnergyEnvelope& env = envelopes[e];
    const double x0 = left + (e % cols) * (panel_w + gap);
    const double y0 = top + (e / cols) * (panel_h + gap);

    double w_lo = 0.0, w_hi = 0.0;
    for (std::size_t g = 0; g < env.gamma.size(); ++g) {
      w_lo = std::min(w_lo, env.p2_5[g]);
      w_hi = std::max(w_hi, env.p97_5[g]);
      if (!env.true_w.empty()) {
        w_lo = std::min(w_lo, env.true_w[g]);
        w_hi = std::max(w_hi, env.true_w[g]);
      }
    }
    if (w_hi <= w_lo) w_hi = w_lo + 1.0;
    const double pad = 0.05 * (w_hi - w_lo);
    w_lo -= pad;
    w_hi += pad;
    auto x_of = [&](double g) { return x0 + panel_w * g; };
    auto y_of = [&](double w) { return y0 + panel_h * (1.0 - (w - w_lo) / (w_hi - w_lo)); };

    std::vector<std::pair<double, double>> band;
    for (std::size_t g = 0; g < env.gamma.size(); ++g)
      band.emplace_back(x_of(env.gamma[g]), y_of(env.p97_5[g]));
    for (std::size_t g = env.gamma.size(); g-- > 0;)
      band.emplace_back(x_of(env.gamma[g]), y_of(env.p2_5[g]));
    svg.polygon(band, "#d4d4d4");

    std::vector<std::pair<double, double>> mean_pts, true_pts;
    for (std::size_t g = 0; g < env.gamma.size(); ++g) {
      mean_pts.emplace_back(x_of(env.gamma[g]), y_of(env.mean[g]));
      if (!env.true_w.empty()) true_pts.emplace_back(x_of(env.gamma[g]), y_of(env.true_w[g]));
    }
    svg.polyline(mean_pts, "#222222", 1.6);
    if (!true_pts.empty()) svg.polyline(true_pts, "#c0392b", 1.6, "6 3");

    svg.line(x0, y0 + panel_h, x0 + panel_w, y0 + panel_h, "#444444");
    svg.line(x0, y0, x0, y0 + panel_h, "#444444");
    svg.text(x0 + panel_w / 2.0, y0 - 8.0, path_name(env.kind), 12.0);
    svg.text(x0, y0 + panel_h + 14.0, "0", 9.0);
    svg.text(x0 + panel_w, y0 + panel_h + 14.0, "1", 9.0);
    svg.text(x0 - 4.0, y0 + panel_h + 4.0, fmt(w_lo, "%.3g"), 9.0, "end");
    svg.text(x0 - 4.0, y0 + 4.0, fmt(w_hi, "%.3g"), 9.0, "end");
  }
  return svg.finish();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace detail

inline nlohmann::json activity_json(const ActivityReport& activity,
                                    std::size_t max_modes = 50) {
  constexpr int n_f = FeatureLibrary::n_features;
  nlohmann::json act;
  act["z_avg"] = activity.z_avg;
  act["n_modes_total"] = activity.modes.size();
  nlohmann::json modes = nlohmann::json::array();
  const std::size_t n_listed = std::min(activity.modes.size(), max_modes);
  for (std::size_t m = 0; m < n_listed; ++m) {
    const ActivityMode& mode = activity.modes[m];
    std::string bits(n_f, '0');
    std::vector<double> theta(n_f);
    for (int i = 0; i < n_f; ++i) {
      if (mode.z[i]) bits[i] = '1';
      theta[i] = mode.theta_mean[i];
    }
    modes.push_back({{"z", bits},
                     {"count", mode.count},
                     {"frequency", mode.frequency},
                     {"theta_mean", theta}});
  }
  act["modes"] = modes;
  return act;
}

// Writes the JSON summary, one CSV per envelope, and the three figures into
// out_dir. Deterministic: identical inputs produce byte-identical files.
inline std::vector<std::string> emit_report(const PosteriorSamples& samples,
                                            const ActivityReport& activity,
                                            const std::vector<EnergyEnvelope>& envelopes,
                                            const nlohmann::json& manifest,
                                            const std::string& out_dir) {
  if (samples.size() == 0) throw ConfigError("emit_report: no samples");
  if (activity.modes.empty()) throw ConfigError("emit_report: empty activity report");

  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  std::vector<std::string> written;
  nlohmann::json report;
  report["schema_version"] = 1;
  report["manifest"] = manifest;
  report["n_states"] = samples.size();

  report["activity"] = activity_json(activity);

  nlohmann::json env_index = nlohmann::json::array();
  for (const EnergyEnvelope& env : envelopes) {
    const std::string csv_name = "envelope_" + path_name(env.kind) + ".csv";
    std::string csv = "gamma,mean,p2_5,p97_5,true\n";
    double width_sum = 0.0;
    for (std::size_t g = 0; g < env.gamma.size(); ++g) {
      csv += detail::fmt(env.gamma[g], "%.17g") + "," + detail::fmt(env.mean[g], "%.17g") +
             "," + detail::fmt(env.p2_5[g], "%.17g") + "," +
             detail::fmt(env.p97_5[g], "%.17g") + ",";
      csv += env.true_w.empty() ? "nan" : detail::fmt(env.true_w[g], "%.17g");
      csv += "\n";
      width_sum += env.p97_5[g] - env.p2_5[g];
    }
    detail::write_text_file(dir / csv_name, csv);
    written.push_back(csv_name);
    env_index.push_back({{"path", path_name(env.kind)},
                         {"csv", csv_name},
                         {"mean_band_width", width_sum / env.gamma.size()},
                         {"has_true", !env.true_w.empty()}});
  }
  report["envelopes"] = env_index;

  detail::write_text_file(dir / "fig_violin.svg", detail::render_violin_svg(samples));
  written.push_back("fig_violin.svg");
  detail::write_text_file(dir / "fig_activity.svg", detail::render_activity_svg(activity));
  written.push_back("fig_activity.svg");
  if (!envelopes.empty()) {
    detail::write_text_file(dir / "fig_envelopes.svg",
                            detail::render_envelope_grid_svg(envelopes));
    written.push_back("fig_envelopes.svg");
  }
  report["figures"] = nlohmann::json::array();
  for (const std::string& name : written)
    if (name.size() > 4 && name.substr(name.size() - 4) == ".svg")
      report["figures"].push_back(name);

  detail::write_text_file(dir / "report.json", report.dump(2) + "\n");
  written.push_back("report.json");
  return written;
}

}  // namespace elastid
