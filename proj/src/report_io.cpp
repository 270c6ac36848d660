#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "condred/convergence_lab.hpp"
#include "condred/error.hpp"
#include "json.hpp"

namespace condred {

using nlohmann::json;

std::optional<ReportFormat> format_from_string(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "svg") return ReportFormat::svg;
  return std::nullopt;
}

std::string_view to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::svg: return "svg";
  }
  return "unknown";
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

LimitPair pair_or_throw(const std::string& name) {
  const auto p = pair_from_string(name);
  if (!p) throw Error(ErrorKind::parse_error, "report: unknown pair '" + name + "'");
  return *p;
}

}  // namespace

std::string report_csv(const ConvergenceReport& report) {
  std::string out = "pair,eps,alpha,error_bm2,seconds\n";
  for (const auto& c : report.cells) {
    out += std::string(to_string(c.pair)) + ',' + num(c.epsilon) + ',' + num(c.alpha) + ',' + num(c.error) + ',' +
           num(c.seconds) + '\n';
  }
  return out;
}

std::string report_json(const ConvergenceReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["grid"] = {{"dim_n", report.grid.dim_n},         {"dim_d", report.grid.dim_d},
               {"nx", report.grid.nx},               {"half_width", report.grid.half_width},
               {"num_modes", report.grid.num_modes}, {"num_quad", report.grid.num_quad}};
  j["epsilon_list"] = report.epsilon_list;
  j["alpha_list"] = report.alpha_list;
  j["fixed_alpha"] = report.fixed_alpha;
  j["fixed_epsilon"] = report.fixed_epsilon;
  j["t_final"] = report.t_final;
  j["dt"] = report.dt;
  j["regularity"] = report.regularity;
  j["cells"] = json::array();
  for (const auto& c : report.cells) {
    j["cells"].push_back({{"pair", to_string(c.pair)},
                          {"eps", c.epsilon},
                          {"alpha", c.alpha},
                          {"error", c.error},
                          {"seconds", c.seconds}});
  }
  j["slopes"] = json::object();
  for (const auto& [pair, fit] : report.slopes) {
    j["slopes"][std::string(to_string(pair))] = {{"value", fit.value}, {"stderr", fit.std_error}};
  }
  j["guards"] = json::array();
  for (const auto& g : report.guards) {
    j["guards"].push_back({{"pair", to_string(g.pair)},
                           {"eps", g.epsilon},
                           {"alpha", g.alpha},
                           {"error", g.error},
                           {"refined_error", g.refined_error},
                           {"relative_change", g.relative_change}});
  }
  j["incomplete"] = report.incomplete;
  j["missing_slopes"] = report.missing_slopes;
  j["failures"] = report.failures;
  return j.dump(2) + '\n';
}

ConvergenceReport parse_report_json(const std::string& text) {
  ConvergenceReport r;
  try {
    const json j = json::parse(text);
    r.scenario = j.at("scenario").get<std::string>();
    const json& g = j.at("grid");
    r.grid.dim_n = g.at("dim_n").get<int>();
    r.grid.dim_d = g.at("dim_d").get<int>();
    r.grid.nx = g.at("nx").get<int>();
    r.grid.half_width = g.at("half_width").get<double>();
    r.grid.num_modes = g.at("num_modes").get<int>();
    r.grid.num_quad = g.at("num_quad").get<int>();
    r.epsilon_list = j.value("epsilon_list", std::vector<double>{});
    r.alpha_list = j.value("alpha_list", std::vector<double>{});
    r.fixed_alpha = j.value("fixed_alpha", 0.0);
    r.fixed_epsilon = j.value("fixed_epsilon", 0.0);
    r.t_final = j.value("t_final", 0.0);
    r.dt = j.value("dt", 0.0);
    r.regularity = j.value("regularity", 4);
    for (const json& c : j.at("cells")) {
      r.cells.push_back({pair_or_throw(c.at("pair").get<std::string>()), c.at("eps").get<double>(),
                         c.at("alpha").get<double>(), c.at("error").get<double>(), c.at("seconds").get<double>()});
    }
    for (const auto& [name, fit] : j.at("slopes").items()) {
      r.slopes[pair_or_throw(name)] = {fit.at("value").get<double>(), fit.at("stderr").get<double>()};
    }
    if (j.contains("guards")) {
      for (const json& c : j.at("guards")) {
        r.guards.push_back({pair_or_throw(c.at("pair").get<std::string>()), c.at("eps").get<double>(),
                            c.at("alpha").get<double>(), c.at("error").get<double>(),
                            c.at("refined_error").get<double>(), c.at("relative_change").get<double>()});
      }
    }
    r.incomplete = j.value("incomplete", false);
    r.missing_slopes = j.value("missing_slopes", false);
    r.failures = j.value("failures", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, std::string("report json: ") + e.what());
  }
  return r;
}

std::string report_svg(const ConvergenceReport& report) {
  constexpr double width = 800, height = 600;
  constexpr double left = 90, right = 170, top = 50, bottom = 70;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  std::vector<LimitPair> pairs;
  for (const auto& c : report.cells)
    if (std::find(pairs.begin(), pairs.end(), c.pair) == pairs.end()) pairs.push_back(c.pair);

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto sweep_value = [](const CellResult& c) { return sweeps_epsilon(c.pair) ? c.epsilon : c.alpha; };
  for (const auto& c : report.cells) {
    if (!(c.error > 0.0) || !(sweep_value(c) > 0.0)) continue;
    x0 = std::min(x0, std::log10(sweep_value(c)));
    x1 = std::max(x1, std::log10(sweep_value(c)));
    y0 = std::min(y0, std::log10(c.error));
    y1 = std::max(y1, std::log10(c.error));
  }
  if (!(x0 <= x1)) {
    x0 = -1.0, x1 = 0.0, y0 = -3.0, y1 = 0.0;
  }
  if (x1 - x0 < 0.1) x0 -= 0.05, x1 += 0.05;
  if (y1 - y0 < 0.1) y0 -= 0.05, y1 += 0.05;
  const double xpad = 0.05 * (x1 - x0), ypad = 0.08 * (y1 - y0);
  x0 -= xpad, x1 += xpad, y0 -= ypad, y1 += ypad;
  auto px = [&](double lx) { return left + (lx - x0) / (x1 - x0) * plot_w; };
  auto py = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * plot_h; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"};

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(report.scenario) << ": B^" << report.regularity - 2 << " error vs sweep parameter</text>\n";
  s << "<g stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + plot_h) << "\" x2=\"" << fixed(left + plot_w)
    << "\" y2=\"" << fixed(top + plot_h) << "\"/>\n";
  s << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left) << "\" y2=\""
    << fixed(top + plot_h) << "\"/>\n";
  s << "</g>\n";

  s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = static_cast<int>(std::ceil(x0 * 10)); k <= static_cast<int>(std::floor(x1 * 10)); ++k) {
    const double lx = k / 10.0;
    s << "<text x=\"" << fixed(px(lx)) << "\" y=\"" << fixed(top + plot_h + 18) << "\" text-anchor=\"middle\">"
      << fixed(lx, 1) << "</text>\n";
  }
  const double ystep = (y1 - y0) > 4 ? 1.0 : 0.5;
  for (double ly = std::ceil(y0 / ystep) * ystep; ly <= y1; ly += ystep) {
    s << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(ly) + 4) << "\" text-anchor=\"end\">"
      << fixed(ly, 1) << "</text>\n";
  }
  s << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(height - 20)
    << "\" text-anchor=\"middle\">log10 eps (eq17, eq18, eq21) / log10 alpha (eq19, eq20)</text>\n";
  s << "<text x=\"20\" y=\"" << fixed(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << fixed(top + plot_h / 2) << ")\">log10 error</text>\n";
  s << "</g>\n";

  // reference slopes through the centre of the data box
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  s << "<g stroke=\"#999999\" stroke-dasharray=\"6 4\" stroke-width=\"1\">\n";
  for (int slope : {1, 2}) {
    double a = x0, b = x1;
    // clip to the vertical range
    const double ya = cy + slope * (a - cx), yb = cy + slope * (b - cx);
    if (ya < y0) a = cx + (y0 - cy) / slope;
    if (yb > y1) b = cx + (y1 - cy) / slope;
    s << "<line class=\"guide\" data-slope=\"" << slope << "\" x1=\"" << fixed(px(a)) << "\" y1=\""
      << fixed(py(cy + slope * (a - cx))) << "\" x2=\"" << fixed(px(b)) << "\" y2=\""
      << fixed(py(cy + slope * (b - cx))) << "\"/>\n";
  }
  s << "</g>\n";

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const char* color = colors[static_cast<int>(pairs[i]) % 6];
    s << "<polyline class=\"curve\" data-pair=\"" << to_string(pairs[i]) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& c : report.cells) {
      if (c.pair != pairs[i] || !(c.error > 0.0) || !(sweep_value(c) > 0.0)) continue;
      s << (first ? "" : " ") << fixed(px(std::log10(sweep_value(c)))) << ',' << fixed(py(std::log10(c.error)));
      first = false;
    }
    s << "\"/>\n";
  }

  s << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = top + 10;
  for (LimitPair p : pairs) {
    const char* color = colors[static_cast<int>(p) % 6];
    std::string label(to_string(p));
    if (const auto it = report.slopes.find(p); it != report.slopes.end()) {
      label += " slope " + fixed(it->second.value) + " +- " + fixed(it->second.std_error);
    }
    s << "<line x1=\"" << fixed(width - right + 10) << "\" y1=\"" << fixed(ly) << "\" x2=\""
      << fixed(width - right + 30) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << fixed(width - right + 34) << "\" y=\"" << fixed(ly + 4) << "\">" << xml_escape(label)
      << "</text>\n";
    ly += 20;
  }
  s << "<text x=\"" << fixed(width - right + 10) << "\" y=\"" << fixed(ly + 4)
    << "\" fill=\"#999999\">dashed: slopes 1, 2</text>\n";
  s << "</g>\n";
  s << "</svg>\n";
  return s.str();
}

void emit(const ConvergenceReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::string text;
  switch (format) {
    case ReportFormat::csv: text = report_csv(report); break;
    case ReportFormat::json: text = report_json(report); break;
    case ReportFormat::svg: text = report_svg(report); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::io_failure, "write failed for " + path.string());
}

ConvergenceReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report_json(buf.str());
}

}  // namespace condred
