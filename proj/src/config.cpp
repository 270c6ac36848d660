#include "condred/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "condred/error.hpp"

namespace condred {

namespace {

struct Value {
  enum class Type { number, string, boolean, array } type = Type::number;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
};

struct Entry {
  std::string section;
  std::string key;
  Value value;
  int line = 0;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void invalid(const std::string& key, const std::string& msg) {
  throw Error(ErrorKind::validation_error, key + ": " + msg);
}

class LineParser {
 public:
  LineParser(std::string_view text, int line) : s_(text), line_(line) {}

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '#') pos_ = s_.size();
  }

  bool done() {
    skip_space();
    return pos_ >= s_.size();
  }

  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) parse_fail(line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::islower(static_cast<unsigned char>(s_[pos_])) ||
                                std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) parse_fail(line_, "expected a lowercase key");
    return std::string(s_.substr(start, pos_ - start));
  }

  Value value() {
    const char c = peek();
    Value v;
    if (c == '"') {
      ++pos_;
      const std::size_t end = s_.find('"', pos_);
      if (end == std::string_view::npos) parse_fail(line_, "unterminated string");
      v.type = Value::Type::string;
      v.text = std::string(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.type = Value::Type::array;
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(value());
        if (v.items.back().type == Value::Type::array) parse_fail(line_, "nested arrays are not supported");
        const char sep = peek();
        ++pos_;
        if (sep == ']') break;
        if (sep != ',') parse_fail(line_, "expected ',' or ']' in array");
      }
      return v;
    }
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      v.type = Value::Type::boolean;
      v.flag = true;
      return v;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      v.type = Value::Type::boolean;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '+' ||
                                s_[pos_] == '-' || s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
      ++pos_;
    std::string_view token = s_.substr(start, pos_ - start);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v.number);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      parse_fail(line_, "malformed value '" + std::string(s_.substr(start, std::max<std::size_t>(pos_ - start, 1))) +
                            "'");
    }
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

std::vector<Entry> tokenize(std::string_view text) {
  std::vector<Entry> entries;
  std::string section;
  std::set<std::string> sections_seen;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    LineParser p(line, line_no);
    if (p.done()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      section = p.identifier();
      p.expect(']');
      if (section != "grid" && section != "phase" && section != "amplitude" && section != "sweep" &&
          section != "output") {
        parse_fail(line_no, "unknown section [" + section + "]");
      }
      if (!sections_seen.insert(section).second) parse_fail(line_no, "section [" + section + "] repeated");
    }
    while (!p.done()) {
      Entry e;
      e.section = section;
      e.key = p.identifier();
      e.line = line_no;
      p.expect('=');
      e.value = p.value();
      entries.push_back(std::move(e));
    }
    if (end == text.size()) break;
  }
  return entries;
}

double as_number(const Entry& e) {
  if (e.value.type != Value::Type::number) parse_fail(e.line, e.key + " expects a number");
  return e.value.number;
}

int as_int(const Entry& e) {
  const double v = as_number(e);
  if (v != std::floor(v) || std::abs(v) > 1e9) parse_fail(e.line, e.key + " expects an integer");
  return static_cast<int>(v);
}

std::string as_string(const Entry& e) {
  if (e.value.type != Value::Type::string) parse_fail(e.line, e.key + " expects a quoted string");
  return e.value.text;
}

bool as_bool(const Entry& e) {
  if (e.value.type != Value::Type::boolean) parse_fail(e.line, e.key + " expects true or false");
  return e.value.flag;
}

std::vector<double> as_numbers(const Entry& e) {
  if (e.value.type != Value::Type::array) parse_fail(e.line, e.key + " expects an array of numbers");
  std::vector<double> out;
  for (const auto& item : e.value.items) {
    if (item.type != Value::Type::number) parse_fail(e.line, e.key + " expects an array of numbers");
    out.push_back(item.number);
  }
  return out;
}

std::vector<std::string> as_strings(const Entry& e) {
  if (e.value.type != Value::Type::array) parse_fail(e.line, e.key + " expects an array of strings");
  std::vector<std::string> out;
  for (const auto& item : e.value.items) {
    if (item.type != Value::Type::string) parse_fail(e.line, e.key + " expects an array of strings");
    out.push_back(item.text);
  }
  return out;
}

void apply(StudyConfig& c, const Entry& e) {
  const std::string& s = e.section;
  const std::string& k = e.key;
  auto unknown = [&] {
    parse_fail(e.line, "unknown key '" + k + "'" + (s.empty() ? std::string() : " in [" + s + "]"));
  };
  if (s.empty()) {
    if (k != "scenario") unknown();
    return;  // applied before everything else
  }
  if (s == "grid") {
    if (k == "dim_n") c.grid.dim_n = as_int(e);
    else if (k == "dim_d") c.grid.dim_d = as_int(e);
    else if (k == "nx") c.grid.nx = as_int(e);
    else if (k == "half_width") c.grid.half_width = as_number(e);
    else if (k == "num_modes") c.grid.num_modes = as_int(e);
    else if (k == "num_quad") c.grid.num_quad = as_int(e);
    else unknown();
  } else if (s == "phase") {
    if (k == "kind") c.phase_kind = as_string(e);
    else if (k == "b") c.phase_b = as_number(e);
    else if (k == "c") c.phase_c = as_number(e);
    else if (k == "a") c.phase_a = as_number(e);
    else if (k == "w") c.phase_w = as_number(e);
    else unknown();
  } else if (s == "amplitude") {
    if (k == "kind") c.amplitude_kind = as_string(e);
    else if (k == "center") c.amplitude_center = as_number(e);
    else if (k == "width") c.amplitude_width = as_number(e);
    else if (k == "w0") c.amplitude_w0 = as_number(e);
    else if (k == "w2") c.amplitude_w2 = as_number(e);
    else unknown();
  } else if (s == "sweep") {
    if (k == "eps") c.eps = as_numbers(e);
    else if (k == "alpha") c.alpha = as_numbers(e);
    else if (k == "fixed_alpha") c.fixed_alpha = as_number(e);
    else if (k == "fixed_eps") c.fixed_eps = as_number(e);
    else if (k == "t_final") c.t_final = as_number(e);
    else if (k == "dt_safety") c.dt_safety = as_number(e);
    else if (k == "records") c.records = as_int(e);
    else if (k == "regularity") c.regularity = as_int(e);
    else if (k == "guard") c.guard = as_bool(e);
    else if (k == "pairs") c.pairs = as_strings(e);
    else unknown();
  } else if (s == "output") {
    if (k == "dir") c.output_dir = as_string(e);
    else if (k == "formats") c.formats = as_strings(e);
    else if (k == "timings") c.timings = as_bool(e);
    else unknown();
  } else {
    parse_fail(e.line, "unknown section [" + s + "]");
  }
}

std::string number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

template <class T, class F>
std::string array(const std::vector<T>& items, F format) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + format(items[i]);
  return out + "]";
}

}  // namespace

std::vector<std::string> scenario_names() { return {"polarized_baseline", "two_mode", "tilted", "focusing_phase"}; }

StudyConfig catalog_config(std::string_view scenario) {
  StudyConfig c;
  c.scenario = std::string(scenario);
  if (scenario == "polarized_baseline") return c;
  if (scenario == "two_mode") {
    c.amplitude_kind = "two_mode";
    c.amplitude_w0 = 0.8;
    c.amplitude_w2 = 0.6;
    return c;
  }
  if (scenario == "tilted") {
    c.phase_kind = "linear";
    c.phase_b = 0.5;
    return c;
  }
  if (scenario == "focusing_phase") {
    c.phase_kind = "quadratic";
    c.phase_c = -0.5;
    c.t_final = 0.4;
    return c;
  }
  invalid("scenario", "unknown scenario '" + std::string(scenario) + "'");
}

void validate_config(const StudyConfig& c) {
  try {
    c.grid.validate();
  } catch (const Error& e) {
    invalid("[grid]", e.what());
  }
  static const std::set<std::string> phases{"zero", "linear", "quadratic", "gaussian_bump"};
  if (!phases.count(c.phase_kind)) invalid("[phase] kind", "unknown phase kind '" + c.phase_kind + "'");
  if (c.phase_kind == "gaussian_bump" && !(c.phase_w > 0.0)) invalid("[phase] w", "must be positive");
  if (c.amplitude_kind != "polarized_gaussian" && c.amplitude_kind != "two_mode") {
    invalid("[amplitude] kind", "unknown amplitude kind '" + c.amplitude_kind + "'");
  }
  if (!(c.amplitude_width > 0.0)) invalid("[amplitude] width", "must be positive");
  if (c.amplitude_kind == "two_mode") {
    if (c.grid.num_modes < 3) invalid("[grid] num_modes", "two_mode data needs at least 3 modes");
    if (!(std::hypot(c.amplitude_w0, c.amplitude_w2) > 0.0)) invalid("[amplitude] w0", "weights must not both vanish");
  }
  auto unit = [](double v, const std::string& key) {
    if (!(v > 0.0) || v > 1.0) invalid(key, "must lie in (0, 1]");
  };
  for (double v : c.eps) unit(v, "[sweep] eps");
  for (double v : c.alpha) unit(v, "[sweep] alpha");
  unit(c.fixed_alpha, "[sweep] fixed_alpha");
  unit(c.fixed_eps, "[sweep] fixed_eps");
  unit(c.dt_safety, "[sweep] dt_safety");
  if (!(c.t_final > 0.0)) invalid("[sweep] t_final", "must be positive");
  if (c.records < 1) invalid("[sweep] records", "must be at least 1");
  if (c.regularity < 2) invalid("[sweep] regularity", "must be at least 2");
  for (const auto& p : c.pairs)
    if (!pair_from_string(p)) invalid("[sweep] pairs", "unknown pair '" + p + "'");
  for (const auto& f : c.formats)
    if (!format_from_string(f)) invalid("[output] formats", "unknown format '" + f + "'");
  if (c.output_dir.empty()) invalid("[output] dir", "must not be empty");
}

StudyConfig parse_config(std::string_view text) {
  const std::vector<Entry> entries = tokenize(text);
  std::set<std::pair<std::string, std::string>> seen;
  std::string scenario = "polarized_baseline";
  for (const auto& e : entries) {
    if (!seen.insert({e.section, e.key}).second) parse_fail(e.line, "key '" + e.key + "' given twice");
    if (e.section.empty() && e.key == "scenario") scenario = as_string(e);
  }
  StudyConfig c = catalog_config(scenario);
  for (const auto& e : entries) apply(c, e);
  validate_config(c);
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const StudyConfig& c) {
  std::ostringstream s;
  auto str = [](const std::string& v) { return quoted(v); };
  s << "scenario = " << quoted(c.scenario) << "\n\n";
  s << "[grid]\n";
  s << "dim_n = " << c.grid.dim_n << "\n";
  s << "dim_d = " << c.grid.dim_d << "\n";
  s << "nx = " << c.grid.nx << "\n";
  s << "half_width = " << number(c.grid.half_width) << "\n";
  s << "num_modes = " << c.grid.num_modes << "\n";
  s << "num_quad = " << c.grid.num_quad << "\n\n";
  s << "[phase]\n";
  s << "kind = " << quoted(c.phase_kind) << "\n";
  s << "b = " << number(c.phase_b) << "\n";
  s << "c = " << number(c.phase_c) << "\n";
  s << "a = " << number(c.phase_a) << "\n";
  s << "w = " << number(c.phase_w) << "\n\n";
  s << "[amplitude]\n";
  s << "kind = " << quoted(c.amplitude_kind) << "\n";
  s << "center = " << number(c.amplitude_center) << "\n";
  s << "width = " << number(c.amplitude_width) << "\n";
  s << "w0 = " << number(c.amplitude_w0) << "\n";
  s << "w2 = " << number(c.amplitude_w2) << "\n\n";
  s << "[sweep]\n";
  s << "eps = " << array(c.eps, number) << "\n";
  s << "alpha = " << array(c.alpha, number) << "\n";
  s << "fixed_alpha = " << number(c.fixed_alpha) << "\n";
  s << "fixed_eps = " << number(c.fixed_eps) << "\n";
  s << "t_final = " << number(c.t_final) << "\n";
  s << "dt_safety = " << number(c.dt_safety) << "\n";
  s << "records = " << c.records << "\n";
  s << "regularity = " << c.regularity << "\n";
  s << "guard = " << (c.guard ? "true" : "false") << "\n";
  s << "pairs = " << array(c.pairs, str) << "\n\n";
  s << "[output]\n";
  s << "dir = " << quoted(c.output_dir) << "\n";
  s << "formats = " << array(c.formats, str) << "\n";
  s << "timings = " << (c.timings ? "true" : "false") << "\n";
  return s.str();
}

InitialPhase phase_of(const StudyConfig& c) {
  if (c.phase_kind == "linear") return InitialPhase::linear(c.phase_b);
  if (c.phase_kind == "quadratic") return InitialPhase::quadratic(c.phase_c);
  if (c.phase_kind == "gaussian_bump") return InitialPhase::gaussian_bump(c.phase_a, c.phase_w);
  if (c.phase_kind == "zero") return InitialPhase::zero();
  invalid("[phase] kind", "unknown phase kind '" + c.phase_kind + "'");
}

InitialAmplitude amplitude_of(const StudyConfig& c) {
  if (c.amplitude_kind == "two_mode") {
    return InitialAmplitude::two_mode(c.amplitude_w0, c.amplitude_w2, c.amplitude_center, c.amplitude_width);
  }
  if (c.amplitude_kind == "polarized_gaussian") {
    return InitialAmplitude::polarized_gaussian(c.amplitude_center, c.amplitude_width);
  }
  invalid("[amplitude] kind", "unknown amplitude kind '" + c.amplitude_kind + "'");
}

Scenario scenario_of(const StudyConfig& c) {
  Scenario s;
  s.name = c.scenario;
  s.grid = c.grid;
  s.phase = phase_of(c);
  s.amplitude = amplitude_of(c);
  s.t_final = c.t_final;
  return s;
}

SweepSpec sweep_of(const StudyConfig& c) {
  SweepSpec s;
  s.epsilons = c.eps;
  s.alphas = c.alpha;
  s.fixed_alpha = c.fixed_alpha;
  s.fixed_epsilon = c.fixed_eps;
  s.guard = c.guard;
  s.pairs.clear();
  for (const auto& p : c.pairs) s.pairs.push_back(*pair_from_string(p));
  return s;
}

StudyResources resources_of(const StudyConfig& c) {
  StudyResources r;
  r.dt_safety = c.dt_safety;
  r.records = c.records;
  r.regularity = c.regularity;
  r.timings = c.timings;
  return r;
}

}  // namespace condred
