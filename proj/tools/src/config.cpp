#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nehari/errors.hpp"

namespace nehari::cli {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Document run() {
    std::string section;
    while (!eof()) {
      skip_space();
      if (eof()) break;
      if (peek() == '\n') {
        next_line();
        continue;
      }
      if (peek() == '#') {
        skip_comment();
        continue;
      }
      if (peek() == '[') {
        ++pos_;
        skip_space();
        section = key_path();
        skip_space();
        expect(']');
        end_of_line();
        continue;
      }
      const std::string key = key_path();
      skip_space();
      expect('=');
      skip_space();
      insert(section.empty() ? key : section + "." + key, value());
      end_of_line();
    }
    return std::move(doc_);
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    while (!eof() && peek() != '\n') ++pos_;
  }

  void next_line() {
    ++pos_;
    ++line_;
  }

  void end_of_line() {
    skip_space();
    if (!eof() && peek() == '#') skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    next_line();
  }

  // Whitespace and newlines inside arrays and inline tables.
  void skip_inner() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        next_line();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return text_.substr(start, pos_ - start);
  }

  std::string key_path() {
    std::string key = bare_key();
    skip_space();
    while (!eof() && peek() == '.') {
      ++pos_;
      skip_space();
      key += "." + bare_key();
      skip_space();
    }
    return key;
  }

  void insert(const std::string& key, Value v) {
    if (!doc_.emplace(key, std::move(v)).second) fail("duplicate key '" + key + "'");
  }

  Value value() {
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') return Value{string_value()};
    if (c == '[') return Value{array_value()};
    if (c == '{') fail("inline table must be assigned directly to a key");
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return Value{true};
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return Value{false};
    }
    return Value{number_value()};
  }

  std::string string_value() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = peek();
      ++pos_;
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = peek();
      ++pos_;
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  double number_value() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                      peek() == '-' || peek() == '_')) {
      ++pos_;
    }
    std::string token = text_.substr(start, pos_ - start);
    std::erase(token, '_');
    if (token == "inf" || token == "+inf") return INFINITY;
    if (token == "-inf") return -INFINITY;
    if (token == "nan" || token == "+nan" || token == "-nan") return NAN;
    double v = 0.0;
    const char* first = token.data() + (!token.empty() && token[0] == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      fail("cannot read value '" + token + "'");
    }
    return v;
  }

  Array array_value() {
    expect('[');
    Array out;
    skip_inner();
    while (!eof() && peek() != ']') {
      if (peek() == '[') fail("nested arrays are not supported");
      out.push_back(value());
      skip_inner();
      if (!eof() && peek() == ',') {
        ++pos_;
        skip_inner();
      } else {
        break;
      }
    }
    expect(']');
    return out;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  Document doc_;
};

// Rewrites `key = { a = 1, b = "x" }` into dotted assignments before parsing.
std::string expand_inline_tables(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    const auto brace = line.find('{');
    const auto quote = line.find('"');
    const bool inline_table = eq != std::string::npos && brace != std::string::npos && brace > eq &&
                              (quote == std::string::npos || quote > brace);
    if (!inline_table) {
      out << line << '\n';
      continue;
    }
    const auto close = line.rfind('}');
    if (close == std::string::npos || close < brace) throw ConfigError("inline table must close on the same line");
    std::string key = line.substr(0, eq);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    const std::string body = line.substr(brace + 1, close - brace - 1);
    // Split on commas outside strings and brackets.
    int depth = 0;
    bool in_string = false;
    std::string item;
    auto flush = [&] {
      std::size_t s = item.find_first_not_of(" \t");
      if (s != std::string::npos) out << key << '.' << item.substr(s) << '\n';
      item.clear();
    };
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (!in_string && c == '[') ++depth;
      if (!in_string && c == ']') --depth;
      if (!in_string && depth == 0 && c == ',') {
        flush();
        continue;
      }
      item += c;
    }
    flush();
  }
  return out.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

class Reader {
 public:
  explicit Reader(Document doc) : doc_(std::move(doc)) {}

  const Value* find(const std::string& key) {
    used_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &it->second;
  }

  [[noreturn]] static void type_error(const std::string& key, const char* want) {
    throw ConfigError("config key '" + key + "' must be " + want);
  }

  static double as_number(const std::string& key, const Value& v) {
    if (const auto* d = std::get_if<double>(&v.v)) return *d;
    type_error(key, "a number");
  }

  static int as_int(const std::string& key, const Value& v) {
    const double d = as_number(key, v);
    if (d != std::floor(d) || std::abs(d) > 2e9) type_error(key, "an integer");
    return static_cast<int>(d);
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) out = as_number(key, *v);
  }
  void number(const std::string& key, std::optional<double>& out) {
    if (const auto* v = find(key)) out = as_number(key, *v);
  }
  void integer(const std::string& key, int& out) {
    if (const auto* v = find(key)) out = as_int(key, *v);
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(key)) {
      const double d = as_number(key, *v);
      if (d < 0 || d != std::floor(d) || d > 9007199254740992.0) type_error(key, "a non-negative integer below 2^53");
      out = static_cast<std::uint64_t>(d);
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (const auto* s = std::get_if<std::string>(&v->v)) {
        out = *s;
      } else {
        type_error(key, "a string");
      }
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    const auto* v = find(key);
    if (!v) return;
    const auto* a = std::get_if<Array>(&v->v);
    if (!a) type_error(key, "an array of numbers");
    out.clear();
    for (const auto& x : *a) out.push_back(as_number(key, x));
  }
  void integers(const std::string& key, std::vector<int>& out) {
    const auto* v = find(key);
    if (!v) return;
    const auto* a = std::get_if<Array>(&v->v);
    if (!a) type_error(key, "an array of integers");
    out.clear();
    for (const auto& x : *a) out.push_back(as_int(key, x));
  }

  void reject_unknown() const {
    std::string unknown;
    for (const auto& [k, v] : doc_) {
      if (used_.count(k)) continue;
      unknown += unknown.empty() ? k : ", " + k;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

 private:
  Document doc_;
  std::set<std::string> used_;
};

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, int>) {
      out += std::to_string(v[i]);
    } else {
      out += fmt(v[i]);
    }
  }
  return out + "]";
}

}  // namespace

Document parse_document(const std::string& text) {
  const std::string expanded = expand_inline_tables(text);
  return Parser(expanded).run();
}

RunConfig parse_config(const std::string& text) {
  Reader r(parse_document(text));
  RunConfig c;
  auto& pb = c.problem;
  r.string("problem.family", pb.family);
  r.numbers("problem.params", pb.params);
  r.number("problem.q", pb.q);
  r.number("problem.p", pb.p);
  r.integer("problem.dim", pb.dim);
  r.numbers("problem.lo", pb.lo);
  r.numbers("problem.hi", pb.hi);
  r.integers("problem.subdivisions", pb.subdivisions);
  r.number("problem.weight", pb.weight);

  auto& s = c.solver;
  r.number("solver.lambda", s.lambda);
  r.number("solver.lambda_fraction", s.lambda_fraction);
  r.numbers("solver.lambda_grid", s.lambda_grid);
  r.integer("solver.grid_count", s.grid_count);
  r.number("solver.grid_max_fraction", s.grid_max_fraction);
  r.number("solver.lambda_star_hat", s.lambda_star_hat);
  r.number("solver.lambda_lower_hat", s.lambda_lower_hat);
  r.number("solver.tol", s.tol);
  r.integer("solver.max_iters", s.max_iters);
  r.integer("solver.starts", s.starts);
  r.seed("solver.seed", s.seed);
  r.integer("solver.search_iters", s.search_iters);
  r.number("solver.step", s.step);
  r.integer("solver.k_max", s.k_max);

  auto& y = c.ray;
  r.string("ray.direction", y.direction);
  r.string("ray.normalize", y.normalize);
  r.number("ray.t_min", y.t_min);
  r.number("ray.t_max", y.t_max);
  r.integer("ray.points", y.points);
  r.number("ray.lambda", y.lambda);

  r.string("output.dir", c.output.dir);
  r.reject_unknown();

  if (pb.dim != 1 && pb.dim != 2) throw ConfigError("problem.dim must be 1 or 2");
  if (s.tol <= 0 || s.max_iters < 1 || s.starts < 1 || s.search_iters < 1 || s.k_max < 1 || s.grid_count < 1) {
    throw ConfigError("solver tolerances and counts must be positive");
  }
  if (!(y.t_min > 0 && y.t_max > y.t_min) || y.points < 2) {
    throw ConfigError("ray needs 0 < t_min < t_max and points >= 2");
  }
  if (y.normalize != "none" && y.normalize != "unit" && y.normalize != "balanced") {
    throw ConfigError("ray.normalize must be none, unit or balanced");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  const auto& pb = c.problem;
  os << "[problem]\n";
  os << "family = " << quote(pb.family) << '\n';
  os << "params = " << join(pb.params) << '\n';
  os << "q = " << fmt(pb.q) << '\n';
  os << "p = " << fmt(pb.p) << '\n';
  os << "dim = " << pb.dim << '\n';
  os << "lo = " << join(pb.lo) << '\n';
  os << "hi = " << join(pb.hi) << '\n';
  os << "subdivisions = " << join(pb.subdivisions) << '\n';
  os << "weight = " << fmt(pb.weight) << '\n';

  const auto& s = c.solver;
  os << "\n[solver]\n";
  if (s.lambda) os << "lambda = " << fmt(*s.lambda) << '\n';
  if (s.lambda_fraction) os << "lambda_fraction = " << fmt(*s.lambda_fraction) << '\n';
  if (!s.lambda_grid.empty()) os << "lambda_grid = " << join(s.lambda_grid) << '\n';
  os << "grid_count = " << s.grid_count << '\n';
  os << "grid_max_fraction = " << fmt(s.grid_max_fraction) << '\n';
  if (s.lambda_star_hat) os << "lambda_star_hat = " << fmt(*s.lambda_star_hat) << '\n';
  if (s.lambda_lower_hat) os << "lambda_lower_hat = " << fmt(*s.lambda_lower_hat) << '\n';
  os << "tol = " << fmt(s.tol) << '\n';
  os << "max_iters = " << s.max_iters << '\n';
  os << "starts = " << s.starts << '\n';
  os << "seed = " << s.seed << '\n';
  os << "search_iters = " << s.search_iters << '\n';
  os << "step = " << fmt(s.step) << '\n';
  os << "k_max = " << s.k_max << '\n';

  const auto& y = c.ray;
  os << "\n[ray]\n";
  os << "direction = " << quote(y.direction) << '\n';
  os << "normalize = " << quote(y.normalize) << '\n';
  os << "t_min = " << fmt(y.t_min) << '\n';
  os << "t_max = " << fmt(y.t_max) << '\n';
  os << "points = " << y.points << '\n';
  if (y.lambda) os << "lambda = " << fmt(*y.lambda) << '\n';

  os << "\n[output]\n";
  os << "dir = " << quote(c.output.dir) << '\n';
  return os.str();
}

MeshSpec mesh_spec(const ProblemConfig& cfg) {
  MeshSpec m;
  m.dim = cfg.dim;
  m.lo = cfg.lo;
  m.hi = cfg.hi;
  m.subdivisions = cfg.subdivisions;
  return m;
}

NFunctionModel make_model(const ProblemConfig& cfg) {
  const auto& a = cfg.params;
  if (cfg.family == "power") {
    if (a.size() != 1) throw ConfigError("family power takes params = [r]");
    return NFunctionModel::power(a[0]);
  }
  if (cfg.family == "double_power") {
    if (a.size() != 2) throw ConfigError("family double_power takes params = [r1, r2]");
    return NFunctionModel::double_power(a[0], a[1]);
  }
  if (cfg.family == "log_type") {
    if (!a.empty()) throw ConfigError("family log_type takes params = []");
    return NFunctionModel::log_type();
  }
  throw ConfigError("unknown phi family '" + cfg.family + "' (power, double_power, log_type)");
}

Problem make_problem(const ProblemConfig& cfg, double lambda) {
  Mesh mesh = build_mesh(mesh_spec(cfg));
  Weight w = Weight::constant(mesh, cfg.weight);
  return Problem(std::move(mesh), make_model(cfg), std::move(w), cfg.q, cfg.p, lambda);
}

Field direction_preset(const Mesh& mesh, const std::string& spec) {
  std::istringstream in(spec);
  std::string name;
  in >> name;
  if (name == "bump") {
    std::string extra;
    if (in >> extra) throw ConfigError("direction 'bump' takes no arguments");
    return bump_field(mesh);
  }
  if (name == "sine") {
    int k = 0;
    std::string extra;
    if (!(in >> k) || k < 1 || (in >> extra)) throw ConfigError("direction 'sine k' needs an integer k >= 1");
    return sine_field(mesh, k);
  }
  if (name == "random") {
    std::string arg;
    std::string extra;
    if (!(in >> arg) || arg.rfind("seed=", 0) != 0 || (in >> extra)) {
      throw ConfigError("direction 'random' needs 'seed=n'");
    }
    std::uint64_t seed = 0;
    const char* first = arg.data() + 5;
    const auto [ptr, ec] = std::from_chars(first, arg.data() + arg.size(), seed);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || first == ptr) {
      throw ConfigError("direction 'random' needs an integer seed");
    }
    return random_field(mesh, seed, true);
  }
  throw ConfigError("unknown direction preset '" + spec + "' (bump, sine k, random seed=n)");
}

}  // namespace nehari::cli
