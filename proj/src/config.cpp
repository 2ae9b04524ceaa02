#include "malsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string_view>

#include "malsim/errors.hpp"

namespace malsim {

namespace {

struct Loc {
  int line = 0;
  int col = 0;
};

struct Piece {
  std::string_view text;
  Loc at;
};

bool ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '-';
}

Piece trimmed(std::string_view s, Loc at) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return {s.substr(b, e - b), {at.line, at.col + static_cast<int>(b)}};
}

double parse_number(const Piece& p) {
  double out = 0.0;
  const char* first = p.text.data();
  const char* last = first + p.text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("expected a number, got '" + std::string(p.text) + "'",
                      p.at.line, p.at.col);
  if (!std::isfinite(out))
    throw ConfigError("number must be finite", p.at.line, p.at.col);
  return out;
}

int parse_int(const Piece& p) {
  const double v = parse_number(p);
  const int k = static_cast<int>(std::lround(v));
  if (static_cast<double>(k) != v)
    throw ConfigError("expected an integer, got '" + std::string(p.text) + "'",
                      p.at.line, p.at.col);
  return k;
}

bool parse_bool(const Piece& p) {
  if (p.text == "true") return true;
  if (p.text == "false") return false;
  throw ConfigError("expected true or false, got '" + std::string(p.text) +
                        "'",
                    p.at.line, p.at.col);
}

// Split on `sep` at zero bracket/paren depth, trimming each piece.
std::vector<Piece> split_top_level(const Piece& p, char sep) {
  std::vector<Piece> out;
  if (p.text.empty()) return out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t k = 0; k < p.text.size(); ++k) {
    const char c = p.text[k];
    if (c == '[' || c == '(') {
      ++depth;
    } else if (c == ']' || c == ')') {
      --depth;
    } else if (c == sep && depth == 0) {
      out.push_back(trimmed(p.text.substr(start, k - start),
                            {p.at.line, p.at.col + static_cast<int>(start)}));
      start = k + 1;
    }
  }
  out.push_back(trimmed(p.text.substr(start),
                        {p.at.line, p.at.col + static_cast<int>(start)}));
  return out;
}

std::vector<double> parse_list(const Piece& p) {
  if (p.text.size() < 2 || p.text.front() != '[' || p.text.back() != ']')
    throw ConfigError("expected a [v1, v2, ...] list", p.at.line, p.at.col);
  const Piece inner =
      trimmed(p.text.substr(1, p.text.size() - 2), {p.at.line, p.at.col + 1});
  std::vector<double> out;
  if (inner.text.empty()) return out;
  for (const Piece& item : split_top_level(inner, ','))
    out.push_back(parse_number(item));
  return out;
}

// Named-argument accessor for age-function families.
struct FnArgs {
  std::string family;
  Loc at;
  std::map<std::string, Piece, std::less<>> args;
  mutable std::set<std::string> used;

  const Piece& get(const std::string& key) const {
    auto it = args.find(key);
    if (it == args.end())
      throw ConfigError(family + " requires argument '" + key + "'", at.line,
                        at.col);
    used.insert(key);
    return it->second;
  }
  void finish() const {
    for (const auto& [key, piece] : args)
      if (!used.count(key))
        throw ConfigError("unknown argument '" + key + "' for " + family,
                          piece.at.line, piece.at.col);
  }
};

AgeFunction parse_age_function(const Piece& p) {
  if (p.text.empty())
    throw ConfigError("expected an age function or number", p.at.line,
                      p.at.col);
  const char c0 = p.text.front();
  if ((c0 >= '0' && c0 <= '9') || c0 == '-' || c0 == '.')
    return ConstantFn{parse_number(p)};

  std::size_t k = 0;
  while (k < p.text.size() && ident_char(p.text[k])) ++k;
  const std::string family(p.text.substr(0, k));
  if (k >= p.text.size() || p.text[k] != '(' || p.text.back() != ')')
    throw ConfigError("expected family(arg=..., ...), got '" +
                          std::string(p.text) + "'",
                      p.at.line, p.at.col);
  const Piece inner = trimmed(
      p.text.substr(k + 1, p.text.size() - k - 2),
      {p.at.line, p.at.col + static_cast<int>(k) + 1});

  FnArgs fn;
  fn.family = family;
  fn.at = p.at;
  if (!inner.text.empty()) {
    for (const Piece& item : split_top_level(inner, ',')) {
      const std::size_t eq = item.text.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("expected arg=value inside " + family,
                          item.at.line, item.at.col);
      const Piece key = trimmed(item.text.substr(0, eq), item.at);
      const Piece val =
          trimmed(item.text.substr(eq + 1),
                  {item.at.line, item.at.col + static_cast<int>(eq) + 1});
      if (!fn.args.emplace(std::string(key.text), val).second)
        throw ConfigError("duplicate argument '" + std::string(key.text) + "'",
                          key.at.line, key.at.col);
    }
  }

  AgeFunction out;
  if (family == "constant") {
    out = ConstantFn{parse_number(fn.get("value"))};
  } else if (family == "exp_sum") {
    out = ExpSumFn{parse_list(fn.get("coef")), parse_list(fn.get("rate"))};
  } else if (family == "logistic") {
    out = LogisticFn{parse_number(fn.get("sup")), parse_number(fn.get("shape")),
                     parse_number(fn.get("rate"))};
  } else if (family == "gamma_shape") {
    out = GammaShapeFn{parse_number(fn.get("scale")),
                       parse_number(fn.get("rate"))};
  } else if (family == "gamma_power") {
    out = GammaPowerFn{parse_number(fn.get("scale")),
                       parse_number(fn.get("power")),
                       parse_number(fn.get("inner_scale")),
                       parse_number(fn.get("inner_rate"))};
  } else if (family == "table") {
    out = TableFn{parse_list(fn.get("ages")), parse_list(fn.get("values"))};
  } else {
    throw ConfigError(
        "unknown age-function family '" + family +
            "' (expected constant, exp_sum, logistic, gamma_shape, "
            "gamma_power, or table)",
        p.at.line, p.at.col);
  }
  fn.finish();
  const std::string diag = check_well_formed(out);
  if (!diag.empty()) throw ConfigError(diag, p.at.line, p.at.col);
  return out;
}

struct RawParams {
  bool preset = false;
  Loc preset_at;
  std::optional<double> lambda_h, mu_v;
  std::optional<double> lambda_v;
  std::vector<double> lambda_v_list;
  bool lambda_v_is_list = false;
  Loc lambda_v_at;
  std::map<std::string, AgeFunction> fns;
  std::vector<std::string> explicit_keys; // encounter order
};

} // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  RawParams raw;
  bool mode_seen = false;
  std::string section; // "" = top level
  std::set<std::string> seen;
  std::map<std::string, Loc> key_locs;
  int line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (nl == std::string::npos ? text.size() : nl) - pos);
    ++line_no;
    pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const Piece content = trimmed(line, {line_no, 1});
    if (content.text.empty()) continue;

    if (content.text.front() == '[') {
      if (content.text.back() != ']')
        throw ConfigError("unterminated section header", line_no,
                          content.at.col);
      const std::string name(
          content.text.substr(1, content.text.size() - 2));
      if (name != "params" && name != "grid" && name != "init" &&
          name != "output")
        throw ConfigError("unknown section [" + name + "]", line_no,
                          content.at.col);
      section = name;
      continue;
    }

    const std::size_t eq = content.text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected key = value", line_no, content.at.col);
    const Piece key_p = trimmed(content.text.substr(0, eq), content.at);
    const Piece val = trimmed(
        content.text.substr(eq + 1),
        {line_no, content.at.col + static_cast<int>(eq) + 1});
    const std::string key(key_p.text);
    const std::string qualified = section + "." + key;
    if (!seen.insert(qualified).second)
      throw ConfigError("duplicate key '" + key + "'", key_p.at.line,
                        key_p.at.col);
    key_locs[qualified] = key_p.at;
    if (val.text.empty())
      throw ConfigError("missing value for '" + key + "'", line_no,
                        val.at.col);

    if (section.empty()) {
      if (key == "mode") {
        mode_seen = true;
        if (val.text == "simulate")
          cfg.mode = RunMode::simulate;
        else if (val.text == "r0")
          cfg.mode = RunMode::r0;
        else if (val.text == "equilibria")
          cfg.mode = RunMode::equilibria;
        else if (val.text == "stability")
          cfg.mode = RunMode::stability;
        else if (val.text == "sweep")
          cfg.mode = RunMode::sweep;
        else if (val.text == "compare-ode")
          cfg.mode = RunMode::compare_ode;
        else
          throw ConfigError(
              "unknown mode '" + std::string(val.text) +
                  "' (expected simulate, r0, equilibria, stability, sweep, "
                  "or compare-ode)",
              val.at.line, val.at.col);
      } else {
        throw ConfigError("unknown top-level key '" + key + "'", key_p.at.line,
                          key_p.at.col);
      }
    } else if (section == "params") {
      if (key == "preset") {
        if (val.text != "baseline")
          throw ConfigError("unknown preset '" + std::string(val.text) + "'",
                            val.at.line, val.at.col);
        raw.preset = true;
        raw.preset_at = val.at;
      } else if (key == "lambda_v") {
        raw.lambda_v_at = val.at;
        if (!val.text.empty() && val.text.front() == '[') {
          raw.lambda_v_list = parse_list(val);
          raw.lambda_v_is_list = true;
        } else {
          raw.lambda_v = parse_number(val);
        }
      } else if (key == "lambda_h") {
        raw.lambda_h = parse_number(val);
        raw.explicit_keys.push_back(key);
      } else if (key == "mu_v") {
        raw.mu_v = parse_number(val);
        raw.explicit_keys.push_back(key);
      } else if (key == "mu_h" || key == "delta" || key == "r1" ||
                 key == "r2" || key == "beta_h" || key == "beta_v") {
        raw.fns.emplace(key, parse_age_function(val));
        raw.explicit_keys.push_back(key);
      } else {
        throw ConfigError("unknown [params] key '" + key + "'", key_p.at.line,
                          key_p.at.col);
      }
    } else if (section == "grid") {
      if (key == "da")
        cfg.grid.da = parse_number(val);
      else if (key == "dt")
        cfg.grid.dt = parse_number(val);
      else if (key == "a_max")
        cfg.grid.a_max = parse_number(val);
      else if (key == "t_end")
        cfg.grid.t_end = parse_number(val);
      else
        throw ConfigError("unknown [grid] key '" + key + "'", key_p.at.line,
                          key_p.at.col);
    } else if (section == "init") {
      if (key == "pfe_profile")
        cfg.init.pfe_profile = parse_bool(val);
      else if (key == "i_v0")
        cfg.init.i_v0 = parse_list(val);
      else if (key == "s_v0")
        cfg.init.s_v0 = parse_number(val);
      else if (key == "s_profile")
        cfg.init.s_profile = parse_age_function(val);
      else if (key == "i_profile")
        cfg.init.i_profile = parse_age_function(val);
      else if (key == "r_profile")
        cfg.init.r_profile = parse_age_function(val);
      else
        throw ConfigError("unknown [init] key '" + key + "'", key_p.at.line,
                          key_p.at.col);
    } else { // output
      if (key == "directory")
        cfg.output.directory = std::string(val.text);
      else if (key == "sample_stride")
        cfg.output.sample_stride = parse_int(val);
      else if (key == "snapshot_times")
        cfg.output.snapshot_times = parse_list(val);
      else if (key == "log_scale")
        cfg.output.log_scale = parse_bool(val);
      else if (key == "svg")
        cfg.output.svg = parse_bool(val);
      else
        throw ConfigError("unknown [output] key '" + key + "'", key_p.at.line,
                          key_p.at.col);
    }
  }

  const Loc eof{line_no + 1, 1};
  auto missing = [&eof](const std::string& what) {
    return ConfigError("missing required key: " + what, eof.line, eof.col);
  };

  if (!mode_seen) throw missing("mode");

  // Resolve the parameter block.
  if (raw.lambda_v_is_list && cfg.mode != RunMode::sweep)
    throw ConfigError("lambda_v list is only valid in sweep mode",
                      raw.lambda_v_at.line, raw.lambda_v_at.col);
  double lv0 = 0.0;
  if (raw.lambda_v_is_list) {
    if (raw.lambda_v_list.empty())
      throw ConfigError("lambda_v list must be nonempty", raw.lambda_v_at.line,
                        raw.lambda_v_at.col);
    cfg.sweep_lambda_v = raw.lambda_v_list;
    lv0 = raw.lambda_v_list.front();
  } else if (raw.lambda_v) {
    lv0 = *raw.lambda_v;
  } else {
    throw missing("[params] lambda_v");
  }
  if (cfg.mode == RunMode::sweep && cfg.sweep_lambda_v.empty())
    throw missing("[params] lambda_v list for sweep mode");

  if (raw.preset) {
    cfg.baseline_preset = true;
    cfg.preset_lambda_v = lv0;
    cfg.params = baseline_params(lv0);
    if (raw.lambda_h) cfg.params.lambda_h = *raw.lambda_h;
    if (raw.mu_v) cfg.params.mu_v = *raw.mu_v;
  } else {
    if (!raw.lambda_h) throw missing("[params] lambda_h");
    if (!raw.mu_v) throw missing("[params] mu_v");
    cfg.params.lambda_h = *raw.lambda_h;
    cfg.params.mu_v = *raw.mu_v;
    cfg.params.lambda_v = lv0;
    for (const char* name : {"mu_h", "delta", "r1", "r2", "beta_h", "beta_v"})
      if (!raw.fns.count(name))
        throw missing(std::string("[params] ") + name +
                      " (no preset selected)");
  }
  for (auto& [name, fn] : raw.fns) {
    if (name == "mu_h")
      cfg.params.mu_h = fn;
    else if (name == "delta")
      cfg.params.delta = fn;
    else if (name == "r1")
      cfg.params.r1 = fn;
    else if (name == "r2")
      cfg.params.r2 = fn;
    else if (name == "beta_h")
      cfg.params.beta_h = fn;
    else
      cfg.params.beta_v = fn;
  }
  cfg.param_overrides = raw.explicit_keys;

  // Grid constraints that the runtime relies on.
  auto grid_loc = [&](const char* key) {
    auto it = key_locs.find(std::string("grid.") + key);
    return it == key_locs.end() ? eof : it->second;
  };
  if (!(cfg.grid.da > 0.0))
    throw ConfigError("da must be positive", grid_loc("da").line,
                      grid_loc("da").col);
  if (!(cfg.grid.dt > 0.0))
    throw ConfigError("dt must be positive", grid_loc("dt").line,
                      grid_loc("dt").col);
  if (cfg.grid.dt > cfg.grid.da * (1.0 + 1e-12))
    throw ConfigError(
        "dt must not exceed da: the upwind weight (1 - dt/da) would go "
        "negative and break positivity",
        grid_loc("dt").line, grid_loc("dt").col);
  if (!(cfg.grid.a_max > 0.0) || !(cfg.grid.t_end > 0.0))
    throw ConfigError("a_max and t_end must be positive",
                      grid_loc("a_max").line, grid_loc("a_max").col);

  // Init/output constraints.
  if (cfg.mode == RunMode::simulate && cfg.init.i_v0.empty())
    throw missing("[init] i_v0 (one run per entry)");
  for (double v : cfg.init.i_v0)
    if (!(v >= 0.0))
      throw ConfigError("i_v0 entries must be nonnegative",
                        key_locs.count("init.i_v0") ? key_locs["init.i_v0"].line
                                                    : eof.line,
                        key_locs.count("init.i_v0") ? key_locs["init.i_v0"].col
                                                    : eof.col);
  if (cfg.output.sample_stride < 1)
    throw ConfigError("sample_stride must be >= 1",
                      key_locs.count("output.sample_stride")
                          ? key_locs["output.sample_stride"].line
                          : eof.line,
                      1);
  if (cfg.output.directory.empty())
    throw ConfigError("output directory must be nonempty",
                      key_locs.count("output.directory")
                          ? key_locs["output.directory"].line
                          : eof.line,
                      1);
  return cfg;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += fmt(v[k]);
  }
  return out + "]";
}

struct SerializeFn {
  std::string operator()(const ConstantFn& f) const {
    return "constant(value=" + fmt(f.value) + ")";
  }
  std::string operator()(const ExpSumFn& f) const {
    return "exp_sum(coef=" + fmt_list(f.coef) + ", rate=" + fmt_list(f.rate) +
           ")";
  }
  std::string operator()(const LogisticFn& f) const {
    return "logistic(sup=" + fmt(f.sup) + ", shape=" + fmt(f.shape) +
           ", rate=" + fmt(f.rate) + ")";
  }
  std::string operator()(const GammaShapeFn& f) const {
    return "gamma_shape(scale=" + fmt(f.scale) + ", rate=" + fmt(f.rate) + ")";
  }
  std::string operator()(const GammaPowerFn& f) const {
    return "gamma_power(scale=" + fmt(f.scale) + ", power=" + fmt(f.power) +
           ", inner_scale=" + fmt(f.inner_scale) +
           ", inner_rate=" + fmt(f.inner_rate) + ")";
  }
  std::string operator()(const TableFn& f) const {
    return "table(ages=" + fmt_list(f.age) + ", values=" + fmt_list(f.value) +
           ")";
  }
};

std::string serialize_age_fn(const AgeFunction& f) {
  return std::visit(SerializeFn{}, f);
}

} // namespace

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::r0: return "r0";
    case RunMode::equilibria: return "equilibria";
    case RunMode::stability: return "stability";
    case RunMode::sweep: return "sweep";
    case RunMode::compare_ode: return "compare-ode";
  }
  return "simulate";
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  out += "mode = ";
  out += mode_name(c.mode);
  out += "\n\n[params]\n";
  if (c.baseline_preset) out += "preset = baseline\n";
  if (!c.sweep_lambda_v.empty())
    out += "lambda_v = " + fmt_list(c.sweep_lambda_v) + "\n";
  else
    out += "lambda_v = " +
           fmt(c.baseline_preset ? c.preset_lambda_v : c.params.lambda_v) +
           "\n";
  for (const std::string& key : c.param_overrides) {
    if (key == "lambda_h")
      out += "lambda_h = " + fmt(c.params.lambda_h) + "\n";
    else if (key == "mu_v")
      out += "mu_v = " + fmt(c.params.mu_v) + "\n";
    else if (key == "mu_h")
      out += "mu_h = " + serialize_age_fn(c.params.mu_h) + "\n";
    else if (key == "delta")
      out += "delta = " + serialize_age_fn(c.params.delta) + "\n";
    else if (key == "r1")
      out += "r1 = " + serialize_age_fn(c.params.r1) + "\n";
    else if (key == "r2")
      out += "r2 = " + serialize_age_fn(c.params.r2) + "\n";
    else if (key == "beta_h")
      out += "beta_h = " + serialize_age_fn(c.params.beta_h) + "\n";
    else if (key == "beta_v")
      out += "beta_v = " + serialize_age_fn(c.params.beta_v) + "\n";
  }

  out += "\n[grid]\n";
  out += "da = " + fmt(c.grid.da) + "\n";
  out += "dt = " + fmt(c.grid.dt) + "\n";
  out += "a_max = " + fmt(c.grid.a_max) + "\n";
  out += "t_end = " + fmt(c.grid.t_end) + "\n";

  out += "\n[init]\n";
  out += std::string("pfe_profile = ") +
         (c.init.pfe_profile ? "true" : "false") + "\n";
  if (!c.init.i_v0.empty()) out += "i_v0 = " + fmt_list(c.init.i_v0) + "\n";
  if (c.init.s_v0 >= 0.0) out += "s_v0 = " + fmt(c.init.s_v0) + "\n";
  if (c.init.s_profile)
    out += "s_profile = " + serialize_age_fn(*c.init.s_profile) + "\n";
  if (c.init.i_profile)
    out += "i_profile = " + serialize_age_fn(*c.init.i_profile) + "\n";
  if (c.init.r_profile)
    out += "r_profile = " + serialize_age_fn(*c.init.r_profile) + "\n";

  out += "\n[output]\n";
  out += "directory = " + c.output.directory + "\n";
  out += "sample_stride = " + std::to_string(c.output.sample_stride) + "\n";
  if (!c.output.snapshot_times.empty())
    out += "snapshot_times = " + fmt_list(c.output.snapshot_times) + "\n";
  out += std::string("log_scale = ") + (c.output.log_scale ? "true" : "false") +
         "\n";
  out += std::string("svg = ") + (c.output.svg ? "true" : "false") + "\n";
  return out;
}

} // namespace malsim
