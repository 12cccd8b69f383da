#include "bonusproj/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bonusproj {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

// splits keys like mu_0_1 / lump_0_2 into their state indices
bool split_indexed(const std::string& key, const std::string& prefix, std::vector<int>& idx,
                   size_t count) {
  if (key.rfind(prefix, 0) != 0) return false;
  std::string rest = key.substr(prefix.size());
  idx.clear();
  std::stringstream ss(rest);
  std::string part;
  while (std::getline(ss, part, '_')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) return false;
    idx.push_back(std::atoi(part.c_str()));
  }
  return idx.size() == count;
}

struct ExprToken {
  enum Kind { Num, Ident, LParen, RParen, Comma, Star, Minus, End } kind = End;
  double num = 0.0;
  std::string id;
};

std::vector<ExprToken> lex_expr(const std::string& text) {
  std::vector<ExprToken> out;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({ExprToken::LParen, 0, ""});
      ++i;
    } else if (c == ')') {
      out.push_back({ExprToken::RParen, 0, ""});
      ++i;
    } else if (c == ',') {
      out.push_back({ExprToken::Comma, 0, ""});
      ++i;
    } else if (c == '*') {
      out.push_back({ExprToken::Star, 0, ""});
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      out.push_back({ExprToken::Ident, 0, text.substr(i, j - i)});
      i = j;
    } else {
      char* end = nullptr;
      const double v = std::strtod(text.c_str() + i, &end);
      if (end == text.c_str() + i) {
        if (c == '-') {
          out.push_back({ExprToken::Minus, 0, ""});
          ++i;
          continue;
        }
        throw ConfigError("unexpected character '" + std::string(1, c) + "' in expression '" +
                          text + "'");
      }
      out.push_back({ExprToken::Num, v, ""});
      i = end - text.c_str();
    }
  }
  out.push_back({ExprToken::End, 0, ""});
  return out;
}

class ExprParser {
 public:
  ExprParser(const std::string& text, double age0, double horizon, double premium)
      : text_(text), tokens_(lex_expr(text)), age0_(age0), horizon_(horizon),
        premium_(premium) {}

  TimeFn parse() {
    TimeFn fn;
    parse_expr(fn, 0.0);
    expect(ExprToken::End, "end of expression");
    return fn;
  }

 private:
  const std::string& text_;
  std::vector<ExprToken> tokens_;
  size_t pos_ = 0;
  double age0_, horizon_, premium_;

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("expression '" + text_ + "': " + what);
  }
  const ExprToken& peek() const { return tokens_[pos_]; }
  ExprToken take() { return tokens_[pos_++]; }
  void expect(ExprToken::Kind k, const std::string& what) {
    if (tokens_[pos_].kind != k) fail("expected " + what);
    ++pos_;
  }
  double number() {
    bool neg = false;
    if (peek().kind == ExprToken::Minus) {
      neg = true;
      ++pos_;
    }
    if (peek().kind != ExprToken::Num) fail("expected a number");
    const double v = take().num;
    return neg ? -v : v;
  }
  bool take_ident(const std::string& name) {
    if (peek().kind == ExprToken::Ident && peek().id == name) {
      ++pos_;
      return true;
    }
    return false;
  }

  TimeFn::Fn atom() {
    if (peek().kind == ExprToken::Ident) {
      const std::string name = take().id;
      if (name == "premium") {
        const double v = premium_;
        return [v](double) { return v; };
      }
      expect(ExprToken::LParen, "'(' after " + name);
      std::vector<double> args;
      if (peek().kind != ExprToken::RParen) {
        args.push_back(number());
        while (peek().kind == ExprToken::Comma) {
          ++pos_;
          args.push_back(number());
        }
      }
      expect(ExprToken::RParen, "')'");
      const double age0 = age0_;
      if (name == "gm") {
        if (args.size() != 3) fail("gm takes (a, b, c)");
        const double a = args[0], b = args[1], c = args[2];
        return [a, b, c, age0](double t) { return a + std::pow(10.0, b + c * (age0 + t) - 10.0); };
      }
      if (name == "expdecay") {
        if (args.size() != 2) fail("expdecay takes (a, b)");
        const double a = args[0], b = args[1];
        return [a, b, age0](double t) { return a * std::exp(-b * (age0 + t)); };
      }
      if (name == "linear") {
        if (args.size() != 2) fail("linear takes (a, b)");
        const double a = args[0], b = args[1];
        return [a, b](double t) { return a + b * t; };
      }
      fail("unknown function '" + name + "'");
    }
    const double v = number();
    return [v](double) { return v; };
  }

  void parse_expr(TimeFn& fn, double lo) {
    double scale = 1.0;
    if (peek().kind == ExprToken::Minus) {
      scale = -1.0;
      ++pos_;
    }
    if (peek().kind == ExprToken::Num && tokens_[pos_ + 1].kind == ExprToken::Star) {
      scale *= take().num;
      ++pos_;  // the '*'
    }
    TimeFn::Fn base = atom();
    TimeFn::Fn f = [base, scale](double t) { return scale * base(t); };

    if (take_ident("until")) {
      const double cut = number();
      if (cut <= lo || cut > horizon_ + 1e-9) fail("'until' cutoff outside the horizon");
      fn.append(lo, cut, f);
      if (take_ident("then")) parse_expr(fn, cut);
      return;
    }
    if (take_ident("from")) {
      const double start = number();
      if (start < lo - 1e-9 || start >= horizon_) fail("'from' start outside the horizon");
      fn.append(std::max(lo, start), horizon_, f);
      return;
    }
    fn.append(lo, horizon_, f);
  }
};

struct KeyValue {
  std::string section, key, value;
  int line = 0;
};

std::vector<KeyValue> lex_ini(const std::string& text, std::vector<std::string>& errors) {
  std::vector<KeyValue> out;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    KeyValue kv;
    kv.section = section;
    kv.key = trim(line.substr(0, eq));
    kv.value = trim(line.substr(eq + 1));
    kv.line = lineno;
    if (kv.key.empty() || kv.value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    out.push_back(std::move(kv));
  }
  return out;
}

}  // namespace

TimeFn parse_rate_expr(const std::string& text, double age0, double horizon,
                       double premium_value) {
  return ExprParser(text, age0, horizon, premium_value).parse();
}

RunConfig parse_config_text(const std::string& text) {
  std::vector<std::string> errors;
  const std::vector<KeyValue> kvs = lex_ini(text, errors);
  RunConfig cfg;
  const StateModel sm;

  auto num = [&](const KeyValue& kv, double& out) {
    if (!parse_number(kv.value, out))
      errors.push_back(kv.section + "." + kv.key + ": not a number: '" + kv.value + "'");
  };

  for (const KeyValue& kv : kvs) {
    std::vector<int> idx;
    const std::string where = kv.section + "." + kv.key;
    if (kv.section == "product") {
      if (kv.key == "age0") num(kv, cfg.age0);
      else if (kv.key == "horizon") num(kv, cfg.horizon);
      else if (kv.key == "premium") cfg.premium = kv.value;
      else if (split_indexed(kv.key, "sojourn_", idx, 1)) cfg.sojourn[idx[0]] = kv.value;
      else if (split_indexed(kv.key, "bonus_sojourn_", idx, 1)) cfg.bonus_sojourn[idx[0]] = kv.value;
      else if (split_indexed(kv.key, "lump_", idx, 2)) cfg.lump[{idx[0], idx[1]}] = kv.value;
      else if (split_indexed(kv.key, "bonus_lump_", idx, 2)) cfg.bonus_lump[{idx[0], idx[1]}] = kv.value;
      else errors.push_back("unknown key " + where);
    } else if (kv.section == "technical_basis") {
      if (kv.key == "interest") cfg.technical_interest = kv.value;
      else if (split_indexed(kv.key, "mu_", idx, 2)) cfg.technical_rates[{idx[0], idx[1]}] = kv.value;
      else errors.push_back("unknown key " + where);
    } else if (kv.section == "market_basis") {
      if (split_indexed(kv.key, "mu_", idx, 2)) cfg.market_rates[{idx[0], idx[1]}] = kv.value;
      else errors.push_back("unknown key " + where);
    } else if (kv.section == "esg") {
      if (kv.key == "beta") num(kv, cfg.beta);
      else if (kv.key == "alpha") num(kv, cfg.alpha);
      else if (kv.key == "sigma") num(kv, cfg.sigma);
      else if (kv.key == "r0") num(kv, cfg.r0);
      else errors.push_back("unknown key " + where);
    } else if (kv.section == "strategy") {
      if (kv.key == "kappa") num(kv, cfg.kappa);
      else errors.push_back("unknown key " + where);
    } else if (kv.section == "run") {
      double v = 0.0;
      if (kv.key == "scenarios") {
        num(kv, v);
        cfg.scenarios = int(v);
      } else if (kv.key == "step") num(kv, cfg.step);
      else if (kv.key == "seed") {
        num(kv, v);
        cfg.seed = std::uint64_t(v);
      } else if (kv.key == "mode") cfg.mode = kv.value;
      else if (kv.key == "u0") num(kv, cfg.u0);
      else if (kv.key == "q0") num(kv, cfg.q0);
      else if (kv.key == "workers") {
        num(kv, v);
        cfg.workers = int(v);
      } else if (kv.key == "anchor_step") num(kv, cfg.anchor_step);
      else if (kv.key == "max_grid_bytes") {
        num(kv, v);
        cfg.max_grid_bytes = std::size_t(v);
      } else if (kv.key == "output_dir") cfg.output_dir = kv.value;
      else errors.push_back("unknown key " + where);
    } else {
      errors.push_back("unknown section [" + kv.section + "] (key " + kv.key + ")");
    }
  }
  (void)sm;

  if (!errors.empty()) {
    std::string msg = "config schema errors:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

bool premium_is_equivalence(const RunConfig& cfg) { return trim(cfg.premium) == "equivalence"; }

// moves a market basis may contain; free-policy mirrors are derived
bool allowed_market_move(const StateModel& sm, int from, int to) {
  if (from == to) return false;
  const int dead = sm.J - 1;
  if (from == dead) return false;
  if (sm.premium_state(from) && from != sm.surrender() && sm.premium_state(to) &&
      to != sm.surrender())
    return true;
  if (from == 0 && (to == sm.surrender() || to == sm.fp_start())) return true;
  return false;
}

void check_expr(const RunConfig& cfg, const std::string& what, const std::string& text,
                std::vector<std::string>& problems, bool nonnegative) {
  try {
    const TimeFn fn = parse_rate_expr(text, cfg.age0, cfg.horizon, 1.0);
    if (nonnegative) {
      for (int i = 0; i <= 400; ++i) {
        const double t = cfg.horizon * i / 400.0;
        if (fn(t) < 0.0) {
          problems.push_back(what + ": negative value " + std::to_string(fn(t)) + " at t=" +
                             std::to_string(t));
          return;
        }
      }
    }
  } catch (const ConfigError& e) {
    problems.push_back(what + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  const StateModel sm;

  if (cfg.horizon <= 0.0) problems.push_back("product.horizon must be positive");
  if (cfg.age0 < 0.0) problems.push_back("product.age0 must be nonnegative");
  if (cfg.step <= 0.0) {
    problems.push_back("run.step must be positive");
    return problems;
  }
  const double steps = cfg.horizon / cfg.step;
  if (std::fabs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    problems.push_back("run.step does not divide the horizon");
  const double stride = cfg.anchor_step / cfg.step;
  if (cfg.anchor_step <= 0.0 || std::fabs(stride - std::round(stride)) > 1e-6)
    problems.push_back("run.anchor_step must be a positive multiple of run.step");
  else if (std::fabs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps) &&
           int(std::round(steps)) % int(std::round(stride)) != 0)
    problems.push_back("run.anchor_step does not divide the horizon");

  if (cfg.scenarios < 1) problems.push_back("run.scenarios must be at least 1");
  if (cfg.workers < 0) problems.push_back("run.workers must be nonnegative");
  if (cfg.mode != "general" && cfg.mode != "state-independent" && cfg.mode != "both")
    problems.push_back("run.mode must be general, state-independent or both");
  if (cfg.kappa < 0.0) problems.push_back("strategy.kappa must be nonnegative");
  if (cfg.alpha <= 0.0) problems.push_back("esg.alpha must be positive");
  if (cfg.sigma < 0.0) problems.push_back("esg.sigma must be nonnegative");

  double premium_value = 0.0;
  if (!premium_is_equivalence(cfg) && !parse_number(cfg.premium, premium_value))
    problems.push_back("product.premium must be a number or 'equivalence'");

  for (const auto& [j, text] : cfg.sojourn) {
    if (j < 0 || j >= sm.J)
      problems.push_back("product.sojourn_" + std::to_string(j) + ": state outside 0.." +
                         std::to_string(sm.J - 1));
    check_expr(cfg, "product.sojourn_" + std::to_string(j), text, problems, false);
  }
  for (const auto& [j, text] : cfg.bonus_sojourn) {
    if (j < 0 || j >= sm.J)
      problems.push_back("product.bonus_sojourn_" + std::to_string(j) + ": state outside 0.." +
                         std::to_string(sm.J - 1));
    check_expr(cfg, "product.bonus_sojourn_" + std::to_string(j), text, problems, true);
  }
  auto check_lump_key = [&](const std::string& what, const std::pair<int, int>& key) {
    if (key.first < 0 || key.first >= sm.J || key.second < 0 || key.second >= sm.J ||
        key.first == key.second)
      problems.push_back(what + ": lump transitions live inside the premium states 0.." +
                         std::to_string(sm.J - 1));
  };
  for (const auto& [key, text] : cfg.lump) {
    const std::string what =
        "product.lump_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    check_lump_key(what, key);
    check_expr(cfg, what, text, problems, false);
  }
  for (const auto& [key, text] : cfg.bonus_lump) {
    const std::string what =
        "product.bonus_lump_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    check_lump_key(what, key);
    check_expr(cfg, what, text, problems, true);
  }

  check_expr(cfg, "technical_basis.interest", cfg.technical_interest, problems, false);
  for (const auto& [key, text] : cfg.technical_rates) {
    const std::string what =
        "technical_basis.mu_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    if (key.first < 0 || key.first >= sm.J || key.second < 0 || key.second >= sm.J ||
        key.first == key.second) {
      problems.push_back(what +
                         ": the technical basis carries no surrender or free-policy "
                         "transitions; free-policy states mirror the premium states");
      continue;
    }
    if (key.first == sm.J - 1) {
      problems.push_back(what + ": the dead state is absorbing");
      continue;
    }
    check_expr(cfg, what, text, problems, true);
  }

  for (const auto& [key, text] : cfg.market_rates) {
    const std::string what =
        "market_basis.mu_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    const int from = key.first, to = key.second;
    if (from < 0 || from >= sm.states() || to < 0 || to >= sm.states() || from == to) {
      problems.push_back(what + ": states outside the model");
      continue;
    }
    if (sm.free_state(from)) {
      // explicit free-policy rates are allowed only as literal mirrors
      const int bf = sm.base(from), bt = sm.free_state(to) ? sm.base(to) : -1;
      const auto base = bt >= 0 ? cfg.market_rates.find({bf, bt}) : cfg.market_rates.end();
      if (base == cfg.market_rates.end()) {
        problems.push_back(what + ": free-policy rates mirror the premium states; specify mu_" +
                           std::to_string(bf) + "_* instead");
        continue;
      }
      try {
        const TimeFn a = parse_rate_expr(text, cfg.age0, cfg.horizon, 1.0);
        const TimeFn b = parse_rate_expr(base->second, cfg.age0, cfg.horizon, 1.0);
        for (int i = 0; i <= 400; ++i) {
          const double t = cfg.horizon * i / 400.0;
          if (std::fabs(a(t) - b(t)) > 1e-12 * (1.0 + std::fabs(b(t)))) {
            problems.push_back(what + ": does not mirror mu_" + std::to_string(bf) + "_" +
                               std::to_string(bt) + " at t=" + std::to_string(t));
            break;
          }
        }
      } catch (const ConfigError& e) {
        problems.push_back(what + ": " + e.what());
      }
      continue;
    }
    if (!allowed_market_move(sm, from, to)) {
      problems.push_back(what + ": transition not in the model topology");
      continue;
    }
    check_expr(cfg, what, text, problems, true);
  }

  return problems;
}

ModelInputs build_inputs(const RunConfig& cfg) {
  const std::vector<std::string> problems = validate_config(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }

  ModelInputs in;
  in.model = StateModel{};
  const StateModel& sm = in.model;

  in.technical.interest = parse_rate_expr(cfg.technical_interest, cfg.age0, cfg.horizon, 0.0);
  in.technical.rates = TransitionRateSet(sm.states());
  for (const auto& [key, text] : cfg.technical_rates)
    in.technical.rates.set(key.first, key.second,
                           parse_rate_expr(text, cfg.age0, cfg.horizon, 0.0));

  in.market = TransitionRateSet(sm.states());
  for (const auto& [key, text] : cfg.market_rates) {
    if (sm.free_state(key.first)) continue;  // derived below
    const TimeFn fn = parse_rate_expr(text, cfg.age0, cfg.horizon, 0.0);
    in.market.set(key.first, key.second, fn);
    if (key.second == sm.fp_start()) continue;  // conversion has no free-policy copy
    const int to = key.second == sm.surrender() ? sm.fp_surrender() : sm.fp(key.second);
    in.market.set(sm.fp(key.first), to, fn);
  }

  in.esg = VasicekParams{cfg.beta, cfg.alpha, cfg.sigma, cfg.r0};
  in.fine = TimeGrid::make(cfg.horizon, cfg.step);
  in.projection.z0 = 0;
  in.projection.kappa = cfg.kappa;
  in.projection.u0 = cfg.u0;
  in.projection.q0 = cfg.q0;
  in.projection.anchor_stride = int(std::round(cfg.anchor_step / cfg.step));
  in.projection.max_grid_bytes = cfg.max_grid_bytes;

  in.premium_equivalence = premium_is_equivalence(cfg);
  if (!in.premium_equivalence) parse_number(cfg.premium, in.premium_value);
  return in;
}

PaymentSpec build_payments(const RunConfig& cfg, double premium_value) {
  const StateModel sm;
  PaymentSpec pay;
  pay.J = sm.J;
  pay.sojourn.assign(sm.J, TimeFn());
  pay.bonus_sojourn.assign(sm.J, TimeFn());
  for (const auto& [j, text] : cfg.sojourn)
    pay.sojourn[j] = parse_rate_expr(text, cfg.age0, cfg.horizon, premium_value);
  for (const auto& [j, text] : cfg.bonus_sojourn)
    pay.bonus_sojourn[j] = parse_rate_expr(text, cfg.age0, cfg.horizon, premium_value);
  for (const auto& [key, text] : cfg.lump)
    pay.lump[key] = parse_rate_expr(text, cfg.age0, cfg.horizon, premium_value);
  for (const auto& [key, text] : cfg.bonus_lump)
    pay.bonus_lump[key] = parse_rate_expr(text, cfg.age0, cfg.horizon, premium_value);
  return pay;
}

}  // namespace bonusproj
