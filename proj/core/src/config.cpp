#include "spikeloc/config.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spikeloc/errors.hpp"

namespace spikeloc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, std::string_view key) {
  double v = 0.0;
  auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(fmt::format("cli.config: {} = \"{}\" is not a number", key, s));
  return v;
}

long long to_int(std::string_view s, std::string_view key) {
  long long v = 0;
  auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(fmt::format("cli.config: {} = \"{}\" is not an integer", key, s));
  return v;
}

std::vector<double> to_list(std::string_view s, std::string_view key) {
  std::vector<double> out;
  std::string buf(s);
  for (char& c : buf)
    if (c == ',') c = ' ';
  std::istringstream iss(buf);
  std::string tok;
  while (iss >> tok) out.push_back(to_double(tok, key));
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cli.config: cannot read \"{}\"", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

RunConfig RunConfig::parse_text(std::string_view text, std::string_view origin) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(fmt::format("cli.config: {}:{}: malformed section header", origin,
                                      lineno));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "problem" && section != "potentials" && section != "grids" &&
          section != "solver" && section != "sweep" && section != "output")
        throw ConfigError(fmt::format("cli.config: {}:{}: unknown section [{}]", origin, lineno,
                                      section));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("cli.config: {}:{}: expected key = value", origin, lineno));
    if (section.empty())
      throw ConfigError(fmt::format("cli.config: {}:{}: key outside any section", origin,
                                    lineno));
    std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    if (kv.count(key))
      throw ConfigError(fmt::format("cli.config: {}:{}: duplicate key {}", origin, lineno, key));
    kv[key] = std::string(trim(line.substr(eq + 1)));
  }

  RunConfig cfg;
  bool has_R = false, has_m = false, has_box = false;
  auto take = [&](const char* key) -> std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };

  if (auto* s = take("problem.n")) cfg.n = static_cast<int>(to_int(*s, "problem.n"));
  if (auto* s = take("problem.p")) cfg.p = to_double(*s, "problem.p");
  if (auto* s = take("problem.q")) cfg.q = to_double(*s, "problem.q");

  if (auto* s = take("potentials.K")) cfg.K = *s;
  if (auto* s = take("potentials.Q")) cfg.Q = *s;
  if (auto* s = take("potentials.V")) cfg.V = *s;
  std::vector<double> box_vals;
  if (auto* s = take("potentials.box")) {
    box_vals = to_list(*s, "potentials.box");
    has_box = true;
  }
  if (auto* s = take("potentials.samples"))
    cfg.samples = static_cast<int>(to_int(*s, "potentials.samples"));

  if (auto* s = take("grids.R")) {
    cfg.R = to_double(*s, "grids.R");
    has_R = true;
  }
  if (auto* s = take("grids.m")) {
    cfg.m = static_cast<int>(to_int(*s, "grids.m"));
    has_m = true;
  }
  if (auto* s = take("grids.L")) cfg.L = to_double(*s, "grids.L");
  if (auto* s = take("grids.mesh_factor")) cfg.mesh_factor = to_double(*s, "grids.mesh_factor");
  if (auto* s = take("grids.map_points"))
    cfg.map_points = static_cast<int>(to_int(*s, "grids.map_points"));
  if (auto* s = take("grids.validate_stride"))
    cfg.validate_stride = static_cast<int>(to_int(*s, "grids.validate_stride"));

  if (auto* s = take("solver.newton_tol")) cfg.newton_tol = to_double(*s, "solver.newton_tol");
  if (auto* s = take("solver.newton_max_iter"))
    cfg.newton_max_iter = static_cast<int>(to_int(*s, "solver.newton_max_iter"));
  if (auto* s = take("solver.relax_budget"))
    cfg.relax_budget = static_cast<int>(to_int(*s, "solver.relax_budget"));
  if (auto* s = take("solver.steps_per_unit"))
    cfg.steps_per_unit = static_cast<int>(to_int(*s, "solver.steps_per_unit"));
  if (auto* s = take("solver.multistart"))
    cfg.multistart = static_cast<int>(to_int(*s, "solver.multistart"));
  if (auto* s = take("solver.seed"))
    cfg.seed = static_cast<std::uint64_t>(to_int(*s, "solver.seed"));

  if (auto* s = take("sweep.epsilons")) cfg.epsilons = to_list(*s, "sweep.epsilons");
  if (auto* s = take("sweep.init_center")) cfg.init_center = to_double(*s, "sweep.init_center");
  if (auto* s = take("sweep.peak_tol")) cfg.peak_tol = to_double(*s, "sweep.peak_tol");
  if (auto* s = take("sweep.gap_tol")) cfg.gap_tol = to_double(*s, "sweep.gap_tol");
  if (auto* s = take("sweep.jitter")) cfg.jitter = to_double(*s, "sweep.jitter");

  if (auto* s = take("output.dir")) cfg.out_dir = *s;
  if (auto* s = take("output.precision"))
    cfg.precision = static_cast<int>(to_int(*s, "output.precision"));

  static const char* known[] = {
      "problem.n",          "problem.p",           "problem.q",
      "potentials.K",       "potentials.Q",        "potentials.V",
      "potentials.box",     "potentials.samples",  "grids.R",
      "grids.m",            "grids.L",             "grids.mesh_factor",
      "grids.map_points",   "grids.validate_stride", "solver.newton_tol",
      "solver.newton_max_iter", "solver.relax_budget", "solver.steps_per_unit",
      "solver.multistart",  "solver.seed",         "sweep.epsilons",
      "sweep.init_center",  "sweep.peak_tol",      "sweep.gap_tol",
      "sweep.jitter",       "output.dir",          "output.precision"};
  for (const auto& [key, val] : kv) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError(fmt::format("cli.config: {}: unknown key {}", origin, key));
  }

  // validation
  validate_params(cfg.n, cfg.p, cfg.q);
  if (!has_R) cfg.R = cfg.n == 1 ? 20.0 : 15.0;
  if (!has_m) cfg.m = cfg.n == 1 ? 4001 : 3001;
  cfg.box.dim = cfg.n;
  if (has_box) {
    if (box_vals.size() != 2 && box_vals.size() != static_cast<std::size_t>(2 * cfg.n))
      throw ConfigError(fmt::format(
          "cli.config: {}: potentials.box needs 2 or {} numbers, got {}", origin, 2 * cfg.n,
          box_vals.size()));
    for (int d = 0; d < cfg.n; ++d) {
      auto dd = static_cast<std::size_t>(d);
      double lo = box_vals.size() == 2 ? box_vals[0] : box_vals[2 * dd];
      double hi = box_vals.size() == 2 ? box_vals[1] : box_vals[2 * dd + 1];
      if (!(lo < hi))
        throw ConfigError(fmt::format("cli.config: {}: box axis {} empty ({} >= {})", origin, d,
                                      lo, hi));
      cfg.box.lo[dd] = lo;
      cfg.box.hi[dd] = hi;
    }
  }
  if (cfg.samples < 2)
    throw ConfigError(fmt::format("cli.config: {}: potentials.samples = {} below 2", origin,
                                  cfg.samples));
  if (cfg.m < 9)
    throw ConfigError(fmt::format("cli.config: {}: grids.m = {} below 9", origin, cfg.m));
  if (!(cfg.R > 0.0) || !(cfg.L > 0.0))
    throw ConfigError(fmt::format("cli.config: {}: grids.R and grids.L must be positive",
                                  origin));
  if (!(cfg.mesh_factor >= 4.0))
    throw ConfigError(fmt::format("cli.config: {}: grids.mesh_factor = {} below 4", origin,
                                  cfg.mesh_factor));
  if (cfg.map_points < 2)
    throw ConfigError(fmt::format("cli.config: {}: grids.map_points = {} below 2", origin,
                                  cfg.map_points));
  if (cfg.validate_stride < 0)
    throw ConfigError(fmt::format("cli.config: {}: grids.validate_stride must be >= 0", origin));
  if (!(cfg.newton_tol > 0.0))
    throw ConfigError(fmt::format("cli.config: {}: solver.newton_tol must be positive", origin));
  if (cfg.newton_max_iter < 1 || cfg.relax_budget < 0 || cfg.steps_per_unit < 1 ||
      cfg.multistart < 1)
    throw ConfigError(fmt::format("cli.config: {}: solver iteration budgets must be positive",
                                  origin));
  if (cfg.epsilons.size() < 2)
    throw ConfigError(fmt::format("cli.config: {}: sweep.epsilons needs >= 2 values", origin));
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0))
      throw ConfigError(fmt::format("cli.config: {}: sweep.epsilons must be positive", origin));
    if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
      throw ConfigError(fmt::format(
          "cli.config: {}: sweep.epsilons must be strictly decreasing", origin));
  }
  if (!(cfg.peak_tol > 0.0) || !(cfg.gap_tol > 0.0) || !(cfg.jitter >= 0.0))
    throw ConfigError(fmt::format("cli.config: {}: sweep tolerances must be positive", origin));
  if (cfg.precision < 3 || cfg.precision > 17)
    throw ConfigError(fmt::format("cli.config: {}: output.precision = {} not in 3..17", origin,
                                  cfg.precision));
  if (std::fabs(cfg.init_center) > 0.9 * cfg.L)
    throw ConfigError(fmt::format(
        "cli.config: {}: sweep.init_center = {} too close to the boundary (L = {})", origin,
        cfg.init_center, cfg.L));

  // expressions must parse under the declared dimension
  PotentialTriple::parse(cfg.K, cfg.Q, cfg.V, cfg.n);
  return cfg;
}

std::string RunConfig::canonical() const {
  std::string out;
  auto add = [&](const char* key, const std::string& val) {
    out += key;
    out += '=';
    out += val;
    out += '\n';
  };
  auto num = [](double v) { return fmt::format("{:.17g}", v); };
  // alphabetical by section.key
  add("grids.L", num(L));
  add("grids.R", num(R));
  add("grids.m", fmt::format("{}", m));
  add("grids.map_points", fmt::format("{}", map_points));
  add("grids.mesh_factor", num(mesh_factor));
  add("grids.validate_stride", fmt::format("{}", validate_stride));
  add("output.dir", out_dir);
  add("output.precision", fmt::format("{}", precision));
  std::string boxs;
  for (int d = 0; d < box.dim; ++d) {
    auto dd = static_cast<std::size_t>(d);
    boxs += fmt::format("{} {} ", num(box.lo[dd]), num(box.hi[dd]));
  }
  add("potentials.K", K);
  add("potentials.Q", Q);
  add("potentials.V", V);
  add("potentials.box", boxs);
  add("potentials.samples", fmt::format("{}", samples));
  add("problem.n", fmt::format("{}", n));
  add("problem.p", num(p));
  add("problem.q", num(q));
  add("solver.multistart", fmt::format("{}", multistart));
  add("solver.newton_max_iter", fmt::format("{}", newton_max_iter));
  add("solver.newton_tol", num(newton_tol));
  add("solver.relax_budget", fmt::format("{}", relax_budget));
  add("solver.seed", fmt::format("{}", seed));
  add("solver.steps_per_unit", fmt::format("{}", steps_per_unit));
  std::string epss;
  for (double e : epsilons) epss += num(e) + " ";
  add("sweep.epsilons", epss);
  add("sweep.gap_tol", num(gap_tol));
  add("sweep.init_center", num(init_center));
  add("sweep.jitter", num(jitter));
  add("sweep.peak_tol", num(peak_tol));
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

ProblemParams RunConfig::problem() const { return validate_params(n, p, q); }

PotentialTriple RunConfig::potentials() const {
  return PotentialTriple::parse(K, Q, V, n);
}

}  // namespace spikeloc
