#include "genbound/experiments/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "genbound/errors.hpp"

namespace genbound::experiments {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"scenario",
     {"preset", "hypotheses", "hypothesis_grid", "instances", "loss", "aux_loss", "test_dist", "train_dist", "n",
      "mu_sweep", "mu_grid"}},
    {"learner", {"kind", "beta", "index"}},
    {"sweep", {"r", "r_min", "r_max", "points"}},
    {"bounds", {"list", "sigma2", "gamma", "v_n"}},
    {"output", {"dir", "stem", "unit", "svg", "seed", "threads"}},
    {"validate", {"suite", "scenarios", "betas", "max_n", "max_hypotheses", "eta_points", "slack", "corrupt"}},
    {"misspec", {"n", "sigma2", "delta", "eps_base", "eps_half", "gammas", "gamma_min", "gamma_max", "gamma_points",
                 "regimes"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + fmt(xs[i]);
  return out;
}

std::string matrix_text(const Matrix& m) {
  return std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " : " + join(m.data());
}

class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::istringstream in(text);
    try {
      pt::ini_parser::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("", e.message(), static_cast<long>(e.line()));
    }
    index_lines(text);
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  bool has_section(const std::string& section) const { return tree_.find(section) != tree_.not_found(); }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const {
    const auto it = lines_.find(section + "." + key);
    throw ConfigError(section + "." + key, message, it == lines_.end() ? -1 : it->second);
  }

  double number(const std::string& section, const std::string& key, const std::string& raw) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(raw, &used);
    } catch (const std::exception&) {
      fail(section, key, "expected a number, got '" + raw + "'");
    }
    if (trim(raw.substr(used)) != "" || !std::isfinite(v)) fail(section, key, "expected a finite number, got '" + raw + "'");
    return v;
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    auto raw = get(section, key);
    if (!raw) return std::nullopt;
    return number(section, key, *raw);
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    auto v = number(section, key);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v || std::abs(*v) > 9e15) fail(section, key, "expected an integer");
    return static_cast<long long>(*v);
  }

  std::vector<double> numbers(const std::string& section, const std::string& key, const std::string& raw) const {
    std::string text = raw;
    for (char& c : text)
      if (c == ',') c = ' ';
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(number(section, key, tok));
    return out;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    auto raw = get(section, key);
    if (!raw) return std::nullopt;
    if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
    if (*raw == "false" || *raw == "0" || *raw == "no") return false;
    fail(section, key, "expected true or false");
  }

  Matrix matrix(const std::string& section, const std::string& key, const std::string& raw) const {
    const auto colon = raw.find(':');
    if (colon == std::string::npos) fail(section, key, "matrix must be written 'rows cols : values'");
    const auto dims = numbers(section, key, raw.substr(0, colon));
    const auto values = numbers(section, key, raw.substr(colon + 1));
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1 || std::floor(dims[0]) != dims[0] ||
        std::floor(dims[1]) != dims[1]) {
      fail(section, key, "matrix dimensions must be two positive integers");
    }
    const auto rows = static_cast<std::size_t>(dims[0]), cols = static_cast<std::size_t>(dims[1]);
    if (values.size() != rows * cols) {
      fail(section, key, "matrix declares " + std::to_string(rows * cols) + " entries but lists " +
                             std::to_string(values.size()));
    }
    return Matrix(rows, cols, values);
  }

 private:
  void index_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    long number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[') {
        section = trim(t.substr(1, t.find(']') - 1));
        if (!kSchema.count(section)) throw ConfigError(section, "unknown section", number);
        continue;
      }
      const auto eq = t.find('=');
      const auto key = trim(t.substr(0, eq));
      if (section.empty()) throw ConfigError(key, "key outside of a section", number);
      if (!kSchema.at(section).count(key)) throw ConfigError(section + "." + key, "unknown key", number);
      lines_[section + "." + key] = number;
    }
  }

  pt::ptree tree_;
  std::map<std::string, long> lines_;
};

FiniteDistribution parse_distribution(const Reader& r, const std::string& key, const std::string& raw,
                                      std::size_t size) {
  std::vector<double> probs;
  if (raw == "uniform") {
    probs.assign(size, 1.0 / static_cast<double>(size));
  } else if (raw.rfind("bernoulli(", 0) == 0 && raw.back() == ')') {
    const double p = r.number("scenario", key, raw.substr(10, raw.size() - 11));
    if (size != 2) r.fail("scenario", key, "bernoulli law needs exactly two instances");
    if (!(p >= 0.0 && p <= 1.0)) r.fail("scenario", key, "bernoulli parameter must lie in [0,1]");
    probs = {1.0 - p, p};
  } else {
    probs = r.numbers("scenario", key, raw);
  }
  if (probs.size() != size) {
    r.fail("scenario", key, "law has " + std::to_string(probs.size()) + " entries, alphabet has " +
                                std::to_string(size));
  }
  try {
    return FiniteDistribution(probs);
  } catch (const std::exception& e) {
    r.fail("scenario", key, e.what());
  }
}

LossMatrix parse_loss(const Reader& r, const std::string& key, const std::string& raw,
                      const std::vector<double>& hypotheses, const std::vector<double>& instances) {
  if (raw.find(':') != std::string::npos) {
    auto m = r.matrix("scenario", key, raw);
    if (m.rows() != hypotheses.size() || m.cols() != instances.size()) {
      r.fail("scenario", key, "loss matrix must be |W| x |Z| = " + std::to_string(hypotheses.size()) + " x " +
                                  std::to_string(instances.size()));
    }
    return LossMatrix(std::move(m));
  }
  auto f = named_loss(raw);
  if (!f) r.fail("scenario", key, "unknown loss '" + raw + "'");
  return LossMatrix::tabulate(hypotheses, instances, *f);
}

Scenario parse_scenario(const Reader& r, ExperimentConfig& cfg) {
  std::optional<Scenario> base;
  if (auto preset = r.get("scenario", "preset")) {
    try {
      auto grid = r.integer("scenario", "hypothesis_grid");
      base = preset_scenario(*preset, grid ? static_cast<int>(*grid) : 201);
    } catch (const std::invalid_argument& e) {
      r.fail("scenario", "preset", e.what());
    }
  }

  std::vector<double> hypotheses, instances;
  if (auto raw = r.get("scenario", "hypotheses")) {
    hypotheses = r.numbers("scenario", "hypotheses", *raw);
  } else if (auto grid = r.integer("scenario", "hypothesis_grid"); grid && !base) {
    if (*grid < 2) r.fail("scenario", "hypothesis_grid", "needs at least 2 points");
    hypotheses = discretize_interval_hypothesis(static_cast<int>(*grid));
  } else if (base) {
    hypotheses = base->hypothesis_labels;
  } else {
    r.fail("scenario", "hypotheses", "missing (give preset, hypotheses or hypothesis_grid)");
  }
  if (auto raw = r.get("scenario", "instances")) {
    instances = r.numbers("scenario", "instances", *raw);
  } else if (base) {
    instances = base->instance_labels;
  } else {
    r.fail("scenario", "instances", "missing");
  }
  if (hypotheses.empty()) r.fail("scenario", "hypotheses", "empty hypothesis alphabet");
  if (instances.empty()) r.fail("scenario", "instances", "empty instance alphabet");

  std::optional<LossMatrix> loss;
  if (auto raw = r.get("scenario", "loss")) {
    loss = parse_loss(r, "loss", *raw, hypotheses, instances);
  } else if (base && base->hypothesis_labels == hypotheses && base->instance_labels == instances) {
    loss = base->loss;
  } else {
    r.fail("scenario", "loss", "missing");
  }
  std::optional<LossMatrix> aux;
  if (auto raw = r.get("scenario", "aux_loss")) {
    if (*raw != "none") aux = parse_loss(r, "aux_loss", *raw, hypotheses, instances);
  } else if (base && base->hypothesis_labels == hypotheses && base->instance_labels == instances) {
    aux = base->aux_loss;
  }

  auto law = [&](const char* key) {
    if (auto raw = r.get("scenario", key)) return parse_distribution(r, key, *raw, instances.size());
    if (base && base->instance_labels == instances) {
      return std::string(key) == "test_dist" ? base->test_dist : base->train_dist;
    }
    return FiniteDistribution::uniform(instances.size());
  };
  auto test = law("test_dist");
  auto train = law("train_dist");
  int n = base ? base->n : 1;
  if (auto v = r.integer("scenario", "n")) {
    if (*v < 1) r.fail("scenario", "n", "must be a positive integer");
    n = static_cast<int>(*v);
  }
  Scenario s{std::move(test), std::move(train), hypotheses, instances, std::move(*loss), std::move(aux), n};
  try {
    s.validate();
  } catch (const std::exception& e) {
    r.fail("scenario", "loss", e.what());
  }

  if (auto raw = r.get("scenario", "mu_sweep")) {
    if (*raw == "bernoulli") {
      if (instances.size() != 2) r.fail("scenario", "mu_sweep", "bernoulli sweep needs two instances");
      cfg.mu_sweep = true;
    } else if (*raw != "none") {
      r.fail("scenario", "mu_sweep", "expected none or bernoulli");
    }
  }
  if (auto v = r.integer("scenario", "mu_grid")) {
    if (*v < 2) r.fail("scenario", "mu_grid", "needs at least 2 points");
    cfg.mu_grid = static_cast<int>(*v);
  }
  return s;
}

std::vector<double> parse_grid(const Reader& r, const std::string& section, const std::string& list_key,
                               const std::string& min_key, const std::string& max_key,
                               const std::string& points_key) {
  std::vector<double> grid;
  if (auto raw = r.get(section, list_key)) {
    grid = r.numbers(section, list_key, *raw);
  } else if (auto hi = r.number(section, max_key)) {
    const double lo = r.number(section, min_key).value_or(0.0);
    const auto points = r.integer(section, points_key).value_or(50);
    if (points < 1) r.fail(section, points_key, "needs at least one point");
    if (!(*hi >= lo)) r.fail(section, max_key, "must not be below " + min_key);
    for (long long i = 0; i < points; ++i)
      grid.push_back(points == 1 ? lo : lo + (*hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  } else {
    return grid;
  }
  if (grid.empty()) r.fail(section, list_key, "grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) r.fail(section, list_key, "grid values must be nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1])) r.fail(section, list_key, "grid must be strictly increasing");
  }
  return grid;
}

}  // namespace

double ExperimentConfig::effective_sigma2() const { return sigma2 ? *sigma2 : scenario.loss_sigma2(); }

double ExperimentConfig::effective_gamma() const {
  return gamma ? *gamma : kl_divergence(scenario.train_dist, scenario.test_dist);
}

ExperimentConfig parse_config(const std::string& text) {
  Reader r(text);
  ExperimentConfig cfg;
  if (r.has_section("scenario")) cfg.scenario = parse_scenario(r, cfg);

  if (auto kind = r.get("learner", "kind")) {
    if (*kind == "erm") {
      cfg.learner = LearnerSpec::erm();
    } else if (*kind == "gibbs") {
      cfg.learner = LearnerSpec::gibbs(r.number("learner", "beta").value_or(1.0));
    } else if (*kind == "constant") {
      const auto index = r.integer("learner", "index").value_or(0);
      if (index < 0) r.fail("learner", "index", "must be nonnegative");
      cfg.learner = LearnerSpec::constant(static_cast<std::size_t>(index));
    } else {
      r.fail("learner", "kind", "expected erm, gibbs or constant");
    }
    try {
      cfg.learner.validate(cfg.scenario.hypotheses());
    } catch (const std::exception& e) {
      r.fail("learner", *kind == "gibbs" ? "beta" : "index", e.what());
    }
  }

  cfg.rates = parse_grid(r, "sweep", "r", "r_min", "r_max", "points");

  if (auto raw = r.get("bounds", "list")) {
    std::string text_list = *raw;
    for (char& c : text_list)
      if (c == ',') c = ' ';
    std::istringstream in(text_list);
    std::string name;
    while (in >> name) cfg.bounds.push_back(name);
    if (cfg.bounds.empty()) r.fail("bounds", "list", "bound list is empty");
  }
  auto auto_number = [&](const char* key) -> std::optional<double> {
    auto raw = r.get("bounds", key);
    if (!raw || *raw == "auto") return std::nullopt;
    const double v = r.number("bounds", key, *raw);
    if (std::string(key) != "v_n" && v < 0.0) r.fail("bounds", key, "must be nonnegative");
    return v;
  };
  cfg.sigma2 = auto_number("sigma2");
  cfg.gamma = auto_number("gamma");
  cfg.v_n = auto_number("v_n");

  if (auto v = r.get("output", "dir")) cfg.out_dir = *v;
  if (auto v = r.get("output", "stem")) {
    if (v->empty() || v->find('/') != std::string::npos) r.fail("output", "stem", "must be a plain file stem");
    cfg.stem = *v;
  }
  if (auto v = r.get("output", "unit")) {
    if (*v == "nats") {
      cfg.unit = Unit::Nats;
    } else if (*v == "bits") {
      cfg.unit = Unit::Bits;
    } else {
      r.fail("output", "unit", "expected nats or bits");
    }
  }
  if (auto v = r.boolean("output", "svg")) cfg.svg = *v;
  if (auto v = r.integer("output", "seed")) {
    if (*v < 0) r.fail("output", "seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = r.integer("output", "threads")) {
    if (*v < 1) r.fail("output", "threads", "must be positive");
    cfg.threads = static_cast<int>(*v);
  }

  auto& val = cfg.validate;
  if (auto v = r.get("validate", "suite")) {
    if (*v != "random" && *v != "config") r.fail("validate", "suite", "expected random or config");
    val.suite = *v;
  }
  if (auto v = r.integer("validate", "scenarios")) {
    if (*v < 1) r.fail("validate", "scenarios", "must be positive");
    val.scenarios = static_cast<int>(*v);
  }
  if (auto raw = r.get("validate", "betas")) {
    val.betas = r.numbers("validate", "betas", *raw);
    if (val.betas.empty()) r.fail("validate", "betas", "empty list");
    for (double b : val.betas)
      if (b < 0.0) r.fail("validate", "betas", "must be nonnegative");
  }
  if (auto v = r.integer("validate", "max_n")) {
    if (*v < 1 || *v > 12) r.fail("validate", "max_n", "must lie in [1, 12]");
    val.max_n = static_cast<int>(*v);
  }
  if (auto v = r.integer("validate", "max_hypotheses")) {
    if (*v < 2 || *v > 6) r.fail("validate", "max_hypotheses", "must lie in [2, 6]");
    val.max_hypotheses = static_cast<int>(*v);
  }
  if (auto v = r.integer("validate", "eta_points")) {
    if (*v < 1) r.fail("validate", "eta_points", "must be positive");
    val.eta_points = static_cast<int>(*v);
  }
  if (auto v = r.number("validate", "slack")) {
    if (*v < 0.0) r.fail("validate", "slack", "must be nonnegative");
    val.slack = *v;
  }
  if (auto v = r.get("validate", "corrupt")) val.corrupt = *v == "none" ? "" : *v;

  auto& mis = cfg.misspec;
  if (auto v = r.integer("misspec", "n")) {
    if (*v < 1) r.fail("misspec", "n", "must be positive");
    mis.n = static_cast<int>(*v);
  }
  if (auto v = r.number("misspec", "sigma2")) {
    if (!(*v > 0.0)) r.fail("misspec", "sigma2", "must be positive");
    mis.sigma2 = *v;
  }
  if (auto v = r.number("misspec", "delta")) {
    if (!(*v > 0.0 && *v < 1.0)) r.fail("misspec", "delta", "must lie in (0, 1)");
    mis.delta = *v;
  }
  if (auto v = r.number("misspec", "eps_base")) mis.eps_base = *v;
  if (auto v = r.number("misspec", "eps_half")) mis.eps_half = *v;
  mis.gammas = parse_grid(r, "misspec", "gammas", "gamma_min", "gamma_max", "gamma_points");
  if (auto raw = r.get("misspec", "regimes")) {
    std::string list = *raw;
    for (char& c : list)
      if (c == ',') c = ' ';
    std::istringstream in(list);
    mis.regimes.clear();
    std::string tok;
    while (in >> tok) {
      if (tok != "zero" && tok != "inv_sqrt_n") {
        const double b = r.number("misspec", "regimes", tok);
        if (b < 0.0) r.fail("misspec", "regimes", "stability constants must be nonnegative");
      }
      mis.regimes.push_back(tok);
    }
    if (mis.regimes.empty()) r.fail("misspec", "regimes", "empty list");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  try {
    cfg.scenario = preset_scenario(name);
  } catch (const std::invalid_argument&) {
    throw ConfigError("preset", "unknown figure preset '" + name + "' (expected fig1..fig4)");
  }
  cfg.stem = name;
  cfg.svg = true;
  const bool constrained = name == "fig3" || name == "fig4";
  // Constrained figures plot against r with the bound evaluated at r / n; the
  // range is chosen so that r / n covers [0, 1.5] nats.
  const double r_max = constrained ? 1.5 * cfg.scenario.n : 1.5;
  const int points = 50;
  for (int i = 0; i < points; ++i) cfg.rates.push_back(r_max * i / (points - 1));
  if (constrained) {
    cfg.bounds = {"d2", "d2_constrained"};
  } else {
    cfg.mu_sweep = true;
    cfg.bounds = {"d2_max_mu", "xu_raginsky"};
  }
  return cfg;
}

std::string canonical_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto& s = c.scenario;
  out << "[scenario]\n";
  out << "hypotheses = " << join(s.hypothesis_labels) << "\n";
  out << "instances = " << join(s.instance_labels) << "\n";
  out << "loss = " << matrix_text(s.loss.values()) << "\n";
  out << "aux_loss = " << (s.aux_loss ? matrix_text(s.aux_loss->values()) : "none") << "\n";
  out << "test_dist = " << join({s.test_dist.probs().begin(), s.test_dist.probs().end()}) << "\n";
  out << "train_dist = " << join({s.train_dist.probs().begin(), s.train_dist.probs().end()}) << "\n";
  out << "n = " << s.n << "\n";
  out << "mu_sweep = " << (c.mu_sweep ? "bernoulli" : "none") << "\n";
  out << "mu_grid = " << c.mu_grid << "\n";
  out << "\n[learner]\n";
  switch (c.learner.kind) {
    case LearnerKind::Erm:
      out << "kind = erm\n";
      break;
    case LearnerKind::Gibbs:
      out << "kind = gibbs\nbeta = " << fmt(c.learner.beta) << "\n";
      break;
    case LearnerKind::Constant:
      out << "kind = constant\nindex = " << c.learner.constant_index << "\n";
      break;
  }
  out << "\n[sweep]\n";
  if (!c.rates.empty()) out << "r = " << join(c.rates) << "\n";
  out << "\n[bounds]\n";
  if (!c.bounds.empty()) {
    out << "list = ";
    for (std::size_t i = 0; i < c.bounds.size(); ++i) out << (i ? ", " : "") << c.bounds[i];
    out << "\n";
  }
  out << "sigma2 = " << (c.sigma2 ? fmt(*c.sigma2) : "auto") << "\n";
  out << "gamma = " << (c.gamma ? fmt(*c.gamma) : "auto") << "\n";
  out << "v_n = " << (c.v_n ? fmt(*c.v_n) : "auto") << "\n";
  out << "\n[output]\n";
  out << "stem = " << c.stem << "\n";
  out << "unit = " << (c.unit == Unit::Bits ? "bits" : "nats") << "\n";
  out << "svg = " << (c.svg ? "true" : "false") << "\n";
  out << "seed = " << c.seed << "\n";
  const auto& v = c.validate;
  out << "\n[validate]\n";
  out << "suite = " << v.suite << "\n";
  out << "scenarios = " << v.scenarios << "\nbetas = " << join(v.betas) << "\nmax_n = " << v.max_n
      << "\nmax_hypotheses = " << v.max_hypotheses << "\neta_points = " << v.eta_points
      << "\nslack = " << fmt(v.slack) << "\ncorrupt = " << (v.corrupt.empty() ? "none" : v.corrupt) << "\n";
  const auto& m = c.misspec;
  out << "\n[misspec]\n";
  out << "n = " << m.n << "\nsigma2 = " << fmt(m.sigma2) << "\ndelta = " << fmt(m.delta)
      << "\neps_base = " << fmt(m.eps_base) << "\neps_half = " << fmt(m.eps_half) << "\n";
  if (!m.gammas.empty()) out << "gammas = " << join(m.gammas) << "\n";
  out << "regimes = ";
  for (std::size_t i = 0; i < m.regimes.size(); ++i) out << (i ? ", " : "") << m.regimes[i];
  out << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario random_tiny_scenario(std::uint64_t seed, int index, int max_n, int max_hypotheses) {
  if (max_n < 1 || max_hypotheses < 2) throw std::invalid_argument("random_tiny_scenario: invalid limits");
  std::uint64_t k = 0;
  auto u = [&] { return counter_uniform(seed, static_cast<std::uint64_t>(index), k++); };
  const auto nw = 2 + static_cast<std::size_t>(u() * (max_hypotheses - 1));
  const int n = 1 + static_cast<int>(u() * max_n);
  const double p_test = 0.1 + 0.8 * u();
  const double p_train = 0.1 + 0.8 * u();
  Matrix loss(nw, 2);
  for (double& v : loss.data()) v = u();
  std::vector<double> hypotheses(nw);
  for (std::size_t w = 0; w < nw; ++w) hypotheses[w] = static_cast<double>(w);
  Scenario s{FiniteDistribution::bernoulli(p_test),
             FiniteDistribution::bernoulli(p_train),
             hypotheses,
             {0.0, 1.0},
             LossMatrix(std::move(loss)),
             std::nullopt,
             n};
  s.validate();
  return s;
}

}  // namespace genbound::experiments
