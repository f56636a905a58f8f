#include "spdebridge/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdebridge/csv.hpp"
#include "spdebridge/errors.hpp"
#include "spdebridge/field_expr.hpp"

namespace spdebridge {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

Eigen::VectorXd parse_inline_vector(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) throw ConfigError(key, "empty entry in list");
    try {
      size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a comma-separated list of numbers");
    }
  }
  if (values.empty()) throw ConfigError(key, "list must not be empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

void require_file(const std::string& key, const std::string& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError(key, "file not found: " + path);
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& origin) {
  ConfigMap map;
  map.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int line_number = 0;
  while (std::getline(ss, line)) {
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", origin + ":" + std::to_string(line_number) +
                                ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = strip_quotes(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("", origin + ":" + std::to_string(line_number) + ": empty key");
    if (map.entries_.count(key))
      throw ConfigError(key, "duplicate key");
    map.entries_[key] = value;
    map.consumed_[key] = false;
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigMap::require_string(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key, "required key is missing");
  consumed_[key] = true;
  resolved_[key] = it->second;
  return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return require_string(key);
}

double ConfigMap::require_double(const std::string& key) {
  const std::string text = require_string(key);
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got `" + text + "`");
  }
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  if (!has(key)) {
    resolved_[key] = format_double(fallback);
    return fallback;
  }
  return require_double(key);
}

std::int64_t ConfigMap::require_int(const std::string& key) {
  const std::string text = require_string(key);
  std::int64_t v = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), v);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    throw ConfigError(key, "expected an integer, got `" + text + "`");
  return v;
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) {
  if (!has(key)) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  return require_int(key);
}

std::uint64_t ConfigMap::get_uint(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  const std::string text = require_string(key);
  std::uint64_t v = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), v);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    throw ConfigError(key, "expected an unsigned integer, got `" + text + "`");
  return v;
}

void ConfigMap::override_value(const std::string& key, const std::string& value) {
  entries_[key] = value;
  if (!consumed_.count(key)) consumed_[key] = false;
}

void ConfigMap::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(key, message);
}

void ConfigMap::finish() const {
  for (const auto& [key, value] : entries_) {
    if (!consumed_.at(key)) throw ConfigError(key, "unknown key");
  }
}

namespace {

SpectralModel build_model(ConfigMap& cfg) {
  const int j_count = static_cast<int>(cfg.require_int("model.J"));
  if (j_count < 1) cfg.fail("model.J", "must be at least 1");
  const double domain_length = cfg.get_double("model.domain_length", kPi);
  if (!(domain_length > 0.0)) cfg.fail("model.domain_length", "must be positive");

  const std::string model_kind = cfg.require_string("model.kind");
  Eigen::VectorXd drift_eigs;
  if (model_kind == "dirichlet_laplacian") {
    const double eta = cfg.require_double("model.eta");
    if (!(eta > 0.0)) cfg.fail("model.eta", "must be positive");
    drift_eigs = make_dirichlet_laplacian(eta, j_count);
  } else if (model_kind == "damping") {
    const double eta = cfg.require_double("model.eta");
    if (!(eta > 0.0)) cfg.fail("model.eta", "must be positive");
    drift_eigs = make_damping(eta, j_count);
  } else {
    cfg.fail("model.kind", "must be one of {dirichlet_laplacian, damping}");
  }

  const std::string noise_kind = cfg.require_string("noise.kind");
  Eigen::VectorXd noise_eigs;
  if (noise_kind == "white") {
    const double sigma0 = cfg.require_double("noise.sigma0");
    if (!(sigma0 >= 0.0)) cfg.fail("noise.sigma0", "must be nonnegative");
    noise_eigs = make_white_noise(sigma0, j_count);
  } else if (noise_kind == "power_law") {
    const double sigma0 = cfg.require_double("noise.sigma0");
    const double decay = cfg.require_double("noise.r");
    if (!(sigma0 >= 0.0)) cfg.fail("noise.sigma0", "must be nonnegative");
    if (!(decay >= 0.0)) cfg.fail("noise.r", "must be nonnegative");
    noise_eigs = make_power_law_noise(sigma0, decay, j_count);
  } else if (noise_kind == "matern") {
    const double sigma0 = cfg.require_double("noise.sigma0");
    const double rho = cfg.require_double("noise.rho");
    const double nu = cfg.require_double("noise.nu");
    if (!(sigma0 > 0.0)) cfg.fail("noise.sigma0", "must be positive");
    if (!(rho > 0.0)) cfg.fail("noise.rho", "must be positive");
    if (!(nu > 0.0)) cfg.fail("noise.nu", "must be positive");
    noise_eigs = make_matern_noise(sigma0, rho, nu, j_count);
  } else {
    cfg.fail("noise.kind", "must be one of {white, power_law, matern}");
  }

  return SpectralModel(std::move(drift_eigs), std::move(noise_eigs), domain_length);
}

Nonlinearity build_nonlinearity(ConfigMap& cfg, std::shared_ptr<const PhysicalGrid> grid) {
  const std::string kind = cfg.get_string("nonlinearity.kind", "zero");
  if (kind == "zero") return Nonlinearity::zero();
  if (kind == "michaelis_menten") {
    const double zeta1 = cfg.require_double("nonlinearity.zeta1");
    const double zeta2 = cfg.require_double("nonlinearity.zeta2");
    if (!(zeta1 > 0.0)) cfg.fail("nonlinearity.zeta1", "must be positive");
    if (!(zeta2 > 0.0)) cfg.fail("nonlinearity.zeta2", "must be positive");
    return Nonlinearity::michaelis_menten(zeta1, zeta2, std::move(grid));
  }
  if (kind == "allen_cahn") {
    const double zeta = cfg.require_double("nonlinearity.zeta");
    if (!(zeta > 0.0)) cfg.fail("nonlinearity.zeta", "must be positive");
    return Nonlinearity::allen_cahn(zeta, std::move(grid));
  }
  if (kind == "amari") {
    AmariParams params;
    params.amp_excite = cfg.require_double("nonlinearity.A1");
    params.amp_inhibit = cfg.require_double("nonlinearity.A2");
    params.width_excite = cfg.require_double("nonlinearity.sigma1");
    params.width_inhibit = cfg.require_double("nonlinearity.sigma2");
    params.threshold = cfg.require_double("nonlinearity.theta");
    params.slope = cfg.get_double("nonlinearity.s", 5.0);
    if (!(params.amp_excite > 0.0)) cfg.fail("nonlinearity.A1", "must be positive");
    if (!(params.amp_inhibit > 0.0)) cfg.fail("nonlinearity.A2", "must be positive");
    if (!(params.width_excite > 0.0)) cfg.fail("nonlinearity.sigma1", "must be positive");
    if (!(params.width_inhibit > 0.0)) cfg.fail("nonlinearity.sigma2", "must be positive");
    if (!(params.slope > 0.0)) cfg.fail("nonlinearity.s", "must be positive");
    return Nonlinearity::amari(params, std::move(grid));
  }
  cfg.fail("nonlinearity.kind",
           "must be one of {zero, michaelis_menten, allen_cahn, amari}");
}

std::optional<Observation> build_observation(ConfigMap& cfg, Eigen::Index j_count) {
  if (!cfg.has("observation.kind")) return std::nullopt;
  const std::string kind = cfg.require_string("observation.kind");
  if (kind == "projection") {
    const std::int64_t k = cfg.require_int("observation.k");
    if (k < 1 || k > j_count) cfg.fail("observation.k", "must satisfy 1 <= k <= model.J");
    return Observation::projection(static_cast<Eigen::Index>(k), j_count);
  }
  if (kind == "weights") {
    const std::string path = cfg.require_string("observation.weights_file");
    require_file("observation.weights_file", path);
    const CsvTable table = read_csv(path);
    if (table.rows.cols() != j_count)
      cfg.fail("observation.weights_file",
               "expected " + std::to_string(j_count) + " columns of spectral coefficients");
    if (cfg.has("observation.k")) {
      const std::int64_t k = cfg.require_int("observation.k");
      if (k != table.rows.rows())
        cfg.fail("observation.k", "does not match the weight row count");
    }
    try {
      return Observation::weighted(table.rows);
    } catch (const std::invalid_argument& err) {
      cfg.fail("observation.weights_file", err.what());
    }
  }
  cfg.fail("observation.kind", "must be one of {projection, weights}");
}

std::optional<Eigen::VectorXd> build_conditioning_state(ConfigMap& cfg,
                                                        const std::optional<Observation>& obs) {
  const bool inline_given = cfg.has("observation.y");
  const bool file_given = cfg.has("observation.y_file");
  if (!inline_given && !file_given) return std::nullopt;
  if (inline_given && file_given)
    cfg.fail("observation.y", "give either observation.y or observation.y_file, not both");
  if (!obs.has_value())
    cfg.fail(inline_given ? "observation.y" : "observation.y_file",
             "an observation section is required alongside a conditioning state");
  Eigen::VectorXd y;
  if (inline_given) {
    y = parse_inline_vector("observation.y", cfg.require_string("observation.y"));
  } else {
    const std::string path = cfg.require_string("observation.y_file");
    require_file("observation.y_file", path);
    const CsvTable table = read_csv(path);
    if (table.rows.rows() < 1) cfg.fail("observation.y_file", "no data rows");
    y = table.rows.row(0).transpose();
  }
  if (y.size() != obs->dim())
    cfg.fail(inline_given ? "observation.y" : "observation.y_file",
             "expected " + std::to_string(obs->dim()) + " entries");
  return y;
}

Eigen::VectorXd build_initial_state(ConfigMap& cfg, const PhysicalGrid& grid,
                                    Eigen::Index j_count) {
  const std::string kind = cfg.get_string("init.kind", "zero");
  if (kind == "zero") return Eigen::VectorXd::Zero(j_count);
  if (kind == "spectral_file") {
    const std::string path = cfg.require_string("init.spectral_file");
    require_file("init.spectral_file", path);
    const CsvTable table = read_csv(path);
    if (table.rows.rows() < 1) cfg.fail("init.spectral_file", "no data rows");
    if (table.rows.cols() != j_count)
      cfg.fail("init.spectral_file",
               "expected " + std::to_string(j_count) + " spectral coefficients");
    return table.rows.row(0).transpose();
  }
  if (kind == "field_expr") {
    const std::string text = cfg.require_string("init.expr");
    try {
      const FieldExpr expr = FieldExpr::parse(text);
      return grid.to_spectral(expr.eval(grid.points()));
    } catch (const std::invalid_argument& err) {
      cfg.fail("init.expr", err.what());
    }
  }
  cfg.fail("init.kind", "must be one of {zero, spectral_file, field_expr}");
}

MhConfig build_mh(ConfigMap& cfg, std::uint64_t seed) {
  MhConfig mh;
  mh.iterations = cfg.require_int("sampler.iterations");
  if (mh.iterations < 1) cfg.fail("sampler.iterations", "must be at least 1");
  mh.beta = cfg.require_double("sampler.beta");
  if (!(mh.beta > 0.0 && mh.beta <= 1.0)) cfg.fail("sampler.beta", "must lie in (0, 1]");
  mh.thin = cfg.get_int("sampler.thin", 1);
  if (mh.thin < 1) cfg.fail("sampler.thin", "must be at least 1");
  mh.retained_samples = cfg.get_int("sampler.retained_samples", 100);
  if (mh.retained_samples < 0) cfg.fail("sampler.retained_samples", "must be nonnegative");
  mh.seed = seed;
  return mh;
}

CpmConfig build_cpm(ConfigMap& cfg, std::uint64_t seed) {
  CpmConfig cpm;
  cpm.iterations = cfg.require_int("sampler.iterations");
  if (cpm.iterations < 1) cfg.fail("sampler.iterations", "must be at least 1");
  cpm.beta = cfg.require_double("sampler.beta");
  if (!(cpm.beta > 0.0)) cfg.fail("sampler.beta", "must be positive");
  cpm.rho = cfg.get_double("sampler.rho", 0.1);
  if (!(cpm.rho >= 0.0 && cpm.rho < 1.0)) cfg.fail("sampler.rho", "must lie in [0, 1)");
  cpm.n_particles = cfg.get_int("sampler.n_particles", 1);
  if (cpm.n_particles < 1) cfg.fail("sampler.n_particles", "must be at least 1");
  if (cfg.has("sampler.y0"))
    cpm.y_init = parse_inline_vector("sampler.y0", cfg.require_string("sampler.y0"));
  cpm.seed = seed;
  return cpm;
}

bool has_sampler_section(const ConfigMap& cfg) {
  for (const char* key :
       {"sampler.kind", "sampler.iterations", "sampler.beta", "sampler.thin",
        "sampler.retained_samples", "sampler.rho", "sampler.n_particles", "sampler.y0"}) {
    if (cfg.has(key)) return true;
  }
  return false;
}

std::string infer_sampler_kind(const ConfigMap& cfg) {
  return (cfg.has("sampler.rho") || cfg.has("sampler.n_particles") || cfg.has("sampler.y0"))
             ? "cpm"
             : "mh";
}

}  // namespace

ExperimentSetup load_experiment(ConfigMap cfg, const SetupRequirements& req,
                                std::optional<std::uint64_t> seed_override,
                                std::optional<std::string> out_override) {
  if (seed_override.has_value())
    cfg.override_value("seed", std::to_string(*seed_override));
  if (out_override.has_value()) cfg.override_value("output.dir", *out_override);

  const std::uint64_t seed = cfg.get_uint("seed", 1);
  const std::string output_dir = cfg.get_string("output.dir", "out");

  SpectralModel model = build_model(cfg);
  const Eigen::Index j_count = model.num_modes();

  const double horizon = cfg.require_double("grid.T");
  if (!(horizon > 0.0)) cfg.fail("grid.T", "must be positive");
  const std::int64_t n_steps = cfg.require_int("grid.N");
  if (n_steps < 1) cfg.fail("grid.N", "must be at least 1");
  const std::int64_t m_points = cfg.get_int("grid.M", 4 * j_count);
  if (m_points < j_count) cfg.fail("grid.M", "must be at least model.J");
  const TimeGrid time(horizon, static_cast<int>(n_steps));
  auto grid = std::make_shared<const PhysicalGrid>(j_count, model.domain_length(),
                                                   static_cast<Eigen::Index>(m_points));

  Nonlinearity drift = build_nonlinearity(cfg, grid);
  std::optional<Observation> observation = build_observation(cfg, j_count);
  std::optional<Eigen::VectorXd> y = build_conditioning_state(cfg, observation);
  Eigen::VectorXd x0 = build_initial_state(cfg, *grid, j_count);

  std::optional<MhConfig> mh;
  std::optional<CpmConfig> cpm;
  if (req.mh_sampler || req.cpm_sampler || has_sampler_section(cfg)) {
    const std::string kind = cfg.get_string("sampler.kind", infer_sampler_kind(cfg));
    if (kind != "mh" && kind != "cpm")
      cfg.fail("sampler.kind", "must be one of {mh, cpm}");
    if (req.mh_sampler && kind != "mh")
      cfg.fail("sampler.kind", "this command runs the mh sampler");
    if (req.cpm_sampler && kind != "cpm")
      cfg.fail("sampler.kind", "this command runs the cpm sampler");
    if (kind == "mh") {
      mh = build_mh(cfg, seed);
    } else {
      cpm = build_cpm(cfg, seed);
    }
  }

  if (req.observation && !observation.has_value())
    cfg.fail("observation.kind", "this command needs an observation section");
  if (req.conditioning_state && !y.has_value())
    cfg.fail("observation.y", "this command needs a conditioning state (observation.y "
                              "inline or observation.y_file)");

  cfg.finish();

  return ExperimentSetup{std::move(model),
                         std::move(grid),
                         time,
                         std::move(drift),
                         std::move(observation),
                         std::move(y),
                         std::move(x0),
                         seed,
                         output_dir,
                         mh,
                         cpm,
                         cfg.resolved()};
}

}  // namespace spdebridge
