#include "coopmimo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coopmimo/errors.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

namespace {

constexpr const char* kCodeVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError("bad number for " + key + ": '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError("bad integer for " + key + ": '" + value + "'");
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) out.push_back(parse_size(key, item));
  if (out.empty()) throw ConfigError(key + " must not be empty");
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key + " must not be empty");
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::string scheme_name(Scheme s) { return s == Scheme::proposed ? "proposed" : "baseline"; }
std::string mode_name(DetectionMode m) { return m == DetectionMode::cooperative ? "cooperative" : "non_cooperative"; }

std::string distance_tag(double distance) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", distance);
  return buf;
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  const auto sz = [](std::size_t v) { return std::to_string(v); };
  const auto db = [](double v) { return format_double(v); };
  std::map<std::string, std::string> e;
  e["antennas"] = sz(c.frame.antennas);
  e["pilot_length"] = sz(c.frame.pilot_length);
  e["block_lengths"] = join(c.frame.block_lengths, sz);
  e["backhaul_delay"] = sz(c.frame.backhaul_delay);
  e["cooperation_radius_m"] = db(c.frame.cooperation_radius);
  e["transmit_power_dbm"] = db(c.transmit_power_dbm);
  e["noise_psd_dbm_hz"] = db(c.noise_psd_dbm_hz);
  e["bandwidth_hz"] = db(c.bandwidth_hz);
  e["pathloss_exponent"] = db(c.frame.pathloss_exponent);
  e["shadowing_std_db"] = db(c.frame.shadowing_std_db);
  e["estimator_noise"] = c.frame.estimator_noise == EstimatorNoise::physical ? "physical" : "literal";
  e["cell_radius_m"] = db(c.cell_radius);
  e["rings"] = std::to_string(c.rings);
  e["users_per_cell"] = db(c.users_per_cell);
  e["target_distances_m"] = join(c.target_distances, db);
  e["trials"] = sz(c.trials);
  e["seed"] = std::to_string(c.seed);
  e["mode"] = c.mode == SchemeSelection::both ? "both" : (c.mode == SchemeSelection::proposed ? "proposed" : "baseline");
  e["variance"] = join(c.variance_forms, [](VarianceForm f) { return to_string(f); });
  e["blocks"] = join(c.blocks, sz);
  e["evaluation"] = c.evaluation == SinrEvaluation::model ? "model" : "exact_conditional";
  e["symbol_error_rate"] = db(c.symbol_error_rate);
  e["assumed_out_of_cell_power"] = c.assumed_out_of_cell_power ? db(*c.assumed_out_of_cell_power) : "oracle";
  e["assumed_out_of_coop_power"] = c.assumed_out_of_coop_power ? db(*c.assumed_out_of_coop_power) : "oracle";
  e["epsilon"] = db(c.epsilon);
  e["adapt_stats"] = c.adapt_stats == StatsSource::learned ? "learned" : "analytic";
  e["validate"] = c.validate ? "true" : "false";
  e["validate_drops"] = sz(c.validate_drops);
  e["learn_iterations"] = sz(c.learn_iterations);
  e["observation"] = to_string(c.observation);
  e["triple"] = c.triple_path;
  e["target_rho"] = c.target_rho ? db(*c.target_rho) : "planted";
  e["radial_nodes"] = sz(c.quadrature.radial_nodes);
  e["angular_nodes"] = sz(c.quadrature.angular_nodes);
  e["cdf_min_db"] = db(c.cdf_min_db);
  e["cdf_max_db"] = db(c.cdf_max_db);
  e["cdf_step_db"] = db(c.cdf_step_db);
  return e;
}

nlohmann::json base_manifest(const ExperimentConfig& config, const std::string& command) {
  nlohmann::json m;
  m["command"] = command;
  m["code_version"] = kCodeVersion;
  m["config_hash"] = config_hash(config);
  m["seed"] = config.seed;
  m["config"] = config_entries(config);
  return m;
}

void finish_manifest(ResultBundle& bundle) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, _] : bundle.files) files.push_back(name);
  bundle.manifest["files"] = files;
}

std::string db_text(double linear) { return format_double(to_db(linear)); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void ExperimentConfig::finalize() {
  frame.transmit_power = std::pow(10.0, (transmit_power_dbm - 30.0) / 10.0);
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  frame.noise_power = std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
  frame.validate();
  if (!(cell_radius > 0.0)) throw ConfigError("cell_radius_m must be positive");
  if (rings < 0 || rings > 20) throw ConfigError("rings must lie in [0, 20]");
  if (!(users_per_cell >= 0.0)) throw ConfigError("users_per_cell must be non-negative");
  if (target_distances.empty()) throw ConfigError("target_distances_m must not be empty");
  for (double r : target_distances) {
    if (!(r > 0.0) || r > std::sqrt(3.0) / 2.0 * cell_radius) {
      throw ConfigError("target distance " + format_double(r) + " m is outside the target cell");
    }
  }
  if (trials == 0) throw ConfigError("trials must be positive");
  for (auto b : blocks) {
    if (b < 1 || b > frame.num_blocks()) throw ConfigError("block index out of range");
  }
  if (blocks.empty()) throw ConfigError("blocks must not be empty");
  if (variance_forms.empty()) throw ConfigError("variance must name at least one form");
  if (!(symbol_error_rate >= 0.0 && symbol_error_rate <= 1.0)) throw ConfigError("symbol_error_rate must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (validate_drops == 0) throw ConfigError("validate_drops must be positive");
  if (learn_iterations == 0) throw ConfigError("learn_iterations must be positive");
  if (quadrature.radial_nodes == 0 || quadrature.angular_nodes == 0) throw ConfigError("quadrature nodes must be positive");
  if (!(cdf_step_db > 0.0) || !(cdf_max_db > cdf_min_db)) throw ConfigError("bad CDF grid");
  if (target_rho && !(*target_rho > 0.0)) throw ConfigError("target_rho must be positive");
}

std::vector<Scheme> ExperimentConfig::schemes() const {
  switch (mode) {
    case SchemeSelection::proposed:
      return {Scheme::proposed};
    case SchemeSelection::baseline:
      return {Scheme::baseline};
    case SchemeSelection::both:
      return {Scheme::proposed, Scheme::baseline};
  }
  return {};
}

NetworkLayout ExperimentConfig::layout() const { return build_hex_layout(cell_radius, rings); }

DensityMap ExperimentConfig::density() const { return DensityMap::per_cell(users_per_cell, cell_radius); }

std::vector<double> ExperimentConfig::cdf_grid_db() const {
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor((cdf_max_db - cdf_min_db) / cdf_step_db + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(cdf_min_db + static_cast<double>(k) * cdf_step_db);
  return grid;
}

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "antennas") {
    c.frame.antennas = parse_size(key, value);
  } else if (key == "pilot_length") {
    c.frame.pilot_length = parse_size(key, value);
  } else if (key == "block_lengths") {
    c.frame.block_lengths = parse_sizes(key, value);
  } else if (key == "backhaul_delay") {
    c.frame.backhaul_delay = parse_size(key, value);
  } else if (key == "cooperation_radius_m") {
    c.frame.cooperation_radius = parse_double(key, value);
  } else if (key == "transmit_power_dbm") {
    c.transmit_power_dbm = parse_double(key, value);
  } else if (key == "noise_psd_dbm_hz") {
    c.noise_psd_dbm_hz = parse_double(key, value);
  } else if (key == "bandwidth_hz") {
    c.bandwidth_hz = parse_double(key, value);
  } else if (key == "pathloss_exponent") {
    c.frame.pathloss_exponent = parse_double(key, value);
  } else if (key == "shadowing_std_db") {
    c.frame.shadowing_std_db = parse_double(key, value);
  } else if (key == "estimator_noise") {
    if (value == "physical") {
      c.frame.estimator_noise = EstimatorNoise::physical;
    } else if (value == "literal") {
      c.frame.estimator_noise = EstimatorNoise::literal;
    } else {
      throw ConfigError("estimator_noise must be physical or literal");
    }
  } else if (key == "cell_radius_m") {
    c.cell_radius = parse_double(key, value);
  } else if (key == "rings") {
    c.rings = static_cast<int>(parse_size(key, value));
  } else if (key == "users_per_cell") {
    c.users_per_cell = parse_double(key, value);
  } else if (key == "target_distances_m" || key == "target_distance_m") {
    c.target_distances = parse_doubles(key, value);
  } else if (key == "trials") {
    c.trials = parse_size(key, value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "mode") {
    if (value == "proposed") {
      c.mode = SchemeSelection::proposed;
    } else if (value == "baseline") {
      c.mode = SchemeSelection::baseline;
    } else if (value == "both") {
      c.mode = SchemeSelection::both;
    } else {
      throw ConfigError("mode must be proposed, baseline or both");
    }
  } else if (key == "variance") {
    c.variance_forms.clear();
    if (value == "both") {
      c.variance_forms = {VarianceForm::campbell, VarianceForm::paper};
    } else {
      for (const auto& item : split_list(value)) c.variance_forms.push_back(parse_variance_form(item));
    }
  } else if (key == "blocks") {
    c.blocks = parse_sizes(key, value);
  } else if (key == "evaluation") {
    if (value == "model") {
      c.evaluation = SinrEvaluation::model;
    } else if (value == "exact_conditional") {
      c.evaluation = SinrEvaluation::exact_conditional;
    } else {
      throw ConfigError("evaluation must be model or exact_conditional");
    }
  } else if (key == "symbol_error_rate") {
    c.symbol_error_rate = parse_double(key, value);
  } else if (key == "assumed_out_of_cell_power") {
    c.assumed_out_of_cell_power = value == "oracle" ? std::nullopt : std::optional(parse_double(key, value));
  } else if (key == "assumed_out_of_coop_power") {
    c.assumed_out_of_coop_power = value == "oracle" ? std::nullopt : std::optional(parse_double(key, value));
  } else if (key == "epsilon") {
    c.epsilon = parse_double(key, value);
  } else if (key == "adapt_stats") {
    if (value == "learned") {
      c.adapt_stats = StatsSource::learned;
    } else if (value == "analytic") {
      c.adapt_stats = StatsSource::analytic;
    } else {
      throw ConfigError("adapt_stats must be learned or analytic");
    }
  } else if (key == "validate") {
    c.validate = parse_bool(key, value);
  } else if (key == "validate_drops") {
    c.validate_drops = parse_size(key, value);
  } else if (key == "learn_iterations") {
    c.learn_iterations = parse_size(key, value);
  } else if (key == "observation") {
    c.observation = parse_observation_model(value);
  } else if (key == "triple") {
    c.triple_path = value;
  } else if (key == "target_rho") {
    c.target_rho = value == "planted" ? std::nullopt : std::optional(parse_double(key, value));
  } else if (key == "radial_nodes") {
    c.quadrature.radial_nodes = parse_size(key, value);
  } else if (key == "angular_nodes") {
    c.quadrature.angular_nodes = parse_size(key, value);
  } else if (key == "cdf_min_db") {
    c.cdf_min_db = parse_double(key, value);
  } else if (key == "cdf_max_db") {
    c.cdf_max_db = parse_double(key, value);
  } else if (key == "cdf_step_db") {
    c.cdf_step_db = parse_double(key, value);
  } else if (key == "threads") {
    c.threads = parse_size(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void apply_config_text(ExperimentConfig& config, const std::string& text) {
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    apply_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig config;
  apply_config_text(config, buf.str());
  return config;
}

std::string canonical_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(config))));
  return buf;
}

double planted_rho(const ExperimentConfig& config, double distance) {
  return std::pow(distance, -config.frame.pathloss_exponent);
}

DropSource make_drop_source(const ExperimentConfig& config, double target_distance, std::size_t distance_index,
                            std::uint64_t stream_id) {
  return DropSource(config.layout(), config.density(), config.frame.propagation(), target_distance,
                    derive_seed(config.seed, stream_id, distance_index));
}

std::vector<TrialRecords> simulate_trials(const ExperimentConfig& config, double target_distance,
                                          std::size_t distance_index) {
  const DropSource source = make_drop_source(config, target_distance, distance_index);
  const std::uint64_t channel_base = derive_seed(config.seed, stream::kChannel, distance_index);
  const std::uint64_t error_base = derive_seed(config.seed, stream::kSymbolError, distance_index);
  const auto schemes = config.schemes();
  return parallel_map(config.trials, config.threads, [&](std::size_t t) {
    TrialRecords rec;
    rec.trial = t;
    const PlantedDrop planted = source.draw(t);
    rec.resamples = planted.resamples;
    rec.channel_seed = derive_seed(channel_base, 0, t);
    const PilotBook pilots = build_pilot_book(config.frame, planted.drop);
    const ChannelRealization realization = sample_channels(config.frame, planted.drop, pilots, rec.channel_seed);
    DetectorOptions options;
    options.evaluation = config.evaluation;
    options.symbol_error_rate = config.symbol_error_rate;
    options.symbol_error_seed = derive_seed(error_base, 0, t);
    options.assumed_out_of_cell_power = config.assumed_out_of_cell_power;
    options.assumed_out_of_coop_power = config.assumed_out_of_coop_power;
    for (Scheme s : schemes) {
      rec.detector[s] = run_frame(planted.drop, config.frame, realization, s, options).records;
      auto& lemma = rec.lemma[s];
      for (std::size_t b = 1; b <= config.frame.num_blocks(); ++b) {
        lemma.push_back(asymptotic_sinr(planted.drop, config.frame, b, s));
      }
    }
    return rec;
  });
}

AnalyticPoint analyze_point(const ExperimentConfig& config, double target_distance, std::size_t block,
                            Scheme scheme, VarianceForm form) {
  const NetworkLayout layout = config.layout();
  const DensityMap density = config.density();
  const RegionSpec region = block_region(layout, config.frame, block, scheme, config.quadrature);
  AnalyticPoint out;
  out.effective_length = config.frame.effective_length(block, scheme);
  out.stats = interference_stats(planted_rho(config, target_distance), density, region, config.frame, block,
                                 out.effective_length, form);
  out.set_size = expected_set_size(density, region);
  out.degenerate = !(out.stats.mean > 0.0);
  out.variance_valid = out.stats.variance > 0.0;
  return out;
}

void write_bundle(const ResultBundle& bundle, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  for (const auto& [name, contents] : bundle.files) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + name + " in " + directory);
    out << contents;
  }
  std::ofstream out(fs::path(directory) / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest.json in " + directory);
  out << bundle.manifest.dump(2) << '\n';
}

ResultBundle cmd_simulate(const ExperimentConfig& config) {
  ResultBundle bundle;
  bundle.manifest = base_manifest(config, "simulate");
  const std::string hash = config_hash(config);
  const auto grid = config.cdf_grid_db();
  std::ostringstream records;
  std::ostringstream cdf;
  records << "config_hash,target_distance_m,trial,channel_seed,scheme,block,mode,sinr_db,signal_db,intra_db,"
             "estimation_error_db,inter_db,noise_db,capped,lemma_sinr_db\n";
  cdf << "config_hash,target_distance_m,scheme,source,block,threshold_db,probability\n";
  std::size_t resamples = 0;
  std::size_t draws = 0;
  for (std::size_t d = 0; d < config.target_distances.size(); ++d) {
    const double r = config.target_distances[d];
    const auto trials = simulate_trials(config, r, d);
    for (const auto& t : trials) {
      resamples += t.resamples;
      draws += t.resamples + 1;
      for (const auto& [scheme, recs] : t.detector) {
        const auto& lemma = t.lemma.at(scheme);
        for (const auto& rec : recs) {
          records << hash << ',' << distance_tag(r) << ',' << t.trial << ',' << t.channel_seed << ','
                  << scheme_name(scheme) << ',' << rec.block << ',' << mode_name(rec.mode) << ','
                  << db_text(rec.sinr) << ',' << db_text(rec.signal) << ',' << db_text(rec.terms.intra) << ','
                  << db_text(rec.terms.estimation_error) << ',' << db_text(rec.terms.inter) << ','
                  << db_text(rec.terms.noise) << ',' << (rec.capped ? 1 : 0) << ','
                  << db_text(lemma.at(rec.block - 1).sinr) << '\n';
        }
      }
    }
    for (Scheme s : config.schemes()) {
      for (std::size_t b : config.blocks) {
        std::vector<double> detector_db;
        std::vector<double> lemma_db;
        for (const auto& t : trials) {
          detector_db.push_back(to_db(t.detector.at(s).at(b - 1).sinr));
          lemma_db.push_back(to_db(t.lemma.at(s).at(b - 1).sinr));
        }
        for (const auto& [source, samples] : {std::pair{"detector", &detector_db}, std::pair{"lemma1", &lemma_db}}) {
          for (const auto& p : empirical_cdf(*samples, grid)) {
            cdf << hash << ',' << distance_tag(r) << ',' << scheme_name(s) << ',' << source << ',' << b << ','
                << format_double(p.threshold_db) << ',' << format_double(p.probability) << '\n';
          }
        }
      }
    }
  }
  const double rate = static_cast<double>(resamples) / static_cast<double>(draws);
  if (rate > 0.01) std::cerr << "warning: " << resamples << " of " << draws << " drops overflowed a cell\n";
  bundle.files["sinr_records.csv"] = records.str();
  bundle.files["empirical_cdf.csv"] = cdf.str();
  bundle.manifest["drop_resamples"] = resamples;
  bundle.manifest["drop_draws"] = draws;
  finish_manifest(bundle);
  return bundle;
}

ResultBundle cmd_analyze(const ExperimentConfig& config) {
  ResultBundle bundle;
  bundle.manifest = base_manifest(config, "analyze");
  const std::string hash = config_hash(config);
  const auto grid = config.cdf_grid_db();
  std::ostringstream stats;
  std::ostringstream cdf;
  stats << "config_hash,target_distance_m,scheme,block,variance_form,mean,variance,set_size,effective_length,"
           "tail_bound,degenerate,variance_valid\n";
  cdf << "config_hash,target_distance_m,scheme,block,variance_form,threshold_db,probability\n";
  std::size_t degenerate = 0;
  std::size_t invalid = 0;
  for (double r : config.target_distances) {
    for (Scheme s : config.schemes()) {
      for (std::size_t b : config.blocks) {
        for (VarianceForm form : config.variance_forms) {
          const AnalyticPoint p = analyze_point(config, r, b, s, form);
          degenerate += p.degenerate ? 1 : 0;
          invalid += !p.degenerate && !p.variance_valid ? 1 : 0;
          stats << hash << ',' << distance_tag(r) << ',' << scheme_name(s) << ',' << b << ',' << to_string(form)
                << ',' << format_double(p.stats.mean) << ',' << format_double(p.stats.variance) << ','
                << format_double(p.set_size) << ',' << p.effective_length << ','
                << format_double(p.stats.tail_bound) << ',' << (p.degenerate ? 1 : 0) << ','
                << (p.variance_valid ? 1 : 0) << '\n';
          for (double t : grid) {
            // No interference mass: the SINR is infinite and never below t.
            // A non-positive variance leaves the CDF undefined.
            double prob = 0.0;
            if (!p.degenerate) {
              prob = p.variance_valid ? sinr_cdf(from_db(t), p.stats, p.set_size, p.effective_length) : std::nan("");
            }
            cdf << hash << ',' << distance_tag(r) << ',' << scheme_name(s) << ',' << b << ',' << to_string(form)
                << ',' << format_double(t) << ',' << format_double(prob) << '\n';
          }
        }
      }
    }
  }
  if (degenerate > 0) std::cerr << "warning: " << degenerate << " analytic point(s) have no interference\n";
  if (invalid > 0) std::cerr << "warning: " << invalid << " analytic point(s) have a non-positive variance\n";
  bundle.files["analytic_stats.csv"] = stats.str();
  bundle.files["analytic_cdf.csv"] = cdf.str();
  bundle.manifest["degenerate_points"] = degenerate;
  bundle.manifest["invalid_variance_points"] = invalid;
  finish_manifest(bundle);
  return bundle;
}

namespace {

Scheme primary_scheme(const ExperimentConfig& config) { return config.schemes().front(); }

CampaignResult learn_at(const ExperimentConfig& config, double distance, std::size_t index) {
  const DropSource source = make_drop_source(config, distance, index, stream::kLearn);
  CampaignConfig campaign;
  campaign.frame = config.frame;
  campaign.scheme = primary_scheme(config);
  campaign.blocks = config.blocks;
  campaign.iterations = config.learn_iterations;
  campaign.model = config.observation;
  campaign.seed = derive_seed(config.seed, stream::kLearn, 1000 + index);
  return run_learning_campaign(source, campaign);
}

}  // namespace

ResultBundle cmd_learn(const ExperimentConfig& config) {
  ResultBundle bundle;
  bundle.manifest = base_manifest(config, "learn");
  const std::string hash = config_hash(config);
  const Scheme scheme = primary_scheme(config);
  std::ostringstream summary;
  summary << "config_hash,target_distance_m,scheme,block,n,learned_mean,learned_variance,analytic_mean,"
             "analytic_variance\n";
  std::size_t resamples = 0;
  for (std::size_t d = 0; d < config.target_distances.size(); ++d) {
    const double r = config.target_distances[d];
    const CampaignResult result = learn_at(config, r, d);
    resamples += result.resamples;
    bundle.files["learning_trace_r" + distance_tag(r) + ".csv"] = trace_csv(result.trace, hash);
    for (const auto& learner : result.learners) {
      const AnalyticPoint ref = analyze_point(config, r, learner.block, scheme, VarianceForm::campbell);
      summary << hash << ',' << distance_tag(r) << ',' << scheme_name(scheme) << ',' << learner.block << ','
              << learner.count << ',' << format_double(learner.mean) << ','
              << (learner.variance ? format_double(*learner.variance) : std::string()) << ','
              << format_double(ref.stats.mean) << ',' << format_double(ref.stats.variance) << '\n';
    }
  }
  bundle.files["learned_stats.csv"] = summary.str();
  bundle.manifest["drop_resamples"] = resamples;
  finish_manifest(bundle);
  return bundle;
}

ResultBundle cmd_adapt(const ExperimentConfig& config) {
  ResultBundle bundle;
  bundle.manifest = base_manifest(config, "adapt");
  const std::string hash = config_hash(config);
  const Scheme scheme = primary_scheme(config);
  std::ostringstream plan;
  plan << "config_hash,target_distance_m,scheme,block,stats_source,epsilon,mean,variance,set_size,"
          "effective_length,threshold_db,rate_bps_hz,empirical_outage\n";
  for (std::size_t d = 0; d < config.target_distances.size(); ++d) {
    const double r = config.target_distances[d];
    std::vector<RateEntry> entries;
    std::vector<SinrStats> used;
    std::vector<double> set_sizes;
    std::vector<std::size_t> lengths;
    std::optional<CampaignResult> learned;
    if (config.adapt_stats == StatsSource::learned) learned = learn_at(config, r, d);
    for (std::size_t k = 0; k < config.blocks.size(); ++k) {
      const std::size_t b = config.blocks[k];
      const AnalyticPoint ref = analyze_point(config, r, b, scheme, config.variance_forms.front());
      SinrStats stats = ref.stats;
      double set_size = ref.set_size;
      if (learned) {
        stats = learned->stats[k];
        set_size = (learned->learners[k].mean_normalization - 1.0) * static_cast<double>(ref.effective_length);
      }
      entries.push_back(rate_threshold(stats, config.epsilon, set_size, ref.effective_length));
      used.push_back(stats);
      set_sizes.push_back(set_size);
      lengths.push_back(ref.effective_length);
    }
    std::vector<double> outage(entries.size(), std::nan(""));
    if (config.validate) {
      const DropSource source = make_drop_source(config, r, d, stream::kValidate);
      const auto below = parallel_map(config.validate_drops, config.threads, [&](std::size_t t) {
        const PlantedDrop planted = source.draw(t);
        std::vector<int> hit;
        for (std::size_t k = 0; k < entries.size(); ++k) {
          const LemmaSinr l = asymptotic_sinr(planted.drop, config.frame, config.blocks[k], scheme);
          hit.push_back(!l.infinite && l.sinr < entries[k].threshold ? 1 : 0);
        }
        return hit;
      });
      for (std::size_t k = 0; k < entries.size(); ++k) {
        double count = 0.0;
        for (const auto& h : below) count += h[k];
        outage[k] = count / static_cast<double>(below.size());
      }
    }
    for (std::size_t k = 0; k < entries.size(); ++k) {
      plan << hash << ',' << distance_tag(r) << ',' << scheme_name(scheme) << ',' << entries[k].block << ','
           << (config.adapt_stats == StatsSource::learned ? "learned" : "analytic") << ','
           << format_double(entries[k].epsilon) << ',' << format_double(used[k].mean) << ','
           << format_double(used[k].variance) << ',' << format_double(set_sizes[k]) << ',' << lengths[k] << ','
           << db_text(entries[k].threshold) << ',' << format_double(entries[k].rate) << ','
           << (config.validate ? format_double(outage[k]) : std::string()) << '\n';
    }
  }
  bundle.files["rate_plan.csv"] = plan.str();
  finish_manifest(bundle);
  return bundle;
}

ResultBundle cmd_extrapolate(const ExperimentConfig& config) {
  if (config.triple_path.empty()) throw ConfigError("extrapolate needs a triple file (key 'triple')");
  std::ifstream in(config.triple_path);
  if (!in) throw ConfigError("cannot read triple file " + config.triple_path);
  UserStatsTriple triple;
  try {
    triple = nlohmann::json::parse(in).get<UserStatsTriple>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad triple file: ") + e.what());
  }
  if (triple.block == 0) triple.block = config.blocks.front();
  if (triple.block > config.frame.num_blocks()) throw ConfigError("triple block out of range");
  const Scheme scheme = primary_scheme(config);
  const std::size_t length = config.frame.effective_length(triple.block, scheme);
  const double rho = config.target_rho ? *config.target_rho : planted_rho(config, config.target_distances.front());
  const Extrapolation e = extrapolate_stats(triple, rho, config.frame, length);

  ResultBundle bundle;
  bundle.manifest = base_manifest(config, "extrapolate");
  const std::string hash = config_hash(config);
  nlohmann::json j;
  j["config_hash"] = hash;
  j["triple"] = triple;
  j["result"] = e;
  bundle.files["extrapolation.json"] = j.dump(2) + "\n";
  std::ostringstream table;
  table << "config_hash,cell,block,target_rho,mean,variance,provenance,mean_condition,variance_condition\n";
  table << hash << ',' << triple.cell << ',' << e.stats.block << ',' << format_double(rho) << ','
        << format_double(e.stats.mean) << ',' << format_double(e.stats.variance) << ','
        << to_string(e.stats.provenance) << ',' << format_double(e.mean_condition) << ','
        << format_double(e.variance_condition) << '\n';
  bundle.files["extrapolated_stats.csv"] = table.str();
  finish_manifest(bundle);
  return bundle;
}

}  // namespace coopmimo
