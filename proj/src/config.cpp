#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "coordnet/pipeline.hpp"

namespace coordnet {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  return std::string(v);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string v = unquote(text);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': '" + v + "' is not a valid number");
  return out;
}

}  // namespace

std::string format_real(double x) { return fmt::format("{}", x); }

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k = {
      "input",          "format",           "min_user_activity", "min_tweet_audience", "filter_mode",
      "k",              "phi_threshold",    "sweep_points",      "hist_bins",          "smoothing_window",
      "alpha",          "latent_rank",      "score_scaling",     "svd_tol",            "svd_max_iterations",
      "min_cluster_size", "min_samples",    "cluster_selection", "output_dir",         "seed"};
  return k;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  if (key == "input") input = unquote(value);
  else if (key == "format") format = parse_event_format(unquote(value));
  else if (key == "min_user_activity") filter.min_user_activity = parse_number<int>(key, value);
  else if (key == "min_tweet_audience") filter.min_tweet_audience = parse_number<int>(key, value);
  else if (key == "filter_mode") filter.mode = parse_filter_mode(unquote(value));
  else if (key == "k") k = parse_number<int>(key, value);
  else if (key == "phi_threshold") phi_threshold = parse_number<double>(key, value);
  else if (key == "sweep_points") sweep_points = parse_number<int>(key, value);
  else if (key == "hist_bins") hist_bins = parse_number<int>(key, value);
  else if (key == "smoothing_window") smoothing_window = parse_number<int>(key, value);
  else if (key == "alpha") alpha = parse_number<double>(key, value);
  else if (key == "latent_rank") latent_rank = parse_number<int>(key, value);
  else if (key == "score_scaling") {
    const std::string v = unquote(value);
    if (v == "singular_value") score_scaling = ScoreScaling::singular_value;
    else if (v == "none") score_scaling = ScoreScaling::none;
    else throw ConfigError("score_scaling must be singular_value or none");
  }
  else if (key == "svd_tol") svd_tol = parse_number<double>(key, value);
  else if (key == "svd_max_iterations") svd_max_iterations = parse_number<int>(key, value);
  else if (key == "min_cluster_size") cluster.min_cluster_size = parse_number<int>(key, value);
  else if (key == "min_samples") cluster.min_samples = parse_number<int>(key, value);
  else if (key == "cluster_selection") cluster.selection = parse_cluster_selection(unquote(value));
  else if (key == "output_dir") output_dir = unquote(value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::validate() const {
  filter.validate();
  cluster.validate();
  if (k < 1) throw ConfigError("k must be positive");
  if (!(phi_threshold >= 0.0 && phi_threshold <= 1.0)) throw ConfigError("phi_threshold must lie in [0, 1]");
  if (sweep_points < 1) throw ConfigError("sweep_points must be positive");
  if (hist_bins < 1) throw ConfigError("hist_bins must be positive");
  if (smoothing_window < 1 || smoothing_window % 2 == 0)
    throw ConfigError("smoothing_window must be a positive odd integer");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (latent_rank < 1) throw ConfigError("latent_rank must be positive");
  if (!(svd_tol > 0.0)) throw ConfigError("svd_tol must be positive");
  if (svd_max_iterations < 1) throw ConfigError("svd_max_iterations must be positive");
}

std::string PipelineConfig::to_kv() const {
  std::string out;
  auto line = [&](const char* key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
  line("input", quote(input));
  line("format", quote(std::string(to_string(format))));
  line("min_user_activity", std::to_string(filter.min_user_activity));
  line("min_tweet_audience", std::to_string(filter.min_tweet_audience));
  line("filter_mode", quote(std::string(to_string(filter.mode))));
  line("k", std::to_string(k));
  line("phi_threshold", format_real(phi_threshold));
  line("sweep_points", std::to_string(sweep_points));
  line("hist_bins", std::to_string(hist_bins));
  line("smoothing_window", std::to_string(smoothing_window));
  line("alpha", format_real(alpha));
  line("latent_rank", std::to_string(latent_rank));
  line("score_scaling", quote(score_scaling == ScoreScaling::singular_value ? "singular_value" : "none"));
  line("svd_tol", format_real(svd_tol));
  line("svd_max_iterations", std::to_string(svd_max_iterations));
  line("min_cluster_size", std::to_string(cluster.min_cluster_size));
  line("min_samples", std::to_string(cluster.min_samples));
  line("cluster_selection", quote(std::string(to_string(cluster.selection))));
  line("output_dir", quote(output_dir));
  line("seed", std::to_string(seed));
  return out;
}

PipelineConfig PipelineConfig::from_kv(std::string_view text) {
  PipelineConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    // Trailing comments are allowed after unquoted values.
    std::string_view value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() != '"') value = trim(value.substr(0, value.find('#')));
    cfg.set(trim(line.substr(0, eq)), value);
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_kv(ss.str());
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["input"] = input;
  j["format"] = std::string(to_string(format));
  j["min_user_activity"] = filter.min_user_activity;
  j["min_tweet_audience"] = filter.min_tweet_audience;
  j["filter_mode"] = std::string(to_string(filter.mode));
  j["k"] = k;
  j["phi_threshold"] = phi_threshold;
  j["sweep_points"] = sweep_points;
  j["hist_bins"] = hist_bins;
  j["smoothing_window"] = smoothing_window;
  j["alpha"] = alpha;
  j["latent_rank"] = latent_rank;
  j["score_scaling"] = score_scaling == ScoreScaling::singular_value ? "singular_value" : "none";
  j["svd_tol"] = svd_tol;
  j["svd_max_iterations"] = svd_max_iterations;
  j["min_cluster_size"] = cluster.min_cluster_size;
  j["min_samples"] = cluster.effective_min_samples();
  j["cluster_selection"] = std::string(to_string(cluster.selection));
  j["seed"] = seed;
  return j;
}

}  // namespace coordnet
