#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coordnet/association.hpp"
#include "coordnet/corpus.hpp"
#include "coordnet/hdbscan.hpp"
#include "coordnet/latent.hpp"
#include "coordnet/network.hpp"

namespace coordnet {

inline constexpr std::string_view kVersion = "0.1.0";

struct PipelineConfig {
  std::string input;
  EventFormat format = EventFormat::csv;
  FilterConfig filter;
  int k = 3;
  double phi_threshold = 0.67;
  int sweep_points = 100;
  int hist_bins = 50;
  int smoothing_window = 5;
  double alpha = 1e-4;  // significance level for the Bonferroni critical phi
  int latent_rank = 3;
  ScoreScaling score_scaling = ScoreScaling::singular_value;
  double svd_tol = 1e-8;
  int svd_max_iterations = 1000;
  ClusterParams cluster;
  std::string output_dir = "coordnet-out";
  std::uint64_t seed = 0;

  void validate() const;

  /// Assigns one key from its textual value; unknown keys are a ConfigError.
  void set(std::string_view key, std::string_view value);

  /// Canonical `key = value` text, one line per key in a fixed order.
  std::string to_kv() const;
  static PipelineConfig from_kv(std::string_view text);
  static PipelineConfig from_file(const std::string& path);

  static const std::vector<std::string>& keys();
  nlohmann::json to_json() const;
};

struct ClusterSummaryRow {
  int label = -1;
  std::size_t size = 0;
  std::size_t candidates = 0;
};

struct CandidateSummary {
  std::vector<ClusterSummaryRow> clusters;  // ascending label
  ClusterSummaryRow noise;                  // label -1
};

/// Per-cluster sizes and candidate counts, with noise reported separately.
CandidateSummary summarize_candidates(const ClusterAssignment& labels, const std::vector<Index>& candidates);

struct RunReport {
  std::size_t n_users = 0;
  std::size_t n_tweets = 0;
  std::size_t n_entries = 0;
  std::size_t n_edges = 0;
  std::size_t n_defined_phi = 0;
  double critical_phi = 0.0;
  std::optional<double> valley;
  CandidateSummary summary;
  std::vector<std::pair<std::string, int>> candidates;  // user token, cluster label
  std::vector<SweepPoint> sweep;
  std::vector<HistogramBin> histogram;
  std::vector<ScreeRow> scree;
  PipelineConfig config;
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds

  /// Everything except timings, so identical runs serialize identically.
  nlohmann::json to_json() const;
  nlohmann::json timings_json() const;
};

/// Every intermediate artifact of a run, kept for callers that need more than
/// the report.
struct PipelineResult {
  ShareCorpus corpus;
  NeighborGraph graph;
  LatentSpace<double> latent;
  PointMatrix normalized_scores;
  ClusterAssignment clusters;
  std::vector<Index> candidates;
  RunReport report;
};

/// A stage failure; keeps the exit code of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(stage + ": " + cause.what()), stage_(std::move(stage)), code_(cause.exit_code()) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const override { return code_; }

 private:
  std::string stage_;
  int code_;
};

/// Runs every stage in memory on already-parsed events.
PipelineResult execute_pipeline(const PipelineConfig& cfg, const std::vector<ShareEvent>& events);

/// Reads cfg.input, runs all stages and writes every artifact to
/// cfg.output_dir. On failure an INCOMPLETE marker replaces report.json.
RunReport run_pipeline(const PipelineConfig& cfg);

void write_outputs(const PipelineResult& result, const std::string& dir);

// Table writers shared by the CLI subcommands.
void write_edges_tsv(std::ostream& out, const NeighborGraph& g, const TokenIndex& users);
void write_sweep_tsv(std::ostream& out, const std::vector<SweepPoint>& sweep);
void write_hist_tsv(std::ostream& out, const std::vector<HistogramBin>& hist);
void write_scree_tsv(std::ostream& out, const std::vector<ScreeRow>& rows);
void write_scores_tsv(std::ostream& out, const TokenIndex& index, const Mat& scores);
void write_clusters_tsv(std::ostream& out, const TokenIndex& users, const ClusterAssignment& a);
void write_candidates_tsv(std::ostream& out, const NeighborGraph& g, const TokenIndex& users,
                          const std::vector<Index>& candidates, const ClusterAssignment* labels);

/// GraphML with node attributes (label, cluster, is_candidate, max_phi,
/// degree) and edge attributes (cosine, phi). Undefined phi values are left
/// out rather than encoded.
void export_graphml(std::ostream& out, const NeighborGraph& g, const TokenIndex& users,
                    const ClusterAssignment& labels, const std::vector<Index>& candidates);
void export_graphml(const std::string& path, const NeighborGraph& g, const TokenIndex& users,
                    const ClusterAssignment& labels, const std::vector<Index>& candidates);

std::string format_real(double x);

}  // namespace coordnet
