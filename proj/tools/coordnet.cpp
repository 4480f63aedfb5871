// coordnet: coordination-candidate detection for share (retweet) networks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "coordnet/pipeline.hpp"
#include "coordnet/plot.hpp"
#include "coordnet/synth.hpp"
#include "coordnet/tsv.hpp"

namespace fs = std::filesystem;
using namespace coordnet;

namespace {

// Flags shared by every data-processing subcommand: --config plus one flag
// per config key, applied on top of the file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--threads", threads, "maximum worker threads")->check(CLI::PositiveNumber);
    for (const auto& key : PipelineConfig::keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (key == "input") flag = "-i,--input";
      if (key == "output_dir") flag = "-o,--output-dir";
      app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; },
                                            "override config key " + key);
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config_file.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_file);
    for (const auto& [k, v] : values) cfg.set(k, v);
    set_thread_count(threads);
    return cfg;
  }
};

struct Loaded {
  ShareCorpus corpus;
  NeighborGraph graph;
};

Loaded load_scored(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("no input file (use --input or set input in the config)");
  cfg.validate();
  Loaded l;
  l.corpus = build_corpus(read_events_file(cfg.input, cfg.format), cfg.filter);
  l.graph = score_graph(knn_graph(l.corpus.incidence, cfg.k), l.corpus.incidence);
  return l;
}

// Writes to the named file, or stdout for "" / "-".
template <typename F>
void emit(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  const auto parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  body(out);
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

ClusterAssignment labels_from_file(const std::string& path, const TokenIndex& users) {
  ClusterAssignment a;
  a.labels.assign(users.size(), -1);
  a.membership_strength.assign(users.size(), 0.0);
  if (path.empty()) return a;
  const Table t = read_tsv_file(path);
  const auto user_col = t.column("user");
  const auto label = t.numeric("label");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto u = users.find(t.rows[r][user_col]);
    if (!u) continue;
    a.labels[*u] = static_cast<int>(label[r]);
    a.n_clusters = std::max(a.n_clusters, a.labels[*u] + 1);
  }
  return a;
}

CoordGroupSpec parse_group(const std::string& text) {
  CoordGroupSpec g;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(text);
  if (!(in >> g.group_size >> sep1 >> g.shared_pool >> sep2 >> g.overlap_rate) || sep1 != ':' || sep2 != ':')
    throw ConfigError("group spec '" + text + "' must look like SIZE:POOL:OVERLAP");
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordnet: coordination candidates in retweet networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  ConfigFlags flags;

  auto* run = app.add_subcommand("run", "full pipeline; writes every artifact to the output directory");
  flags.attach(run);

  auto* corpus = app.add_subcommand("corpus", "corpus statistics after filtering");
  std::string corpus_action;
  corpus->add_option("action", corpus_action, "stats")->required()->check(CLI::IsMember({"stats"}));
  flags.attach(corpus);

  std::string out_path;
  auto* assoc = app.add_subcommand("assoc", "scored k-NN edge list (TSV)");
  flags.attach(assoc);
  assoc->add_option("--output", out_path, "output file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "fragmentation sweep over phi thresholds (TSV)");
  flags.attach(sweep);
  sweep->add_option("--output", out_path, "output file (default stdout)");

  auto* hist = app.add_subcommand("hist", "phi histogram (TSV); valley and critical phi go to stderr");
  flags.attach(hist);
  hist->add_option("--output", out_path, "output file (default stdout)");

  auto* latent = app.add_subcommand("latent", "truncated SVD of the centered matrix");
  flags.attach(latent);

  std::string scores_path;
  bool no_normalize = false;
  auto* clus = app.add_subcommand("cluster", "density clustering of latent scores (TSV)");
  flags.attach(clus);
  clus->add_option("--scores", scores_path, "score TSV from `latent`")->required()->check(CLI::ExistingFile);
  clus->add_flag("--no-normalize", no_normalize, "skip row-wise L2 normalization");
  clus->add_option("--output", out_path, "output file (default stdout)");

  std::string clusters_path;
  bool summary = false;
  auto* cands = app.add_subcommand("candidates", "coordination candidates (TSV)");
  flags.attach(cands);
  cands->add_option("--clusters", clusters_path, "cluster TSV to label candidates")->check(CLI::ExistingFile);
  cands->add_flag("--summary", summary, "print per-cluster candidate counts as JSON instead");
  cands->add_option("--output", out_path, "output file (default stdout)");

  std::string graphml_path;
  auto* exp = app.add_subcommand("export", "GraphML export of the scored k-NN graph");
  flags.attach(exp);
  exp->add_option("--clusters", clusters_path, "cluster TSV for node labels")->check(CLI::ExistingFile);
  exp->add_option("--graphml", graphml_path, "output GraphML path")->required();

  SynthConfig synth_cfg;
  std::vector<std::string> groups;
  std::string events_path = "events.csv", truth_path = "truth.json";
  auto* syn = app.add_subcommand("synth", "synthetic corpus with planted coordinated groups");
  syn->add_option("--organic-users", synth_cfg.n_organic_users);
  syn->add_option("--organic-clusters", synth_cfg.n_organic_clusters);
  syn->add_option("--tweets", synth_cfg.n_tweets);
  syn->add_option("--group", groups, "SIZE:POOL:OVERLAP, repeatable");
  syn->add_option("--activity", synth_cfg.organic_activity, "mean shares per organic user");
  syn->add_option("--noise", synth_cfg.noise_rate);
  syn->add_option("--zipf", synth_cfg.zipf_exponent);
  syn->add_option("--seed", synth_cfg.seed);
  syn->add_option("--events", events_path, "CSV event output");
  syn->add_option("--truth", truth_path, "ground-truth JSON output");

  std::string table_path, x_col, y_col, group_col, kind = "line", title;
  auto* plot = app.add_subcommand("plot", "SVG chart from a TSV table");
  plot->add_option("--table", table_path)->required()->check(CLI::ExistingFile);
  plot->add_option("--x", x_col, "x column (line/scatter) or label column (bar)")->required();
  plot->add_option("--y", y_col, "y column")->required();
  plot->add_option("--group", group_col, "integer colour column (scatter)");
  plot->add_option("--kind", kind)->check(CLI::IsMember({"line", "bar", "scatter"}));
  plot->add_option("--title", title);
  plot->add_option("--output", out_path, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      const auto cfg = flags.resolve();
      if (cfg.input.empty()) throw ConfigError("no input file (use --input or set input in the config)");
      const auto report = run_pipeline(cfg);
      std::cerr << "wrote " << cfg.output_dir << ": " << report.n_users << " users, " << report.summary.clusters.size()
                << " clusters, " << report.candidates.size() << " candidates\n";
    } else if (corpus->parsed()) {
      const auto cfg = flags.resolve();
      if (cfg.input.empty()) throw ConfigError("no input file");
      const auto c = build_corpus(read_events_file(cfg.input, cfg.format), cfg.filter);
      nlohmann::json j{{"n_users", c.n_users()}, {"n_tweets", c.n_tweets()}, {"n_entries", c.n_entries()}};
      std::cout << j.dump() << '\n';
    } else if (assoc->parsed()) {
      const auto l = load_scored(flags.resolve());
      emit(out_path, [&](std::ostream& o) { write_edges_tsv(o, l.graph, l.corpus.users); });
    } else if (sweep->parsed()) {
      const auto cfg = flags.resolve();
      const auto l = load_scored(cfg);
      const auto points = threshold_sweep(l.graph, cfg.sweep_points);
      if (points.empty()) std::cerr << "warning: no edge has a defined phi; sweep is empty\n";
      emit(out_path, [&](std::ostream& o) { write_sweep_tsv(o, points); });
    } else if (hist->parsed()) {
      const auto cfg = flags.resolve();
      const auto l = load_scored(cfg);
      const auto h = phi_histogram(l.graph, cfg.hist_bins);
      std::size_t defined = 0;
      for (const auto& e : l.graph.edges) defined += e.phi.defined();
      const auto valley = find_valley(h, cfg.smoothing_window);
      std::cerr << "defined_phi_edges=" << defined << " critical_phi="
                << format_real(critical_phi(cfg.alpha, std::max<long long>(1, static_cast<long long>(defined)),
                                            static_cast<long long>(l.corpus.n_tweets())))
                << " valley=" << (valley ? format_real(*valley) : "none") << '\n';
      emit(out_path, [&](std::ostream& o) { write_hist_tsv(o, h); });
    } else if (latent->parsed()) {
      const auto cfg = flags.resolve();
      if (cfg.input.empty()) throw ConfigError("no input file");
      cfg.validate();
      const auto c = build_corpus(read_events_file(cfg.input, cfg.format), cfg.filter);
      SvdOptions opt;
      opt.rank = cfg.latent_rank;
      opt.seed = cfg.seed;
      opt.tol = cfg.svd_tol;
      opt.max_iterations = cfg.svd_max_iterations;
      opt.scaling = cfg.score_scaling;
      const auto ls = truncated_svd(CenteredOperator<double>(c.incidence), opt);
      fs::create_directories(cfg.output_dir);
      const fs::path dir(cfg.output_dir);
      emit((dir / "singular_values.tsv").string(), [&](std::ostream& o) { write_scree_tsv(o, scree(ls)); });
      emit((dir / "scores.tsv").string(), [&](std::ostream& o) { write_scores_tsv(o, c.users, ls.user_scores); });
      emit((dir / "tweet_loadings.tsv").string(),
           [&](std::ostream& o) { write_scores_tsv(o, c.tweets, ls.tweet_loadings); });
    } else if (clus->parsed()) {
      const auto cfg = flags.resolve();
      const Table t = read_tsv_file(scores_path);
      if (t.header.size() < 2) throw DataError("score table needs an id column and at least one dimension");
      PointMatrix pts(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size() - 1));
      for (std::size_t c = 1; c < t.header.size(); ++c) {
        const auto col = t.numeric(t.header[c]);
        for (std::size_t r = 0; r < col.size(); ++r) pts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = col[r];
      }
      if (!no_normalize) pts = l2_normalize_rows(pts).rows;
      const auto a = cluster(pts, cfg.cluster);
      std::vector<std::string> ids;
      for (const auto& row : t.rows) ids.push_back(row[0]);
      emit(out_path, [&](std::ostream& o) {
        o << "user\tlabel\tstrength\n";
        for (std::size_t i = 0; i < ids.size(); ++i)
          o << ids[i] << '\t' << a.labels[i] << '\t' << format_real(a.membership_strength[i]) << '\n';
      });
    } else if (cands->parsed()) {
      const auto cfg = flags.resolve();
      const auto l = load_scored(cfg);
      const auto members = extract_candidates(l.graph, cfg.phi_threshold);
      const auto labels = labels_from_file(clusters_path, l.corpus.users);
      if (summary) {
        const auto s = summarize_candidates(labels, members);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : s.clusters) j.push_back({{"label", r.label}, {"size", r.size}, {"candidates", r.candidates}});
        j.push_back({{"label", -1}, {"size", s.noise.size}, {"candidates", s.noise.candidates}});
        emit(out_path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
      } else {
        emit(out_path, [&](std::ostream& o) {
          write_candidates_tsv(o, l.graph, l.corpus.users, members, clusters_path.empty() ? nullptr : &labels);
        });
      }
    } else if (exp->parsed()) {
      const auto cfg = flags.resolve();
      const auto l = load_scored(cfg);
      export_graphml(graphml_path, l.graph, l.corpus.users, labels_from_file(clusters_path, l.corpus.users),
                     extract_candidates(l.graph, cfg.phi_threshold));
    } else if (syn->parsed()) {
      for (const auto& g : groups) synth_cfg.coord_groups.push_back(parse_group(g));
      const auto s = generate(synth_cfg);
      emit(events_path, [&](std::ostream& o) { write_events_csv(o, s.events); });
      emit(truth_path, [&](std::ostream& o) { o << s.truth.to_json().dump(2) << '\n'; });
    } else if (plot->parsed()) {
      const Table t = read_tsv_file(table_path);
      const Axes axes{title, x_col, y_col};
      emit(out_path, [&](std::ostream& o) {
        if (kind == "line") {
          svg_line_chart(o, axes, t.numeric(x_col), t.numeric(y_col));
        } else if (kind == "scatter") {
          std::vector<int> g;
          if (!group_col.empty())
            for (double v : t.numeric(group_col)) g.push_back(static_cast<int>(v));
          svg_scatter(o, axes, t.numeric(x_col), t.numeric(y_col), g);
        } else {
          std::vector<std::string> labels;
          for (const auto& row : t.rows) labels.push_back(row[t.column(x_col)]);
          svg_bar_chart(o, axes, labels, t.numeric(y_col));
        }
      });
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
