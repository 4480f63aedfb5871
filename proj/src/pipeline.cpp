#include "coordnet/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "coordnet/plot.hpp"

namespace coordnet {

namespace fs = std::filesystem;

CandidateSummary summarize_candidates(const ClusterAssignment& labels, const std::vector<Index>& candidates) {
  CandidateSummary s;
  s.clusters.resize(static_cast<std::size_t>(labels.n_clusters));
  for (int l = 0; l < labels.n_clusters; ++l) s.clusters[l].label = l;
  s.noise.label = -1;
  auto row = [&](Index user) -> ClusterSummaryRow& {
    const int l = labels.labels.at(user);
    return l < 0 ? s.noise : s.clusters[static_cast<std::size_t>(l)];
  };
  for (Index u = 0; u < labels.labels.size(); ++u) ++row(u).size;
  for (Index u : candidates) ++row(u).candidates;
  return s;
}

namespace {

nlohmann::json summary_row(const ClusterSummaryRow& r) {
  return {{"label", r.label}, {"size", r.size}, {"candidates", r.candidates}};
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["config"] = config.to_json();
  j["corpus"] = {{"n_users", n_users}, {"n_tweets", n_tweets}, {"n_entries", n_entries}};
  j["graph"] = {{"n_edges", n_edges}, {"n_defined_phi", n_defined_phi}, {"critical_phi", critical_phi},
                {"valley", optional_number(valley)}};
  j["clusters"] = nlohmann::json::array();
  for (const auto& r : summary.clusters) j["clusters"].push_back(summary_row(r));
  j["noise"] = summary_row(summary.noise);
  std::size_t total = summary.noise.candidates;
  for (const auto& r : summary.clusters) total += r.candidates;
  j["n_candidates"] = total;
  j["candidates"] = nlohmann::json::array();
  for (const auto& [user, label] : candidates) j["candidates"].push_back({{"user", user}, {"label", label}});
  j["sweep"] = nlohmann::json::array();
  for (const auto& p : sweep)
    j["sweep"].push_back({{"threshold", p.threshold},
                          {"n_edges", p.n_edges},
                          {"n_lcc_edges", p.n_lcc_edges},
                          {"log_ratio", optional_number(p.log_ratio)},
                          {"n_components", p.n_components}});
  j["histogram"] = nlohmann::json::array();
  for (const auto& b : histogram) j["histogram"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  j["scree"] = nlohmann::json::array();
  for (const auto& r : scree)
    j["scree"].push_back(
        {{"dimension", r.dimension}, {"singular_value", r.singular_value}, {"variance_fraction", r.variance_fraction}});
  return j;
}

nlohmann::json RunReport::timings_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [stage, seconds] : timings) j[stage] = seconds;
  return j;
}

namespace {

template <typename F>
auto stage(const char* name, RunReport& report, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      report.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    } else {
      auto out = body();
      report.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

}  // namespace

PipelineResult execute_pipeline(const PipelineConfig& cfg, const std::vector<ShareEvent>& events) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw StageError("config", e);
  }
  PipelineResult res;
  RunReport& rep = res.report;
  rep.config = cfg;

  res.corpus = stage("ingest", rep, [&] { return build_corpus(events, cfg.filter); });
  const auto& m = res.corpus.incidence;
  rep.n_users = res.corpus.n_users();
  rep.n_tweets = res.corpus.n_tweets();
  rep.n_entries = res.corpus.n_entries();

  res.graph = stage("knn", rep, [&] { return knn_graph(m, cfg.k); });
  res.graph = stage("association", rep, [&] { return score_graph(std::move(res.graph), m); });
  rep.n_edges = res.graph.edges.size();
  for (const auto& e : res.graph.edges) rep.n_defined_phi += e.phi.defined();

  stage("structure", rep, [&] {
    rep.critical_phi = critical_phi(cfg.alpha, static_cast<long long>(std::max<std::size_t>(1, rep.n_defined_phi)),
                                    static_cast<long long>(rep.n_tweets));
    rep.sweep = threshold_sweep(res.graph, cfg.sweep_points);
    rep.histogram = phi_histogram(res.graph, cfg.hist_bins);
    rep.valley = find_valley(rep.histogram, cfg.smoothing_window);
    res.candidates = extract_candidates(res.graph, cfg.phi_threshold);
  });

  stage("latent", rep, [&] {
    const CenteredOperator<double> op(m);
    SvdOptions opt;
    opt.rank = cfg.latent_rank;
    opt.seed = cfg.seed;
    opt.tol = cfg.svd_tol;
    opt.max_iterations = cfg.svd_max_iterations;
    opt.scaling = cfg.score_scaling;
    res.latent = truncated_svd(op, opt);
    rep.scree = scree(res.latent);
    res.normalized_scores = l2_normalize_rows(res.latent.user_scores).rows;
  });

  res.clusters = stage("cluster", rep, [&] { return cluster(res.normalized_scores, cfg.cluster); });

  rep.summary = summarize_candidates(res.clusters, res.candidates);
  for (Index u : res.candidates) rep.candidates.emplace_back(res.corpus.users.token(u), res.clusters.labels[u]);
  return res;
}

void write_edges_tsv(std::ostream& out, const NeighborGraph& g, const TokenIndex& users) {
  out << "user1\tuser2\tcosine\tphi\ta\tb\tc\td\n";
  for (const auto& e : g.edges) {
    out << users.token(e.u) << '\t' << users.token(e.v) << '\t' << format_real(e.cosine) << '\t'
        << (e.phi.value ? format_real(*e.phi.value) : "NA");
    if (e.table)
      out << fmt::format("\t{}\t{}\t{}\t{}\n", e.table->a, e.table->b, e.table->c, e.table->d);
    else
      out << "\tNA\tNA\tNA\tNA\n";
  }
}

void write_sweep_tsv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "threshold\tn_edges\tn_lcc_edges\tlog_ratio\tn_components\n";
  for (const auto& p : sweep)
    out << format_real(p.threshold) << '\t' << p.n_edges << '\t' << p.n_lcc_edges << '\t'
        << (p.log_ratio ? format_real(*p.log_ratio) : "NA") << '\t' << p.n_components << '\n';
}

void write_hist_tsv(std::ostream& out, const std::vector<HistogramBin>& hist) {
  out << "bin\tlo\thi\tcount\n";
  for (std::size_t i = 0; i < hist.size(); ++i)
    out << i << '\t' << format_real(hist[i].lo) << '\t' << format_real(hist[i].hi) << '\t' << hist[i].count << '\n';
}

void write_scree_tsv(std::ostream& out, const std::vector<ScreeRow>& rows) {
  out << "dimension\tsingular_value\tvariance_fraction\n";
  for (const auto& r : rows)
    out << r.dimension << '\t' << format_real(r.singular_value) << '\t' << format_real(r.variance_fraction) << '\n';
}

void write_scores_tsv(std::ostream& out, const TokenIndex& index, const Mat& scores) {
  out << "id";
  for (Eigen::Index c = 0; c < scores.cols(); ++c) out << "\tdim" << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    out << index.token(static_cast<Index>(r));
    for (Eigen::Index c = 0; c < scores.cols(); ++c) out << '\t' << format_real(scores(r, c));
    out << '\n';
  }
}

void write_clusters_tsv(std::ostream& out, const TokenIndex& users, const ClusterAssignment& a) {
  out << "user\tlabel\tstrength\n";
  for (Index u = 0; u < a.labels.size(); ++u)
    out << users.token(u) << '\t' << a.labels[u] << '\t' << format_real(a.membership_strength[u]) << '\n';
}

void write_candidates_tsv(std::ostream& out, const NeighborGraph& g, const TokenIndex& users,
                          const std::vector<Index>& candidates, const ClusterAssignment* labels) {
  const auto best = max_incident_phi(g);
  out << "user\tlabel\tmax_phi\n";
  for (Index u : candidates)
    out << users.token(u) << '\t' << (labels ? std::to_string(labels->labels.at(u)) : "NA") << '\t'
        << (best[u] ? format_real(*best[u]) : "NA") << '\n';
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void export_graphml(std::ostream& out, const NeighborGraph& g, const TokenIndex& users,
                    const ClusterAssignment& labels, const std::vector<Index>& candidates) {
  if (users.size() != g.n_nodes || labels.labels.size() != g.n_nodes)
    throw DataError("graph export: node sets of graph, users and cluster labels differ");
  std::vector<char> is_candidate(g.n_nodes, 0);
  for (Index u : candidates) is_candidate.at(u) = 1;
  const auto best = max_incident_phi(g);
  const auto degree = g.degrees();

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
         "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
         "  <key id=\"cluster\" for=\"node\" attr.name=\"cluster\" attr.type=\"int\"/>\n"
         "  <key id=\"is_candidate\" for=\"node\" attr.name=\"is_candidate\" attr.type=\"boolean\"/>\n"
         "  <key id=\"max_phi\" for=\"node\" attr.name=\"max_phi\" attr.type=\"double\"/>\n"
         "  <key id=\"degree\" for=\"node\" attr.name=\"degree\" attr.type=\"int\"/>\n"
         "  <key id=\"cosine\" for=\"edge\" attr.name=\"cosine\" attr.type=\"double\"/>\n"
         "  <key id=\"phi\" for=\"edge\" attr.name=\"phi\" attr.type=\"double\"/>\n"
         "  <graph id=\"knn\" edgedefault=\"undirected\">\n";
  for (Index u = 0; u < g.n_nodes; ++u) {
    out << "    <node id=\"n" << u << "\">"
        << "<data key=\"label\">" << xml_escape(users.token(u)) << "</data>"
        << "<data key=\"cluster\">" << labels.labels[u] << "</data>"
        << "<data key=\"is_candidate\">" << (is_candidate[u] ? "true" : "false") << "</data>";
    if (best[u]) out << "<data key=\"max_phi\">" << format_real(*best[u]) << "</data>";
    out << "<data key=\"degree\">" << degree[u] << "</data></node>\n";
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    out << "    <edge id=\"e" << i << "\" source=\"n" << e.u << "\" target=\"n" << e.v << "\">"
        << "<data key=\"cosine\">" << format_real(e.cosine) << "</data>";
    if (e.phi.value) out << "<data key=\"phi\">" << format_real(*e.phi.value) << "</data>";
    out << "</edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void export_graphml(const std::string& path, const NeighborGraph& g, const TokenIndex& users,
                    const ClusterAssignment& labels, const std::vector<Index>& candidates) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write GraphML to '" + path + "'");
  export_graphml(out, g, users, labels, candidates);
  if (!out) throw DataError("I/O error writing GraphML to '" + path + "'");
}

namespace {

template <typename F>
void write_file(const fs::path& path, F&& body) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

}  // namespace

void write_outputs(const PipelineResult& r, const std::string& dir_name) {
  const fs::path dir(dir_name);
  const auto& users = r.corpus.users;
  const auto& rep = r.report;
  write_file(dir / "edges.tsv", [&](std::ostream& o) { write_edges_tsv(o, r.graph, users); });
  write_file(dir / "sweep.tsv", [&](std::ostream& o) { write_sweep_tsv(o, rep.sweep); });
  write_file(dir / "hist.tsv", [&](std::ostream& o) { write_hist_tsv(o, rep.histogram); });
  write_file(dir / "singular_values.tsv", [&](std::ostream& o) { write_scree_tsv(o, rep.scree); });
  write_file(dir / "scores.tsv", [&](std::ostream& o) { write_scores_tsv(o, users, r.latent.user_scores); });
  write_file(dir / "tweet_loadings.tsv",
             [&](std::ostream& o) { write_scores_tsv(o, r.corpus.tweets, r.latent.tweet_loadings); });
  write_file(dir / "clusters.tsv", [&](std::ostream& o) { write_clusters_tsv(o, users, r.clusters); });
  write_file(dir / "candidates.tsv",
             [&](std::ostream& o) { write_candidates_tsv(o, r.graph, users, r.candidates, &r.clusters); });
  export_graphml((dir / "graph.graphml").string(), r.graph, users, r.clusters, r.candidates);

  write_file(dir / "hist.svg", [&](std::ostream& o) {
    std::vector<std::string> labels;
    std::vector<double> counts;
    for (const auto& b : rep.histogram) {
      labels.push_back("");
      counts.push_back(static_cast<double>(b.count));
    }
    svg_bar_chart(o, {"Edge phi distribution", "phi bin", "edges"}, labels, counts);
  });
  write_file(dir / "sweep.svg", [&](std::ostream& o) {
    std::vector<double> x, y;
    for (const auto& p : rep.sweep) {
      x.push_back(p.threshold);
      y.push_back(p.log_ratio ? *p.log_ratio : std::numeric_limits<double>::quiet_NaN());
    }
    svg_line_chart(o, {"Fragmentation by phi threshold", "threshold", "log10(edges / LCC edges)"}, x, y);
  });
  write_file(dir / "cluster_sizes.svg", [&](std::ostream& o) {
    std::vector<std::string> labels;
    std::vector<double> sizes, cands;
    for (const auto& c : rep.summary.clusters) {
      labels.push_back(std::string(1, static_cast<char>('A' + c.label % 26)));
      sizes.push_back(static_cast<double>(c.size));
      cands.push_back(static_cast<double>(c.candidates));
    }
    labels.push_back("noise");
    sizes.push_back(static_cast<double>(rep.summary.noise.size));
    cands.push_back(static_cast<double>(rep.summary.noise.candidates));
    svg_bar_chart(o, {"Cluster sizes (black: candidates)", "cluster", "users"}, labels, sizes, cands);
  });
  if (r.latent.user_scores.cols() >= 2)
    write_file(dir / "latent_scatter.svg", [&](std::ostream& o) {
      const auto& s = r.latent.user_scores;
      std::vector<double> x(s.col(0).data(), s.col(0).data() + s.rows());
      std::vector<double> y(s.col(1).data(), s.col(1).data() + s.rows());
      svg_scatter(o, {"Latent sharing space", "dimension 1", "dimension 2"}, x, y, r.clusters.labels);
    });

  write_file(dir / "report.json", [&](std::ostream& o) { o << rep.to_json().dump(2) << '\n'; });
  write_file(dir / "timings.json", [&](std::ostream& o) { o << rep.timings_json().dump(2) << '\n'; });
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StageError("output", DataError("cannot create output directory '" + dir.string() + "': " + ec.message()));
  fs::remove(dir / "INCOMPLETE", ec);
  fs::remove(dir / "report.json", ec);
  try {
    std::vector<ShareEvent> events;
    try {
      events = read_events_file(cfg.input, cfg.format);
    } catch (const Error& e) {
      throw StageError("ingest", e);
    }
    PipelineResult res = execute_pipeline(cfg, events);
    try {
      write_outputs(res, cfg.output_dir);
    } catch (const Error& e) {
      throw StageError("output", e);
    }
    return std::move(res.report);
  } catch (const Error& e) {
    fs::remove(dir / "report.json", ec);
    std::ofstream marker(dir / "INCOMPLETE");
    marker << e.what() << '\n';
    throw;
  }
}

}  // namespace coordnet
