// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "coordnet/pipeline.hpp"
#include "coordnet/synth.hpp"
#include "oracles.hpp"

using namespace coordnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Criterion = std::function<Outcome()>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / fmt::format("coordnet_acceptance_{}", ::getpid());
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

SynthConfig planted_config() {
  SynthConfig cfg;
  cfg.n_organic_users = 2000;
  cfg.n_organic_clusters = 4;
  cfg.n_tweets = 5000;
  cfg.noise_rate = 0.02;
  cfg.coord_groups.assign(10, CoordGroupSpec{20, 40, 0.95});
  cfg.seed = 1;
  return cfg;
}

// Exact chi-squared of a 2x2 table in 128-bit integers.
long double exact_chi_squared(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  using i128 = __int128;
  const i128 n = a + b + c + d;
  const i128 det = static_cast<i128>(a) * d - static_cast<i128>(b) * c;
  const i128 den = static_cast<i128>(a + b) * (c + d) * (a + c) * (b + d);
  return static_cast<long double>(n * det * det) / static_cast<long double>(den);
}

Outcome phi_chi_identity() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::int64_t> small(0, 50), large(0, 200000);
  double worst = 0.0;
  int tables = 0;
  const auto t0 = std::chrono::steady_clock::now();
  while (tables < 1000) {
    auto& dist = tables % 2 ? large : small;
    const ContingencyTable t{dist(rng), dist(rng), dist(rng), dist(rng)};
    if (t.a + t.b == 0 || t.c + t.d == 0 || t.a + t.c == 0 || t.b + t.d == 0) continue;
    ++tables;
    const auto s = phi(t);
    if (!s.defined()) return {false, "phi undefined on a nonzero-marginal table"};
    const long double chi = exact_chi_squared(t.a, t.b, t.c, t.d);
    const long double lhs = static_cast<long double>(*s.value) * *s.value * static_cast<long double>(t.n());
    const double err = static_cast<double>(std::fabs(lhs - chi));
    if (chi > 0) worst = std::max(worst, err / static_cast<double>(chi));
    else if (err > 0) return {false, "nonzero phi on an independent table"};
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-10 && elapsed < 1.0,
          fmt::format("{} tables, max |phi^2 n - chi2| / chi2 = {:.2e}, {:.3f}s", tables, worst, elapsed)};
}

Outcome knn_oracle() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> rows(20, 200), cols(30, 300), kk(1, 5);
  std::uniform_real_distribution<double> density(0.01, 0.15);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int r = trial < 5 ? 200 : rows(rng), c = trial < 5 ? 300 : cols(rng);
    const auto m = oracle::random_matrix(rng, r, c, density(rng));
    const int k = kk(rng);
    const auto g = knn_graph(m, k);
    const auto ref = oracle::brute_knn(m, k);
    if (g.edges.size() != ref.size())
      return {false, fmt::format("matrix {} ({}x{}, k={}): {} edges vs {} brute force", trial, r, c, k,
                                 g.edges.size(), ref.size())};
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (g.edges[i].u != ref[i].u || g.edges[i].v != ref[i].v)
        return {false, fmt::format("matrix {}: edge sets differ at position {}", trial, i)};
      worst = std::max(worst, std::abs(g.edges[i].cosine - ref[i].cosine));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-12 && elapsed < 30.0,
          fmt::format("50 matrices up to 200x300, identical edge sets, max cosine gap {:.1e}, {:.2f}s", worst, elapsed)};
}

Outcome centering_margins() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> rows(10, 400), cols(10, 600);
  std::uniform_real_distribution<double> density(0.005, 0.3);
  double worst = 0.0;
  auto check = [&](const SparseBinaryMatrix& m) {
    CenteredOperator<double> op(m);
    worst = std::max(worst, centered_matvec(op, Eigen::VectorXd::Ones(op.cols())).cwiseAbs().maxCoeff());
    worst = std::max(worst, centered_matvec_transpose(op, Eigen::VectorXd::Ones(op.rows())).cwiseAbs().maxCoeff());
  };
  for (int trial = 0; trial < 50; ++trial) check(oracle::random_matrix(rng, rows(rng), cols(rng), density(rng)));
  FilterConfig loose;
  loose.min_user_activity = 1;
  loose.min_tweet_audience = 1;
  check(build_corpus(generate(planted_config()).events, loose).incidence);
  return {worst <= 1e-9, fmt::format("51 corpora, max |margin| = {:.2e}", worst)};
}

Outcome svd_oracle() {
  std::mt19937_64 rng(104);
  double worst_sigma = 0.0, worst_orth = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = oracle::random_matrix(rng, 100, 150, 0.03 + 0.02 * trial);
    CenteredOperator<double> op(m);
    SvdOptions opt;
    opt.rank = 5;
    opt.seed = static_cast<std::uint64_t>(trial);
    const auto ls = truncated_svd(op, opt);
    Eigen::JacobiSVD<Eigen::MatrixXd> ref(oracle::dense_delta(m));
    for (int i = 0; i < 5; ++i)
      worst_sigma = std::max(worst_sigma, std::abs(ls.singular_values[i] - ref.singularValues()[i]) /
                                               ref.singularValues()[i]);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    worst_orth = std::max(worst_orth, (ls.left_vectors.transpose() * ls.left_vectors - I).cwiseAbs().maxCoeff());
    worst_orth = std::max(worst_orth, (ls.right_vectors.transpose() * ls.right_vectors - I).cwiseAbs().maxCoeff());
  }
  return {worst_sigma <= 1e-6 && worst_orth <= 1e-6,
          fmt::format("10 matrices 100x150, max relative sigma error {:.1e}, max orthonormality error {:.1e}",
                      worst_sigma, worst_orth)};
}

Outcome sweep_monotonicity() {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> rows(30, 200), cols(40, 300), kk(1, 6);
  std::uniform_real_distribution<double> density(0.02, 0.2);
  std::size_t pairs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_matrix(rng, rows(rng), cols(rng), density(rng));
    const auto g = score_graph(knn_graph(m, kk(rng)), m);
    const auto s = threshold_sweep(g, 100);
    if (s.size() != 100) return {false, fmt::format("graph {}: {} sweep points", trial, s.size())};
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i].n_edges > s[i - 1].n_edges || s[i].n_components < s[i - 1].n_components)
        return {false, fmt::format("graph {}: not monotone at threshold {}", trial, s[i].threshold)};
    std::vector<std::vector<Index>> cands;
    for (const auto& p : s) cands.push_back(extract_candidates(g, p.threshold));
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = i + 1; j < cands.size(); ++j, ++pairs)
        if (!std::includes(cands[i].begin(), cands[i].end(), cands[j].begin(), cands[j].end()))
          return {false, fmt::format("graph {}: candidates at {} not within those at {}", trial, s[j].threshold,
                                     s[i].threshold)};
  }
  return {true, fmt::format("100 scored k-NN graphs, 100-point grid, {} nested threshold pairs", pairs)};
}

Outcome planted_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = generate(planted_config());
  PipelineConfig cfg;
  cfg.phi_threshold = 0.67;
  const auto res = execute_pipeline(cfg, s.events);
  std::size_t tp = 0, fp = 0, organic = 0;
  for (const auto& [user, label] : res.report.candidates) (s.truth.coordinated_users.count(user) ? tp : fp)++;
  for (const auto& tok : res.corpus.users.tokens()) organic += s.truth.organic_cluster_of.count(tok);
  const double elapsed = seconds_since(t0);
  const double recall = static_cast<double>(tp) / static_cast<double>(s.truth.coordinated_users.size());
  const double fpr = static_cast<double>(fp) / static_cast<double>(std::max<std::size_t>(organic, 1));
  return {recall >= 0.95 && fpr <= 0.01 && elapsed < 60.0,
          fmt::format("recall {}/{} = {:.3f}, false positives {}/{} organic = {:.4f}, {:.2f}s", tp,
                      s.truth.coordinated_users.size(), recall, fp, organic, fpr, elapsed)};
}

Outcome bimodality() {
  int hits = 0;
  std::string valleys;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto values = oracle::beta_mixture(2000, seed);
    NeighborGraph g;
    g.n_nodes = values.size() + 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
      Edge e;
      e.u = static_cast<Index>(i);
      e.v = static_cast<Index>(i + 1);
      e.phi.value = values[i];
      g.edges.push_back(e);
    }
    const auto v = find_valley(phi_histogram(g, 20));
    const bool ok = v && *v > 0.4 && *v < 0.8;
    hits += ok;
    valleys += v ? fmt::format(" {:.3f}", *v) : std::string(" none");
  }
  return {hits == 10, fmt::format("{}/10 seeds in (0.4, 0.8); valleys:{}", hits, valleys)};
}

Outcome cluster_recovery(std::uint64_t seed = 108, double separation = 0.25) {
  std::mt19937_64 rng(seed);
  // Regular tetrahedron of centers, every pair `separation` apart; spread is
  // the RMS distance to the blob center. Outliers fill the score range
  // [-1, 1]^3.
  const Eigen::Vector3d vertex[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const double spread = separation / 10.0;
  const int sizes[4] = {300, 600, 400, 900};
  std::vector<Eigen::VectorXd> pts;
  std::vector<int> truth;
  for (int b = 0; b < 4; ++b) {
    oracle::add_blob(pts, vertex[b] * (separation / std::sqrt(8.0)), spread / std::sqrt(3.0), sizes[b], rng);
    truth.insert(truth.end(), static_cast<std::size_t>(sizes[b]), b);
  }
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    pts.push_back(Eigen::Vector3d(box(rng), box(rng), box(rng)));
    truth.push_back(-1);
  }
  ClusterParams params;
  params.min_cluster_size = 50;
  const auto a = cluster(oracle::stack(pts), params);

  std::map<int, std::set<int>> blobs_of_label;
  std::size_t outlier_noise = 0, blob_noise = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0) {
      outlier_noise += a.labels[i] < 0;
    } else if (a.labels[i] < 0) {
      ++blob_noise;
    } else {
      blobs_of_label[a.labels[i]].insert(truth[i]);
    }
  }
  std::size_t crossed = 0;
  std::map<int, std::set<int>> labels_of_blob;
  for (const auto& [label, blobs] : blobs_of_label)
    for (int b : blobs) labels_of_blob[b].insert(label);
  for (const auto& [label, blobs] : blobs_of_label) crossed += blobs.size() > 1;
  for (const auto& [b, labels] : labels_of_blob) crossed += labels.size() > 1;
  std::size_t misassigned = 0;
  if (crossed)
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] >= 0 && a.labels[i] >= 0 && blobs_of_label[a.labels[i]].size() > 1) ++misassigned;
  return {a.n_clusters == 4 && outlier_noise >= 19 && crossed == 0,
          fmt::format("{} clusters, {}/20 outliers as noise, {} blob points as noise, {} cross-blob assignments",
                      a.n_clusters, outlier_noise, blob_noise, misassigned)};
}

Outcome determinism() {
  const fs::path dir = workdir() / "determinism";
  fs::create_directories(dir);
  const auto input = dir / "events.csv";
  {
    std::ofstream out(input);
    write_events_csv(out, generate(planted_config()).events);
  }
  const unsigned before = thread_count();
  auto run = [&](const std::string& name, unsigned threads) {
    PipelineConfig cfg;
    cfg.input = input.string();
    cfg.output_dir = (dir / name).string();
    set_thread_count(threads);
    run_pipeline(cfg);
  };
  run("first", 8);
  run("second", 8);
  run("single", 1);
  set_thread_count(before);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "first")) {
    const auto name = entry.path().filename();
    const auto ext = name.extension();
    if (name != "report.json" && ext != ".tsv" && ext != ".graphml") continue;
    const auto ref = slurp(entry.path());
    for (const char* other : {"second", "single"})
      if (slurp(dir / other / name) != ref) return {false, fmt::format("{} differs in run '{}'", name.string(), other)};
    ++files;
  }
  return {files >= 10, fmt::format("{} files byte-identical across repeat and --threads 1 vs 8", files)};
}

long peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss / 1024;
}

Outcome scale() {
  SynthConfig s;
  s.coord_groups.assign(10, CoordGroupSpec{20, 40, 0.95});
  s.n_organic_users = 9800;
  s.n_organic_clusters = 4;
  s.n_tweets = 8000;
  s.organic_activity = 9.4;
  s.seed = 10;
  const fs::path dir = workdir() / "scale";
  fs::create_directories(dir);
  const auto input = dir / "events.csv";
  std::size_t n_events = 0;
  {
    const auto corpus = generate(s);
    n_events = corpus.events.size();
    std::ofstream out(input);
    write_events_csv(out, corpus.events);
  }
  PipelineConfig cfg;
  cfg.input = input.string();
  cfg.output_dir = (dir / "out").string();
  // About ten shares per user: the default activity filter would drop nearly everyone.
  cfg.filter.min_user_activity = 5;
  cfg.filter.min_tweet_audience = 5;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_pipeline(cfg);
  const double elapsed = seconds_since(t0);
  const long rss = peak_rss_mb();
  return {elapsed < 120.0 && rss < 2048,
          fmt::format("{} events, {} users x {} tweets after filtering, {:.2f}s, peak RSS {} MB", n_events,
                      rep.n_users, rep.n_tweets, elapsed, rss)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"phi-chi2 identity", phi_chi_identity},
      {"k-NN matches brute force", knn_oracle},
      {"centering margins vanish", centering_margins},
      {"truncated SVD matches dense SVD", svd_oracle},
      {"sweep monotonicity and candidate nesting", sweep_monotonicity},
      {"planted coordination recovery", planted_recovery},
      {"bimodal valley detection", bimodality},
      {"density cluster recovery", [] { return cluster_recovery(); }},
      {"end-to-end determinism", determinism},
      {"scale smoke test", scale},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fs::remove_all(workdir());
  fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
