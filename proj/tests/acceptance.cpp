// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and sizes are fixed here, not tuned per run.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include "oracles.hpp"
#include "uno/experiment.hpp"
#include "uno/objective.hpp"
#include "uno/sinkhorn.hpp"

using namespace uno;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

constexpr std::uint64_t kSeeds[] = {0, 1, 2};

ExperimentConfig benchmark_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.resolve();
  return c;
}

// ---------------------------------------------------------------- 1
void sinkhorn_polytope() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst_converged = 0.0, worst_paper = 0.0;
  int ok_converged = 0, ok_paper = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 2 + rng.index(9), b = 4 + rng.index(61);
    Matrix logits(c, b);
    for (double& v : logits.values()) v = rng.uniform(-1.0, 1.0);
    const auto [r1, c1] = oracle::marginal_errors(sinkhorn::transport_plan({logits, 0.05, 1000}));
    const auto [r3, c3] = oracle::marginal_errors(sinkhorn::transport_plan({logits, 0.05, 3}));
    worst_converged = std::max({worst_converged, r1, c1});
    worst_paper = std::max({worst_paper, r3, c3});
    ok_converged += std::max(r1, c1) <= 1e-6;
    ok_paper += std::max(r3, c3) <= 5e-2;
  }
  const double secs = seconds_since(t0);
  report(1, "sinkhorn polytope constraints",
         worst_converged <= 1e-6 && worst_paper <= 5e-2 && secs < 10.0,
         fmt("n_iter=1000: %d/100 within 1e-6 (worst %.2e); n_iter=3: %d/100 within 5e-2 "
             "(worst %.2e); %.2fs",
             ok_converged, worst_converged, ok_paper, worst_paper, secs));
}

// ---------------------------------------------------------------- 2
ModelConfig tiny_model(Rng& rng) {
  ModelConfig c;
  c.input_dim = 2 + rng.index(3);
  c.encoder_hidden = {3 + rng.index(3)};
  c.feature_dim = 2 + rng.index(3);
  c.num_labeled = 1 + rng.index(3);
  c.num_unlabeled = 2 + rng.index(2);
  c.overcluster_factor = 2;
  c.num_heads = 2;
  c.projection_hidden = 3;
  c.projection_out = 2 + rng.index(2);
  return c;
}

void gradient_correctness() {
  const auto t0 = Clock::now();
  Rng rng(202);
  constexpr int kTrials = 50;
  std::map<std::string, double> worst;
  auto record = [&](const std::string& op, double err) { worst[op] = std::max(worst[op], err); };
  auto weights = [&](std::size_t r, std::size_t c) { return oracle::random_distribution_rows(r, c, rng); };
  using ag::Var;

  for (int t = 0; t < kTrials; ++t) {
    const std::size_t r = 1 + rng.index(5), c = 1 + rng.index(5), k = 1 + rng.index(5);
    const Matrix wk = weights(r, k), wc = weights(r, c);
    // Each op feeds a softmax cross-entropy so every output entry gets a distinct upstream gradient.
    auto probe = [](const Var& y, const Matrix& w) { return ag::softmax_ce(y, w, 1.0); };
    auto a = ag::parameter(oracle::random_matrix(r, c, rng));
    auto b = ag::parameter(oracle::random_matrix(c, k, rng));
    auto bt = ag::parameter(oracle::random_matrix(k, c, rng));
    auto bias = ag::parameter(oracle::random_matrix(1, c, rng));
    auto a2 = ag::parameter(oracle::random_matrix(r, k, rng));
    auto a3 = ag::parameter(oracle::random_matrix(r, c, rng));
    Matrix kinked = oracle::random_matrix(r, c, rng);
    for (double& v : kinked.values())
      if (std::abs(v) < 0.05) v += v < 0 ? -0.05 : 0.05;  // keep relu off its kink
    auto ar = ag::parameter(kinked);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0, n = 1 + rng.index(6); i < n; ++i) idx.push_back(rng.index(r));
    const Matrix wsel = weights(idx.size(), c), wcat = weights(r, c + k);
    const double tau = 0.05 + rng.uniform();

    record("matmul", oracle::gradient_check({a, b}, [&](auto& v) { return probe(ag::matmul(v[0], v[1]), wk); }));
    record("matmul_nt", oracle::gradient_check({a, bt}, [&](auto& v) { return probe(ag::matmul_nt(v[0], v[1]), wk); }));
    record("add_bias", oracle::gradient_check({a, bias}, [&](auto& v) { return probe(ag::add_bias(v[0], v[1]), wc); }));
    record("relu", oracle::gradient_check({ar}, [&](auto& v) { return probe(ag::relu(v[0]), wc); }));
    record("tanh", oracle::gradient_check({a}, [&](auto& v) { return probe(ag::tanh(v[0]), wc); }));
    record("l2_normalize_rows", oracle::gradient_check({a}, [&](auto& v) { return probe(ag::l2_normalize_rows(v[0]), wc); }));
    record("concat_cols", oracle::gradient_check({a, a2}, [&](auto& v) { return probe(ag::concat_cols(v[0], v[1]), wcat); }));
    record("select_rows", oracle::gradient_check({a}, [&](auto& v) { return probe(ag::select_rows(v[0], idx), wsel); }));
    record("add", oracle::gradient_check({a, a3}, [&](auto& v) { return probe(ag::add(v[0], v[1]), wc); }));
    record("scale", oracle::gradient_check({a}, [&](auto& v) { return probe(ag::scale(v[0], -1.7), wc); }));
    record("mean", oracle::gradient_check({a, a3}, [&](auto& v) {
             std::vector<Var> terms{probe(v[0], wc), probe(v[1], wc), probe(v[0], wc)};
             return ag::mean(terms);
           }));
    record("softmax_ce", oracle::gradient_check({a}, [&](auto& v) { return ag::softmax_ce(v[0], wc, tau); }));

    // Full objective over every model parameter, pseudo-labels frozen (stop-gradient).
    ModelConfig mc = tiny_model(rng);
    Model model(mc, rng.next_seed());
    const std::size_t nl = rng.index(4), nu = 1 + rng.index(5);
    ViewPair views{oracle::random_matrix(nl + nu, mc.input_dim, rng),
                   oracle::random_matrix(nl + nu, mc.input_dim, rng), {}};
    for (std::size_t i = 0; i < nl; ++i) views.labels.push_back(static_cast<int>(rng.index(mc.num_labeled)));
    views.labels.insert(views.labels.end(), nu, kUnlabeled);
    ObjectiveConfig oc;
    oc.aggregation = static_cast<Aggregation>(t % 3);
    oc.concat = (t / 3) % 2 == 0;
    const auto targets = compute_targets(views, model.forward(views.v1), model.forward(views.v2), oc);
    record("total_loss", oracle::gradient_check(model.parameters(), [&](const auto&) {
             return total_loss(views, model.forward(views.v1), model.forward(views.v2), targets, oc,
                               mc.temperature).total;
           }));
  }
  const double secs = seconds_since(t0);
  double overall = 0.0;
  std::string which;
  for (const auto& [op, e] : worst)
    if (e >= overall) {
      overall = e;
      which = op;
    }
  report(2, "gradient correctness", overall <= 1e-4 && secs < 30.0,
         fmt("%zu ops x %d trials, worst relative error %.2e (%s, tol 1e-4), %.2fs", worst.size(),
             kTrials, overall, which.c_str(), secs));
}

// ---------------------------------------------------------------- 3
void hungarian_oracle() {
  const auto t0 = Clock::now();
  Rng rng(303);
  int mismatches = 0, total = 0;
  for (std::size_t n : {5u, 6u, 7u})
    for (int t = 0; t < 200; ++t) {
      Matrix p(n, n);
      // Half the instances use small integers so ties are common.
      for (double& v : p.values()) v = t % 2 ? rng.uniform(-10, 10) : std::floor(rng.uniform(0, 4));
      const double got = metrics::assignment_profit(p, metrics::hungarian(p));
      if (std::abs(got - oracle::brute_force_profit(p)) > 1e-9) ++mismatches;
      ++total;
    }
  const double secs = seconds_since(t0);
  report(3, "hungarian oracle equivalence", mismatches == 0 && secs < 10.0,
         fmt("%d/%d instances match exhaustive search (n = 5, 6, 7), %.2fs", total - mismatches, total, secs));
}

// ---------------------------------------------------------------- 4
void padding_identities() {
  std::size_t checked = 0, bad = 0;
  for (std::size_t cl = 1; cl <= 8; ++cl)
    for (std::size_t cu = 1; cu <= 8; ++cu)
      for (std::size_t gt = 0; gt < cl; ++gt)
        for (std::size_t ps = 0; ps < cu; ++ps) {
          std::vector<double> y(cl, 0.0), yh(cu, 0.0);
          y[gt] = 1.0;
          yh[ps] = 1.0;
          const auto a = pad_label(y, cu), b = pad_pseudo(yh, cl);
          double sa = 0, sb = 0;
          bool disjoint = a.y.size() == cl + cu && b.y.size() == cl + cu;
          for (std::size_t j = 0; disjoint && j < cl + cu; ++j) {
            sa += a.y[j];
            sb += b.y[j];
            disjoint = !(a.y[j] != 0.0 && b.y[j] != 0.0);
          }
          const bool support = a.y[gt] == 1.0 && b.y[cl + ps] == 1.0;
          if (!disjoint || !support || sa != 1.0 || sb != 1.0) ++bad;
          ++checked;
        }
  report(4, "padding identities", bad == 0,
         fmt("%zu ground-truth/pseudo one-hot pairs over C^l, C^u in 1..8, %zu violations", checked, bad));
}

// ---------------------------------------------------------------- 5-11
struct RunSummary {
  DiscoveryRun run;
  double all_agnostic = 0.0;  // task-agnostic All, averaged over clustering heads
};

std::vector<metrics::MetricsReport> all_reports;

RunSummary train(const ExperimentConfig& c, const Dataset& ds, double* secs = nullptr) {
  const auto t0 = Clock::now();
  RunSummary s{run_discovery(c, ds), 0.0};
  if (secs) *secs = seconds_since(t0);
  s.all_agnostic = s.run.report.avg_agnostic.all;
  all_reports.push_back(s.run.report);
  return s;
}

double min_entropy_after(const TrainHistory& h, std::size_t first_epoch) {
  double m = INFINITY;
  for (const auto& e : h.epochs)
    if (e.epoch >= first_epoch)
      for (double u : e.usage_entropy) m = std::min(m, u);
  return m;
}

double final_mean_entropy(const TrainHistory& h) {
  const auto& u = h.epochs.back().usage_entropy;
  double s = 0;
  for (double v : u) s += v;
  return s / static_cast<double>(u.size());
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

int main() {
  sinkhorn_polytope();
  gradient_correctness();
  hungarian_oracle();
  padding_identities();

  std::vector<Dataset> data;
  for (auto s : kSeeds) data.push_back(make_dataset(benchmark_config(s)));
  const double log_cu = std::log(static_cast<double>(benchmark_config(0).model.num_unlabeled));

  // Full model on every seed; shared by criteria 5 to 8 and 10.
  std::vector<RunSummary> full;
  std::vector<double> full_secs;
  for (std::size_t i = 0; i < 3; ++i) {
    double secs = 0;
    full.push_back(train(benchmark_config(kSeeds[i]), data[i], &secs));
    full_secs.push_back(secs);
  }

  {
    // Epoch indices are 0-based, so "after epoch 5" starts at index 5.
    double min_h = INFINITY;
    for (const auto& f : full) min_h = std::min(min_h, min_entropy_after(f.run.discover, 5));
    std::string control;
    int collapsed = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      auto c = benchmark_config(kSeeds[i]);
      c.train.objective.pseudo.labeler = Labeler::Greedy;
      const auto g = train(c, data[i]);
      const double h = final_mean_entropy(g.run.discover);
      collapsed += h < 0.5 * log_cu;
      control += fmt("%s%.3f", i ? ", " : "", h);
    }
    report(5, "anti-collapse", min_h >= 0.9 * log_cu && collapsed >= 1,
           fmt("min usage entropy after epoch 5 = %.4f (>= %.4f); greedy control final entropy [%s], "
               "%d/3 below %.4f",
               min_h, 0.9 * log_cu, control.c_str(), collapsed, 0.5 * log_cu));
  }

  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < 3; ++i) {
      const double uno = full[i].run.report.best().task_aware.unlabeled;
      const double km = full[i].run.kmeans_accuracy;
      ok = ok && uno >= 0.95 && uno - km >= 0.05 && full_secs[i] < 300.0;
      detail += fmt("%sseed %llu: UNO %.4f vs k-means %.4f (%.0fs)", i ? "; " : "",
                    static_cast<unsigned long long>(kSeeds[i]), uno, km, full_secs[i]);
    }
    report(6, "end-to-end discovery", ok, detail + " [best head, task-aware unlabeled, test split]");
  }

  {
    struct Variant {
      const char* name;
      bool concat, over;
      AugmentStrength aug;
    };
    const Variant variants[] = {{"no-concat", false, true, AugmentStrength::Strong},
                                {"no-overclustering", true, false, AugmentStrength::Strong},
                                {"weak-aug", true, true, AugmentStrength::Weak}};
    std::vector<double> f;
    for (const auto& r : full) f.push_back(r.all_agnostic);
    const double full_mean = mean(f);
    bool ok = true;
    std::string detail = fmt("full %.4f", full_mean);
    for (const auto& v : variants) {
      std::vector<double> acc;
      for (std::size_t i = 0; i < 3; ++i) {
        auto c = benchmark_config(kSeeds[i]);
        c.train.objective.concat = v.concat;
        c.train.objective.overclustering = v.over;
        c.train.augment.strength = v.aug;
        acc.push_back(train(c, data[i]).all_agnostic);
      }
      ok = ok && full_mean >= mean(acc);
      detail += fmt(", %s %.4f", v.name, mean(acc));
    }
    report(7, "ablation ordering", ok, detail + " [task-agnostic All, mean of 3 seeds]");
  }

  {
    std::vector<double> swap;
    for (const auto& r : full) swap.push_back(r.all_agnostic);
    std::map<std::string, double> means{{"swap", mean(swap)}};
    for (auto agg : {Aggregation::AvgPseudo, Aggregation::AvgLogits}) {
      std::vector<double> acc;
      for (std::size_t i = 0; i < 3; ++i) {
        auto c = benchmark_config(kSeeds[i]);
        c.train.objective.aggregation = agg;
        acc.push_back(train(c, data[i]).all_agnostic);
      }
      means[to_string(agg)] = mean(acc);
    }
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [k, v] : means) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    report(8, "aggregation variants", hi - lo <= 0.05 && means["swap"] >= means["avg_logits"],
           fmt("swap %.4f, avg_pseudo %.4f, avg_logits %.4f; spread %.4f (<= 0.05)", means["swap"],
               means["avg_pseudo"], means["avg_logits"], hi - lo));
  }

  {
    int hits = 0;
    std::string detail;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto est = run_estimate(benchmark_config(kSeeds[i]), data[i]);
      hits += est.k == 4;
      detail += fmt("%s%zu", i ? ", " : "", est.k);
    }
    report(9, "class-count estimation", hits >= 2,
           fmt("estimates [%s] for 4 true classes, candidates 2..8; %d/3 correct", detail.c_str(), hits));
  }

  {
    const auto again = train(benchmark_config(kSeeds[0]), data[0]);
    const auto out = [](const metrics::MetricsReport& r) {
      return metrics::format_table(r) + metrics::format_records(r);
    };
    const bool same = out(again.run.report) == out(full[0].run.report);
    report(10, "determinism", same,
           same ? "repeated seed-0 run produced byte-identical metrics output"
                : "metrics output differs between identical runs");
  }

  {
    std::size_t checked = 0, violations = 0;
    auto check = [&](const metrics::SubsetScores& a, const metrics::SubsetScores& g) {
      ++checked;
      if (a.labeled < g.labeled || a.unlabeled < g.unlabeled || a.all < g.all) ++violations;
    };
    for (const auto& r : all_reports) {
      for (const auto& h : r.heads) check(h.task_aware, h.task_agnostic);
      check(r.avg_aware, r.avg_agnostic);
    }
    report(11, "task-aware dominance", violations == 0 && checked > 0,
           fmt("%zu head/average score rows across %zu evaluations, %zu violations", checked,
               all_reports.size(), violations));
  }

  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return failures == 0 ? 0 : 1;
}
