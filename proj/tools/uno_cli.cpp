// Experiment runner. Every command writes into a fresh run directory under
// --out (or $UNO_OUT_ROOT, or ./runs).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "uno/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
};

uno::ExperimentConfig build_config(const Options& o) {
  uno::ExperimentConfig c;
  if (!o.config_path.empty()) c = uno::load_config(o.config_path);
  for (const auto& s : o.overrides) uno::apply_override(c, s);
  if (o.seed) c.seed = *o.seed;
  c.resolve();
  try {
    c.model.validate();
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw uno::ConfigError("model/train", e.what());
  }
  return c;
}

std::filesystem::path out_root(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("UNO_OUT_ROOT"); env && *env) return env;
  return "runs";
}

std::filesystem::path start_run(const Options& o, const std::string& command,
                                const uno::ExperimentConfig& c) {
  const auto dir = uno::make_run_dir(out_root(o), command, c);
  uno::write_text(dir / "config.txt", uno::serialize_config(c));
  return dir;
}

std::string join_losses(const std::vector<double>& v) {
  std::string s;
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    s += buf;
  }
  return s;
}

std::vector<double> read_losses(const std::filesystem::path& path) {
  std::vector<double> out;
  if (!std::filesystem::exists(path)) return out;
  std::istringstream is(uno::read_text(path));
  for (double v; is >> v;) out.push_back(v);
  return out;
}

uno::Model checkpoint_model(const uno::ExperimentConfig& c) {
  if (c.eval_checkpoint.empty()) throw uno::ConfigError("eval.checkpoint", "required");
  return uno::load_checkpoint(c.eval_checkpoint);
}

int cmd_gen_data(const Options& o) {
  const auto c = build_config(o);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "gen-data", c);
  uno::save_dataset(ds, dir / "dataset.txt");
  std::cout << dir.string() << '\n';
  return kOk;
}

int cmd_pretrain(const Options& o) {
  const auto c = build_config(o);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "pretrain", c);
  uno::TrainHistory h;
  const auto model = uno::run_pretrain(c, ds, &h, {dir, c.checkpoint_every});
  uno::save_checkpoint(model, dir / "pretrained.ckpt");
  std::cout << dir.string() << '\n';
  return kOk;
}

int cmd_discover(const Options& o) {
  const auto c = build_config(o);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "discover", c);
  const auto run = uno::run_discovery(c, ds, {dir, c.checkpoint_every});
  uno::write_metrics(dir, run.report);
  uno::write_text(dir / "head_losses.txt", join_losses(run.discover.final_head_losses));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "kmeans_unlab\t%.4f\n", run.kmeans_accuracy);
  uno::write_text(dir / "baseline.tsv", buf);
  std::cout << uno::metrics::format_table(run.report) << "k-means on pretrained features: "
            << buf + 13 << dir.string() << '\n';
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const auto c = build_config(o);
  const auto model = checkpoint_model(c);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "evaluate", c);
  // Best-head selection needs the training losses saved beside the checkpoint.
  const auto losses =
      read_losses(std::filesystem::path(c.eval_checkpoint).parent_path() / "head_losses.txt");
  const auto report = uno::metrics::evaluate(model, uno::eval_split(ds, c), losses);
  uno::write_metrics(dir, report);
  std::cout << uno::metrics::format_table(report) << dir.string() << '\n';
  return kOk;
}

int cmd_estimate(const Options& o) {
  const auto c = build_config(o);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "estimate-k", c);
  const auto est = uno::run_estimate(c, ds);
  std::string text = "candidate\tprobe_acc\tsilhouette\tscore\n";
  char buf[128];
  for (std::size_t i = 0; i < est.candidates.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.4f\t%.4f\t%.4f\n", est.candidates[i],
                  est.probe_accuracy[i], est.pool_silhouette[i], est.score[i]);
    text += buf;
  }
  text += "estimate\t" + std::to_string(est.k) + "\n";
  uno::write_text(dir / "estimate.tsv", text);
  std::cout << text << dir.string() << '\n';
  return kOk;
}

int cmd_ablate(const Options& o) {
  const auto base = build_config(o);
  const auto ds = uno::make_dataset(base);
  const auto dir = start_run(o, "ablate", base);
  struct Row {
    const char* name;
    bool concat, over;
    uno::AugmentStrength aug;
  };
  const Row rows[] = {{"full", true, true, uno::AugmentStrength::Strong},
                      {"no-concat", false, true, uno::AugmentStrength::Strong},
                      {"no-overclustering", true, false, uno::AugmentStrength::Strong},
                      {"weak-aug", true, true, uno::AugmentStrength::Weak}};
  std::string summary = "variant\tconcat\tover\taug\tlab\tunlab\tall\n";
  for (const auto& r : rows) {
    auto c = base;
    c.train.objective.concat = r.concat;
    c.train.objective.overclustering = r.over;
    c.train.augment.strength = r.aug;
    const auto sub = uno::make_run_dir(dir, r.name, c);
    uno::write_text(sub / "config.txt", uno::serialize_config(c));
    const auto run = uno::run_discovery(c, ds, {sub, c.checkpoint_every});
    uno::write_metrics(sub, run.report);
    uno::write_text(sub / "head_losses.txt", join_losses(run.discover.final_head_losses));
    const auto& s = run.report.avg_agnostic;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s\t%d\t%d\t%s\t%.4f\t%.4f\t%.4f\n", r.name, r.concat, r.over,
                  uno::to_string(r.aug).c_str(), s.labeled, s.unlabeled, s.all);
    summary += buf;
  }
  uno::write_text(dir / "summary.tsv", summary);
  std::cout << "task-agnostic accuracy averaged over clustering heads\n" << summary << dir.string() << '\n';
  return kOk;
}

int cmd_dump_features(const Options& o) {
  const auto c = build_config(o);
  const auto model = checkpoint_model(c);
  const auto ds = uno::make_dataset(c);
  const auto dir = start_run(o, "dump-features", c);
  const auto& split = uno::eval_split(ds, c);
  std::ofstream os(dir / "features.tsv");
  if (!os) throw std::runtime_error("cannot write features.tsv");
  auto dump = [&](const uno::Matrix& x, const std::vector<int>& y, const char* subset) {
    const auto z = uno::features(model, x);
    char buf[40];
    for (std::size_t i = 0; i < z.rows(); ++i) {
      os << subset << '\t' << y[i];
      for (double v : z.row(i)) {
        std::snprintf(buf, sizeof(buf), "\t%.9g", v);
        os << buf;
      }
      os << '\n';
    }
  };
  dump(split.labeled_x, split.labeled_y, "labeled");
  dump(split.unlabeled_x, split.unlabeled_hidden, "unlabeled");
  std::cout << dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified-objective novel class discovery on vector data"};
  app.require_subcommand(1);
  app.footer("Config keys (--set key=value):\n" + uno::config_schema());
  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", opts.overrides, "override one key (repeatable)");
    sub->add_option("--seed", opts.seed, "base seed (overrides the config)");
    sub->add_option("--out", opts.out, "output root (default $UNO_OUT_ROOT or ./runs)");
  };
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Command commands[] = {
      {"gen-data", "generate and save the synthetic dataset", cmd_gen_data},
      {"pretrain", "supervised pretraining on labeled classes", cmd_pretrain},
      {"discover", "pretrain + discovery + evaluation", cmd_discover},
      {"evaluate", "score eval.checkpoint on eval.split", cmd_evaluate},
      {"estimate-k", "estimate the number of unlabeled classes", cmd_estimate},
      {"ablate", "component ablation grid with summary", cmd_ablate},
      {"dump-features", "write encoder features of eval.checkpoint", cmd_dump_features},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub);
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    for (auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->fn(opts);
  } catch (const uno::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
