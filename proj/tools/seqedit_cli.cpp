// Command-line surface for the seqedit library: synthetic data
// generation, training, iterative-refinement editing, metric
// evaluation, and the analysis reports (edit-operation profiles and
// noise distance shifts). Every command is deterministic given --seed;
// SEQEDIT_SEED provides the default seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqedit/seqedit.hpp"

namespace {

using namespace seqedit;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw usage_error("cannot write " + path);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct CommonSeed {
  std::uint64_t seed = 1;
  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")->envname("SEQEDIT_SEED");
  }
};

// ---- gen-data -----------------------------------------------------------

struct GenDataCmd {
  SynthConfig cfg;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen-data", "write a synthetic editing corpus as JSONL");
    cmd->add_option("--out", out, "output JSONL path")->required();
    cmd->add_option("--size", cfg.num_samples, "number of samples");
    cmd->add_option("--vocab-size", cfg.vocab_size, "content vocabulary size");
    cmd->add_option("--min-len", cfg.min_len, "minimum source length");
    cmd->add_option("--max-len", cfg.max_len, "maximum source length");
    cmd->add_option("--delete-rate", cfg.delete_rate, "filler-token deletion rate");
    cmd->add_option("--substitute-rate", cfg.substitute_rate, "complex-word substitution rate");
    cmd->add_option("--append-rate", cfg.append_rate, "end-marker append rate");
    cmd->add_option("--swap-rate", cfg.swap_rate, "adjacent-swap rate");
    cmd->add_option("--level-count", cfg.level_count, "number of level tags");
    cmd->add_option("--seed", cfg.seed, "random seed")->envname("SEQEDIT_SEED");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Corpus corpus = generate_synthetic(cfg);
    write_jsonl(corpus, out);
    std::cout << "wrote " << corpus.samples.size() << " samples to " << out << '\n';
  }
};

// ---- train ---------------------------------------------------------------

struct TrainCmd {
  std::string data, dev, out_dir;
  std::string strategy = "editing";
  std::string curriculum = "none";
  TrainConfig cfg;
  CommonSeed seed;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "train an editing policy");
    cmd->add_option("--data", data, "training JSONL")->required();
    cmd->add_option("--dev", dev, "development JSONL")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--strategy", strategy,
                    "roll-in strategy: from-reference|from-input|editing");
    cmd->add_option("--curriculum", curriculum,
                    "difficulty criterion: none|edit-distance|length-ratio|"
                    "level-difference|random");
    cmd->add_option("--lambda", cfg.lambda, "curriculum length in steps");
    cmd->add_option("--c0", cfg.c0, "initial competence");
    cmd->add_option("--steps", cfg.max_steps, "maximum update steps");
    cmd->add_option("--batch-size", cfg.batch_size, "samples per update");
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--checkpoint-interval", cfg.checkpoint_interval, "updates per checkpoint");
    cmd->add_option("--patience", cfg.patience, "non-improving checkpoints before stopping");
    cmd->add_option("--alpha", cfg.rollin.alpha, "insertion-path mixture probability");
    cmd->add_option("--beta", cfg.rollin.beta, "reposition-path mixture probability");
    cmd->add_option("--drop-prob", cfg.rollin.noise.drop_prob, "word-drop probability");
    cmd->add_option("--shuffle-k", cfg.rollin.noise.shuffle_k, "maximum shuffle distance");
    seed.attach(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    cfg.rollin.strategy = rollin_strategy_from_string(strategy);
    cfg.criterion = criterion_from_string(curriculum);
    cfg.seed = seed.seed;
    const Corpus train_set = load_jsonl(data);
    const Corpus dev_set = load_jsonl(dev, train_set.vocab);

    std::filesystem::create_directories(out_dir);
    const auto [model, report] = train(cfg, train_set, dev_set);

    model.save(out_dir + "/checkpoint.txt");
    auto report_out = open_out(out_dir + "/report.tsv");
    report.write_tsv(report_out);
    if (cfg.criterion != Criterion::none) {
      const auto schedule =
          CurriculumSchedule::build(train_set, cfg.criterion, cfg.c0, cfg.lambda, cfg.seed);
      auto sched_out = open_out(out_dir + "/schedule.tsv");
      schedule.dump_tsv(sched_out, train_set);
    }
    std::cout << "updates\t" << report.total_updates << "\nbest_step\t" << report.best_step
              << "\nbest_dev_ppl\t" << report.best_ppl << "\nearly_stopped\t"
              << (report.early_stopped ? 1 : 0) << "\nclipped_gaps\t" << report.clipped_gaps
              << "\npool_fallbacks\t" << report.pool_fallbacks << "\nwall_seconds\t"
              << report.wall_seconds << '\n';
  }
};

// ---- edit ------------------------------------------------------------------

struct EditCmd {
  std::string checkpoint, input, output, trace_path;
  std::int32_t max_iters = 10;
  int level = -1;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("edit", "refine input lines with a trained policy");
    cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    cmd->add_option("--input", input, "input text, one sequence per line")->required();
    cmd->add_option("--output", output, "output path")->required();
    cmd->add_option("--max-iters", max_iters, "decoding iteration cap");
    cmd->add_option("--level", level, "target level tag (optional)");
    cmd->add_option("--trace", trace_path, "write per-iteration states as TSV");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const WindowScorer model = WindowScorer::load(checkpoint);
    const auto lines = read_lines(input);
    auto out = open_out(output);
    std::ofstream trace;
    if (!trace_path.empty()) {
      trace = open_out(trace_path);
      trace << "line\titer\tstate\n";
    }
    RefineConfig cfg;
    cfg.max_iters = max_iters;
    cfg.record_trace = !trace_path.empty();
    const std::optional<int> lvl = level >= 0 ? std::optional<int>(level) : std::nullopt;
    std::int64_t total_iters = 0, total_edits = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const TokenSeq src = model.vocab().encode(metric_tokens(lines[i]));
      const RefineResult res = refine(model, src, lvl, cfg);
      out << model.vocab().decode(res.output) << '\n';
      total_iters += res.iterations_used;
      total_edits += res.token_edits;
      if (cfg.record_trace)
        for (std::size_t k = 0; k < res.trace.size(); ++k)
          trace << i + 1 << '\t' << k << '\t' << model.vocab().decode(res.trace[k]) << '\n';
    }
    const double n = lines.empty() ? 1.0 : static_cast<double>(lines.size());
    std::cout << "lines\t" << lines.size() << "\nmean_iterations\t"
              << static_cast<double>(total_iters) / n << "\nmean_token_edits\t"
              << static_cast<double>(total_edits) / n << '\n';
  }
};

// ---- evaluate ----------------------------------------------------------------

struct EvaluateCmd {
  std::string src, hyp, refs, out_path;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "score hypotheses against references");
    cmd->add_option("--src", src, "source file, one instance per line")->required();
    cmd->add_option("--hyp", hyp, "hypothesis file, aligned by line")->required();
    cmd->add_option("--refs", refs, "reference file; tab-separated alternatives per line")
        ->required();
    cmd->add_option("--out", out_path, "per-instance and corpus TSV")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto src_lines = read_lines(src);
    const auto hyp_lines = read_lines(hyp);
    const auto ref_lines = read_lines(refs);
    if (src_lines.size() != hyp_lines.size() || src_lines.size() != ref_lines.size())
      throw usage_error("src/hyp/refs line counts differ");
    std::vector<std::vector<std::string>> ref_sets;
    ref_sets.reserve(ref_lines.size());
    for (const auto& line : ref_lines) ref_sets.push_back(split_tabs(line));

    const CorpusScores scores = evaluate_corpus(src_lines, hyp_lines, ref_sets);
    auto out = open_out(out_path);
    out << "instance\tsari_keep\tsari_add\tsari_del\tsari\trouge_p\trouge_r\trouge_f1\t"
           "ari_sys\tari_ref\n";
    for (std::size_t i = 0; i < scores.instances.size(); ++i) {
      const auto& r = scores.instances[i];
      out << i + 1 << '\t' << r.sari.keep_f1 << '\t' << r.sari.add_f1 << '\t' << r.sari.del_p
          << '\t' << r.sari.combined << '\t' << r.rouge.precision << '\t' << r.rouge.recall
          << '\t' << r.rouge.f1 << '\t' << r.ari_sys << '\t' << r.ari_ref << '\n';
    }
    out << "corpus\t" << scores.sari.keep_f1 << '\t' << scores.sari.add_f1 << '\t'
        << scores.sari.del_p << '\t' << scores.sari.combined << '\t' << scores.rouge.precision
        << '\t' << scores.rouge.recall << '\t' << scores.rouge.f1 << "\t-\t-\n";
    out << "# pcc\t" << scores.pcc << "\n# ari_acc\t" << scores.ari_acc << '\n';
    std::cout << "sari\t" << scores.sari.combined << "\nrouge_l_f1\t" << scores.rouge.f1
              << "\npcc\t" << scores.pcc << "\nari_acc\t" << scores.ari_acc << '\n';
  }
};

// ---- profile-ops ----------------------------------------------------------------

struct ProfileCmd {
  std::string data, context = "rollin:editing", checkpoint, out_path;
  RollInConfig rollin_cfg;
  RefineConfig refine_cfg;
  CommonSeed seed;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("profile-ops",
                                   "histogram oracle edit operations for a context");
    cmd->add_option("--data", data, "corpus JSONL")->required();
    cmd->add_option("--context", context, "rollin:<strategy> or inference");
    cmd->add_option("--checkpoint", checkpoint,
                    "model checkpoint (required for inference and model-dependent roll-ins)");
    cmd->add_option("--out", out_path, "histogram TSV")->required();
    cmd->add_option("--alpha", rollin_cfg.alpha, "insertion-path mixture probability");
    cmd->add_option("--beta", rollin_cfg.beta, "reposition-path mixture probability");
    cmd->add_option("--drop-prob", rollin_cfg.noise.drop_prob, "word-drop probability");
    cmd->add_option("--shuffle-k", rollin_cfg.noise.shuffle_k, "maximum shuffle distance");
    cmd->add_option("--max-iters", refine_cfg.max_iters, "decoding iteration cap");
    seed.attach(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::optional<WindowScorer> model;
    if (!checkpoint.empty()) model = WindowScorer::load(checkpoint);
    const Corpus corpus = model ? load_jsonl(data, model->vocab()) : load_jsonl(data);
    const EditOpProfile profile = profile_edit_ops(
        corpus, model ? &*model : nullptr, context, rollin_cfg, refine_cfg, seed.seed);
    auto out = open_out(out_path);
    write_profile_tsv(out, profile);
    std::cout << "context\t" << profile.context << "\nmass\t" << profile.mass() << '\n';
  }
};

// ---- noise-shift -----------------------------------------------------------------

struct NoiseShiftCmd {
  std::string data, out_path;
  NoiseConfig noise_cfg;
  CommonSeed seed;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("noise-shift",
                                   "paired edit distances before and after source noising");
    cmd->add_option("--data", data, "corpus JSONL")->required();
    cmd->add_option("--out", out_path, "paired-distance TSV")->required();
    cmd->add_option("--drop-prob", noise_cfg.drop_prob, "word-drop probability");
    cmd->add_option("--shuffle-k", noise_cfg.shuffle_k, "maximum shuffle distance");
    seed.attach(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Corpus corpus = load_jsonl(data);
    const auto rows = report_noise_shift(corpus, noise_cfg, seed.seed);
    auto out = open_out(out_path);
    write_noise_shift_tsv(out, rows);
    std::cout << "rows\t" << rows.size() << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqedit: train and evaluate non-autoregressive sequence-editing policies"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file mirroring the flags");

  GenDataCmd gen_data;
  TrainCmd train_cmd;
  EditCmd edit_cmd;
  EvaluateCmd evaluate_cmd;
  ProfileCmd profile_cmd;
  NoiseShiftCmd noise_shift_cmd;
  gen_data.attach(app);
  train_cmd.attach(app);
  edit_cmd.attach(app);
  evaluate_cmd.attach(app);
  profile_cmd.attach(app);
  noise_shift_cmd.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const seqedit::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
