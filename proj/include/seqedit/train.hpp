#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "seqedit/corpus.hpp"
#include "seqedit/curriculum.hpp"
#include "seqedit/errors.hpp"
#include "seqedit/rollin.hpp"
#include "seqedit/window_scorer.hpp"

namespace seqedit {

struct TrainConfig {
  RollInConfig rollin;
  Criterion criterion = Criterion::none;
  double c0 = 0.1;
  std::int64_t lambda = 5000;
  std::int32_t batch_size = 32;
  std::int64_t max_steps = 2000;
  std::int64_t checkpoint_interval = 200;
  std::int32_t patience = 8;
  double lr = 0.1;
  std::uint64_t seed = 1;
  ScorerConfig scorer;

  void validate() const {
    rollin.validate();
    if (batch_size < 1) throw config_error("batch_size must be positive");
    if (max_steps < 0) throw config_error("max_steps must be non-negative");
    if (checkpoint_interval < 1) throw config_error("checkpoint_interval must be positive");
    if (patience < 1) throw config_error("patience must be >= 1");
    if (lr <= 0.0) throw config_error("learning rate must be positive");
    if (lambda <= 0) throw config_error("curriculum length must be positive");
  }
};

struct ValidationResult {
  double loss = 0.0;  // mean NLL over all labeled positions
  double ppl = 0.0;   // exp(loss)
  double ppl_rps = 0.0, ppl_plh = 0.0, ppl_ins = 0.0;
};

struct CheckpointRow {
  std::int64_t step = 0;
  double competence = 1.0;
  std::size_t pool_size = 0;
  double train_loss = 0.0;  // running mean since the previous checkpoint
  double dev_loss = 0.0;
  double dev_ppl = 0.0;
};

struct TrainingReport {
  std::vector<CheckpointRow> rows;
  std::int64_t total_updates = 0;
  std::int64_t best_step = -1;  // updates to convergence
  double best_ppl = std::numeric_limits<double>::infinity();
  bool early_stopped = false;
  std::int64_t clipped_gaps = 0;     // oracle gaps clamped to k_max during labeling
  std::int64_t pool_fallbacks = 0;   // empty-pool fallbacks to the easiest tie class
  double wall_seconds = 0.0;

  void write_tsv(std::ostream& out) const {
    out << "step\tcompetence\tpool_size\ttrain_loss\tdev_loss\tdev_ppl\n";
    for (const auto& r : rows)
      out << r.step << '\t' << r.competence << '\t' << r.pool_size << '\t' << r.train_loss
          << '\t' << r.dev_loss << '\t' << r.dev_ppl << '\n';
  }
};

// Dev-set states are noise-free roll-ins from the input sequence (the
// distribution inference starts from), so perplexity is measured on the
// oracle labels of the states the model will actually face.
inline ValidationResult validate(const WindowScorer& model, const Corpus& dev) {
  if (dev.samples.empty()) throw config_error("empty dev set");
  RollInConfig cfg;
  cfg.strategy = RollInStrategy::editing;
  cfg.noise.drop_prob = 0.0;
  cfg.noise.shuffle_k = 0;
  Rng rng = make_rng(0);  // never consumed with noise disabled
  double nll = 0.0, nll_rps = 0.0, nll_plh = 0.0, nll_ins = 0.0;
  std::int64_t n_rps = 0, n_plh = 0, n_ins = 0;
  for (const auto& sample : dev.samples) {
    RollInBatch one{rollin_editing(sample, cfg, rng)};
    const LossReport rep = model.loss(one);
    nll_rps += rep.rps_ce * static_cast<double>(rep.rps_positions);
    nll_plh += rep.plh_ce * static_cast<double>(rep.plh_positions);
    nll_ins += rep.ins_ce * static_cast<double>(rep.ins_positions);
    n_rps += rep.rps_positions;
    n_plh += rep.plh_positions;
    n_ins += rep.ins_positions;
  }
  nll = nll_rps + nll_plh + nll_ins;
  const std::int64_t n = n_rps + n_plh + n_ins;
  ValidationResult res;
  res.loss = n > 0 ? nll / static_cast<double>(n) : 0.0;
  res.ppl = std::exp(res.loss);
  res.ppl_rps = n_rps > 0 ? std::exp(nll_rps / static_cast<double>(n_rps)) : 1.0;
  res.ppl_plh = n_plh > 0 ? std::exp(nll_plh / static_cast<double>(n_plh)) : 1.0;
  res.ppl_ins = n_ins > 0 ? std::exp(nll_ins / static_cast<double>(n_ins)) : 1.0;
  return res;
}

// Curriculum-paced imitation learning. Each step selects the competence
// pool, draws a uniform batch from it, generates roll-in states under
// the configured strategy, and applies one gradient step. Checkpoints
// run validation; training stops at max_steps or after `patience`
// checkpoints without a dev-perplexity improvement, returning the best
// checkpoint.
inline std::pair<WindowScorer, TrainingReport> train(const TrainConfig& cfg,
                                                     const Corpus& train_set,
                                                     const Corpus& dev_set) {
  cfg.validate();
  if (train_set.samples.empty() || dev_set.samples.empty())
    throw config_error("train and dev sets must be non-empty");
  if (train_set.vocab.size() != dev_set.vocab.size())
    throw config_error("train and dev sets must share one vocabulary");
  {
    std::unordered_set<std::string> ids;
    for (const auto& s : train_set.samples) ids.insert(s.uid);
    for (const auto& s : dev_set.samples)
      if (ids.count(s.uid)) throw config_error("dev sample " + s.uid + " also in train set");
  }

  const auto t_start = std::chrono::steady_clock::now();
  std::uint64_t seed_state = cfg.seed;
  ScorerConfig scorer_cfg = cfg.scorer;
  scorer_cfg.init_seed = splitmix64(seed_state);
  WindowScorer model(train_set.vocab, scorer_cfg);
  Rng batch_rng = make_rng(cfg.seed, 0xBA);
  Rng rollin_rng = make_rng(cfg.seed, 0x70);

  const CurriculumSchedule schedule = CurriculumSchedule::build(
      train_set, cfg.criterion, cfg.c0, cfg.lambda, cfg.seed);

  TrainingReport report;
  WindowScorer best = model;
  std::int32_t bad_checkpoints = 0;
  double loss_accum = 0.0;
  std::int64_t loss_count = 0;
  ParamSet grads = make_gradients(model);

  for (std::int64_t t = 0; t < cfg.max_steps; ++t) {
    bool fell_back = false;
    const std::size_t pool = schedule.pool_size(t, &fell_back);
    if (fell_back) ++report.pool_fallbacks;

    RollInBatch batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (std::int32_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t pick = schedule.nth_easiest(rand_index(batch_rng, pool));
      batch.push_back(make_rollin(train_set.samples[pick], &model, cfg.rollin, rollin_rng));
    }

    grads.zero();
    const LossReport rep = model.loss(batch, &grads);
    report.clipped_gaps += rep.clipped_gaps;
    model.sgd_step(grads, cfg.lr);
    loss_accum += rep.total;
    ++loss_count;
    ++report.total_updates;

    const bool last_step = t + 1 == cfg.max_steps;
    if ((t + 1) % cfg.checkpoint_interval == 0 || last_step) {
      const ValidationResult dev = validate(model, dev_set);
      CheckpointRow row;
      row.step = t + 1;
      row.competence = schedule.competence_at(t);
      row.pool_size = pool;
      row.train_loss = loss_accum / static_cast<double>(loss_count);
      row.dev_loss = dev.loss;
      row.dev_ppl = dev.ppl;
      report.rows.push_back(row);
      loss_accum = 0.0;
      loss_count = 0;

      if (dev.ppl < report.best_ppl) {
        report.best_ppl = dev.ppl;
        report.best_step = row.step;
        best = model;
        bad_checkpoints = 0;
      } else {
        ++bad_checkpoints;
        if (bad_checkpoints >= cfg.patience) {
          report.early_stopped = true;
          break;
        }
      }
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (report.best_step < 0) return {std::move(model), std::move(report)};
  return {std::move(best), std::move(report)};
}

}  // namespace seqedit
