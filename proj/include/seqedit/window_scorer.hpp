#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/policy.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/rollin.hpp"
#include "seqedit/types.hpp"
#include "seqedit/vocab.hpp"

namespace seqedit {

namespace detail {

struct Matrix {
  std::int32_t rows = 0, cols = 0;
  std::vector<double> a;

  void init(std::int32_t r, std::int32_t c) {
    rows = r;
    cols = c;
    a.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
  }
  double* row(std::int32_t r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(std::int32_t r) const {
    return a.data() + static_cast<std::size_t>(r) * cols;
  }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline double dot(const double* x, const double* y, std::int32_t n) {
  double s = 0.0;
  for (std::int32_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

// out[r] = tanh(W[r,:].x + b[r])
inline void affine_tanh(const Matrix& w, const Matrix& b, const double* x,
                        std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(w.rows));
  for (std::int32_t r = 0; r < w.rows; ++r)
    out[static_cast<std::size_t>(r)] = std::tanh(dot(w.row(r), x, w.cols) + b.a[static_cast<std::size_t>(r)]);
}

// out[r] = W[r,:].x + b[r]
inline void affine(const Matrix& w, const Matrix& b, const double* x, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(w.rows));
  for (std::int32_t r = 0; r < w.rows; ++r)
    out[static_cast<std::size_t>(r)] = dot(w.row(r), x, w.cols) + b.a[static_cast<std::size_t>(r)];
}

// Backprop through y = tanh(Wx + b): given dy and y, accumulate dW, db
// and return dx contribution into dx (+=).
inline void affine_tanh_backward(const Matrix& w, const double* x, const std::vector<double>& y,
                                 const std::vector<double>& dy, Matrix& dw, Matrix& db,
                                 double* dx) {
  for (std::int32_t r = 0; r < w.rows; ++r) {
    const double dpre = dy[static_cast<std::size_t>(r)] *
                        (1.0 - y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(r)]);
    if (dpre == 0.0) continue;
    db.a[static_cast<std::size_t>(r)] += dpre;
    const double* wr = w.row(r);
    double* dwr = dw.row(r);
    for (std::int32_t c = 0; c < w.cols; ++c) {
      dwr[c] += dpre * x[c];
      if (dx) dx[c] += dpre * wr[c];
    }
  }
}

inline void affine_backward(const Matrix& w, const double* x, const std::vector<double>& dy,
                            Matrix& dw, Matrix& db, double* dx) {
  for (std::int32_t r = 0; r < w.rows; ++r) {
    const double d = dy[static_cast<std::size_t>(r)];
    if (d == 0.0) continue;
    db.a[static_cast<std::size_t>(r)] += d;
    const double* wr = w.row(r);
    double* dwr = dw.row(r);
    for (std::int32_t c = 0; c < w.cols; ++c) {
      dwr[c] += d * x[c];
      if (dx) dx[c] += d * wr[c];
    }
  }
}

// Numerically stable log-softmax cross-entropy; fills dscores with
// weight * (softmax - onehot(target)) when requested.
inline double cross_entropy(const std::vector<double>& scores, std::size_t target, double weight,
                            std::vector<double>* dscores) {
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  const double logz = std::log(z) + mx;
  if (dscores) {
    dscores->resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
      (*dscores)[i] = weight * (std::exp(scores[i] - logz) - (i == target ? 1.0 : 0.0));
  }
  return logz - scores[target];
}

}  // namespace detail

struct ScorerConfig {
  std::int32_t embed_dim = 32;
  std::int32_t hidden_dim = 64;
  std::int32_t max_len = 64;
  std::int32_t window = 2;
  std::int32_t k_max = 8;
  std::uint64_t init_seed = 1;
};

// Named parameter set; gradients use the same structure.
struct ParamSet {
  detail::Matrix tok_emb, pos_emb, lvl_emb;
  detail::Matrix w_rps, b_rps, w_cand, b_cand, v_del;
  detail::Matrix w_plh, b_plh, w_plh_out, b_plh_out;
  detail::Matrix w_ins, b_ins, w_ins_out, b_ins_out;

  template <class F>
  void for_each(F&& f) {
    f("tok_emb", tok_emb), f("pos_emb", pos_emb), f("lvl_emb", lvl_emb);
    f("w_rps", w_rps), f("b_rps", b_rps), f("w_cand", w_cand), f("b_cand", b_cand);
    f("v_del", v_del);
    f("w_plh", w_plh), f("b_plh", b_plh), f("w_plh_out", w_plh_out), f("b_plh_out", b_plh_out);
    f("w_ins", w_ins), f("b_ins", b_ins), f("w_ins_out", w_ins_out), f("b_ins_out", b_ins_out);
  }
  template <class F>
  void for_each(F&& f) const {
    const_cast<ParamSet*>(this)->for_each(
        [&](const char* name, detail::Matrix& m) { f(name, static_cast<const detail::Matrix&>(m)); });
  }

  void shape_like(std::int32_t vocab, std::int32_t levels, const ScorerConfig& c) {
    tok_emb.init(vocab, c.embed_dim);
    pos_emb.init(c.max_len, c.embed_dim);
    lvl_emb.init(levels, c.embed_dim);
    w_rps.init(c.hidden_dim, c.embed_dim), b_rps.init(1, c.hidden_dim);
    w_cand.init(c.hidden_dim, c.embed_dim), b_cand.init(1, c.hidden_dim);
    v_del.init(1, c.hidden_dim);
    w_plh.init(c.hidden_dim, c.embed_dim), b_plh.init(1, c.hidden_dim);
    w_plh_out.init(c.k_max + 1, c.hidden_dim), b_plh_out.init(1, c.k_max + 1);
    w_ins.init(c.hidden_dim, c.embed_dim), b_ins.init(1, c.hidden_dim);
    w_ins_out.init(vocab, c.hidden_dim), b_ins_out.init(1, vocab);
  }

  void zero() {
    for_each([](const char*, detail::Matrix& m) { m.zero(); });
  }
};

struct LossReport {
  double total = 0.0;
  double rps_ce = 0.0, plh_ce = 0.0, ins_ce = 0.0;
  std::int64_t rps_positions = 0, plh_positions = 0, ins_positions = 0;
  std::int64_t clipped_gaps = 0;  // oracle gaps clamped to k_max in the labels
};

// Windowed feedforward pointer-scorer over token + position embeddings:
// a slot is represented by the mean embedding of a small window around
// it plus its position embedding; reposition scores are dot products
// with candidate-token representations (candidate 0 is a learned
// deletion vector); placeholder and token heads are one-hidden-layer
// classifiers on gap and placeholder representations. Level
// conditioning is an added embedding on slot/gap/token representations.
class WindowScorer final : public PolicyModel {
public:
  WindowScorer(Vocabulary vocab, ScorerConfig cfg = {})
      : vocab_(std::move(vocab)), cfg_(cfg) {
    params_.shape_like(vocab_.size(), vocab_.num_levels(), cfg_);
    Rng rng = make_rng(cfg_.init_seed, 0x5C);
    params_.for_each([&](const char*, detail::Matrix& m) {
      for (double& v : m.a) v = (rand_unit(rng) * 2.0 - 1.0) * 0.08;
    });
  }

  const Vocabulary& vocab() const { return vocab_; }
  const ScorerConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  std::int32_t max_placeholders() const override { return cfg_.k_max; }
  std::int32_t max_state_length() const override { return cfg_.max_len - 1; }
  bool can_generate(TokenId id) const override { return vocab_.generable(id); }

  HeadScores forward(const EditState& state, std::optional<int> level = {}) const override {
    const Ctx ctx = make_context(state.ids, level);
    HeadScores out;
    slot_head(ctx, &out.slot, nullptr, nullptr);
    gap_head(ctx, &out.gap, nullptr);
    token_head(ctx, &out.token, nullptr, nullptr);
    return out;
  }

  // Mean cross-entropy per head over the labeled positions of the
  // batch; total is the sum of the three head means. When grads is
  // non-null the exact gradient of total is accumulated into it.
  LossReport loss(const RollInBatch& batch, ParamSet* grads = nullptr) const {
    LossReport rep;
    for (const auto& s : batch) {
      validate_sample(s);
      rep.rps_positions += static_cast<std::int64_t>(s.rps_labels.slots.size());
      rep.plh_positions += static_cast<std::int64_t>(s.ins_labels.placeholder_counts.size());
      rep.ins_positions += static_cast<std::int64_t>(s.ins_labels.tokens.size());
    }
    const double w_rps = rep.rps_positions > 0 ? 1.0 / static_cast<double>(rep.rps_positions) : 0.0;
    const double w_plh = rep.plh_positions > 0 ? 1.0 / static_cast<double>(rep.plh_positions) : 0.0;
    const double w_ins = rep.ins_positions > 0 ? 1.0 / static_cast<double>(rep.ins_positions) : 0.0;

    for (const auto& s : batch) {
      rep.rps_ce += w_rps * rps_pass(s, w_rps, grads);
      rep.plh_ce += w_plh * plh_pass(s, w_plh, grads, &rep.clipped_gaps);
      rep.ins_ce += w_ins * ins_pass(s, w_ins, grads);
    }
    rep.total = rep.rps_ce + rep.plh_ce + rep.ins_ce;
    if (!std::isfinite(rep.total)) throw numeric_error("non-finite training loss");
    return rep;
  }

  // Plain gradient-descent update; a non-finite gradient rejects the
  // whole step.
  void sgd_step(const ParamSet& grads, double lr) {
    if (lr <= 0.0) throw config_error("learning rate must be positive");
    std::vector<const detail::Matrix*> gs;
    grads.for_each([&](const char* name, const detail::Matrix& m) {
      for (double v : m.a)
        if (!std::isfinite(v)) throw numeric_error(std::string("non-finite gradient in ") + name);
      gs.push_back(&m);
    });
    std::size_t idx = 0;
    params_.for_each([&](const char*, detail::Matrix& m) {
      const detail::Matrix& g = *gs[idx++];
      for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] -= lr * g.a[i];
    });
  }

  // ---- checkpoint io -------------------------------------------------

  void save(std::ostream& out) const {
    out << "seqedit-checkpoint v1\n";
    out << "embed_dim " << cfg_.embed_dim << "\nhidden_dim " << cfg_.hidden_dim << "\nmax_len "
        << cfg_.max_len << "\nwindow " << cfg_.window << "\nk_max " << cfg_.k_max
        << "\ninit_seed " << cfg_.init_seed << '\n';
    out << "num_levels " << vocab_.num_levels() << '\n';
    out << "content_tokens " << vocab_.num_content() << '\n';
    for (TokenId id = vocab_.first_content(); id < vocab_.size(); ++id)
      out << vocab_.token(id) << '\n';
    out << std::hexfloat;
    params_.for_each([&](const char* name, const detail::Matrix& m) {
      out << name << ' ' << m.rows << ' ' << m.cols << '\n';
      for (std::int32_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::int32_t c = 0; c < m.cols; ++c) out << (c ? " " : "") << row[c];
        out << '\n';
      }
    });
    out << std::defaultfloat << "end\n";
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot write checkpoint " + path);
    save(out);
  }

  static WindowScorer load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "seqedit-checkpoint v1")
      throw parse_error("not a seqedit checkpoint");
    ScorerConfig cfg;
    auto read_kv = [&](const char* key) -> std::string {
      std::string k, v;
      in >> k >> v;
      if (k != key) throw parse_error("checkpoint: expected " + std::string(key) + ", got " + k);
      return v;
    };
    cfg.embed_dim = std::stoi(read_kv("embed_dim"));
    cfg.hidden_dim = std::stoi(read_kv("hidden_dim"));
    cfg.max_len = std::stoi(read_kv("max_len"));
    cfg.window = std::stoi(read_kv("window"));
    cfg.k_max = std::stoi(read_kv("k_max"));
    cfg.init_seed = std::stoull(read_kv("init_seed"));
    const int num_levels = std::stoi(read_kv("num_levels"));
    const int n_content = std::stoi(read_kv("content_tokens"));
    Vocabulary vocab(num_levels);
    std::getline(in, line);  // consume end of count line
    for (int i = 0; i < n_content; ++i) {
      if (!std::getline(in, line)) throw parse_error("checkpoint: truncated vocabulary");
      vocab.add(line);
    }
    WindowScorer model(std::move(vocab), cfg);
    model.params_.for_each([&](const char* name, detail::Matrix& m) {
      std::string n;
      std::int32_t r = 0, c = 0;
      in >> n >> r >> c;
      if (n != name || r != m.rows || c != m.cols)
        throw parse_error("checkpoint: parameter mismatch at " + std::string(name));
      std::string word;
      for (double& v : m.a) {
        if (!(in >> word)) throw parse_error("checkpoint: truncated parameters");
        char* end = nullptr;
        v = std::strtod(word.c_str(), &end);  // strtod handles hexfloat portably
        if (end == word.c_str() || *end != '\0')
          throw parse_error("checkpoint: bad parameter value '" + word + "'");
      }
    });
    std::string tail;
    in >> tail;
    if (tail != "end") throw parse_error("checkpoint: missing end marker");
    return model;
  }

  static WindowScorer load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open checkpoint " + path);
    return load(in);
  }

private:
  // Cached per-state context: x[i] is the window-mean token embedding
  // plus the position embedding; lvl is the added level embedding row
  // (null when absent).
  struct Ctx {
    const TokenSeq* ids = nullptr;
    std::optional<int> level;
    std::vector<std::vector<double>> x;
    const double* lvl = nullptr;
  };

  Ctx make_context(const TokenSeq& ids, std::optional<int> level) const {
    const auto L = static_cast<std::int32_t>(ids.size());
    if (L + 1 > cfg_.max_len)
      throw capacity_error("state length " + std::to_string(L) + " exceeds model capacity " +
                           std::to_string(cfg_.max_len - 1));
    Ctx ctx;
    ctx.ids = &ids;
    ctx.level = level;
    if (level) {
      if (vocab_.num_levels() > 0) {
        if (*level < 0 || *level >= vocab_.num_levels())
          throw config_error("level " + std::to_string(*level) + " outside model level table");
        ctx.lvl = params_.lvl_emb.row(*level);
      }
    }
    const std::int32_t d = cfg_.embed_dim;
    ctx.x.assign(static_cast<std::size_t>(L), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (std::int32_t i = 0; i < L; ++i) {
      auto& xi = ctx.x[static_cast<std::size_t>(i)];
      const std::int32_t lo = std::max<std::int32_t>(0, i - cfg_.window);
      const std::int32_t hi = std::min<std::int32_t>(L - 1, i + cfg_.window);
      const double inv = 1.0 / static_cast<double>(hi - lo + 1);
      for (std::int32_t j = lo; j <= hi; ++j) {
        const double* e = params_.tok_emb.row(ids[static_cast<std::size_t>(j)]);
        for (std::int32_t c = 0; c < d; ++c) xi[static_cast<std::size_t>(c)] += inv * e[c];
      }
      const double* p = params_.pos_emb.row(i);
      for (std::int32_t c = 0; c < d; ++c) xi[static_cast<std::size_t>(c)] += p[c];
    }
    return ctx;
  }

  // Scatters a gradient on x[i] back to the embeddings it was built from.
  void context_backward(const Ctx& ctx, std::int32_t i, const double* dx, ParamSet& g) const {
    const auto L = static_cast<std::int32_t>(ctx.ids->size());
    const std::int32_t d = cfg_.embed_dim;
    const std::int32_t lo = std::max<std::int32_t>(0, i - cfg_.window);
    const std::int32_t hi = std::min<std::int32_t>(L - 1, i + cfg_.window);
    const double inv = 1.0 / static_cast<double>(hi - lo + 1);
    for (std::int32_t j = lo; j <= hi; ++j) {
      double* e = g.tok_emb.row((*ctx.ids)[static_cast<std::size_t>(j)]);
      for (std::int32_t c = 0; c < d; ++c) e[c] += inv * dx[c];
    }
    double* p = g.pos_emb.row(i);
    for (std::int32_t c = 0; c < d; ++c) p[c] += dx[c];
  }

  void add_level_grad(const Ctx& ctx, const double* dvec, ParamSet& g) const {
    if (!ctx.lvl) return;
    double* row = g.lvl_emb.row(*ctx.level);
    for (std::int32_t c = 0; c < cfg_.embed_dim; ++c) row[c] += dvec[c];
  }

  // ---- reposition head -----------------------------------------------

  // scores[k][j] = h_k . cand_j (j=0 is the deletion vector). When
  // labels are given, returns the summed CE and backprops with the
  // given weight.
  double slot_head(const Ctx& ctx, std::vector<std::vector<double>>* scores,
                   const std::vector<std::int32_t>* labels, ParamSet* g,
                   double weight = 0.0) const {
    const auto L = static_cast<std::int32_t>(ctx.ids->size());
    const std::int32_t d = cfg_.embed_dim;
    std::vector<std::vector<double>> h(static_cast<std::size_t>(L));
    std::vector<std::vector<double>> cand(static_cast<std::size_t>(L));
    std::vector<std::vector<double>> in_h(static_cast<std::size_t>(L));
    std::vector<std::vector<double>> in_c(static_cast<std::size_t>(L));
    for (std::int32_t k = 0; k < L; ++k) {
      auto& a = in_h[static_cast<std::size_t>(k)];
      a = ctx.x[static_cast<std::size_t>(k)];
      if (ctx.lvl)
        for (std::int32_t c = 0; c < d; ++c) a[static_cast<std::size_t>(c)] += ctx.lvl[c];
      detail::affine_tanh(params_.w_rps, params_.b_rps, a.data(), h[static_cast<std::size_t>(k)]);

      auto& ci = in_c[static_cast<std::size_t>(k)];
      ci.assign(static_cast<std::size_t>(d), 0.0);
      const double* e = params_.tok_emb.row((*ctx.ids)[static_cast<std::size_t>(k)]);
      const double* p = params_.pos_emb.row(k);
      for (std::int32_t c = 0; c < d; ++c) ci[static_cast<std::size_t>(c)] = e[c] + p[c];
      detail::affine_tanh(params_.w_cand, params_.b_cand, ci.data(),
                          cand[static_cast<std::size_t>(k)]);
    }

    double ce = 0.0;
    if (scores) scores->assign(static_cast<std::size_t>(L), {});
    std::vector<std::vector<double>> dcand;
    if (g) dcand.assign(static_cast<std::size_t>(L), std::vector<double>(
                            static_cast<std::size_t>(cfg_.hidden_dim), 0.0));
    std::vector<double> row(static_cast<std::size_t>(L) + 1);
    std::vector<double> drow, dh(static_cast<std::size_t>(cfg_.hidden_dim));
    for (std::int32_t k = 0; k < L; ++k) {
      const auto& hk = h[static_cast<std::size_t>(k)];
      row[0] = detail::dot(hk.data(), params_.v_del.row(0), cfg_.hidden_dim);
      for (std::int32_t j = 1; j <= L; ++j)
        row[static_cast<std::size_t>(j)] =
            detail::dot(hk.data(), cand[static_cast<std::size_t>(j - 1)].data(), cfg_.hidden_dim);
      if (scores) (*scores)[static_cast<std::size_t>(k)] = row;
      if (!labels) continue;

      ce += detail::cross_entropy(row, static_cast<std::size_t>((*labels)[static_cast<std::size_t>(k)]),
                                  weight, g ? &drow : nullptr);
      if (!g) continue;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::int32_t t = 0; t < cfg_.hidden_dim; ++t) {
        dh[static_cast<std::size_t>(t)] += drow[0] * params_.v_del.row(0)[t];
        g->v_del.row(0)[t] += drow[0] * hk[static_cast<std::size_t>(t)];
      }
      for (std::int32_t j = 1; j <= L; ++j) {
        const double dj = drow[static_cast<std::size_t>(j)];
        if (dj == 0.0) continue;
        const auto& cj = cand[static_cast<std::size_t>(j - 1)];
        auto& dcj = dcand[static_cast<std::size_t>(j - 1)];
        for (std::int32_t t = 0; t < cfg_.hidden_dim; ++t) {
          dh[static_cast<std::size_t>(t)] += dj * cj[static_cast<std::size_t>(t)];
          dcj[static_cast<std::size_t>(t)] += dj * hk[static_cast<std::size_t>(t)];
        }
      }
      std::vector<double> dxk(static_cast<std::size_t>(d), 0.0);
      detail::affine_tanh_backward(params_.w_rps, in_h[static_cast<std::size_t>(k)].data(), hk, dh,
                                   g->w_rps, g->b_rps, dxk.data());
      context_backward(ctx, k, dxk.data(), *g);
      add_level_grad(ctx, dxk.data(), *g);
    }
    if (g && labels) {
      for (std::int32_t j = 0; j < L; ++j) {
        std::vector<double> din(static_cast<std::size_t>(d), 0.0);
        detail::affine_tanh_backward(params_.w_cand, in_c[static_cast<std::size_t>(j)].data(),
                                     cand[static_cast<std::size_t>(j)],
                                     dcand[static_cast<std::size_t>(j)], g->w_cand, g->b_cand,
                                     din.data());
        double* e = g->tok_emb.row((*ctx.ids)[static_cast<std::size_t>(j)]);
        double* p = g->pos_emb.row(j);
        for (std::int32_t c = 0; c < d; ++c) {
          e[c] += din[static_cast<std::size_t>(c)];
          p[c] += din[static_cast<std::size_t>(c)];
        }
      }
    }
    return ce;
  }

  // ---- placeholder head ------------------------------------------------

  double gap_head(const Ctx& ctx, std::vector<std::vector<double>>* scores,
                  ParamSet* g, const std::vector<std::int32_t>* labels = nullptr,
                  double weight = 0.0) const {
    const auto L = static_cast<std::int32_t>(ctx.ids->size());
    const std::int32_t d = cfg_.embed_dim;
    if (scores) scores->assign(static_cast<std::size_t>(L) + 1, {});
    double ce = 0.0;
    std::vector<double> zg(static_cast<std::size_t>(d));
    std::vector<double> q, logits, dlogits, dq(static_cast<std::size_t>(cfg_.hidden_dim));
    for (std::int32_t gp = 0; gp <= L; ++gp) {
      std::fill(zg.begin(), zg.end(), 0.0);
      std::int32_t contributors = 0;
      for (std::int32_t i : {gp - 1, gp})
        if (i >= 0 && i < L) ++contributors;
      if (contributors > 0) {
        const double inv = 1.0 / static_cast<double>(contributors);
        for (std::int32_t i : {gp - 1, gp}) {
          if (i < 0 || i >= L) continue;
          const auto& xi = ctx.x[static_cast<std::size_t>(i)];
          for (std::int32_t c = 0; c < d; ++c) zg[static_cast<std::size_t>(c)] += inv * xi[static_cast<std::size_t>(c)];
        }
      }
      const double* p = params_.pos_emb.row(gp);
      for (std::int32_t c = 0; c < d; ++c) zg[static_cast<std::size_t>(c)] += p[c];
      if (ctx.lvl)
        for (std::int32_t c = 0; c < d; ++c) zg[static_cast<std::size_t>(c)] += ctx.lvl[c];

      detail::affine_tanh(params_.w_plh, params_.b_plh, zg.data(), q);
      detail::affine(params_.w_plh_out, params_.b_plh_out, q.data(), logits);
      if (scores) (*scores)[static_cast<std::size_t>(gp)] = logits;
      if (!labels) continue;

      ce += detail::cross_entropy(logits,
                                  static_cast<std::size_t>((*labels)[static_cast<std::size_t>(gp)]),
                                  weight, g ? &dlogits : nullptr);
      if (!g) continue;
      std::fill(dq.begin(), dq.end(), 0.0);
      detail::affine_backward(params_.w_plh_out, q.data(), dlogits, g->w_plh_out, g->b_plh_out,
                              dq.data());
      std::vector<double> dz(static_cast<std::size_t>(d), 0.0);
      detail::affine_tanh_backward(params_.w_plh, zg.data(), q, dq, g->w_plh, g->b_plh, dz.data());

      double* dp = g->pos_emb.row(gp);
      for (std::int32_t c = 0; c < d; ++c) dp[c] += dz[static_cast<std::size_t>(c)];
      add_level_grad(ctx, dz.data(), *g);
      if (contributors > 0) {
        const double inv = 1.0 / static_cast<double>(contributors);
        std::vector<double> dxi(static_cast<std::size_t>(d));
        for (std::int32_t i : {gp - 1, gp}) {
          if (i < 0 || i >= L) continue;
          for (std::int32_t c = 0; c < d; ++c) dxi[static_cast<std::size_t>(c)] = inv * dz[static_cast<std::size_t>(c)];
          context_backward(ctx, i, dxi.data(), *g);
        }
      }
    }
    return ce;
  }

  // ---- token head ------------------------------------------------------

  double token_head(const Ctx& ctx, std::vector<std::vector<double>>* scores,
                    const std::vector<TokenId>* labels, ParamSet* g, double weight = 0.0) const {
    const auto L = static_cast<std::int32_t>(ctx.ids->size());
    const std::int32_t d = cfg_.embed_dim;
    if (scores) scores->clear();
    double ce = 0.0;
    std::size_t plh_index = 0;
    std::vector<double> tin(static_cast<std::size_t>(d));
    std::vector<double> u, logits, dlogits, du(static_cast<std::size_t>(cfg_.hidden_dim));
    for (std::int32_t i = 0; i < L; ++i) {
      if ((*ctx.ids)[static_cast<std::size_t>(i)] != kPlhId) continue;
      const auto& xi = ctx.x[static_cast<std::size_t>(i)];
      for (std::int32_t c = 0; c < d; ++c)
        tin[static_cast<std::size_t>(c)] = xi[static_cast<std::size_t>(c)] + (ctx.lvl ? ctx.lvl[c] : 0.0);
      detail::affine_tanh(params_.w_ins, params_.b_ins, tin.data(), u);
      detail::affine(params_.w_ins_out, params_.b_ins_out, u.data(), logits);
      if (scores) scores->push_back(logits);
      if (labels) {
        ce += detail::cross_entropy(logits, static_cast<std::size_t>((*labels)[plh_index]), weight,
                                    g ? &dlogits : nullptr);
        if (g) {
          std::fill(du.begin(), du.end(), 0.0);
          detail::affine_backward(params_.w_ins_out, u.data(), dlogits, g->w_ins_out,
                                  g->b_ins_out, du.data());
          std::vector<double> dx(static_cast<std::size_t>(d), 0.0);
          detail::affine_tanh_backward(params_.w_ins, tin.data(), u, du, g->w_ins, g->b_ins,
                                       dx.data());
          context_backward(ctx, i, dx.data(), *g);
          add_level_grad(ctx, dx.data(), *g);
        }
      }
      ++plh_index;
    }
    return ce;
  }

  // ---- per-sample loss passes -------------------------------------------

  void validate_sample(const RollInSample& s) const {
    if (s.rps_labels.slots.size() != s.rps_state.ids.size())
      throw malformed_batch_error("reposition labels do not match state length");
    for (std::int32_t v : s.rps_labels.slots)
      if (v < 0 || static_cast<std::size_t>(v) > s.rps_state.ids.size())
        throw malformed_batch_error("reposition label out of range");
    if (s.ins_labels.placeholder_counts.size() != s.ins_state.ids.size() + 1)
      throw malformed_batch_error("placeholder labels do not match state length");
    std::int64_t total = 0;
    for (std::int32_t c : s.ins_labels.placeholder_counts) {
      if (c < 0) throw malformed_batch_error("negative placeholder label");
      total += c;
    }
    if (total != static_cast<std::int64_t>(s.ins_labels.tokens.size()))
      throw malformed_batch_error("token labels do not match placeholder counts");
    for (TokenId t : s.ins_labels.tokens) {
      if (t < 0 || t >= vocab_.size()) throw malformed_batch_error("token label out of range");
      if (t == kPlhId) throw malformed_batch_error("placeholder token used as token label");
    }
  }

  double rps_pass(const RollInSample& s, double weight, ParamSet* g) const {
    if (s.rps_state.ids.empty()) return 0.0;
    const Ctx ctx = make_context(s.rps_state.ids, s.level);
    return slot_head(ctx, nullptr, &s.rps_labels.slots, g, weight);
  }

  double plh_pass(const RollInSample& s, double weight, ParamSet* g,
                  std::int64_t* clipped) const {
    std::vector<std::int32_t> targets = s.ins_labels.placeholder_counts;
    for (auto& c : targets)
      if (c > cfg_.k_max) {
        c = cfg_.k_max;
        if (clipped) ++*clipped;
      }
    const Ctx ctx = make_context(s.ins_state.ids, s.level);
    return gap_head(ctx, nullptr, g, &targets, weight);
  }

  double ins_pass(const RollInSample& s, double weight, ParamSet* g) const {
    if (s.ins_labels.tokens.empty()) return 0.0;
    TokenSeq expanded;
    const auto& z = s.ins_state.ids;
    for (std::size_t gp = 0; gp <= z.size(); ++gp) {
      for (std::int32_t k = 0; k < s.ins_labels.placeholder_counts[gp]; ++k)
        expanded.push_back(kPlhId);
      if (gp < z.size()) expanded.push_back(z[gp]);
    }
    const Ctx ctx = make_context(expanded, s.level);
    return token_head(ctx, nullptr, &s.ins_labels.tokens, g, weight);
  }

  Vocabulary vocab_;
  ScorerConfig cfg_;
  ParamSet params_;
};

// Fresh zero gradient buffer shaped like the model's parameters.
inline ParamSet make_gradients(const WindowScorer& model) {
  ParamSet g;
  g.shape_like(model.vocab().size(), model.vocab().num_levels(), model.config());
  return g;
}

}  // namespace seqedit
