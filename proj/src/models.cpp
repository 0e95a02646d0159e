#include "convtopic/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "convtopic/rng.hpp"

namespace convtopic {
namespace {

void append(std::vector<double>& dst, std::span<const double> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void glorot(Parameter& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
  p.value.fill_uniform(rng, -limit, limit);
}

}  // namespace

// ---------------------------------------------------------------------------
// Context features

std::vector<int> turn_token_ids(const Turn& turn, const Vocabulary& vocab) {
  std::vector<int> ids = vocab.encode(tokenize(turn.user.text));
  const std::vector<int> bot = vocab.encode(tokenize(turn.chatbot.text));
  ids.insert(ids.end(), bot.begin(), bot.end());
  return ids;
}

std::vector<double> mean_embedding(std::span<const int> ids, const EmbeddingMatrix& e) {
  std::vector<double> out(e.dim(), 0.0);
  if (ids.empty()) return out;
  for (int id : ids) axpy(1.0, e.row(id), out);
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<double> build_turn_vector(const Turn& turn, const EmbeddingMatrix& e,
                                      const Vocabulary& vocab) {
  return mean_embedding(turn_token_ids(turn, vocab), e);
}

ContextFeature build_context(const std::vector<std::vector<int>>& turns, const EmbeddingMatrix& e,
                             std::optional<std::vector<double>> act_feature, std::size_t max_turns) {
  if (turns.size() > max_turns) {
    throw std::invalid_argument("context has " + std::to_string(turns.size()) +
                                " turns; at most " + std::to_string(max_turns) + " allowed");
  }
  ContextFeature f;
  f.turn_context.assign(e.dim(), 0.0);
  for (const auto& t : turns) axpy(1.0, mean_embedding(t, e), f.turn_context);
  if (!turns.empty()) {
    for (auto& v : f.turn_context) v /= static_cast<double>(turns.size());
  }
  f.act_feature = std::move(act_feature);
  return f;
}

ContextFeature build_context(const std::vector<Turn>& turns, const EmbeddingMatrix& e,
                             const Vocabulary& vocab, std::optional<std::vector<double>> act_feature,
                             std::size_t max_turns) {
  std::vector<std::vector<int>> ids;
  ids.reserve(turns.size());
  for (const auto& t : turns) ids.push_back(turn_token_ids(t, vocab));
  return build_context(ids, e, std::move(act_feature), max_turns);
}

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::kDan: return "dan";
    case ModelFamily::kAdan: return "adan";
    case ModelFamily::kBiLstm: return "bilstm";
  }
  return "?";
}

std::string_view to_string(ContextMode m) {
  switch (m) {
    case ContextMode::kNone: return "none";
    case ContextMode::kAvg: return "avg";
    case ContextMode::kSeq: return "seq";
  }
  return "?";
}

std::optional<ModelFamily> parse_model_family(std::string_view s) {
  if (s == "dan") return ModelFamily::kDan;
  if (s == "adan") return ModelFamily::kAdan;
  if (s == "bilstm") return ModelFamily::kBiLstm;
  return std::nullopt;
}

std::optional<ContextMode> parse_context_mode(std::string_view s) {
  if (s == "none") return ContextMode::kNone;
  if (s == "avg") return ContextMode::kAvg;
  if (s == "seq") return ContextMode::kSeq;
  return std::nullopt;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// Classifier

Classifier::Classifier(ModelConfig config, EmbeddingMatrix embeddings)
    : config_(config), embeddings_(std::move(embeddings)) {
  if (embeddings_.vocab_size() != config_.vocab_size || embeddings_.dim() != config_.embed_dim) {
    throw ShapeError("embedding table does not match model config");
  }
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (config_.hidden == 0) throw std::invalid_argument("hidden size must be > 0");
}

std::vector<double> Classifier::predict(const ModelInput& in) const {
  Rng unused(0);
  return predict(in, false, unused);
}

std::vector<const Parameter*> Classifier::parameters() const {
  auto params = const_cast<Classifier*>(this)->parameters();
  return {params.begin(), params.end()};
}

std::vector<Parameter*> Classifier::trainable_parameters() {
  std::vector<Parameter*> out;
  for (Parameter* p : parameters()) {
    if (p == &embeddings_.table && !embeddings_.trainable) continue;
    out.push_back(p);
  }
  return out;
}

void Classifier::init_weights(Rng& rng) {
  for (Parameter* p : parameters()) {
    if (p == &embeddings_.table) continue;
    if (p->cols() == 1 || p->name == "attention") {
      p->value.fill(0.0);
    } else {
      glorot(*p, rng);
    }
  }
}

void Classifier::check_input(const ModelInput& in) const {
  if (in.tokens.empty()) throw std::invalid_argument("empty utterance");
  for (int id : in.tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw std::out_of_range("token id out of vocabulary range");
    }
  }
  if (config_.act_feature) {
    if (!in.act_feature || in.act_feature->size() != kNumDialogActs) {
      throw std::invalid_argument("model expects a 14-way dialog act feature");
    }
  }
}

std::vector<double> Classifier::context_vector(const ModelInput& in) const {
  std::vector<double> ctx(embeddings_.dim(), 0.0);
  for (const auto& t : in.context_turns) axpy(1.0, mean_embedding(t, embeddings_), ctx);
  if (!in.context_turns.empty()) {
    for (auto& v : ctx) v /= static_cast<double>(in.context_turns.size());
  }
  return ctx;
}

void Classifier::add_embedding_grad(int id, double scale, std::span<const double> g) {
  if (!embeddings_.trainable || id == kPadId) return;
  axpy(scale, g, embeddings_.table.grad.row(static_cast<std::size_t>(id)));
}

void Classifier::backprop_context(const ModelInput& in, std::span<const double> dctx) {
  if (in.context_turns.empty()) return;
  const double per_turn = 1.0 / static_cast<double>(in.context_turns.size());
  for (const auto& t : in.context_turns) {
    if (t.empty()) continue;
    const double s = per_turn / static_cast<double>(t.size());
    for (int id : t) add_embedding_grad(id, s, dctx);
  }
}

// ---------------------------------------------------------------------------
// DAN

struct DanModel::Trace {
  DenseCache hidden;
  DropoutResult drop;
  DenseCache output;
  std::vector<double> probs;
};

DanModel::DanModel(ModelConfig config, EmbeddingMatrix embeddings)
    : Classifier(config, std::move(embeddings)) {
  if (config_.context == ContextMode::kSeq) {
    throw std::invalid_argument("sequential context is only defined for the BiLSTM");
  }
  w1 = Parameter("w1", config_.hidden, input_width());
  b1 = Parameter("b1", config_.hidden, 1);
  w0 = Parameter("w0", config_.num_labels(), config_.hidden);
  b0 = Parameter("b0", config_.num_labels(), 1);
}

std::size_t DanModel::input_width() const {
  std::size_t w = config_.embed_dim;
  if (config_.context == ContextMode::kAvg) w += config_.embed_dim;
  if (config_.act_feature) w += kNumDialogActs;
  return w;
}

std::vector<double> DanModel::forward(const ModelInput& in, bool training, Rng& rng,
                                      Trace* trace) const {
  check_input(in);
  std::vector<double> x = mean_embedding(in.tokens, embeddings_);
  if (config_.context == ContextMode::kAvg) append(x, context_vector(in));
  if (config_.act_feature) append(x, *in.act_feature);

  auto h = dense_forward(x, w1, b1, Activation::kRelu, trace ? &trace->hidden : nullptr);
  DropoutResult d = dropout(h, config_.dropout, rng, training);
  auto logits = dense_forward(d.output, w0, b0, Activation::kNone, trace ? &trace->output : nullptr);
  auto probs = softmax(logits);
  if (trace != nullptr) {
    trace->drop = std::move(d);
    trace->probs = probs;
  }
  return probs;
}

std::vector<double> DanModel::predict(const ModelInput& in, bool training, Rng& rng) const {
  return forward(in, training, rng, nullptr);
}

double DanModel::accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) {
  Trace tr;
  forward(in, true, rng, &tr);
  CrossEntropy ce = cross_entropy(tr.probs, label);
  auto dd = dense_backward(tr.output, ce.dlogits, w0, b0);
  auto dh = dropout_backward(tr.drop, dd);
  auto dx = dense_backward(tr.hidden, dh, w1, b1);

  const std::size_t dim = config_.embed_dim;
  const double inv_len = 1.0 / static_cast<double>(in.tokens.size());
  std::span<const double> ds(dx.data(), dim);
  for (int id : in.tokens) add_embedding_grad(id, inv_len, ds);
  if (config_.context == ContextMode::kAvg) backprop_context(in, {dx.data() + dim, dim});
  return ce.loss;
}

std::vector<Parameter*> DanModel::parameters() {
  return {&embeddings_.table, &w1, &b1, &w0, &b0};
}

// ---------------------------------------------------------------------------
// ADAN

struct AdanModel::Trace {
  std::vector<DenseCache> hidden;
  std::vector<DropoutResult> drop;
  std::vector<double> extra;  // context (+ act) part shared by every word
};

AdanModel::AdanModel(ModelConfig config, EmbeddingMatrix embeddings)
    : Classifier(config, std::move(embeddings)) {
  if (config_.context == ContextMode::kSeq) {
    throw std::invalid_argument("sequential context is only defined for the BiLSTM");
  }
  attention = Parameter("attention", config_.num_labels(), config_.vocab_size);
  w1 = Parameter("w1", config_.hidden, row_width());
  b1 = Parameter("b1", config_.hidden, 1);
  w0 = Parameter("w0", config_.num_labels(), config_.hidden);
  b0 = Parameter("b0", config_.num_labels(), 1);
}

std::size_t AdanModel::row_width() const {
  std::size_t w = config_.embed_dim;
  if (config_.context == ContextMode::kAvg) w += config_.embed_dim;
  if (config_.act_feature) w += kNumDialogActs;
  return w;
}

AdanOutput AdanModel::forward(const ModelInput& in, bool training, Rng& rng, Trace* trace) const {
  check_input(in);
  const std::size_t K = config_.num_labels();
  const std::size_t L = in.tokens.size();
  const std::size_t D = config_.embed_dim;
  const double inv_len = 1.0 / static_cast<double>(L);

  // Every word embedding is extended by the same context block.
  std::vector<double> extra;
  if (config_.context == ContextMode::kAvg) extra = context_vector(in);
  if (config_.act_feature) append(extra, *in.act_feature);

  AdanOutput out;
  out.attention = Tensor(K, L);
  std::vector<double> logits(K);
  if (trace != nullptr) {
    trace->hidden.resize(K);
    trace->drop.resize(K);
    trace->extra = extra;
  }
  std::vector<double> weights(L);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < L; ++i) weights[i] = attention.value(k, static_cast<std::size_t>(in.tokens[i]));
    const auto alpha = softmax(weights);
    std::copy(alpha.begin(), alpha.end(), out.attention.row(k).begin());

    std::vector<double> s(row_width(), 0.0);
    std::span<double> s_words(s.data(), D);
    for (std::size_t i = 0; i < L; ++i) axpy(alpha[i] * inv_len, embeddings_.row(in.tokens[i]), s_words);
    // sum_i alpha_i = 1, so the replicated block contributes extra / L.
    for (std::size_t j = 0; j < extra.size(); ++j) s[D + j] = extra[j] * inv_len;

    auto h = dense_forward(s, w1, b1, Activation::kRelu, trace ? &trace->hidden[k] : nullptr);
    DropoutResult d = dropout(h, config_.dropout, rng, training);
    logits[k] = dot(w0.value.row(k), d.output) + b0.value(k, 0);
    if (trace != nullptr) trace->drop[k] = std::move(d);
  }
  out.probs = softmax(logits);
  return out;
}

AdanOutput AdanModel::forward_with_attention(const ModelInput& in, bool training, Rng& rng) const {
  return forward(in, training, rng, nullptr);
}

std::vector<double> AdanModel::predict(const ModelInput& in, bool training, Rng& rng) const {
  return forward(in, training, rng, nullptr).probs;
}

double AdanModel::accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) {
  Trace tr;
  AdanOutput out = forward(in, true, rng, &tr);
  CrossEntropy ce = cross_entropy(out.probs, label);

  const std::size_t K = config_.num_labels();
  const std::size_t L = in.tokens.size();
  const std::size_t D = config_.embed_dim;
  const double inv_len = 1.0 / static_cast<double>(L);
  std::vector<double> dextra(tr.extra.size(), 0.0);
  std::vector<double> dalpha(L);

  for (std::size_t k = 0; k < K; ++k) {
    const double dz = ce.dlogits[k];
    std::vector<double> dd(config_.hidden);
    axpy(dz, w0.value.row(k), dd);
    axpy(dz, tr.drop[k].output, w0.grad.row(k));
    b0.grad(k, 0) += dz;
    auto dh = dropout_backward(tr.drop[k], dd);
    auto ds = dense_backward(tr.hidden[k], dh, w1, b1);
    std::span<const double> ds_words(ds.data(), D);
    std::span<const double> ds_extra(ds.data() + D, tr.extra.size());
    const double extra_dot = dot(ds_extra, tr.extra);
    auto alpha = out.attention.row(k);
    for (std::size_t i = 0; i < L; ++i) {
      dalpha[i] = inv_len * (dot(ds_words, embeddings_.row(in.tokens[i])) + extra_dot);
      add_embedding_grad(in.tokens[i], alpha[i] * inv_len, ds_words);
    }
    axpy(inv_len, ds_extra, dextra);  // sum_i alpha_i / L
    auto dw = softmax_backward(alpha, dalpha);
    for (std::size_t i = 0; i < L; ++i) attention.grad(k, static_cast<std::size_t>(in.tokens[i])) += dw[i];
  }
  if (config_.context == ContextMode::kAvg) backprop_context(in, {dextra.data(), D});
  return ce.loss;
}

std::vector<Parameter*> AdanModel::parameters() {
  return {&embeddings_.table, &attention, &w1, &b1, &w0, &b0};
}

// ---------------------------------------------------------------------------
// BiLSTM

struct BiLstmModel::Trace {
  std::vector<LstmCache> fwd;  // fwd[t] consumed input t
  std::vector<LstmCache> bwd;  // bwd[p] consumed input T-1-p
  DropoutResult drop;
  DenseCache output;
  std::vector<double> probs;
};

BiLstmModel::BiLstmModel(ModelConfig config, EmbeddingMatrix embeddings)
    : Classifier(config, std::move(embeddings)),
      forward_cell("lstm_fwd", cell_input_width(), config_.hidden),
      backward_cell("lstm_bwd", cell_input_width(), config_.hidden) {
  w0 = Parameter("w0", config_.num_labels(), output_input_width());
  b0 = Parameter("b0", config_.num_labels(), 1);
}

std::size_t BiLstmModel::cell_input_width() const {
  return config_.context == ContextMode::kAvg ? 2 * config_.embed_dim : config_.embed_dim;
}

std::size_t BiLstmModel::output_input_width() const {
  return 2 * config_.hidden + (config_.act_feature ? kNumDialogActs : 0);
}

std::vector<std::vector<double>> BiLstmModel::timestep_inputs(const ModelInput& in) const {
  std::vector<std::vector<double>> xs;
  if (config_.context == ContextMode::kSeq) {
    for (const auto& t : in.context_turns) xs.push_back(mean_embedding(t, embeddings_));
  }
  std::vector<double> ctx;
  if (config_.context == ContextMode::kAvg) ctx = context_vector(in);
  for (int id : in.tokens) {
    auto e = embeddings_.row(id);
    std::vector<double> x(e.begin(), e.end());
    append(x, ctx);
    xs.push_back(std::move(x));
  }
  return xs;
}

std::vector<double> BiLstmModel::forward(const ModelInput& in, bool training, Rng& rng,
                                         Trace* trace) const {
  check_input(in);
  const auto xs = timestep_inputs(in);
  const std::size_t T = xs.size();
  const std::size_t H = config_.hidden;
  if (trace != nullptr) {
    trace->fwd.resize(T);
    trace->bwd.resize(T);
  }
  LstmState f{std::vector<double>(H, 0.0), std::vector<double>(H, 0.0)};
  for (std::size_t t = 0; t < T; ++t) {
    f = lstm_cell_forward(xs[t], f.h, f.c, forward_cell, trace ? &trace->fwd[t] : nullptr);
  }
  LstmState b{std::vector<double>(H, 0.0), std::vector<double>(H, 0.0)};
  for (std::size_t p = 0; p < T; ++p) {
    b = lstm_cell_forward(xs[T - 1 - p], b.h, b.c, backward_cell, trace ? &trace->bwd[p] : nullptr);
  }
  std::vector<double> feat = f.h;
  append(feat, b.h);
  DropoutResult d = dropout(feat, config_.dropout, rng, training);
  std::vector<double> head = d.output;
  if (config_.act_feature) append(head, *in.act_feature);
  auto logits = dense_forward(head, w0, b0, Activation::kNone, trace ? &trace->output : nullptr);
  auto probs = softmax(logits);
  if (trace != nullptr) {
    trace->drop = std::move(d);
    trace->probs = probs;
  }
  return probs;
}

std::vector<double> BiLstmModel::predict(const ModelInput& in, bool training, Rng& rng) const {
  return forward(in, training, rng, nullptr);
}

double BiLstmModel::accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) {
  Trace tr;
  forward(in, true, rng, &tr);
  CrossEntropy ce = cross_entropy(tr.probs, label);
  const std::size_t H = config_.hidden;
  const std::size_t T = tr.fwd.size();

  auto dhead = dense_backward(tr.output, ce.dlogits, w0, b0);
  auto dfeat = dropout_backward(tr.drop, std::span<const double>(dhead.data(), 2 * H));

  std::vector<std::vector<double>> dxs(T, std::vector<double>(cell_input_width(), 0.0));
  std::vector<double> dh(dfeat.begin(), dfeat.begin() + static_cast<std::ptrdiff_t>(H));
  std::vector<double> dc(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    auto g = lstm_cell_backward(tr.fwd[t], dh, dc, forward_cell);
    axpy(1.0, g.dx, dxs[t]);
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  dh.assign(dfeat.begin() + static_cast<std::ptrdiff_t>(H), dfeat.end());
  dc.assign(H, 0.0);
  for (std::size_t p = T; p-- > 0;) {
    auto g = lstm_cell_backward(tr.bwd[p], dh, dc, backward_cell);
    axpy(1.0, g.dx, dxs[T - 1 - p]);
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }

  const std::size_t D = config_.embed_dim;
  const std::size_t prefix = config_.context == ContextMode::kSeq ? in.context_turns.size() : 0;
  for (std::size_t j = 0; j < prefix; ++j) {
    const auto& turn = in.context_turns[j];
    for (int id : turn) add_embedding_grad(id, 1.0 / static_cast<double>(turn.size()), dxs[j]);
  }
  std::vector<double> dctx(D, 0.0);
  for (std::size_t i = 0; i < in.tokens.size(); ++i) {
    const auto& dx = dxs[prefix + i];
    add_embedding_grad(in.tokens[i], 1.0, std::span<const double>(dx.data(), D));
    if (config_.context == ContextMode::kAvg) axpy(1.0, std::span<const double>(dx.data() + D, D), dctx);
  }
  if (config_.context == ContextMode::kAvg) backprop_context(in, dctx);
  return ce.loss;
}

std::vector<Parameter*> BiLstmModel::parameters() {
  return {&embeddings_.table, &forward_cell.wx, &forward_cell.wh, &forward_cell.b,
          &backward_cell.wx,  &backward_cell.wh, &backward_cell.b, &w0, &b0};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Classifier> make_classifier(const ModelConfig& config, EmbeddingMatrix embeddings,
                                            std::uint64_t seed) {
  std::unique_ptr<Classifier> m;
  switch (config.family) {
    case ModelFamily::kDan: m = std::make_unique<DanModel>(config, std::move(embeddings)); break;
    case ModelFamily::kAdan: m = std::make_unique<AdanModel>(config, std::move(embeddings)); break;
    case ModelFamily::kBiLstm: m = std::make_unique<BiLstmModel>(config, std::move(embeddings)); break;
  }
  Rng rng(seed);
  m->init_weights(rng);
  return m;
}

long double parameter_count(const ModelConfig& c) {
  const long double V = c.vocab_size, D = c.embed_dim, H = c.hidden,
                    K = static_cast<long double>(c.num_labels());
  const long double ctx = c.context == ContextMode::kAvg ? D : 0.0L;
  const long double act = c.act_feature ? static_cast<long double>(kNumDialogActs) : 0.0L;
  switch (c.family) {
    case ModelFamily::kDan: return V * D + H * (D + ctx + act) + H + K * H + K;
    case ModelFamily::kAdan: return V * D + K * V + H * (D + ctx + act) + H + K * H + K;
    case ModelFamily::kBiLstm: {
      const long double in = D + ctx;
      return V * D + 2 * (4 * H * in + 4 * H * H + 4 * H) + K * (2 * H + act) + K;
    }
  }
  return 0;
}

std::vector<double> predict_dialog_act(const Classifier& act_model, const ModelInput& in) {
  if (act_model.config().labels != LabelSpace::kDialogAct) {
    throw std::invalid_argument("act model must predict the dialog act label space");
  }
  return act_model.predict(in);
}

}  // namespace convtopic
