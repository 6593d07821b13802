#include "daemb/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace daemb {

void validate_encoder_config(const EncoderConfig& cfg) {
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("encoder config: dropout must be in [0, 1)");
  }
  if (cfg.max_seq_len < 1) {
    throw std::invalid_argument("encoder config: max_seq_len must be >= 1");
  }
  if (cfg.kind == EncoderKind::cnn) {
    if (cfg.cnn_widths.empty() || cfg.cnn_widths.size() != cfg.cnn_maps.size()) {
      throw std::invalid_argument(
          "encoder config: cnn widths and feature map counts must pair up");
    }
    const Index total = std::accumulate(cfg.cnn_maps.begin(), cfg.cnn_maps.end(),
                                        Index{0});
    if (total != cfg.sentence_dim) {
      throw std::invalid_argument(
          "encoder config: sentence_dim must equal the total cnn feature maps");
    }
  } else if (cfg.kind == EncoderKind::bilstm) {
    if (cfg.sentence_dim != 2 * cfg.bilstm_hidden) {
      throw std::invalid_argument(
          "encoder config: sentence_dim must equal 2 * bilstm_hidden");
    }
  }
}

// ---------------------------------------------------------------------------
// BoW

Vector bow_encode(const Document& doc, const EmbeddingMatrix& emb) {
  Vector out = Vector::Zero(emb.dim());
  for (const auto& tok : doc.tokens) {
    const int id = emb.vocab.id(tok);
    if (id >= 0) out += emb.vectors.row(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CNN

Vector cnn_forward(const EncoderConfig& cfg, const CnnParams& params,
                   const Matrix& words, CnnCache* cache) {
  const Index d = words.cols();
  const Index max_width =
      *std::max_element(cfg.cnn_widths.begin(), cfg.cnn_widths.end());
  const Index t_len = std::max<Index>(words.rows(), max_width);
  Matrix padded = Matrix::Zero(t_len, d);
  if (words.rows() > 0) padded.topRows(words.rows()) = words;

  Vector sentence(cfg.sentence_dim);
  if (cache) {
    cache->padded = padded;
    cache->argmax.assign(cfg.cnn_widths.size(), {});
    cache->peak.assign(cfg.cnn_widths.size(), {});
  }

  Index offset = 0;
  for (std::size_t f = 0; f < cfg.cnn_widths.size(); ++f) {
    const Index width = cfg.cnn_widths[f];
    const Index maps = cfg.cnn_maps[f];
    const Index positions = t_len - width + 1;

    // im2col: each row is a flattened window.
    Matrix windows(positions, width * d);
    for (Index t = 0; t < positions; ++t)
      for (Index k = 0; k < width; ++k)
        windows.row(t).segment(k * d, d) = padded.row(t + k);

    const Matrix pre =
        (windows * params.w[f].transpose()).rowwise() + params.b[f].transpose();

    std::vector<Index> argmax(maps, 0);
    Vector peak(maps);
    for (Index j = 0; j < maps; ++j) {
      Index best = 0;
      pre.col(j).maxCoeff(&best);
      argmax[j] = best;
      peak(j) = pre(best, j);
      sentence(offset + j) = std::max(0.0, peak(j));
    }
    if (cache) {
      cache->argmax[f] = std::move(argmax);
      cache->peak[f] = std::move(peak);
    }
    offset += maps;
  }
  return sentence;
}

void cnn_backward(const EncoderConfig& cfg, const CnnParams& params,
                  const CnnCache& cache, const Vector& upstream,
                  CnnParams& grads, Matrix& input_grads) {
  const Index d = cache.padded.cols();
  input_grads = Matrix::Zero(cache.padded.rows(), d);

  Index offset = 0;
  for (std::size_t f = 0; f < cfg.cnn_widths.size(); ++f) {
    const Index width = cfg.cnn_widths[f];
    const Index maps = cfg.cnn_maps[f];
    for (Index j = 0; j < maps; ++j) {
      const double up = upstream(offset + j);
      if (up == 0.0 || cache.peak[f](j) <= 0.0) continue;  // ReLU gate
      const Index t = cache.argmax[f][j];
      grads.b[f](j) += up;
      for (Index k = 0; k < width; ++k) {
        grads.w[f].row(j).segment(k * d, d) += up * cache.padded.row(t + k);
        input_grads.row(t + k) += up * params.w[f].row(j).segment(k * d, d);
      }
    }
    offset += maps;
  }
}

// ---------------------------------------------------------------------------
// BiLSTM

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Runs one direction over the rows of `inputs` in order; the caller reverses
// rows for the backward direction.
LstmDirCache lstm_run(const LstmDirParams& p, const Matrix& inputs) {
  const Index t_len = inputs.rows();
  const Index h = p.wh.cols();
  LstmDirCache cache;
  cache.gates.resize(t_len, 4 * h);
  cache.cells.resize(t_len, h);
  cache.hidden.resize(t_len, h);

  Vector c_prev = Vector::Zero(h);
  Vector h_prev = Vector::Zero(h);
  for (Index t = 0; t < t_len; ++t) {
    Vector z = p.wx * inputs.row(t).transpose() + p.wh * h_prev + p.b;
    for (Index u = 0; u < h; ++u) {
      const double gi = sigmoid(z(u));
      const double gf = sigmoid(z(h + u));
      const double go = sigmoid(z(2 * h + u));
      const double gg = std::tanh(z(3 * h + u));
      const double c = gf * c_prev(u) + gi * gg;
      cache.gates(t, u) = gi;
      cache.gates(t, h + u) = gf;
      cache.gates(t, 2 * h + u) = go;
      cache.gates(t, 3 * h + u) = gg;
      cache.cells(t, u) = c;
      cache.hidden(t, u) = go * std::tanh(c);
    }
    c_prev = cache.cells.row(t);
    h_prev = cache.hidden.row(t);
  }
  return cache;
}

// BPTT for one direction. dh_seq holds the pooled upstream per step; input
// gradients are written in the direction's own step order.
void lstm_backprop(const LstmDirParams& p, const Matrix& inputs,
                   const LstmDirCache& cache, const Matrix& dh_seq,
                   LstmDirParams& grads, Matrix& dinputs) {
  const Index t_len = inputs.rows();
  const Index h = p.wh.cols();
  dinputs = Matrix::Zero(t_len, inputs.cols());

  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  for (Index t = t_len - 1; t >= 0; --t) {
    const Vector dh = dh_seq.row(t).transpose() + dh_next;
    Vector dz(4 * h);
    Vector dc(h);
    for (Index u = 0; u < h; ++u) {
      const double gi = cache.gates(t, u);
      const double gf = cache.gates(t, h + u);
      const double go = cache.gates(t, 2 * h + u);
      const double gg = cache.gates(t, 3 * h + u);
      const double c = cache.cells(t, u);
      const double tc = std::tanh(c);
      const double c_prev = t > 0 ? cache.cells(t - 1, u) : 0.0;

      const double d_out = dh(u) * tc;
      dc(u) = dh(u) * go * (1.0 - tc * tc) + dc_next(u);
      const double d_in = dc(u) * gg;
      const double d_forget = dc(u) * c_prev;
      const double d_cand = dc(u) * gi;

      dz(u) = d_in * gi * (1.0 - gi);
      dz(h + u) = d_forget * gf * (1.0 - gf);
      dz(2 * h + u) = d_out * go * (1.0 - go);
      dz(3 * h + u) = d_cand * (1.0 - gg * gg);
    }
    grads.wx += dz * inputs.row(t);
    if (t > 0) grads.wh += dz * cache.hidden.row(t - 1);
    grads.b += dz;
    dinputs.row(t) = (p.wx.transpose() * dz).transpose();
    dh_next = p.wh.transpose() * dz;
    for (Index u = 0; u < h; ++u) dc_next(u) = dc(u) * cache.gates(t, h + u);
  }
}

}  // namespace

Vector bilstm_forward(const EncoderConfig& cfg, const BiLstmParams& params,
                      const Matrix& words, BiLstmCache* cache) {
  const Index h = cfg.bilstm_hidden;
  if (words.rows() == 0) {
    if (cache) cache->empty = true;
    return Vector::Zero(2 * h);
  }
  const Matrix reversed = words.colwise().reverse();
  LstmDirCache fwd = lstm_run(params.fwd, words);
  LstmDirCache bwd = lstm_run(params.bwd, reversed);

  // Channel j < h pools the forward states, j >= h the backward states;
  // pooling over steps equals pooling over time.
  Vector sentence(2 * h);
  std::vector<Index> argmax(2 * h, 0);
  for (Index u = 0; u < h; ++u) {
    Index best = 0;
    sentence(u) = fwd.hidden.col(u).maxCoeff(&best);
    argmax[u] = best;
    sentence(h + u) = bwd.hidden.col(u).maxCoeff(&best);
    argmax[h + u] = best;
  }
  if (cache) {
    cache->inputs = words;
    cache->fwd = std::move(fwd);
    cache->bwd = std::move(bwd);
    cache->argmax = std::move(argmax);
    cache->empty = false;
  }
  return sentence;
}

void bilstm_backward(const EncoderConfig& cfg, const BiLstmParams& params,
                     const BiLstmCache& cache, const Vector& upstream,
                     BiLstmParams& grads, Matrix& input_grads) {
  const Index h = cfg.bilstm_hidden;
  if (cache.empty) {
    input_grads.resize(0, 0);
    return;
  }
  const Index t_len = cache.inputs.rows();
  Matrix dh_fwd = Matrix::Zero(t_len, h);
  Matrix dh_bwd = Matrix::Zero(t_len, h);
  for (Index u = 0; u < h; ++u) {
    dh_fwd(cache.argmax[u], u) += upstream(u);
    dh_bwd(cache.argmax[h + u], u) += upstream(h + u);
  }

  Matrix din_fwd, din_bwd;
  lstm_backprop(params.fwd, cache.inputs, cache.fwd, dh_fwd, grads.fwd, din_fwd);
  const Matrix reversed = cache.inputs.colwise().reverse();
  lstm_backprop(params.bwd, reversed, cache.bwd, dh_bwd, grads.bwd, din_bwd);

  input_grads = din_fwd + din_bwd.colwise().reverse();
}

// ---------------------------------------------------------------------------
// Classifier

Vector dropout_mask(Index dim, double dropout, Rng& rng) {
  const double keep = 1.0 - dropout;
  Vector mask(dim);
  for (Index i = 0; i < dim; ++i) {
    mask(i) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

Vector classify(const ClassifierParams& params, const Vector& sentence) {
  if (params.w.cols() != sentence.size()) {
    throw std::invalid_argument("classify: sentence dimension mismatch");
  }
  Vector logits = params.w * sentence + params.b;
  const double peak = logits.maxCoeff();
  Vector probs = (logits.array() - peak).exp();
  probs /= probs.sum();
  return probs;
}

double cross_entropy(const Vector& probs, int true_class, Vector* logit_grad) {
  if (true_class < 0 || true_class >= probs.size()) {
    throw std::invalid_argument("cross_entropy: class index out of range");
  }
  const double p = std::max(probs(true_class), 1e-12);
  if (logit_grad) {
    *logit_grad = probs;
    (*logit_grad)(true_class) -= 1.0;
  }
  return -std::log(p);
}

// ---------------------------------------------------------------------------
// Training

EmbeddingInput EmbeddingInput::from(const EmbeddingMatrix& emb,
                                    std::string descriptor) {
  EmbeddingInput in;
  in.vocab = emb.vocab;
  in.x = emb.vectors;
  in.descriptor = std::move(descriptor);
  return in;
}

EmbeddingInput EmbeddingInput::from(const AlignedPairs& pairs,
                                    std::string descriptor) {
  EmbeddingInput in;
  in.vocab = pairs.vocab;
  in.x = pairs.xbar;
  in.y = pairs.ybar;
  in.descriptor = std::move(descriptor);
  return in;
}

namespace {

std::vector<int> doc_ids(const Document& doc, const Vocabulary& vocab,
                         Index max_len) {
  std::vector<int> ids;
  for (const auto& tok : doc.tokens) {
    if (static_cast<Index>(ids.size()) >= max_len) break;
    const int id = vocab.id(tok);
    if (id >= 0) ids.push_back(id);
  }
  return ids;
}

Matrix gather_words(const EmbeddingInput& emb, const AdaptationParams& adapt,
                    bool use_adapt, const std::vector<int>& ids) {
  Matrix words(static_cast<Index>(ids.size()), emb.x.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (use_adapt) {
      words.row(t) =
          adapt.alpha * emb.x.row(ids[t]) + adapt.beta * emb.y.row(ids[t]);
    } else {
      words.row(t) = emb.x.row(ids[t]);
    }
  }
  return words;
}

void init_cnn(const EncoderConfig& cfg, Index input_dim, Rng& rng, CnnParams& p) {
  p.w.clear();
  p.b.clear();
  for (std::size_t f = 0; f < cfg.cnn_widths.size(); ++f) {
    const Index fan_in = cfg.cnn_widths[f] * input_dim;
    const double scale = std::sqrt(6.0 / static_cast<double>(fan_in + cfg.cnn_maps[f]));
    Matrix w(cfg.cnn_maps[f], fan_in);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j)
        w(i, j) = (2.0 * rng.uniform() - 1.0) * scale;
    p.w.push_back(std::move(w));
    p.b.push_back(Vector::Zero(cfg.cnn_maps[f]));
  }
}

void init_lstm_dir(Index input_dim, Index h, Rng& rng, LstmDirParams& p) {
  const double sx = std::sqrt(6.0 / static_cast<double>(input_dim + 4 * h));
  const double sh = std::sqrt(6.0 / static_cast<double>(h + 4 * h));
  p.wx.resize(4 * h, input_dim);
  p.wh.resize(4 * h, h);
  for (Index i = 0; i < p.wx.rows(); ++i)
    for (Index j = 0; j < p.wx.cols(); ++j)
      p.wx(i, j) = (2.0 * rng.uniform() - 1.0) * sx;
  for (Index i = 0; i < p.wh.rows(); ++i)
    for (Index j = 0; j < p.wh.cols(); ++j)
      p.wh(i, j) = (2.0 * rng.uniform() - 1.0) * sh;
  p.b = Vector::Zero(4 * h);
  p.b.segment(h, h).setOnes();  // forget-gate bias
}

void init_classifier(Index input_dim, int classes, Rng& rng, ClassifierParams& p) {
  const double scale = std::sqrt(6.0 / static_cast<double>(input_dim + classes));
  p.w.resize(classes, input_dim);
  for (Index i = 0; i < p.w.rows(); ++i)
    for (Index j = 0; j < p.w.cols(); ++j)
      p.w(i, j) = (2.0 * rng.uniform() - 1.0) * scale;
  p.b = Vector::Zero(classes);
}

struct ParamBundle {
  CnnParams cnn;
  BiLstmParams lstm;
  ClassifierParams cls;
  AdaptationParams adapt{0.0, 0.0};
};

ParamBundle zero_like(const TrainedModel& model) {
  ParamBundle g;
  for (const auto& w : model.cnn.w) g.cnn.w.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : model.cnn.b) g.cnn.b.push_back(Vector::Zero(b.size()));
  for (const LstmDirParams* src : {&model.lstm.fwd, &model.lstm.bwd}) {
    LstmDirParams* dst = src == &model.lstm.fwd ? &g.lstm.fwd : &g.lstm.bwd;
    dst->wx = Matrix::Zero(src->wx.rows(), src->wx.cols());
    dst->wh = Matrix::Zero(src->wh.rows(), src->wh.cols());
    dst->b = Vector::Zero(src->b.size());
  }
  g.cls.w = Matrix::Zero(model.cls.w.rows(), model.cls.w.cols());
  g.cls.b = Vector::Zero(model.cls.b.size());
  return g;
}

void append_span(std::vector<double*>& out, double* p, Index n) {
  for (Index i = 0; i < n; ++i) out.push_back(p + i);
}

// The traversal order here defines the flat parameter layout shared by the
// model and its gradient bundle.
template <typename Cnn, typename Lstm, typename Cls, typename Adapt>
std::vector<double*> collect(Cnn& cnn, Lstm& lstm, Cls& cls, Adapt& adapt,
                             EncoderKind kind, TrainMode mode) {
  std::vector<double*> out;
  if (mode != TrainMode::vanilla) {
    out.push_back(&adapt.alpha);
    out.push_back(&adapt.beta);
  }
  const bool encoder_trainable = mode != TrainMode::adapt_only;
  if (encoder_trainable && kind == EncoderKind::cnn) {
    for (auto& w : cnn.w) append_span(out, w.data(), w.size());
    for (auto& b : cnn.b) append_span(out, b.data(), b.size());
  }
  if (encoder_trainable && kind == EncoderKind::bilstm) {
    for (auto* dir : {&lstm.fwd, &lstm.bwd}) {
      append_span(out, dir->wx.data(), dir->wx.size());
      append_span(out, dir->wh.data(), dir->wh.size());
      append_span(out, dir->b.data(), dir->b.size());
    }
  }
  append_span(out, cls.w.data(), cls.w.size());
  append_span(out, cls.b.data(), cls.b.size());
  return out;
}

struct ExampleOutcome {
  double loss = 0.0;
  int predicted = 0;
};

// Forward (and optionally backward) pass for one document.
ExampleOutcome run_example(const TrainedModel& model, const EmbeddingInput& emb,
                           const std::vector<int>& ids, int label,
                           bool training, Rng* dropout_rng, ParamBundle* grads) {
  const bool use_adapt = model.has_adapt;
  const Matrix words = gather_words(emb, model.adapt, use_adapt, ids);

  Vector sentence;
  CnnCache cnn_cache;
  BiLstmCache lstm_cache;
  switch (model.enc.kind) {
    case EncoderKind::bow:
      sentence = words.rows() > 0
                     ? Vector(words.colwise().sum().transpose())
                     : Vector(Vector::Zero(emb.x.cols()));
      break;
    case EncoderKind::cnn:
      sentence = cnn_forward(model.enc, model.cnn, words,
                             grads ? &cnn_cache : nullptr);
      break;
    case EncoderKind::bilstm:
      sentence = bilstm_forward(model.enc, model.lstm, words,
                                grads ? &lstm_cache : nullptr);
      break;
  }

  Vector mask;
  Vector dropped = sentence;
  if (training && model.enc.dropout > 0.0) {
    mask = dropout_mask(sentence.size(), model.enc.dropout, *dropout_rng);
    dropped = sentence.cwiseProduct(mask);
  }

  const Vector probs = classify(model.cls, dropped);
  ExampleOutcome out;
  Index arg = 0;
  probs.maxCoeff(&arg);
  out.predicted = static_cast<int>(arg);

  Vector dlogits;
  out.loss = cross_entropy(probs, label, grads ? &dlogits : nullptr);
  if (!grads) return out;

  grads->cls.w += dlogits * dropped.transpose();
  grads->cls.b += dlogits;
  Vector dsentence = model.cls.w.transpose() * dlogits;
  if (mask.size() > 0) dsentence = dsentence.cwiseProduct(mask);

  Matrix dwords;
  switch (model.enc.kind) {
    case EncoderKind::bow:
      dwords.resize(words.rows(), words.cols());
      for (Index t = 0; t < dwords.rows(); ++t)
        dwords.row(t) = dsentence.transpose();
      break;
    case EncoderKind::cnn: {
      Matrix padded_grads;
      cnn_backward(model.enc, model.cnn, cnn_cache, dsentence, grads->cnn,
                   padded_grads);
      dwords = padded_grads.topRows(words.rows());
      break;
    }
    case EncoderKind::bilstm:
      bilstm_backward(model.enc, model.lstm, lstm_cache, dsentence,
                      grads->lstm, dwords);
      break;
  }

  if (use_adapt && dwords.size() > 0) {
    for (std::size_t t = 0; t < ids.size(); ++t) {
      const auto [da, db] = adapt_grad(model.adapt, emb.x.row(ids[t]),
                                       emb.y.row(ids[t]), dwords.row(t));
      grads->adapt.alpha += da;
      grads->adapt.beta += db;
    }
  }
  return out;
}

double dataset_accuracy(const TrainedModel& model, const EmbeddingInput& emb,
                        const std::vector<std::vector<int>>& ids,
                        const std::vector<int>& labels, double* mean_loss) {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto outcome =
        run_example(model, emb, ids[i], labels[i], false, nullptr, nullptr);
    loss_sum += outcome.loss;
    if (outcome.predicted == labels[i]) ++correct;
  }
  if (mean_loss) *mean_loss = loss_sum / static_cast<double>(ids.size());
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

void check_dataset(const Dataset& ds, int num_classes, const char* which) {
  if (ds.docs.empty()) {
    throw std::invalid_argument(std::string("train: ") + which +
                                " split is empty");
  }
  for (const auto& doc : ds.docs) {
    if (!doc.labeled() || doc.label >= num_classes) {
      throw std::invalid_argument(std::string("train: ") + which +
                                  " split has an invalid label");
    }
  }
}

}  // namespace

TrainedModel train(const Dataset& train_set, const Dataset& dev_set,
                   const EmbeddingInput& emb, const EncoderConfig& enc_cfg,
                   const TrainConfig& train_cfg,
                   const TrainedModel* encoder_init) {
  validate_encoder_config(enc_cfg);
  if (train_cfg.learning_rate < 0.0) {
    throw std::invalid_argument("train: learning rate must be >= 0");
  }
  if (train_cfg.batch_size < 1 || train_cfg.max_epochs < 1 ||
      train_cfg.patience < 0 || train_cfg.num_classes < 2) {
    throw std::invalid_argument("train: invalid training configuration");
  }
  check_dataset(train_set, train_cfg.num_classes, "train");
  check_dataset(dev_set, train_cfg.num_classes, "dev");

  const bool wants_adapt = train_cfg.mode != TrainMode::vanilla;
  if (wants_adapt && !emb.adapted()) {
    throw std::invalid_argument(
        "train: adaptation modes need aligned embedding views");
  }
  if (!wants_adapt && emb.adapted()) {
    throw std::invalid_argument(
        "train: vanilla mode takes a plain embedding, not aligned views");
  }

  TrainedModel model;
  model.enc = enc_cfg;
  model.cfg = train_cfg;
  model.has_adapt = wants_adapt;
  model.embedding_desc = emb.descriptor;
  model.class_names = train_set.labels;

  const Index input_dim = emb.x.cols();
  const Index sentence_dim =
      enc_cfg.kind == EncoderKind::bow ? input_dim : enc_cfg.sentence_dim;

  Rng rng(train_cfg.seed);
  if (enc_cfg.kind == EncoderKind::cnn) init_cnn(enc_cfg, input_dim, rng, model.cnn);
  if (enc_cfg.kind == EncoderKind::bilstm) {
    init_lstm_dir(input_dim, enc_cfg.bilstm_hidden, rng, model.lstm.fwd);
    init_lstm_dir(input_dim, enc_cfg.bilstm_hidden, rng, model.lstm.bwd);
  }
  if (encoder_init != nullptr) {
    if (encoder_init->enc.kind != enc_cfg.kind) {
      throw std::invalid_argument("train: encoder_init has a different encoder kind");
    }
    model.cnn = encoder_init->cnn;
    model.lstm = encoder_init->lstm;
  }
  init_classifier(sentence_dim, train_cfg.num_classes, rng, model.cls);

  // Token ids resolved once.
  std::vector<std::vector<int>> train_ids, dev_ids;
  std::vector<int> train_labels, dev_labels;
  for (const auto& doc : train_set.docs) {
    train_ids.push_back(doc_ids(doc, emb.vocab, enc_cfg.max_seq_len));
    train_labels.push_back(doc.label);
  }
  for (const auto& doc : dev_set.docs) {
    dev_ids.push_back(doc_ids(doc, emb.vocab, enc_cfg.max_seq_len));
    dev_labels.push_back(doc.label);
  }

  auto trainable = collect(model.cnn, model.lstm, model.cls, model.adapt,
                           enc_cfg.kind, train_cfg.mode);
  Vector adam_m = Vector::Zero(static_cast<Index>(trainable.size()));
  Vector adam_v = Vector::Zero(static_cast<Index>(trainable.size()));
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::size_t adam_t = 0;

  ParamBundle best;
  double best_dev_acc = -1.0;
  Index best_epoch = -1;

  std::vector<std::size_t> order(train_ids.size());
  std::iota(order.begin(), order.end(), 0);

  for (Index epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_below(i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t epoch_correct = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_cfg.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
      ParamBundle grads = zero_like(model);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        const auto outcome = run_example(model, emb, train_ids[idx],
                                         train_labels[idx], true, &rng, &grads);
        batch_loss += outcome.loss;
        epoch_loss += outcome.loss;
        if (outcome.predicted == train_labels[idx]) ++epoch_correct;
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "train: loss diverged at epoch " << epoch << ", batch "
            << start / train_cfg.batch_size;
        throw std::runtime_error(msg.str());
      }

      const double scale = 1.0 / static_cast<double>(stop - start);
      auto grad_ptrs = collect(grads.cnn, grads.lstm, grads.cls, grads.adapt,
                               enc_cfg.kind, train_cfg.mode);
      ++adam_t;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t i = 0; i < trainable.size(); ++i) {
        const double g = *grad_ptrs[i] * scale;
        adam_m(i) = beta1 * adam_m(i) + (1.0 - beta1) * g;
        adam_v(i) = beta2 * adam_v(i) + (1.0 - beta2) * g * g;
        const double step = train_cfg.learning_rate * (adam_m(i) / bc1) /
                            (std::sqrt(adam_v(i) / bc2) + adam_eps);
        *trainable[i] -= step;
      }
    }

    TrainedModel::EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(train_ids.size());
    stats.train_acc =
        static_cast<double>(epoch_correct) / static_cast<double>(train_ids.size());
    stats.dev_acc = dataset_accuracy(model, emb, dev_ids, dev_labels, &stats.dev_loss);
    model.history.push_back(stats);

    if (stats.dev_acc > best_dev_acc) {
      best_dev_acc = stats.dev_acc;
      best_epoch = epoch;
      best.cnn = model.cnn;
      best.lstm = model.lstm;
      best.cls = model.cls;
      best.adapt = model.adapt;
    } else if (epoch - best_epoch > train_cfg.patience) {
      break;
    }
  }

  model.cnn = best.cnn;
  model.lstm = best.lstm;
  model.cls = best.cls;
  model.adapt = best.adapt;
  return model;
}

Metrics evaluate(const TrainedModel& model, const EmbeddingInput& emb,
                 const Dataset& data) {
  if (data.docs.empty()) throw std::invalid_argument("evaluate: dataset is empty");
  if (model.has_adapt != emb.adapted()) {
    throw std::invalid_argument(
        "evaluate: embedding input does not match the model's adaptation mode");
  }
  const int classes = static_cast<int>(model.cls.w.rows());

  Metrics m;
  m.confusion = Matrix::Zero(classes, classes);
  for (const auto& doc : data.docs) {
    if (!doc.labeled() || doc.label >= classes) {
      throw std::invalid_argument("evaluate: document without a valid label");
    }
    const auto ids = doc_ids(doc, emb.vocab, model.enc.max_seq_len);
    const auto outcome =
        run_example(model, emb, ids, doc.label, false, nullptr, nullptr);
    m.confusion(doc.label, outcome.predicted) += 1.0;
  }

  const double total = static_cast<double>(data.docs.size());
  const double pooled_tp = m.confusion.trace();
  // Single-label pooled counts make micro precision, recall, F and accuracy
  // the same quantity; computing them from one expression keeps the identity
  // exact.
  m.accuracy = pooled_tp / total;
  m.micro_f = pooled_tp / total;
  m.precision.resize(classes);
  m.recall.resize(classes);
  for (int c = 0; c < classes; ++c) {
    const double col = m.confusion.col(c).sum();
    const double row = m.confusion.row(c).sum();
    m.precision[c] = col > 0 ? m.confusion(c, c) / col : 0.0;
    m.recall[c] = row > 0 ? m.confusion(c, c) / row : 0.0;
  }
  return m;
}

Dataset subsample_train(const Dataset& train_set, std::size_t n,
                        std::uint64_t seed) {
  if (n > train_set.docs.size()) {
    throw std::invalid_argument("subsample_train: n exceeds the dataset size");
  }
  if (n == 0) throw std::invalid_argument("subsample_train: n must be positive");

  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < train_set.docs.size(); ++i) {
    const int label = train_set.docs[i].label;
    if (label == kNoLabel) {
      throw std::invalid_argument("subsample_train: documents must be labeled");
    }
    if (static_cast<std::size_t>(label) >= by_class.size())
      by_class.resize(label + 1);
    by_class[label].push_back(i);
  }

  // Largest-remainder apportionment of n across classes.
  const double total = static_cast<double>(train_set.docs.size());
  std::vector<std::size_t> take(by_class.size(), 0);
  std::vector<double> remainder(by_class.size(), -1.0);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double exact = static_cast<double>(n) * by_class[c].size() / total;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    take[c] = std::min(take[c], by_class[c].size());
    remainder[c] = exact - std::floor(exact);
    assigned += take[c];
  }
  while (assigned < n) {
    std::size_t best = 0;
    double best_rem = -2.0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (take[c] < by_class[c].size() && remainder[c] > best_rem) {
        best = c;
        best_rem = remainder[c];
      }
    }
    ++take[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  Dataset out;
  out.labels = train_set.labels;
  out.source = train_set.source;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto idx = by_class[c];
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_below(i);
      std::swap(idx[i - 1], idx[j]);
    }
    for (std::size_t i = 0; i < take[c]; ++i)
      out.docs.push_back(train_set.docs[idx[i]]);
  }
  return out;
}

}  // namespace daemb
