#ifndef DAEMB_ENCODERS_HPP
#define DAEMB_ENCODERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "daemb/adaptation.hpp"
#include "daemb/corpus.hpp"
#include "daemb/embeddings.hpp"
#include "daemb/kcca.hpp"
#include "daemb/numerics.hpp"

namespace daemb {

enum class EncoderKind { bow, cnn, bilstm };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::bow;
  Index sentence_dim = 300;  // cnn: sum of feature maps; bilstm: 2 * hidden
  std::vector<Index> cnn_widths = {3, 4, 5};
  std::vector<Index> cnn_maps = {100, 100, 100};
  Index bilstm_hidden = 150;
  double dropout = 0.5;
  Index max_seq_len = 100;
};

/// Checks the stated dimension invariants for the configured encoder kind.
void validate_encoder_config(const EncoderConfig& cfg);

enum class TrainMode { vanilla, adapt_only, end_to_end };

struct TrainConfig {
  TrainMode mode = TrainMode::vanilla;
  double learning_rate = 1e-3;
  Index batch_size = 32;
  Index max_epochs = 100;
  Index patience = 5;
  std::uint64_t seed = 0;
  int num_classes = 2;
};

// ---------------------------------------------------------------------------
// Parameters

struct CnnParams {
  std::vector<Matrix> w;  // per width: maps x (width * input_dim)
  std::vector<Vector> b;  // per width: maps
};

struct LstmDirParams {
  Matrix wx;  // 4H x input_dim, gate order (input, forget, output, candidate)
  Matrix wh;  // 4H x H
  Vector b;   // 4H
};

struct BiLstmParams {
  LstmDirParams fwd, bwd;
};

struct ClassifierParams {
  Matrix w;  // classes x sentence_dim
  Vector b;  // classes
};

// ---------------------------------------------------------------------------
// Encoders

/// Sum of embedding rows with multiplicity; out-of-vocabulary tokens are
/// skipped and an all-OOV document encodes to zero.
Vector bow_encode(const Document& doc, const EmbeddingMatrix& emb);

struct CnnCache {
  Matrix padded;                        // T x d after zero padding
  std::vector<std::vector<Index>> argmax;  // per width, per map: position
  std::vector<Vector> peak;             // per width, per map: max preactivation
};

/// Kim-style encoder: per-width convolution + ReLU + max over time,
/// concatenated. Input is padded with zero vectors up to the widest filter.
Vector cnn_forward(const EncoderConfig& cfg, const CnnParams& params,
                   const Matrix& words, CnnCache* cache = nullptr);

/// Exact gradients of cnn_forward. Input gradients flow only through the
/// argmax positions. grads must be shaped like params (zero-initialized
/// accumulators are fine; contributions are added).
void cnn_backward(const EncoderConfig& cfg, const CnnParams& params,
                  const CnnCache& cache, const Vector& upstream,
                  CnnParams& grads, Matrix& input_grads);

struct LstmDirCache {
  Matrix gates;   // T x 4H post-nonlinearity (i, f, o, g)
  Matrix cells;   // T x H
  Matrix hidden;  // T x H
};

struct BiLstmCache {
  Matrix inputs;  // T x d
  LstmDirCache fwd, bwd;
  std::vector<Index> argmax;  // per channel (2H), pooled timestep
  bool empty = false;
};

/// BiLSTM over the sequence with element-wise max pooling of the
/// concatenated per-step states. Empty input encodes to zero.
Vector bilstm_forward(const EncoderConfig& cfg, const BiLstmParams& params,
                      const Matrix& words, BiLstmCache* cache = nullptr);

void bilstm_backward(const EncoderConfig& cfg, const BiLstmParams& params,
                     const BiLstmCache& cache, const Vector& upstream,
                     BiLstmParams& grads, Matrix& input_grads);

// ---------------------------------------------------------------------------
// Classification layer

/// Inverted-dropout mask: entries are 1/keep with probability keep = 1 - p,
/// else 0, so the masked vector's expectation equals the input.
Vector dropout_mask(Index dim, double dropout, Rng& rng);

/// Stable softmax of w*v + b; probabilities sum to 1.
Vector classify(const ClassifierParams& params, const Vector& sentence);

/// Returns -log p[true_class] (probability clamped at 1e-12) and writes the
/// logit gradient p - onehot.
double cross_entropy(const Vector& probs, int true_class, Vector* logit_grad);

// ---------------------------------------------------------------------------
// Training

/// Embedding table handed to training: either a plain matrix or the two
/// aligned views feeding the adaptation layer.
struct EmbeddingInput {
  Vocabulary vocab;
  Matrix x;  // plain embedding, or projected generic view
  Matrix y;  // projected DS view; empty for plain embeddings
  std::string descriptor;

  bool adapted() const { return y.size() > 0; }
  static EmbeddingInput from(const EmbeddingMatrix& emb, std::string descriptor);
  static EmbeddingInput from(const AlignedPairs& pairs, std::string descriptor);
};

struct TrainedModel {
  EncoderConfig enc;
  TrainConfig cfg;
  CnnParams cnn;
  BiLstmParams lstm;
  ClassifierParams cls;
  AdaptationParams adapt;
  bool has_adapt = false;
  std::string embedding_desc;
  std::vector<std::string> class_names;

  struct EpochStats {
    double train_loss = 0, train_acc = 0, dev_loss = 0, dev_acc = 0;
  };
  std::vector<EpochStats> history;
};

/// Binary model artifact, versioned with the magic string DAEMB1.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

/// Mini-batch Adam with early stopping on dev accuracy; the best-dev
/// parameters are returned. adapt_only freezes the encoder (seeded random
/// weights, or copied from encoder_init) and updates only the adaptation
/// scalars and the classifier. Deterministic for a fixed seed.
TrainedModel train(const Dataset& train_set, const Dataset& dev_set,
                   const EmbeddingInput& emb, const EncoderConfig& enc_cfg,
                   const TrainConfig& train_cfg,
                   const TrainedModel* encoder_init = nullptr);

struct Metrics {
  double accuracy = 0.0;
  double micro_f = 0.0;
  std::vector<double> precision, recall;  // per class
  Matrix confusion;                       // rows: true class, cols: predicted
};

/// Dropout-free evaluation of a trained model.
Metrics evaluate(const TrainedModel& model, const EmbeddingInput& emb,
                 const Dataset& data);

/// Stratified subsample of size n (class counts within one of proportional),
/// deterministic per seed.
Dataset subsample_train(const Dataset& train_set, std::size_t n,
                        std::uint64_t seed);

}  // namespace daemb

#endif
