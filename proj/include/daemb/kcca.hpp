#ifndef DAEMB_KCCA_HPP
#define DAEMB_KCCA_HPP

#include <optional>
#include <string>

#include "daemb/embeddings.hpp"
#include "daemb/numerics.hpp"

namespace daemb {

enum class KernelKind { linear, gaussian };

struct CcaConfig {
  double lambda = 1e-3;  // ridge, relative to a unit-trace covariance
  Index rank = 0;        // 0 means min of the two view dimensions
  KernelKind kernel = KernelKind::linear;
  double sigma = 1.0;    // gaussian kernel width
  std::optional<Index> nystrom_landmarks;  // unset = exact kernel
};

/// One fitted view: an optional kernel feature map followed by centering and
/// a linear projection into the shared canonical space.
struct CcaView {
  Matrix landmarks;  // empty for the linear kernel
  Matrix whiten;     // landmark-kernel inverse square root (kernel only)
  double sigma = 0.0;
  Vector mean;       // feature-space mean
  Matrix proj;       // feature_dim x rank

  bool kernelized() const { return landmarks.size() > 0; }
  Vector features(const Vector& v) const;
  Vector project(const Vector& v) const;
};

struct CcaModel {
  CcaView view_a, view_b;
  Vector correlations;  // non-increasing, clipped to [0, 1]
  CcaConfig config;

  Index rank() const { return correlations.size(); }
};

enum class CcaSide { a, b };

/// Regularized linear CCA. Covariances use the 1/m convention; the ridge is
/// cfg.lambda scaled by each view's covariance trace, so lambda is read
/// against a unit-trace-normalized covariance. Realized by whitening both
/// covariances with a jittered Cholesky and taking the SVD of the whitened
/// cross-covariance.
CcaModel fit_cca(const Matrix& x, const Matrix& y, const CcaConfig& cfg);

/// Gaussian-kernel CCA through a Nystrom feature map (all points are
/// landmarks when none are configured, which reproduces the exact kernel
/// solution). New points project through their kernel column against the
/// landmarks.
CcaModel fit_kcca_gaussian(const Matrix& x, const Matrix& y, const CcaConfig& cfg);

Vector project(const CcaModel& model, const Vector& v, CcaSide side);

/// Paired rows of two views projected into the shared canonical space.
struct AlignedPairs {
  Vocabulary vocab;
  Matrix xbar;  // |vocab| x rank, view A
  Matrix ybar;  // |vocab| x rank, view B
};

/// Fits generic<->domain-specific alignment on the vocabulary intersection
/// and projects every DS word. Words missing from the generic vocabulary
/// reuse their DS projection for the generic view.
AlignedPairs align_generic_ds(const EmbeddingMatrix& generic,
                              const EmbeddingMatrix& ds, const CcaConfig& cfg,
                              CcaModel* model_out = nullptr);

/// Second-stage alignment: brings two domain-adapted embeddings over a common
/// vocabulary into one subspace.
AlignedPairs cross_domain_align(const EmbeddingMatrix& da_a,
                                const EmbeddingMatrix& da_b,
                                const Vocabulary& common, const CcaConfig& cfg,
                                CcaModel* model_out = nullptr);

}  // namespace daemb

#endif
