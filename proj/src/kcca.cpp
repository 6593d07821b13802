#include "daemb/kcca.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace daemb {

Vector CcaView::features(const Vector& v) const {
  if (!kernelized()) return v;
  if (v.size() != landmarks.cols()) {
    throw std::invalid_argument("project: vector does not match view dimension");
  }
  Vector k(landmarks.rows());
  const double denom = 2.0 * sigma * sigma;
  for (Index i = 0; i < landmarks.rows(); ++i) {
    k(i) = std::exp(-(landmarks.row(i).transpose() - v).squaredNorm() / denom);
  }
  return whiten.transpose() * k;
}

Vector CcaView::project(const Vector& v) const {
  const Vector f = features(v);
  if (f.size() != mean.size()) {
    throw std::invalid_argument("project: vector does not match view dimension");
  }
  return proj.transpose() * (f - mean);
}

namespace {

struct CenteredView {
  Matrix centered;
  Vector mean;
  Matrix chol;  // lower factor of Cvv + ridge*I
};

CenteredView whiten_view(const Matrix& v, double lambda, const char* name) {
  const Index m = v.rows();
  CenteredView out;
  out.mean = v.colwise().mean();
  out.centered = v.rowwise() - out.mean.transpose();
  Matrix cov = (out.centered.transpose() * out.centered) / static_cast<double>(m);
  const double trace = cov.trace();
  if (trace <= 0.0) {
    throw std::runtime_error(std::string("fit_cca: view ") + name +
                             " has zero variance");
  }
  out.chol = cholesky_psd(cov, lambda * trace);
  return out;
}

CcaModel fit_linear_on_features(const Matrix& x, const Matrix& y,
                                const CcaConfig& cfg) {
  if (x.rows() != y.rows()) {
    throw std::invalid_argument("fit_cca: views must have the same sample count");
  }
  const Index m = x.rows();
  if (m < 2) throw std::invalid_argument("fit_cca: need at least 2 samples");
  if (cfg.lambda <= 0.0) throw std::invalid_argument("fit_cca: lambda must be > 0");
  check_finite(x, "fit_cca view a");
  check_finite(y, "fit_cca view b");

  const Index max_rank = std::min(x.cols(), y.cols());
  const Index rank = cfg.rank == 0 ? max_rank : cfg.rank;
  if (rank < 1 || rank > max_rank) {
    std::ostringstream msg;
    msg << "fit_cca: rank " << rank << " exceeds min view dimension " << max_rank;
    throw std::invalid_argument(msg.str());
  }

  const CenteredView vx = whiten_view(x, cfg.lambda, "a");
  const CenteredView vy = whiten_view(y, cfg.lambda, "b");

  const Matrix cxy =
      (vx.centered.transpose() * vy.centered) / static_cast<double>(m);

  // T = Lx^{-1} Cxy Ly^{-T}, then SVD.
  Matrix t = vx.chol.triangularView<Eigen::Lower>().solve(cxy);
  t = vy.chol.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);

  CcaModel model;
  model.config = cfg;
  model.correlations =
      svd.singularValues().head(rank).cwiseMin(1.0).cwiseMax(0.0);
  model.view_a.mean = vx.mean;
  model.view_b.mean = vy.mean;
  model.view_a.proj = vx.chol.transpose().triangularView<Eigen::Upper>().solve(
      Matrix(svd.matrixU().leftCols(rank)));
  model.view_b.proj = vy.chol.transpose().triangularView<Eigen::Upper>().solve(
      Matrix(svd.matrixV().leftCols(rank)));
  return model;
}

// Inverse square root of a PSD kernel matrix, small eigenvalues floored.
Matrix psd_inv_sqrt(const Matrix& k) {
  auto [values, vectors] = sym_eig(k);
  const double floor = std::max(values(0), 1.0) * 1e-12;
  Vector inv = values.unaryExpr([floor](double v) {
    return 1.0 / std::sqrt(std::max(v, floor));
  });
  return vectors * inv.asDiagonal() * vectors.transpose();
}

Matrix gaussian_gram(const Matrix& rows, const Matrix& landmarks, double sigma) {
  Matrix k(rows.rows(), landmarks.rows());
  const double denom = 2.0 * sigma * sigma;
  for (Index i = 0; i < rows.rows(); ++i)
    for (Index j = 0; j < landmarks.rows(); ++j)
      k(i, j) = std::exp(-(rows.row(i) - landmarks.row(j)).squaredNorm() / denom);
  return k;
}

}  // namespace

CcaModel fit_cca(const Matrix& x, const Matrix& y, const CcaConfig& cfg) {
  if (cfg.kernel != KernelKind::linear) {
    throw std::invalid_argument("fit_cca: config requests a non-linear kernel");
  }
  return fit_linear_on_features(x, y, cfg);
}

CcaModel fit_kcca_gaussian(const Matrix& x, const Matrix& y,
                           const CcaConfig& cfg) {
  if (cfg.sigma <= 0.0) {
    throw std::invalid_argument("fit_kcca_gaussian: sigma must be > 0");
  }
  const Index m = x.rows();
  const Index landmarks = cfg.nystrom_landmarks.value_or(m);
  if (landmarks < 1 || landmarks > m) {
    throw std::invalid_argument(
        "fit_kcca_gaussian: landmark count must be in [1, m]");
  }

  // Evenly spaced landmark rows keep the fit deterministic.
  std::vector<Index> pick(landmarks);
  for (Index i = 0; i < landmarks; ++i) pick[i] = i * m / landmarks;

  Matrix lm_x(landmarks, x.cols()), lm_y(landmarks, y.cols());
  for (Index i = 0; i < landmarks; ++i) {
    lm_x.row(i) = x.row(pick[i]);
    lm_y.row(i) = y.row(pick[i]);
  }

  const Matrix wx = psd_inv_sqrt(gaussian_gram(lm_x, lm_x, cfg.sigma));
  const Matrix wy = psd_inv_sqrt(gaussian_gram(lm_y, lm_y, cfg.sigma));
  const Matrix fx = gaussian_gram(x, lm_x, cfg.sigma) * wx;
  const Matrix fy = gaussian_gram(y, lm_y, cfg.sigma) * wy;

  CcaModel model;
  try {
    model = fit_linear_on_features(fx, fy, cfg);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("fit_kcca_gaussian: ") + e.what() +
                             " (a larger lambda may help)");
  }
  model.view_a.landmarks = lm_x;
  model.view_a.whiten = wx;
  model.view_a.sigma = cfg.sigma;
  model.view_b.landmarks = lm_y;
  model.view_b.whiten = wy;
  model.view_b.sigma = cfg.sigma;
  return model;
}

Vector project(const CcaModel& model, const Vector& v, CcaSide side) {
  return side == CcaSide::a ? model.view_a.project(v) : model.view_b.project(v);
}

namespace {

CcaModel fit_by_kernel(const Matrix& x, const Matrix& y, const CcaConfig& cfg) {
  return cfg.kernel == KernelKind::linear ? fit_cca(x, y, cfg)
                                          : fit_kcca_gaussian(x, y, cfg);
}

}  // namespace

AlignedPairs align_generic_ds(const EmbeddingMatrix& generic,
                              const EmbeddingMatrix& ds, const CcaConfig& cfg,
                              CcaModel* model_out) {
  std::vector<int> gen_row_of;  // per shared word, row in the generic matrix
  std::vector<int> ds_row_of;
  for (int i = 0; i < ds.vocab.size(); ++i) {
    const int g = generic.vocab.id(ds.vocab.word(i));
    if (g >= 0) {
      gen_row_of.push_back(g);
      ds_row_of.push_back(i);
    }
  }
  if (gen_row_of.empty()) {
    throw std::runtime_error(
        "align_generic_ds: generic and DS vocabularies do not intersect");
  }

  const Index m = static_cast<Index>(gen_row_of.size());
  Matrix x(m, generic.dim()), y(m, ds.dim());
  for (Index i = 0; i < m; ++i) {
    x.row(i) = generic.vectors.row(gen_row_of[i]);
    y.row(i) = ds.vectors.row(ds_row_of[i]);
  }
  const CcaModel model = fit_by_kernel(x, y, cfg);
  if (model_out) *model_out = model;

  AlignedPairs out;
  out.vocab = ds.vocab;
  out.xbar.resize(ds.vocab.size(), model.rank());
  out.ybar.resize(ds.vocab.size(), model.rank());
  for (int i = 0; i < ds.vocab.size(); ++i) {
    const Vector ds_proj = model.view_b.project(ds.vectors.row(i));
    out.ybar.row(i) = ds_proj;
    const int g = generic.vocab.id(ds.vocab.word(i));
    out.xbar.row(i) =
        g >= 0 ? model.view_a.project(generic.vectors.row(g)) : ds_proj;
  }
  return out;
}

AlignedPairs cross_domain_align(const EmbeddingMatrix& da_a,
                                const EmbeddingMatrix& da_b,
                                const Vocabulary& common, const CcaConfig& cfg,
                                CcaModel* model_out) {
  if (common.size() < 2) {
    throw std::invalid_argument("cross_domain_align: need at least 2 common words");
  }
  Matrix x(common.size(), da_a.dim());
  Matrix y(common.size(), da_b.dim());
  for (int i = 0; i < common.size(); ++i) {
    const int ia = da_a.vocab.id(common.word(i));
    const int ib = da_b.vocab.id(common.word(i));
    if (ia < 0 || ib < 0) {
      throw std::invalid_argument("cross_domain_align: word '" + common.word(i) +
                                  "' missing from a domain vocabulary");
    }
    x.row(i) = da_a.vectors.row(ia);
    y.row(i) = da_b.vectors.row(ib);
  }
  const CcaModel model = fit_by_kernel(x, y, cfg);
  if (model_out) *model_out = model;

  AlignedPairs out;
  out.vocab = common;
  out.xbar.resize(common.size(), model.rank());
  out.ybar.resize(common.size(), model.rank());
  for (int i = 0; i < common.size(); ++i) {
    out.xbar.row(i) = model.view_a.project(x.row(i));
    out.ybar.row(i) = model.view_b.project(y.row(i));
  }
  return out;
}

}  // namespace daemb
