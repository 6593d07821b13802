#ifndef DAEMB_ADAPTATION_HPP
#define DAEMB_ADAPTATION_HPP

#include <utility>

#include "daemb/kcca.hpp"
#include "daemb/numerics.hpp"

namespace daemb {

/// The two scalars of the shallow adaptation layer; the mixed embedding is
/// alpha * generic_view + beta * ds_view. Initialized at the fixed 0.5/0.5
/// baseline mix.
struct AdaptationParams {
  double alpha = 0.5;
  double beta = 0.5;
};

/// (g1, s1, g2, s2, ..., gd, sd)
Vector interleave(const Vector& g, const Vector& s);
std::pair<Vector, Vector> deinterleave(const Vector& z);

/// out_j = alpha * g_j + beta * s_j
Vector adapt_apply(const AdaptationParams& p, const Vector& g, const Vector& s);

/// Same map computed the way the layer is wired: a width-2 stride-2
/// convolution over the interleaved vector. Agrees with adapt_apply
/// bit-for-bit.
Vector adapt_apply_conv2x1(const AdaptationParams& p, const Vector& g,
                           const Vector& s);

/// Gradients of a scalar loss w.r.t. alpha and beta given the upstream
/// gradient on the mixed vector: (<upstream, g>, <upstream, s>).
std::pair<double, double> adapt_grad(const AdaptationParams& p, const Vector& g,
                                     const Vector& s, const Vector& upstream);

/// Row-wise mix over all aligned words.
EmbeddingMatrix adapt_matrix(const AdaptationParams& p, const AlignedPairs& pairs);

}  // namespace daemb

#endif
