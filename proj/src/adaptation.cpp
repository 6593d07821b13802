#include "daemb/adaptation.hpp"

#include <stdexcept>

namespace daemb {

namespace {

void check_same_dim(const Vector& g, const Vector& s) {
  if (g.size() != s.size()) {
    throw std::invalid_argument("adaptation: view dimensions differ");
  }
}

}  // namespace

Vector interleave(const Vector& g, const Vector& s) {
  check_same_dim(g, s);
  Vector z(2 * g.size());
  for (Index j = 0; j < g.size(); ++j) {
    z(2 * j) = g(j);
    z(2 * j + 1) = s(j);
  }
  return z;
}

std::pair<Vector, Vector> deinterleave(const Vector& z) {
  if (z.size() % 2 != 0) {
    throw std::invalid_argument("deinterleave: odd length");
  }
  const Index d = z.size() / 2;
  Vector g(d), s(d);
  for (Index j = 0; j < d; ++j) {
    g(j) = z(2 * j);
    s(j) = z(2 * j + 1);
  }
  return {g, s};
}

Vector adapt_apply(const AdaptationParams& p, const Vector& g, const Vector& s) {
  check_same_dim(g, s);
  Vector out(g.size());
  for (Index j = 0; j < g.size(); ++j) out(j) = p.alpha * g(j) + p.beta * s(j);
  return out;
}

Vector adapt_apply_conv2x1(const AdaptationParams& p, const Vector& g,
                           const Vector& s) {
  const Vector z = interleave(g, s);
  Vector out(z.size() / 2);
  for (Index j = 0; j < out.size(); ++j) {
    out(j) = p.alpha * z(2 * j) + p.beta * z(2 * j + 1);
  }
  return out;
}

std::pair<double, double> adapt_grad(const AdaptationParams&, const Vector& g,
                                     const Vector& s, const Vector& upstream) {
  check_same_dim(g, s);
  if (upstream.size() != g.size()) {
    throw std::invalid_argument("adapt_grad: upstream dimension differs");
  }
  return {upstream.dot(g), upstream.dot(s)};
}

EmbeddingMatrix adapt_matrix(const AdaptationParams& p, const AlignedPairs& pairs) {
  EmbeddingMatrix out;
  out.vocab = pairs.vocab;
  out.vectors = p.alpha * pairs.xbar + p.beta * pairs.ybar;
  out.role = EmbeddingRole::domain_adapted;
  return out;
}

}  // namespace daemb
