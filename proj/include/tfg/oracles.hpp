#pragma once

#include <functional>

#include "tfg/group.hpp"

namespace tfg::oracles {

/// Dense matrix exponential by scaled-and-squared truncated series.
/// Independent of the closed forms in lie.hpp; used to cross-check them.
Mat expm_series(const Mat& m, int terms = 30);

/// Dense principal matrix logarithm by inverse scaling and squaring
/// (Denman-Beavers square roots, then a Mercator series).
Mat logm_iss(const Mat& m);

/// Embedding of a TFG algebra element, per the matrix-group embedding of the
/// exponential-map construction.
Mat algebra_embedding(const TfgTangent& xi, const TfgShape& shape);

/// Reads (R, x, X) back out of an embedding matrix.
TfgElement element_from_embedding(const Mat& m, const TfgShape& shape);

/// Reads (xi^R, xi^x, xi^X) out of an algebra embedding matrix.
TfgTangent tangent_from_embedding(const Mat& m, const TfgShape& shape);

/// compose / exp / log computed entirely through the matrix embedding.
TfgElement compose_embedding(const TfgElement& a, const TfgElement& b);
TfgElement inverse_embedding(const TfgElement& a);
TfgElement exp_tfg_embedding(const TfgTangent& xi);
TfgTangent log_tfg_embedding(const TfgElement& a);

/// Central-difference Jacobian with step h of a map R^n -> R^m.
Mat central_difference(const std::function<Vec(const Vec&)>& f, const Vec& at, double h = 1e-6);

}  // namespace tfg::oracles
