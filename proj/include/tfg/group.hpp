#pragma once

#include "tfg/lie.hpp"

namespace tfg {

/// Static shape of a two-frames group SO(d)^+_{N1,N2}: d in {2,3}, N1 fixed-frame
/// d-vectors, N2 body-frame d-vectors.
struct TfgShape {
    int d = 3;
    int n_fixed = 0;
    int n_body = 0;

    int algebra_dim() const { return d == 2 ? 1 : 3; }
    int q() const { return d * n_fixed; }
    int r() const { return d * n_body; }
    int tangent_dim() const { return algebra_dim() + q() + r(); }

    bool operator==(const TfgShape&) const = default;
};

/// A state chi = (R, x, X): frame transform plus fixed-frame and body-frame
/// stacked vectors.
class TfgElement {
public:
    TfgElement(lie::Rotation rot, Vec x, Vec bx);
    TfgElement(lie::Rotation rot, const lie::MultiVector& x, const lie::MultiVector& bx);

    static TfgElement identity(const TfgShape& shape);

    const TfgShape& shape() const { return shape_; }
    const lie::Rotation& rot() const { return rot_; }
    /// Fixed-frame part x (length d*N1).
    const Vec& fixed() const { return x_; }
    /// Body-frame part X (length d*N2).
    const Vec& body() const { return bx_; }

    lie::MultiVector fixed_vectors() const { return {x_, shape_.d, Frame::Fixed}; }
    lie::MultiVector body_vectors() const { return {bx_, shape_.d, Frame::Body}; }

    /// Same element with the rotation re-orthonormalized (polar projection).
    TfgElement orthonormalized() const;

private:
    lie::Rotation rot_;
    Vec x_, bx_;
    TfgShape shape_;
};

/// Lie-algebra coordinates (xi^R, xi^x, xi^X) of an invariant error.
struct TfgTangent {
    Vec rot;    // size d' = 1 or 3
    Vec fixed;  // size d*N1
    Vec body;   // size d*N2

    static TfgTangent zero(const TfgShape& shape);
    static TfgTangent from_stacked(const TfgShape& shape, const Vec& v);
    Vec stacked() const;
};

/// TFG law: (R1 R2, x1 + R1 * x2, X2 + R2^-1 * X1).
TfgElement compose(const TfgElement& a, const TfgElement& b);

/// (R, x, X)^-1 = (R^-1, -R^-1 * x, -R * X).
TfgElement inverse(const TfgElement& a);

/// Closed-form exponential: R = exp(xi^R), x_i = nu_d(xi^R) xi^x_i,
/// X_j = nu_d(-xi^R) xi^X_j.
TfgElement exp_tfg(const TfgTangent& xi);

/// Inverse of exp_tfg. Throws AngleNearPi (from log_rot) or SingularNu.
TfgTangent log_tfg(const TfgElement& a);

/// Matrix-group embedding of size (q+r+2); compose becomes matrix product.
/// Test oracle only, not used by the filter path.
Mat embed_matrix(const TfgElement& a);

/// Output action: a * beta = H^x x + R * [H^X X + beta].
Vec star_action(const TfgElement& a, const Vec& beta, const Mat& hx, const Mat& hbx);

/// Left-invariant error E = chi_hat^-1 . chi (use with fixed-frame outputs).
TfgElement left_error(const TfgElement& chi_hat, const TfgElement& chi);

/// Right-invariant error e = chi . chi_hat^-1 (use with body-frame outputs).
TfgElement right_error(const TfgElement& chi_hat, const TfgElement& chi);

/// Max of Frobenius distance on R and Euclidean distance on x, X.
double distance(const TfgElement& a, const TfgElement& b);

}  // namespace tfg
