#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace vtalign {

enum class TransformKind { Similarity, Affine };

inline const char* to_string(TransformKind k) {
  return k == TransformKind::Similarity ? "similarity" : "affine";
}

inline TransformKind transform_kind_from_string(const std::string& s) {
  if (s == "similarity") return TransformKind::Similarity;
  if (s == "affine") return TransformKind::Affine;
  throw std::invalid_argument("unknown transform kind: " + s);
}

// Similarity: [q, s, tx, ty]; Affine: [q, sx, sy, shx, shy, tx, ty].
// Scales must stay positive (nonreflective family).
struct TransformParams {
  TransformKind kind = TransformKind::Similarity;
  std::vector<double> values;

  static TransformParams identity(TransformKind k) {
    TransformParams p;
    p.kind = k;
    p.values = (k == TransformKind::Similarity) ? std::vector<double>{0.0, 1.0, 0.0, 0.0}
                                                : std::vector<double>{0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    return p;
  }

  size_t dof() const { return kind == TransformKind::Similarity ? 4u : 7u; }

  bool valid() const {
    if (values.size() != dof()) return false;
    if (kind == TransformKind::Similarity) return values[1] > 0.0;
    return values[1] > 0.0 && values[2] > 0.0;
  }
};

// 3x3 homogeneous matrix, row-major, row-vector convention: p' = p * M.
// Translation lives in the bottom row; third column is (0,0,1)^T.
struct TransformMatrix {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static TransformMatrix identity() { return TransformMatrix{}; }

  static TransformMatrix translation(double tx, double ty) {
    TransformMatrix t;
    t.m = {1, 0, 0, 0, 1, 0, tx, ty, 1};
    return t;
  }

  double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
  double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// a then b: apply(compose(a,b), p) == apply(b, apply(a, p)).
inline TransformMatrix compose(const TransformMatrix& a, const TransformMatrix& b) {
  TransformMatrix out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

inline Point apply(const TransformMatrix& m, Point p) {
  const double x = p.x * m(0, 0) + p.y * m(1, 0) + m(2, 0);
  const double y = p.x * m(0, 1) + p.y * m(1, 1) + m(2, 1);
  const double w = p.x * m(0, 2) + p.y * m(1, 2) + m(2, 2);
  return {x / w, y / w};
}

// Factor order: point is scaled, sheared, rotated, then translated.
inline TransformMatrix to_matrix(const TransformParams& p) {
  if (!p.valid()) throw std::invalid_argument("to_matrix: invalid transform parameters (scale must be > 0)");
  double q, sx, sy, shx, shy, tx, ty;
  if (p.kind == TransformKind::Similarity) {
    q = p.values[0];
    sx = sy = p.values[1];
    shx = shy = 0.0;
    tx = p.values[2];
    ty = p.values[3];
  } else {
    q = p.values[0];
    sx = p.values[1];
    sy = p.values[2];
    shx = p.values[3];
    shy = p.values[4];
    tx = p.values[5];
    ty = p.values[6];
  }
  TransformMatrix scale;
  scale.m = {sx, 0, 0, 0, sy, 0, 0, 0, 1};
  TransformMatrix shear;
  shear.m = {1, shy, 0, shx, 1, 0, 0, 0, 1};
  TransformMatrix rot;
  const double c = std::cos(q), s = std::sin(q);
  rot.m = {c, s, 0, -s, c, 0, 0, 0, 1};
  return compose(compose(compose(scale, shear), rot), TransformMatrix::translation(tx, ty));
}

// Same transform but rotating/scaling about (cx, cy) instead of the origin.
inline TransformMatrix to_matrix_centered(const TransformParams& p, double cx, double cy) {
  return compose(compose(TransformMatrix::translation(-cx, -cy), to_matrix(p)),
                 TransformMatrix::translation(cx, cy));
}

struct SingularMatrix : std::runtime_error {
  SingularMatrix() : std::runtime_error("transform matrix is singular") {}
};

inline TransformMatrix invert(const TransformMatrix& m) {
  // Affine form: invert the 2x2 block, then the translation row.
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const double det = a * d - b * c;
  if (std::abs(det) < 1e-15) throw SingularMatrix();
  TransformMatrix inv;
  inv(0, 0) = d / det;
  inv(0, 1) = -b / det;
  inv(1, 0) = -c / det;
  inv(1, 1) = a / det;
  inv(2, 0) = -(m(2, 0) * inv(0, 0) + m(2, 1) * inv(1, 0));
  inv(2, 1) = -(m(2, 0) * inv(0, 1) + m(2, 1) * inv(1, 1));
  inv(0, 2) = inv(1, 2) = 0.0;
  inv(2, 2) = 1.0;
  return inv;
}

inline nlohmann::json to_json(const TransformParams& p, const TransformMatrix& m) {
  return nlohmann::json{{"kind", to_string(p.kind)},
                        {"params", p.values},
                        {"matrix", std::vector<double>(m.m.begin(), m.m.end())}};
}

inline TransformParams params_from_json(const nlohmann::json& j) {
  TransformParams p;
  p.kind = transform_kind_from_string(j.at("kind").get<std::string>());
  p.values = j.at("params").get<std::vector<double>>();
  if (!p.valid()) throw std::invalid_argument("params_from_json: invalid parameter vector");
  return p;
}

inline TransformMatrix matrix_from_json(const nlohmann::json& j) {
  auto v = j.at("matrix").get<std::vector<double>>();
  if (v.size() != 9) throw std::invalid_argument("matrix_from_json: expected 9 numbers");
  TransformMatrix m;
  std::copy(v.begin(), v.end(), m.m.begin());
  return m;
}

}  // namespace vtalign
