#pragma once

// Drift/squared-diffusion coefficient pairs on [0,1]^d, the builtin model
// families, and admissibility validation:
//   * each a_i vanishes at 0 and 1 and is positive inside (0,1),
//   * each b_i points inward on the faces x_i in {0,1}.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgcert/lowdisc.hpp"
#include "sgcert/poly.hpp"

namespace sgcert {

struct CoefficientSystem {
  int dim = 0;
  std::vector<PolyExpr> drift;   // d polynomials of arity d
  std::vector<PolyExpr> sqdiff;  // d univariate polynomials (arity 1)
  std::string name = "custom";

  void check_shape() const {
    if (dim < 1) throw std::invalid_argument("CoefficientSystem: dim must be >= 1");
    if (drift.size() != static_cast<size_t>(dim) ||
        sqdiff.size() != static_cast<size_t>(dim))
      throw std::invalid_argument("CoefficientSystem: need d drift and d sqdiff entries");
    for (const auto& b : drift)
      if (b.arity() != dim)
        throw std::invalid_argument("CoefficientSystem: drift arity mismatch");
    for (const auto& a : sqdiff)
      if (a.arity() != 1)
        throw std::invalid_argument("CoefficientSystem: sqdiff must be univariate");
  }

  bool drift_is_zero() const {
    for (const auto& b : drift)
      if (!b.is_zero()) return false;
    return true;
  }

  bool diffusion_is_zero() const {
    for (const auto& a : sqdiff)
      if (!a.is_zero()) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Builtin families
// ---------------------------------------------------------------------------

struct BuiltinParams {
  double kappa = 1.0;
  double mbar = 0.5;
  double c = 1.0;
};

inline PolyExpr wright_fisher_profile() {
  // x(1-x)
  PolyExpr x = PolyExpr::variable(1, 1);
  return x - x * x;
}

/// Families: wright-fisher, logistic-drift(c), migration(kappa),
/// mutation(kappa, mbar), zero-drift, zero-diffusion(c).
inline CoefficientSystem builtin_system(const std::string& name,
                                        const BuiltinParams& params, int dim) {
  if (dim < 1) throw std::invalid_argument("builtin_system: dim must be >= 1");
  CoefficientSystem sys;
  sys.dim = dim;
  sys.name = name;
  const PolyExpr wf = wright_fisher_profile();
  const PolyExpr zero_b(dim);
  const PolyExpr zero_a(1);

  if (name == "wright-fisher" || name == "zero-drift") {
    sys.drift.assign(dim, zero_b);
    sys.sqdiff.assign(dim, wf);
  } else if (name == "logistic-drift") {
    for (int i = 1; i <= dim; ++i) {
      PolyExpr xi = PolyExpr::variable(dim, i);
      sys.drift.push_back(params.c * (xi - xi * xi));
    }
    sys.sqdiff.assign(dim, wf);
  } else if (name == "migration") {
    // b_i = kappa (xbar - x_i), xbar the coordinate mean
    PolyExpr xbar(dim);
    for (int j = 1; j <= dim; ++j)
      xbar = xbar + (1.0 / dim) * PolyExpr::variable(dim, j);
    for (int i = 1; i <= dim; ++i)
      sys.drift.push_back(params.kappa * (xbar - PolyExpr::variable(dim, i)));
    sys.sqdiff.assign(dim, wf);
  } else if (name == "mutation") {
    if (params.mbar < 0.0 || params.mbar > 1.0)
      throw std::invalid_argument("mutation: mbar must lie in [0,1]");
    for (int i = 1; i <= dim; ++i)
      sys.drift.push_back(params.kappa * (PolyExpr::constant(dim, params.mbar) -
                                          PolyExpr::variable(dim, i)));
    sys.sqdiff.assign(dim, wf);
  } else if (name == "zero-diffusion") {
    // contraction drift b_i = -c x_i with no noise
    if (params.c < 0.0)
      throw std::invalid_argument("zero-diffusion: c must be >= 0");
    for (int i = 1; i <= dim; ++i)
      sys.drift.push_back((-params.c) * PolyExpr::variable(dim, i));
    sys.sqdiff.assign(dim, zero_a);
  } else {
    throw std::invalid_argument("unknown builtin family: " + name);
  }
  sys.check_shape();
  return sys;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string invariant;       // which condition failed
  int coordinate = 0;          // 1-based i
  std::vector<double> witness; // point where it fails
  double value = 0.0;
};

struct ValidationReport {
  bool drift_admissible = true;
  bool diffusion_admissible = true;
  std::vector<Violation> violations;
  bool admissible() const { return drift_admissible && diffusion_admissible; }
};

namespace detail {

/// Exact minimum of an affine polynomial over a cube face (x_axis frozen).
inline double affine_face_min(const PolyExpr& face_poly, int dim, int frozen_axis) {
  double m = 0.0;
  for (const auto& [e, c] : face_poly.terms()) {
    const int order = exponents_order(e);
    if (order == 0) {
      m += c;
    } else {
      // single-variable linear term: contributes min(0, c) over [0,1]
      (void)frozen_axis;
      m += std::min(0.0, c);
    }
  }
  (void)dim;
  return m;
}

/// Corner of the face minimizing an affine polynomial (for the witness).
inline std::vector<double> affine_face_argmin(const PolyExpr& face_poly, int dim,
                                              int frozen_axis, double frozen_value) {
  std::vector<double> x(dim, 0.0);
  for (const auto& [e, c] : face_poly.terms()) {
    if (exponents_order(e) == 0) continue;
    for (size_t k = 0; k < e.size(); ++k)
      if (e[k] > 0 && c > 0.0) x[k] = 0.0;
      else if (e[k] > 0) x[k] = 1.0;
  }
  x[frozen_axis - 1] = frozen_value;
  return x;
}

}  // namespace detail

struct ValidationOptions {
  int interior_points = 10000;     // per-coordinate positivity grid
  int face_points = 1000;          // sample points per boundary face
  int max_faces = 64;              // cap for d > 6
  uint64_t face_sample_seed = 1u;  // deterministic face subsampling
};

/// Checks Setting-style admissibility.  An identically-zero a_i is accepted
/// as the deliberate "no diffusion" degenerate case (its semigroup is the
/// identity); only sign violations of a nonzero profile are reported.
inline ValidationReport validate(const CoefficientSystem& sys,
                                 const ValidationOptions& opt = {}) {
  sys.check_shape();
  ValidationReport rep;

  // diffusion: a_i(0) = a_i(1) = 0 exactly, a_i > 0 on a grid inside (0,1)
  for (int i = 0; i < sys.dim; ++i) {
    const PolyExpr& a = sys.sqdiff[i];
    if (a.is_zero()) continue;
    const double a0 = a.eval(std::vector<double>{0.0});
    const double a1 = a.eval(std::vector<double>{1.0});
    if (a0 != 0.0) {
      rep.diffusion_admissible = false;
      rep.violations.push_back({"a(0) = 0", i + 1, {0.0}, a0});
    }
    if (a1 != 0.0) {
      rep.diffusion_admissible = false;
      rep.violations.push_back({"a(1) = 0", i + 1, {1.0}, a1});
    }
    for (int k = 1; k < opt.interior_points; ++k) {
      const double x = static_cast<double>(k) / opt.interior_points;
      const double v = a.eval(std::vector<double>{x});
      if (v <= 0.0) {
        rep.diffusion_admissible = false;
        rep.violations.push_back({"a > 0 on (0,1)", i + 1, {x}, v});
        break;
      }
    }
  }

  // drift: (-1)^{x_i} b_i >= 0 on each face x_i in {0,1}
  struct Face {
    int coord;   // 1-based
    int side;    // 0 or 1
  };
  std::vector<Face> faces;
  for (int i = 1; i <= sys.dim; ++i) {
    faces.push_back({i, 0});
    faces.push_back({i, 1});
  }
  if (sys.dim > 6 && static_cast<int>(faces.size()) > opt.max_faces) {
    // deterministic subsample: take a fixed stride permutation
    std::vector<Face> picked;
    uint64_t state = opt.face_sample_seed;
    std::vector<Face> pool = faces;
    for (int k = 0; k < opt.max_faces; ++k) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      const size_t j = static_cast<size_t>(state >> 33) % pool.size();
      picked.push_back(pool[j]);
      pool.erase(pool.begin() + static_cast<long>(j));
    }
    faces = std::move(picked);
  }

  const auto alphas = weyl_alphas(sys.dim);
  for (const Face& face : faces) {
    const PolyExpr& b = sys.drift[face.coord - 1];
    const double sign = (face.side == 0) ? 1.0 : -1.0;
    const PolyExpr restricted = b.substitute(face.coord, face.side);
    if (restricted.is_affine()) {
      const PolyExpr signed_poly = sign * restricted;
      const double mn = detail::affine_face_min(signed_poly, sys.dim, face.coord);
      if (mn < 0.0) {
        rep.drift_admissible = false;
        rep.violations.push_back(
            {"(-1)^{x_i} b_i >= 0 on face", face.coord,
             detail::affine_face_argmin(signed_poly, sys.dim, face.coord,
                                        face.side),
             mn});
      }
      continue;
    }
    for (int k = 0; k < opt.face_points; ++k) {
      std::vector<double> x = weyl_point(alphas, static_cast<uint64_t>(k));
      x[face.coord - 1] = face.side;
      const double v = sign * b.eval(x);
      if (v < 0.0) {
        rep.drift_admissible = false;
        rep.violations.push_back({"(-1)^{x_i} b_i >= 0 on face", face.coord, x, v});
        break;
      }
    }
  }

  return rep;
}

}  // namespace sgcert
