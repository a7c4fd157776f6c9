#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "isoprefs/matrix.hpp"

namespace isoprefs {

enum class FamilyKind { line2d, circle2d, plane3d, sphere3d, quadric3d };

struct ModelFamily {
    FamilyKind kind = FamilyKind::line2d;

    int ambient_dim() const;
    int min_sample_size() const;
    int param_count() const;
    const char* name() const;
};

ModelFamily family_from_name(std::string_view name);

// theta layout by family:
//   line2d    (a, b, c)          ax + by + c = 0, (a,b) unit
//   circle2d  (cx, cy, r)        r > 0
//   plane3d   (a, b, c, d)       ax + by + cz + d = 0, (a,b,c) unit
//   sphere3d  (cx, cy, cz, r)    r > 0
//   quadric3d 10 coefficients of x²,y²,z²,xy,xz,yz,x,y,z,1, unit norm
struct ModelInstance {
    FamilyKind kind = FamilyKind::line2d;
    std::array<double, 10> theta{};
};

// Exact interpolation of a minimal sample. Throws DegenerateSample when the
// sample is rank deficient (coincident, collinear, coplanar, ...); callers
// are expected to redraw.
ModelInstance fit_minimal(const ModelFamily& family, std::span<const PointRef> sample);

// Orthogonal distance for line/plane, |dist-to-center - r| for circle/sphere,
// first-order (Taubin) normalized algebraic distance for the quadric.
double residual(const ModelInstance& model, PointRef x);

// Draw m models RanSaC-style: uniform minimal sets without replacement per
// draw, refit on degeneracy. With `locality` the minimal sets come from that
// index subset only (Sliding-PIF samples inside the current window).
// Throws SamplingExhausted after 100*m consecutive degenerate draws.
std::vector<ModelInstance> sample_models(const Matrix& points, const ModelFamily& family,
                                         std::size_t m, std::uint64_t seed,
                                         const std::vector<std::uint32_t>* locality = nullptr);

} // namespace isoprefs
