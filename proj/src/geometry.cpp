#include "isoprefs/geometry.hpp"

#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>

#include "isoprefs/common.hpp"
#include "isoprefs/rng.hpp"

namespace isoprefs {

namespace {

constexpr double kDegenerateTol = 1e-9;

// Unique sign for (near-)homogeneous parameter vectors: flip so the largest
// magnitude entry is positive. Keeps fitted pools stable for the
// bit-for-bit determinism tests.
void canonicalize_sign(double* theta, int count) {
    int lead = 0;
    for (int i = 1; i < count; ++i)
        if (std::abs(theta[i]) > std::abs(theta[lead])) lead = i;
    if (theta[lead] < 0.0)
        for (int i = 0; i < count; ++i) theta[i] = -theta[i];
}

ModelInstance fit_line2d(std::span<const PointRef> s) {
    const double dx = s[1][0] - s[0][0];
    const double dy = s[1][1] - s[0][1];
    const double len = std::hypot(dx, dy);
    if (len <= kDegenerateTol) throw DegenerateSample("line2d: coincident points");
    ModelInstance m{FamilyKind::line2d, {}};
    m.theta[0] = -dy / len;
    m.theta[1] = dx / len;
    m.theta[2] = -(m.theta[0] * s[0][0] + m.theta[1] * s[0][1]);
    canonicalize_sign(m.theta.data(), 2);
    m.theta[2] = -(m.theta[0] * s[0][0] + m.theta[1] * s[0][1]);
    return m;
}

ModelInstance fit_circle2d(std::span<const PointRef> s) {
    // two perpendicular-bisector equations, solved by Cramer's rule
    const double ax = s[1][0] - s[0][0], ay = s[1][1] - s[0][1];
    const double bx = s[2][0] - s[0][0], by = s[2][1] - s[0][1];
    const double det = 2.0 * (ax * by - ay * bx);
    if (std::abs(det) <= kDegenerateTol)
        throw DegenerateSample("circle2d: collinear points");
    const double a2 = ax * (s[1][0] + s[0][0]) + ay * (s[1][1] + s[0][1]);
    const double b2 = bx * (s[2][0] + s[0][0]) + by * (s[2][1] + s[0][1]);
    ModelInstance m{FamilyKind::circle2d, {}};
    m.theta[0] = (a2 * 2.0 * by - 2.0 * ay * b2) / (2.0 * det);
    m.theta[1] = (2.0 * ax * b2 - a2 * 2.0 * bx) / (2.0 * det);
    m.theta[2] = std::hypot(s[0][0] - m.theta[0], s[0][1] - m.theta[1]);
    return m;
}

ModelInstance fit_plane3d(std::span<const PointRef> s) {
    const double ux = s[1][0] - s[0][0], uy = s[1][1] - s[0][1], uz = s[1][2] - s[0][2];
    const double vx = s[2][0] - s[0][0], vy = s[2][1] - s[0][1], vz = s[2][2] - s[0][2];
    double nx = uy * vz - uz * vy;
    double ny = uz * vx - ux * vz;
    double nz = ux * vy - uy * vx;
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (len <= kDegenerateTol) throw DegenerateSample("plane3d: collinear points");
    ModelInstance m{FamilyKind::plane3d, {}};
    m.theta[0] = nx / len;
    m.theta[1] = ny / len;
    m.theta[2] = nz / len;
    canonicalize_sign(m.theta.data(), 3);
    m.theta[3] = -(m.theta[0] * s[0][0] + m.theta[1] * s[0][1] + m.theta[2] * s[0][2]);
    return m;
}

ModelInstance fit_sphere3d(std::span<const PointRef> s) {
    // |x|^2 - 2 c.x + (|c|^2 - r^2) = 0; subtracting the first equation from
    // the rest leaves a 3x3 linear system for the center
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    const double n0 = s[0][0] * s[0][0] + s[0][1] * s[0][1] + s[0][2] * s[0][2];
    for (int i = 0; i < 3; ++i) {
        const PointRef& p = s[i + 1];
        A(i, 0) = 2.0 * (p[0] - s[0][0]);
        A(i, 1) = 2.0 * (p[1] - s[0][1]);
        A(i, 2) = 2.0 * (p[2] - s[0][2]);
        rhs(i) = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - n0;
    }
    if (std::abs(A.determinant()) <= kDegenerateTol)
        throw DegenerateSample("sphere3d: coplanar points");
    Eigen::Vector3d c = A.partialPivLu().solve(rhs);
    ModelInstance m{FamilyKind::sphere3d, {}};
    m.theta[0] = c(0);
    m.theta[1] = c(1);
    m.theta[2] = c(2);
    m.theta[3] = std::sqrt((c(0) - s[0][0]) * (c(0) - s[0][0]) +
                           (c(1) - s[0][1]) * (c(1) - s[0][1]) +
                           (c(2) - s[0][2]) * (c(2) - s[0][2]));
    if (m.theta[3] <= kDegenerateTol)
        throw DegenerateSample("sphere3d: zero radius");
    return m;
}

void quadric_monomials(PointRef p, double* row) {
    const double x = p[0], y = p[1], z = p[2];
    row[0] = x * x;
    row[1] = y * y;
    row[2] = z * z;
    row[3] = x * y;
    row[4] = x * z;
    row[5] = y * z;
    row[6] = x;
    row[7] = y;
    row[8] = z;
    row[9] = 1.0;
}

ModelInstance fit_quadric3d(std::span<const PointRef> s) {
    Eigen::Matrix<double, 9, 10> Z;
    for (int i = 0; i < 9; ++i) {
        double row[10];
        quadric_monomials(s[i], row);
        for (int j = 0; j < 10; ++j) Z(i, j) = row[j];
    }
    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 10>> svd(Z, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // rank must be exactly 9 for a unique (up to scale) solution
    if (sv(8) <= kDegenerateTol)
        throw DegenerateSample("quadric3d: rank-deficient sample");
    Eigen::Matrix<double, 10, 1> theta = svd.matrixV().col(9);
    ModelInstance m{FamilyKind::quadric3d, {}};
    for (int i = 0; i < 10; ++i) m.theta[i] = theta(i);
    canonicalize_sign(m.theta.data(), 10);
    return m;
}

} // namespace

int ModelFamily::ambient_dim() const {
    switch (kind) {
        case FamilyKind::line2d:
        case FamilyKind::circle2d: return 2;
        default: return 3;
    }
}

int ModelFamily::min_sample_size() const {
    switch (kind) {
        case FamilyKind::line2d: return 2;
        case FamilyKind::circle2d: return 3;
        case FamilyKind::plane3d: return 3;
        case FamilyKind::sphere3d: return 4;
        case FamilyKind::quadric3d: return 9;
    }
    return 0;
}

int ModelFamily::param_count() const {
    switch (kind) {
        case FamilyKind::line2d: return 3;
        case FamilyKind::circle2d: return 3;
        case FamilyKind::plane3d: return 4;
        case FamilyKind::sphere3d: return 4;
        case FamilyKind::quadric3d: return 10;
    }
    return 0;
}

const char* ModelFamily::name() const {
    switch (kind) {
        case FamilyKind::line2d: return "line2d";
        case FamilyKind::circle2d: return "circle2d";
        case FamilyKind::plane3d: return "plane3d";
        case FamilyKind::sphere3d: return "sphere3d";
        case FamilyKind::quadric3d: return "quadric3d";
    }
    return "?";
}

ModelFamily family_from_name(std::string_view name) {
    if (name == "line2d") return {FamilyKind::line2d};
    if (name == "circle2d") return {FamilyKind::circle2d};
    if (name == "plane3d") return {FamilyKind::plane3d};
    if (name == "sphere3d") return {FamilyKind::sphere3d};
    if (name == "quadric3d") return {FamilyKind::quadric3d};
    throw IoError("unknown model family: " + std::string(name));
}

ModelInstance fit_minimal(const ModelFamily& family, std::span<const PointRef> sample) {
    if (static_cast<int>(sample.size()) != family.min_sample_size())
        throw LengthMismatch("fit_minimal: wrong sample size");
    switch (family.kind) {
        case FamilyKind::line2d: return fit_line2d(sample);
        case FamilyKind::circle2d: return fit_circle2d(sample);
        case FamilyKind::plane3d: return fit_plane3d(sample);
        case FamilyKind::sphere3d: return fit_sphere3d(sample);
        case FamilyKind::quadric3d: return fit_quadric3d(sample);
    }
    throw DegenerateSample("fit_minimal: unreachable");
}

double residual(const ModelInstance& model, PointRef x) {
    switch (model.kind) {
        case FamilyKind::line2d:
            return std::abs(model.theta[0] * x[0] + model.theta[1] * x[1] + model.theta[2]);
        case FamilyKind::circle2d:
            return std::abs(std::hypot(x[0] - model.theta[0], x[1] - model.theta[1]) -
                            model.theta[2]);
        case FamilyKind::plane3d:
            return std::abs(model.theta[0] * x[0] + model.theta[1] * x[1] +
                            model.theta[2] * x[2] + model.theta[3]);
        case FamilyKind::sphere3d: {
            const double dx = x[0] - model.theta[0];
            const double dy = x[1] - model.theta[1];
            const double dz = x[2] - model.theta[2];
            return std::abs(std::sqrt(dx * dx + dy * dy + dz * dz) - model.theta[3]);
        }
        case FamilyKind::quadric3d: {
            const auto& t = model.theta;
            const double X = x[0], Y = x[1], Z = x[2];
            const double q = t[0] * X * X + t[1] * Y * Y + t[2] * Z * Z + t[3] * X * Y +
                             t[4] * X * Z + t[5] * Y * Z + t[6] * X + t[7] * Y +
                             t[8] * Z + t[9];
            const double gx = 2.0 * t[0] * X + t[3] * Y + t[4] * Z + t[6];
            const double gy = 2.0 * t[1] * Y + t[3] * X + t[5] * Z + t[7];
            const double gz = 2.0 * t[2] * Z + t[4] * X + t[5] * Y + t[8];
            const double g = std::sqrt(gx * gx + gy * gy + gz * gz);
            return std::abs(q) / std::max(g, 1e-12);
        }
    }
    return 0.0;
}

std::vector<ModelInstance> sample_models(const Matrix& points, const ModelFamily& family,
                                         std::size_t m, std::uint64_t seed,
                                         const std::vector<std::uint32_t>* locality) {
    const std::uint32_t mss = static_cast<std::uint32_t>(family.min_sample_size());
    const std::uint32_t pool =
        locality ? static_cast<std::uint32_t>(locality->size())
                 : static_cast<std::uint32_t>(points.rows());
    std::vector<ModelInstance> models;
    if (m == 0) return models;
    if (pool < mss)
        throw SamplingExhausted("sample_models: fewer points than minimal sample size");

    Rng rng(seed);
    models.reserve(m);
    std::vector<PointRef> sample(mss);
    const std::size_t retry_budget = 100 * m;
    std::size_t consecutive_failures = 0;
    while (models.size() < m) {
        auto picks = sample_without_replacement(rng, pool, mss);
        for (std::uint32_t i = 0; i < mss; ++i) {
            std::uint32_t row = locality ? (*locality)[picks[i]] : picks[i];
            sample[i] = points.row(row);
        }
        try {
            models.push_back(fit_minimal(family, sample));
            consecutive_failures = 0;
        } catch (const DegenerateSample&) {
            if (++consecutive_failures > retry_budget)
                throw SamplingExhausted("sample_models: too many degenerate draws");
        }
    }
    return models;
}

} // namespace isoprefs
