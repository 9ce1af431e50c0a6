#pragma once

#include <array>
#include <cmath>
#include <string>

#include "openable/error.hpp"

namespace openable {

inline constexpr double kGeomTol = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }

    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }

    double norm() const { return std::sqrt(dot(*this)); }

    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    Vec3 normalized() const {
        const double n = norm();
        require(n > 0.0, "invalid axis: zero-length vector");
        return {x / n, y / n, z / n};
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Angle between two axis directions, in degrees. Inputs are normalized
// internally. Undirected mode folds antiparallel onto parallel, so the
// result lands in [0, 90]; directed mode spans [0, 180]. atan2 is used
// rather than acos to keep precision near 0 and 180 degrees.
inline double angle_between_axes(const Vec3& a, const Vec3& b,
                                 bool undirected = true) {
    const Vec3 an = a.normalized();
    const Vec3 bn = b.normalized();
    const double c = an.dot(bn);
    const double s = an.cross(bn).norm();
    double deg = rad_to_deg(std::atan2(s, c));
    if (undirected && deg > 90.0) deg = 180.0 - deg;
    return deg;
}

// Distance from p to the infinite line through line_point with direction
// line_dir.
inline double point_to_line_distance(const Vec3& p, const Vec3& line_point,
                                     const Vec3& line_dir) {
    const Vec3 d = line_dir.normalized();
    return (p - line_point).cross(d).norm();
}

// Row-major 3x3 rotation matrix. Factories check orthonormality and
// det = +1 to kGeomTol.
struct RotMat {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static RotMat identity() { return RotMat{}; }

    double at(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }

    Vec3 row(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }
    Vec3 col(int c) const { return {at(0, c), at(1, c), at(2, c)}; }

    Vec3 apply(const Vec3& v) const {
        return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
    }

    RotMat transposed() const {
        RotMat t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                t.m[static_cast<size_t>(3 * r + c)] = at(c, r);
        return t;
    }

    double determinant() const {
        return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
               at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
               at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    }

    bool is_rotation(double tol = kGeomTol) const {
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                const double want = (i == j) ? 1.0 : 0.0;
                if (std::abs(row(i).dot(row(j)) - want) > tol) return false;
            }
        }
        return std::abs(determinant() - 1.0) <= tol;
    }

    static RotMat from_array(const std::array<double, 9>& a,
                             double tol = kGeomTol) {
        RotMat r;
        r.m = a;
        for (double v : a)
            require(std::isfinite(v), "rotation: non-finite entry");
        require(r.is_rotation(tol),
                "rotation: matrix is not orthonormal with determinant +1");
        return r;
    }

    static RotMat from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2,
                            double tol = kGeomTol) {
        return from_array({r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z},
                          tol);
    }

    static RotMat from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2,
                            double tol = kGeomTol) {
        return from_array({c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z},
                          tol);
    }
};

inline RotMat operator*(const RotMat& a, const RotMat& b) {
    RotMat r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.m[static_cast<size_t>(3 * i + j)] = a.row(i).dot(b.col(j));
    return r;
}

// Rodrigues rotation by `angle_rad` about unit axis through the origin.
inline RotMat rotation_about_axis(const Vec3& axis, double angle_rad) {
    const Vec3 u = axis.normalized();
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const double t = 1.0 - c;
    RotMat r;
    r.m = {c + u.x * u.x * t,       u.x * u.y * t - u.z * s, u.x * u.z * t + u.y * s,
           u.y * u.x * t + u.z * s, c + u.y * u.y * t,       u.y * u.z * t - u.x * s,
           u.z * u.x * t - u.y * s, u.z * u.y * t + u.x * s, c + u.z * u.z * t};
    return r;
}

// Repairs an arbitrary 9-vector into the nearest-by-construction rotation:
// Gram-Schmidt on the rows, then a determinant sign fix. Inputs that are
// already orthonormal with det +1 pass through bit-exact.
inline RotMat rotation_from_vec9(const std::array<double, 9>& v) {
    for (double e : v) require(std::isfinite(e), "rotation: non-finite entry");
    RotMat raw;
    raw.m = v;
    if (raw.is_rotation()) return raw;

    constexpr double kRankTol = 1e-12;
    const Vec3 a0 = raw.row(0);
    require(a0.norm() > kRankTol, "rotation: rank-deficient input");
    const Vec3 r0 = a0.normalized();

    Vec3 a1 = raw.row(1);
    a1 = a1 - r0 * r0.dot(a1);
    require(a1.norm() > kRankTol, "rotation: rank-deficient input");
    const Vec3 r1 = a1.normalized();

    Vec3 a2 = raw.row(2);
    a2 = a2 - r0 * r0.dot(a2) - r1 * r1.dot(a2);
    Vec3 r2;
    if (a2.norm() > kRankTol) {
        r2 = a2.normalized();
    } else {
        // Third row carries no new direction; orthogonal complement is
        // still well defined.
        r2 = r0.cross(r1);
    }

    RotMat out;
    out.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
    if (out.determinant() < 0.0) {
        out.m[6] = -out.m[6];
        out.m[7] = -out.m[7];
        out.m[8] = -out.m[8];
    }
    return out;
}

// Rigid transform p -> R p + t.
struct RigidTransform {
    RotMat rotation;
    Vec3 translation;

    static RigidTransform identity() { return {}; }
};

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
    return t.rotation.apply(p) + t.translation;
}

inline Vec3 transform_direction(const RigidTransform& t, const Vec3& d) {
    return t.rotation.apply(d);
}

// compose(b, a) applies a first, then b.
inline RigidTransform compose(const RigidTransform& b, const RigidTransform& a) {
    return {b.rotation * a.rotation,
            b.rotation.apply(a.translation) + b.translation};
}

inline RigidTransform invert(const RigidTransform& t) {
    const RotMat rt = t.rotation.transposed();
    return {rt, rt.apply(t.translation) * -1.0};
}

// Oriented bounding box with semantic up/front directions. The box frame is
// right-handed: x = front, y = up x front, z = up, with half_extents
// measured along (x, y, z) respectively.
struct SemanticOBB {
    Vec3 center;
    Vec3 up{0, 0, 1};
    Vec3 front{1, 0, 0};
    Vec3 half_extents{0.5, 0.5, 0.5};

    void validate() const {
        require(center.is_finite() && up.is_finite() && front.is_finite() &&
                    half_extents.is_finite(),
                "obb: non-finite field");
        require(std::abs(up.norm() - 1.0) <= kGeomTol, "obb: up is not unit");
        require(std::abs(front.norm() - 1.0) <= kGeomTol,
                "obb: front is not unit");
        require(std::abs(up.dot(front)) <= kGeomTol,
                "obb: up and front are not orthogonal");
        require(half_extents.x > 0.0 && half_extents.y > 0.0 &&
                    half_extents.z > 0.0,
                "invalid obb: degenerate half extent");
    }

    static SemanticOBB checked(const Vec3& center, const Vec3& up,
                               const Vec3& front, const Vec3& half_extents) {
        SemanticOBB o{center, up, front, half_extents};
        o.validate();
        return o;
    }

    std::array<Vec3, 3> axes() const {
        return {front, up.cross(front), up};
    }

    RotMat rotation() const {
        const auto ax = axes();
        return RotMat::from_cols(ax[0], ax[1], ax[2]);
    }
};

// Anisotropically normalized object coordinates: the OBB maps onto
// [-0.5, 0.5]^3, each dimension scaled by its own extent.
inline Vec3 to_anocs(const Vec3& p, const SemanticOBB& obb) {
    obb.validate();
    const Vec3 local = obb.rotation().transposed().apply(p - obb.center);
    return {local.x / (2.0 * obb.half_extents.x),
            local.y / (2.0 * obb.half_extents.y),
            local.z / (2.0 * obb.half_extents.z)};
}

inline Vec3 from_anocs(const Vec3& q, const SemanticOBB& obb) {
    obb.validate();
    const Vec3 local{q.x * 2.0 * obb.half_extents.x,
                     q.y * 2.0 * obb.half_extents.y,
                     q.z * 2.0 * obb.half_extents.z};
    return obb.rotation().apply(local) + obb.center;
}

}  // namespace openable
