#pragma once

#include <stdexcept>

#include "bvc/rng.h"
#include "bvc/vec.h"

namespace bvc {

// raised when an unclamped kernel is evaluated inside its singularity guard;
// callers decide whether to skip, resample, or clamp
struct KernelSingularity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class KernelKind { Poisson, ScreenedPoisson };

// Free-space fundamental solutions of (Laplacian - sigma) G = delta and their
// derivatives. The sign convention is fixed by that identity, so the boundary
// integral representation
//   u(x) = \int_dR [dG/dn u - G du/dn] dz + \int_R G f dy
// holds verbatim: 2D Poisson G = log(r)/2pi, 3D G = -1/(4 pi r), screened
// G = -K0(r sqrt(sigma))/2pi and -e^{-r sqrt(sigma)}/(4 pi r). All derivative
// kernels below are the exact derivatives of these values.
struct KernelSpec {
    KernelKind kind = KernelKind::Poisson;
    double sigma = 0.0;
    int dim = 2;
    double scale = 1.0; // scene scale used by the singularity guard

    void validate() const {
        if ((sigma == 0.0) != (kind == KernelKind::Poisson))
            throw std::invalid_argument("kernel: sigma = 0 iff kind = Poisson");
        if (sigma < 0.0) throw std::invalid_argument("kernel: sigma must be >= 0");
        if (dim != 2 && dim != 3) throw std::invalid_argument("kernel: dimension must be 2 or 3");
    }
    static KernelSpec poisson(int dim = 2, double scale = 1.0) {
        return {KernelKind::Poisson, 0.0, dim, scale};
    }
    static KernelSpec screened(double sigma, int dim = 2, double scale = 1.0) {
        return {KernelKind::ScreenedPoisson, sigma, dim, scale};
    }
};

// modified Bessel functions; K underflows to 0 for very large arguments
double besselK0(double t);
double besselK1(double t);
double besselI0(double t);
double besselI1(double t);

// symmetric clamp to [-c, c] (the clamped-kernel operation)
inline double clampKernel(double value, double c) { return std::max(-c, std::min(c, value)); }

namespace detail {

inline void guardRadius(const KernelSpec& spec, double r) {
    if (!(r >= 1e-12 * spec.scale))
        throw KernelSingularity("kernel evaluated within the singularity guard");
}

// screened radial factor Q^sigma multiplying the Poisson derivative kernels
inline double screenedQ(const KernelSpec& spec, double r) {
    if (spec.kind == KernelKind::Poisson) return 1.0;
    double t = r * std::sqrt(spec.sigma);
    return spec.dim == 2 ? besselK1(t) * t : std::exp(-t) * (t + 1.0);
}

// d(Q^sigma)/dx = qPrimeFactor * (x - y); zero for Poisson
inline double screenedQPrimeFactor(const KernelSpec& spec, double r) {
    if (spec.kind == KernelKind::Poisson) return 0.0;
    double t = r * std::sqrt(spec.sigma);
    return spec.dim == 2 ? -spec.sigma * besselK0(t) : -spec.sigma * std::exp(-t);
}

} // namespace detail

// G(x, y)
template <class Vec>
double greensFree(const KernelSpec& spec, const Vec& x, const Vec& y) {
    double r = (x - y).norm();
    detail::guardRadius(spec, r);
    if (spec.kind == KernelKind::Poisson)
        return spec.dim == 2 ? std::log(r) / (2.0 * Pi) : -1.0 / (4.0 * Pi * r);
    double t = r * std::sqrt(spec.sigma);
    return spec.dim == 2 ? -besselK0(t) / (2.0 * Pi) : -std::exp(-t) / (4.0 * Pi * r);
}

// dG/dx
template <class Vec>
Vec greensFreeGradient(const KernelSpec& spec, const Vec& x, const Vec& y) {
    double r = (x - y).norm();
    detail::guardRadius(spec, r);
    double r2 = r * r;
    Vec poisson = spec.dim == 2 ? Vec((x - y) / (2.0 * Pi * r2))
                                : Vec((x - y) / (4.0 * Pi * r2 * r));
    return detail::screenedQ(spec, r) * poisson;
}

// dG/dn_y (the double-layer / Poisson kernel)
template <class Vec>
double poissonKernelFree(const KernelSpec& spec, const Vec& x, const Vec& y, const Vec& n) {
    double r = (x - y).norm();
    detail::guardRadius(spec, r);
    double r2 = r * r;
    double poisson = spec.dim == 2 ? n.dot(y - x) / (2.0 * Pi * r2)
                                   : n.dot(y - x) / (4.0 * Pi * r2 * r);
    return detail::screenedQ(spec, r) * poisson;
}

// d2G/dx dn_y
template <class Vec>
Vec poissonKernelGradient(const KernelSpec& spec, const Vec& x, const Vec& y, const Vec& n) {
    double r = (x - y).norm();
    detail::guardRadius(spec, r);
    double r2 = r * r;
    double dot = n.dot(y - x);
    Vec poissonGrad;
    double poissonValue;
    if (spec.dim == 2) {
        poissonGrad = Vec(2.0 * dot / (2.0 * Pi * r2 * r2) * (y - x) - n / (2.0 * Pi * r2));
        poissonValue = dot / (2.0 * Pi * r2);
    } else {
        poissonGrad = Vec(3.0 * dot / (4.0 * Pi * r2 * r2 * r) * (y - x) - n / (4.0 * Pi * r2 * r));
        poissonValue = dot / (4.0 * Pi * r2 * r);
    }
    // product rule on Q^sigma x Poisson kernel
    return Vec(detail::screenedQ(spec, r) * poissonGrad +
               poissonValue * detail::screenedQPrimeFactor(spec, r) * (x - y));
}

// --- ball kernels -----------------------------------------------------------
// Green's function of a ball B(center, R) with zero boundary value, same sign
// convention as above: non-positive inside, dG^B/dn = +1/|dB| on the sphere.

// radial value at distance r from the center (r <= R)
double ballGreens(const KernelSpec& spec, double R, double r);

template <class Vec>
double ballGreens(const KernelSpec& spec, const Vec& center, double R, const Vec& y) {
    double r = (y - center).norm();
    if (r > R * (1.0 + 1e-12)) throw std::domain_error("ball kernel: point outside the ball");
    return ballGreens(spec, R, std::min(r, R));
}

// integral of G^B over the ball
double ballGreensMass(const KernelSpec& spec, double R);

// WoSt recursion weight for a ray hit at distance rHit inside a ball of radius
// R: 2 pi rHit (dG^B/dr)(rHit). Equals 1 for Poisson; at rHit = R it reduces to
// the screened sphere normalization 1/I0(R sqrt(sigma)).
double ballSphereWeight(const KernelSpec& spec, double R, double rHit);

// dG^B/dx at the ball center (the ball moves with x); Poisson only
Vector2 ballGreensGradient(const KernelSpec& spec, const Vector2& x, double R, const Vector2& y);

struct BallPointSample {
    Vector2 p = Vector2::Zero();
    double pdf = 0.0; // G^B / mass (positive)
};

// draws y with density proportional to |G^B| over a 2D Poisson ball
BallPointSample sampleBallGreens(const KernelSpec& spec, const Vector2& center, double R, Rng& rng);

} // namespace bvc
