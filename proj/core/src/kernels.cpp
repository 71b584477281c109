#include "bvc/kernels.h"

#include <cmath>

namespace bvc {

double besselK0(double t) {
    if (!(t > 0.0)) throw std::domain_error("besselK0: argument must be positive");
    if (t >= 740.0) return 0.0; // underflow
    return std::cyl_bessel_k(0.0, t);
}

double besselK1(double t) {
    if (!(t > 0.0)) throw std::domain_error("besselK1: argument must be positive");
    if (t >= 740.0) return 0.0;
    return std::cyl_bessel_k(1.0, t);
}

double besselI0(double t) {
    if (t < 0.0) throw std::domain_error("besselI0: argument must be non-negative");
    if (t >= 700.0) return Inf; // overflow; callers only ever need 1/I0 here
    return std::cyl_bessel_i(0.0, t);
}

double besselI1(double t) {
    if (t < 0.0) throw std::domain_error("besselI1: argument must be non-negative");
    if (t >= 700.0) return Inf;
    return std::cyl_bessel_i(1.0, t);
}

double ballGreens(const KernelSpec& spec, double R, double r) {
    if (!(R > 0.0) || r < 0.0 || r > R) throw std::domain_error("ball kernel: bad radius");
    if (spec.kind == KernelKind::Poisson)
        return spec.dim == 2 ? std::log(r / R) / (2.0 * Pi)
                             : (1.0 / R - 1.0 / r) / (4.0 * Pi);
    double s = std::sqrt(spec.sigma);
    if (spec.dim == 2) {
        double ratio = besselK0(R * s) / besselI0(R * s);
        return -(besselK0(r * s) - besselI0(r * s) * ratio) / (2.0 * Pi);
    }
    return -std::sinh((R - r) * s) / (4.0 * Pi * r * std::sinh(R * s));
}

double ballGreensMass(const KernelSpec& spec, double R) {
    if (!(R > 0.0)) throw std::domain_error("ball kernel: bad radius");
    if (spec.kind == KernelKind::Poisson)
        return spec.dim == 2 ? -R * R / 4.0 : -R * R / 6.0;
    // follows from the representation of u == 1: mass = (survival - 1) / sigma
    double c = ballSphereWeight(spec, R, R);
    return (c - 1.0) / spec.sigma;
}

double ballSphereWeight(const KernelSpec& spec, double R, double rHit) {
    if (spec.kind == KernelKind::Poisson) return 1.0;
    double s = std::sqrt(spec.sigma);
    if (spec.dim == 2) {
        double tR = R * s, tr = rHit * s;
        double i0 = besselI0(tR);
        if (!std::isfinite(i0)) return 0.0; // deep screening: walks carry ~no weight
        return tr * (besselK1(tr) + besselI1(tr) * besselK0(tR) / i0);
    }
    double a = (R - rHit) * s;
    return (rHit * s * std::cosh(a) + std::sinh(a)) / std::sinh(R * s);
}

Vector2 ballGreensGradient(const KernelSpec& spec, const Vector2& x, double R, const Vector2& y) {
    if (spec.kind != KernelKind::Poisson)
        throw std::domain_error("ball kernel gradient: Poisson only");
    Vector2 d = y - x;
    double r = d.norm();
    detail::guardRadius(spec, r);
    if (spec.dim == 2) return Vector2(d * (1.0 / (R * R) - 1.0 / (r * r)) / (2.0 * Pi));
    return Vector2(d * (1.0 / (R * R * R) - 1.0 / (r * r * r)) / (4.0 * Pi));
}

// radial CDF of |G^B| sampling in 2D: F(t) = t^2 (1 - 2 log t), t = r/R
static double invertBallRadialCdf(double u) {
    if (u <= 0.0) return 1e-8;
    if (u >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0, t = std::sqrt(u);
    for (int it = 0; it < 100; it++) {
        double logT = std::log(t);
        double fv = t * t * (1.0 - 2.0 * logT) - u;
        if (fv > 0.0) hi = t;
        else lo = t;
        double deriv = -4.0 * t * logT;
        double step = deriv != 0.0 ? fv / deriv : 0.0;
        double next = t - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // bisection fallback
        if (std::abs(next - t) < 1e-15) return next;
        t = next;
    }
    return t;
}

BallPointSample sampleBallGreens(const KernelSpec& spec, const Vector2& center, double R,
                                 Rng& rng) {
    if (spec.kind != KernelKind::Poisson || spec.dim != 2)
        throw std::domain_error("sample_ball_greens: 2D Poisson ball only");
    double t = invertBallRadialCdf(rng.uniform());
    double r = std::max(t * R, 1e-14 * R);
    double theta = rng.uniform(0.0, 2.0 * Pi);
    BallPointSample s;
    s.p = center + r * Vector2(std::cos(theta), std::sin(theta));
    s.pdf = ballGreens(spec, R, r) / ballGreensMass(spec, R);
    return s;
}

} // namespace bvc
