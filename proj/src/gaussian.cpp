#include "qclass/gaussian.hpp"

#include <algorithm>
#include <string>

namespace qclass {

double purity(const GaussianShape& shape) {
    const double det = shape.det();
    if (det < -kPhysTol) {
        throw InvalidStateError("purity: negative discriminant det = " + std::to_string(det));
    }
    return std::sqrt(std::max(det, 0.0));
}

Moments moments(const GaussianShape& shape) {
    const double det = shape.det();
    if (det <= 0.0) {
        throw DegenerateStateError("moments: det <= 0, quadratic form not invertible");
    }
    return Moments{std::sqrt(shape.beta / (2.0 * det)),
                   std::sqrt(shape.alpha / (2.0 * det)),
                   -shape.gamma / (2.0 * det)};
}

GaussianShape shape_from_moments(const Moments& m) {
    const double det_sigma = m.dx * m.dx * m.dp * m.dp - m.cxp * m.cxp;
    if (det_sigma <= 0.0) {
        throw DegenerateStateError("shape_from_moments: covariance matrix not positive definite");
    }
    const double inv = 1.0 / (2.0 * det_sigma);
    return GaussianShape{m.dp * m.dp * inv, m.dx * m.dx * inv, -m.cxp * inv};
}

GaussianShape purify(const GaussianShape& shape) {
    const double det = shape.det();
    if (det <= 0.0) {
        throw DegenerateStateError("purify: det <= 0");
    }
    const double scale = 1.0 / std::sqrt(det);
    return GaussianShape{shape.alpha * scale, shape.beta * scale, shape.gamma * scale};
}

double overlap(const GaussianShape& a, const GaussianShape& b, OverlapKind kind) {
    if (a.det() <= 0.0 || b.det() <= 0.0) {
        throw DegenerateStateError("overlap: degenerate input state");
    }
    if (kind == OverlapKind::PurifiedModulus) {
        const GaussianShape pa = purify(a);
        const GaussianShape pb = purify(b);
        const double det_sum = (pa.alpha + pb.alpha) * (pa.beta + pb.beta) -
                               (pa.gamma + pb.gamma) * (pa.gamma + pb.gamma);
        return std::sqrt(2.0 / std::sqrt(det_sum));
    }
    // Tr(rho_a rho_b) = 2 sqrt(det_a det_b) / sqrt(det(Ma + Mb)), normalized by
    // the purities so that overlap(s, s) = 1.
    const double det_sum = (a.alpha + b.alpha) * (a.beta + b.beta) -
                           (a.gamma + b.gamma) * (a.gamma + b.gamma);
    return 2.0 * std::pow(a.det() * b.det(), 0.25) / std::sqrt(det_sum);
}

Physicality classify(const GaussianShape& shape) noexcept {
    const double det = shape.det();
    if (shape.alpha < -kPhysTol || shape.beta < -kPhysTol || det < -kPhysTol ||
        det > 1.0 + kPhysTol) {
        return Physicality::Unphysical;
    }
    if (det <= kPhysTol || shape.alpha <= kPhysTol) {
        return Physicality::Degenerate;
    }
    if (std::abs(det - 1.0) <= kPhysTol) {
        return Physicality::ProperPure;
    }
    return Physicality::ProperMixed;
}

const char* to_string(Physicality p) noexcept {
    switch (p) {
    case Physicality::ProperPure: return "ProperPure";
    case Physicality::ProperMixed: return "ProperMixed";
    case Physicality::Degenerate: return "Degenerate";
    case Physicality::Unphysical: return "Unphysical";
    }
    return "Unknown";
}

} // namespace qclass
