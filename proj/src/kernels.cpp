#include "hypflow/kernels.hpp"

#include <cmath>

namespace hypflow {

namespace {

constexpr double kSingularEps = 1e-28; // squared-distance guard

struct Dist {
    // squared distances to the four reflections of x
    double A; // |y - x|^2
    double B; // |y - xt|^2
    double C; // |y - xb|^2
    double D; // |y + x|^2
    double p1, m1; // y1 + x1, y1 - x1
    double p2, m2; // y2 + x2, y2 - x2
};

inline Dist dist(Vec2 x, Vec2 y) {
    Dist d;
    d.m1 = y.x - x.x;
    d.p1 = y.x + x.x;
    d.m2 = y.y - x.y;
    d.p2 = y.y + x.y;
    d.A = d.m1 * d.m1 + d.m2 * d.m2;
    d.B = d.p1 * d.p1 + d.m2 * d.m2;
    d.C = d.m1 * d.m1 + d.p2 * d.p2;
    d.D = d.p1 * d.p1 + d.p2 * d.p2;
    return d;
}

inline void check(double denom_sq) {
    if (denom_sq < kSingularEps) throw SingularPoint("kernel evaluated at its singular point");
}

} // namespace

double kernel_value(KernelId id, Vec2 x, Vec2 y) {
    Dist d = dist(x, y);
    if (id.i == 1 && id.k == 1) {
        check(d.A * d.B);
        return y.x * d.m2 / (d.A * d.B);
    }
    if (id.i == 1 && id.k == 2) {
        check(d.D * d.C);
        return y.x * d.p2 / (d.D * d.C);
    }
    if (id.i == 2 && id.k == 1) {
        check(d.D * d.B);
        return y.y * d.p1 / (d.D * d.B);
    }
    if (id.i == 2 && id.k == 2) {
        check(d.A * d.C);
        return y.y * d.m1 / (d.A * d.C);
    }
    throw InvalidArgument("kernel_value: bad KernelId");
}

double kernel_pair(int i, Vec2 x, Vec2 y) {
    return kernel_value({i, 1}, x, y) + kernel_value({i, 2}, x, y);
}

double kernel_derivative(KernelId id, KernelVar wrt, Vec2 x, Vec2 y) {
    Dist d = dist(x, y);
    const double y1 = y.x, y2 = y.y;

    if (id.i == 1 && id.k == 1) {
        check(d.A * d.B);
        const double A = d.A, B = d.B;
        switch (wrt) {
            case KernelVar::X1:
                return -2.0 * y1 * d.p1 * d.m2 / (A * B * B) + 2.0 * y1 * d.m1 * d.m2 / (A * A * B);
            case KernelVar::X2:
                return 2.0 * y1 * d.m2 * d.m2 / (A * B * B) + 2.0 * y1 * d.m2 * d.m2 / (A * A * B) -
                       y1 / (A * B);
            case KernelVar::Y1:
                return -2.0 * y1 * d.p1 * d.m2 / (A * B * B) - 2.0 * y1 * d.m1 * d.m2 / (A * A * B) +
                       d.m2 / (A * B);
            case KernelVar::Y2:
                return -2.0 * y1 * d.m2 * d.m2 / (A * B * B) - 2.0 * y1 * d.m2 * d.m2 / (A * A * B) +
                       y1 / (A * B);
        }
    }
    if (id.i == 1 && id.k == 2) {
        check(d.D * d.C);
        const double C = d.C, D = d.D;
        switch (wrt) {
            case KernelVar::X1:
                return -2.0 * y1 * d.p1 * d.p2 / (D * D * C) + 2.0 * y1 * d.m1 * d.p2 / (D * C * C);
            case KernelVar::X2:
                return -2.0 * y1 * d.p2 * d.p2 / (D * D * C) - 2.0 * y1 * d.p2 * d.p2 / (D * C * C) +
                       y1 / (D * C);
            case KernelVar::Y1:
                return -2.0 * y1 * d.p1 * d.p2 / (D * D * C) - 2.0 * y1 * d.m1 * d.p2 / (D * C * C) +
                       d.p2 / (D * C);
            case KernelVar::Y2:
                return -2.0 * y1 * d.p2 * d.p2 / (D * D * C) - 2.0 * y1 * d.p2 * d.p2 / (D * C * C) +
                       y1 / (D * C);
        }
    }
    if (id.i == 2 && id.k == 1) {
        check(d.D * d.B);
        const double B = d.B, D = d.D;
        switch (wrt) {
            case KernelVar::X1:
                return -2.0 * y2 * d.p1 * d.p1 / (D * D * B) - 2.0 * y2 * d.p1 * d.p1 / (D * B * B) +
                       y2 / (D * B);
            case KernelVar::X2:
                return -2.0 * y2 * d.p1 * d.p2 / (D * D * B) + 2.0 * y2 * d.p1 * d.m2 / (D * B * B);
            case KernelVar::Y1:
                return -2.0 * y2 * d.p1 * d.p1 / (D * D * B) - 2.0 * y2 * d.p1 * d.p1 / (D * B * B) +
                       y2 / (D * B);
            case KernelVar::Y2:
                return -2.0 * y2 * d.p1 * d.p2 / (D * D * B) - 2.0 * y2 * d.p1 * d.m2 / (D * B * B) +
                       d.p1 / (D * B);
        }
    }
    if (id.i == 2 && id.k == 2) {
        check(d.A * d.C);
        const double A = d.A, C = d.C;
        switch (wrt) {
            case KernelVar::X1:
                return 2.0 * y2 * d.m1 * d.m1 / (A * C * C) + 2.0 * y2 * d.m1 * d.m1 / (A * A * C) -
                       y2 / (A * C);
            case KernelVar::X2:
                return -2.0 * y2 * d.m1 * d.p2 / (A * C * C) + 2.0 * y2 * d.m1 * d.m2 / (A * A * C);
            case KernelVar::Y1:
                return -2.0 * y2 * d.m1 * d.m1 / (A * C * C) - 2.0 * y2 * d.m1 * d.m1 / (A * A * C) +
                       y2 / (A * C);
            case KernelVar::Y2:
                return -2.0 * y2 * d.m1 * d.p2 / (A * C * C) - 2.0 * y2 * d.m1 * d.m2 / (A * A * C) +
                       d.m1 / (A * C);
        }
    }
    throw InvalidArgument("kernel_derivative: bad KernelId");
}

double kernel_pair_dx(int i, int j, Vec2 x, Vec2 y) {
    KernelVar v = (j == 1) ? KernelVar::X1 : KernelVar::X2;
    return kernel_derivative({i, 1}, v, x, y) + kernel_derivative({i, 2}, v, x, y);
}

} // namespace hypflow
