#include "hypflow/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hypflow/fft.hpp"

namespace hypflow {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

TorusGrid::TorusGrid(int n_pts) : n(n_pts), h(2.0 / n_pts) {
    if (n_pts < 8 || n_pts % 2 != 0 || !power_of_two(n_pts))
        throw InvalidArgument("TorusGrid: n must be an even power of two >= 8");
}

VorticityField::VorticityField(TorusGrid grid, double time)
    : grid_(grid), v_(static_cast<size_t>(grid.n) * grid.n, 0.0), time_(time) {}

VorticityField::VorticityField(TorusGrid grid, std::vector<double> values, double time)
    : grid_(grid), v_(std::move(values)), time_(time) {
    if (v_.size() != static_cast<size_t>(grid_.n) * grid_.n)
        throw InvalidArgument("VorticityField: value array does not match grid");
}

void VorticityField::set_values(std::vector<double> v) {
    if (v.size() != static_cast<size_t>(grid_.n) * grid_.n)
        throw InvalidArgument("VorticityField: value array does not match grid");
    v_ = std::move(v);
    dirty_ = true;
}

const std::vector<cplx>& VorticityField::spectral() const {
    if (dirty_) {
        for (double x : v_)
            if (!std::isfinite(x)) throw InvalidField("to_spectral: non-finite field value");
        spec_ = fft2_forward(grid_.n, v_);
        dirty_ = false;
    }
    return spec_;
}

cplx VorticityField::spectral_coeff(int m1, int m2) const {
    const auto& s = spectral();
    const int n = grid_.n;
    int i = grid_.wrap(m1), j = grid_.wrap(m2);
    // nodes sit at x = -1 + j h, so the e^{i pi m x} coefficient carries an
    // extra (-1)^(m1+m2) relative to the raw DFT bin
    double phase = ((m1 + m2) % 2 == 0) ? 1.0 : -1.0;
    return phase * s[static_cast<size_t>(j) * n + i];
}

double VorticityField::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

VorticityField symmetrize(const VorticityField& f) {
    const int n = f.n();
    const TorusGrid& g = f.grid();
    std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
    const auto& v = f.values();
    const int o = g.origin_index();
    // one signed average per reflection orbit, written to all four slots, so
    // both odd symmetries and idempotence hold bit-exactly (the pairing
    // (a-b)+(d-c) re-projects a symmetric orbit without rounding)
    auto val = [&](int i, int j) { return v[static_cast<size_t>(j) * n + i]; };
    auto put = [&](int i, int j, double s) { out[static_cast<size_t>(j) * n + i] = s; };
    for (int j = 1; j < o; ++j) {
        int jr = n - j;
        for (int i = 1; i < o; ++i) {
            int ir = n - i;
            double s = 0.25 * ((val(i, j) - val(ir, j)) + (val(ir, jr) - val(i, jr)));
            put(i, j, s);
            put(ir, j, -s);
            put(i, jr, -s);
            put(ir, jr, s);
        }
    }
    // axis nodes (fixed points of a reflection) are exactly zero; `out` was
    // zero-initialized, so nothing to do for i or j in {0, n/2}
    return VorticityField(g, std::move(out), f.time());
}

double symmetry_defect(const VorticityField& f) {
    const int n = f.n();
    const TorusGrid& g = f.grid();
    const auto& v = f.values();
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        int jr = g.reflect(j);
        for (int i = 0; i < n; ++i) {
            int ir = g.reflect(i);
            double a = v[static_cast<size_t>(j) * n + i];
            worst = std::max(worst, std::abs(a + v[static_cast<size_t>(j) * n + ir]));
            worst = std::max(worst, std::abs(a + v[static_cast<size_t>(jr) * n + i]));
        }
    }
    return worst;
}

bool is_double_odd(const VorticityField& f, double tol) { return symmetry_defect(f) <= tol; }

namespace {

// 4-point Lagrange weights at fractional offset u in [0,1)
inline void cubic_weights(double u, double w[4]) {
    w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0;
    w[1] = (u * u - 1.0) * (u - 2.0) / 2.0;
    w[2] = -u * (u + 1.0) * (u - 2.0) / 2.0;
    w[3] = u * (u * u - 1.0) / 6.0;
}

inline void cubic_weights_deriv(double u, double w[4]) {
    w[0] = -(3.0 * u * u - 6.0 * u + 2.0) / 6.0;
    w[1] = (3.0 * u * u - 4.0 * u - 1.0) / 2.0;
    w[2] = -(3.0 * u * u - 2.0 * u - 2.0) / 2.0;
    w[3] = (3.0 * u * u - 1.0) / 6.0;
}

struct Stencil {
    int idx[4];
    double u;
};

inline Stencil stencil_1d(const TorusGrid& g, double x) {
    // base node such that x in [node(b), node(b+1))
    double s = (x + 1.0) / g.h;
    double fl = std::floor(s);
    Stencil st;
    st.u = s - fl;
    int b = static_cast<int>(fl);
    st.idx[0] = g.wrap(b - 1);
    st.idx[1] = g.wrap(b);
    st.idx[2] = g.wrap(b + 1);
    st.idx[3] = g.wrap(b + 2);
    return st;
}

} // namespace

double interp_bicubic(const TorusGrid& g, const std::vector<double>& v, Vec2 p) {
    Stencil sx = stencil_1d(g, p.x), sy = stencil_1d(g, p.y);
    double wx[4], wy[4];
    cubic_weights(sx.u, wx);
    cubic_weights(sy.u, wy);
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double* row = v.data() + static_cast<size_t>(sy.idx[j]) * g.n;
        double r = wx[0] * row[sx.idx[0]] + wx[1] * row[sx.idx[1]] +
                   wx[2] * row[sx.idx[2]] + wx[3] * row[sx.idx[3]];
        acc += wy[j] * r;
    }
    return acc;
}

ScalarFieldSample sample(const VorticityField& f, Vec2 p, bool with_gradient) {
    const TorusGrid& g = f.grid();
    ScalarFieldSample out;
    out.point = p;
    out.value = interp_bicubic(g, f.values(), p);
    if (with_gradient) {
        Stencil sx = stencil_1d(g, p.x), sy = stencil_1d(g, p.y);
        double wx[4], wy[4], dx[4], dy[4];
        cubic_weights(sx.u, wx);
        cubic_weights(sy.u, wy);
        cubic_weights_deriv(sx.u, dx);
        cubic_weights_deriv(sy.u, dy);
        double gx = 0.0, gy = 0.0;
        const auto& v = f.values();
        for (int j = 0; j < 4; ++j) {
            const double* row = v.data() + static_cast<size_t>(sy.idx[j]) * g.n;
            double r = 0.0, rd = 0.0;
            for (int i = 0; i < 4; ++i) {
                r += wx[i] * row[sx.idx[i]];
                rd += dx[i] * row[sx.idx[i]];
            }
            gx += wy[j] * rd;
            gy += dy[j] * r;
        }
        out.gradient = Vec2{gx / g.h, gy / g.h};
    }
    return out;
}

// --- serialization -----------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'H', 'Y', 'P', 'F'};
constexpr uint32_t kVersion = 1;
} // namespace

void save_field(const VorticityField& f, const std::string& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw FileError("save_field: cannot open " + path);
    const int n = f.n();
    if (binary) {
        os.write(kMagic, 4);
        uint32_t ver = kVersion, nn = static_cast<uint32_t>(n);
        double t = f.time();
        os.write(reinterpret_cast<const char*>(&ver), 4);
        os.write(reinterpret_cast<const char*>(&nn), 4);
        os.write(reinterpret_cast<const char*>(&t), 8);
        os.write(reinterpret_cast<const char*>(f.values().data()),
                 static_cast<std::streamsize>(sizeof(double) * f.values().size()));
    } else {
        os.precision(17);
        os << "n," << n << ",time," << f.time() << "\n";
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) os << (i ? "," : "") << f.value(i, j);
            os << "\n";
        }
    }
    if (!os) throw FileError("save_field: write failed for " + path);
}

VorticityField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileError("load_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (is && std::memcmp(magic, kMagic, 4) == 0) {
        uint32_t ver = 0, nn = 0;
        double t = 0.0;
        is.read(reinterpret_cast<char*>(&ver), 4);
        is.read(reinterpret_cast<char*>(&nn), 4);
        is.read(reinterpret_cast<char*>(&t), 8);
        if (!is || ver != kVersion) throw FileError("load_field: bad header in " + path);
        TorusGrid g(static_cast<int>(nn));
        std::vector<double> v(static_cast<size_t>(g.n) * g.n);
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(sizeof(double) * v.size()));
        if (!is) throw FileError("load_field: truncated data in " + path);
        return VorticityField(g, std::move(v), t);
    }
    // CSV fallback
    is.close();
    std::ifstream cs(path);
    std::string header;
    std::getline(cs, header);
    int n = 0;
    double t = 0.0;
    if (std::sscanf(header.c_str(), "n,%d,time,%lf", &n, &t) != 2)
        throw FileError("load_field: unrecognized format in " + path);
    TorusGrid g(n);
    std::vector<double> v;
    v.reserve(static_cast<size_t>(n) * n);
    std::string line;
    while (std::getline(cs, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    }
    if (v.size() != static_cast<size_t>(n) * n)
        throw FileError("load_field: wrong value count in " + path);
    return VorticityField(g, std::move(v), t);
}

} // namespace hypflow
