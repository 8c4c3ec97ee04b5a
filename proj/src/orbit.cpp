#include "skewlab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace skewlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::string SkewSystem::describe() const {
    std::string fam = affine() ? affine_family().describe() : cocycle_family().describe();
    return driver->describe() + " / " + fam;
}

SkewSystem make_affine_system(DriverPtr driver, const Mat2i& matrix, OffsetKind offset,
                              std::vector<std::array<double, 2>> table) {
    AffineFamily fam;
    fam.matrix = eigen_split(matrix);
    fam.offset = offset;
    fam.table = std::move(table);
    if (offset == OffsetKind::Tabulated && fam.table.size() < 2)
        throw ConfigInvalid("tabulated offset needs at least 2 samples");
    return SkewSystem{std::move(driver), FiberFamily{std::move(fam)}};
}

SkewSystem make_cocycle_system(DriverPtr driver, std::vector<Mat2i> matrices) {
    if (!driver->symbolic())
        throw ConfigInvalid("cocycle families need a symbolic driver");
    CocycleFamily fam{std::move(matrices)};
    fam.validate();
    return SkewSystem{std::move(driver), FiberFamily{std::move(fam)}};
}

double torus_distance(const BigTorusPoint& p, const BigTorusPoint& q) {
    // High-precision subtraction, double-width comparison; distances are O(1)
    // so the double rounding is far below any tolerance in play.
    auto coord = [](const BigFloat& a, const BigFloat& b) {
        BigFloat d(std::max(a.precision(), b.precision()));
        d.sub(a, b);
        double v = std::fabs(d.to_double());
        v -= std::floor(v);
        return v <= 0.5 ? v : 1.0 - v;
    };
    return std::max(coord(p.x1, q.x1), coord(p.x2, q.x2));
}

BigOrbit::BigOrbit(const SkewSystem& sys, long t0, const BigTorusPoint& x,
                   const NumericsContext& ctx)
    : sys_(sys),
      ctx_(ctx),
      t_(t0),
      x_(ctx.mantissa_bits),
      omega_(ctx.mantissa_bits),
      alpha_(ctx.mantissa_bits),
      t1_(ctx.mantissa_bits),
      t2_(ctx.mantissa_bits),
      h1_(ctx.mantissa_bits),
      h2_(ctx.mantissa_bits) {
    x_.x1.set(x.x1);
    x_.x2.set(x.x2);
    x_.x1.reduce_mod1();
    x_.x2.reduce_mod1();
    if (sys_.affine() && sys_.affine_family().offset != OffsetKind::Zero) {
        sys_.driver->alpha().materialize(alpha_);
        sys_.driver->omega_coord_big(t_, omega_);
        rotation_incremental_ = true;
    }
}

double BigOrbit::omega_coord() const {
    return rotation_incremental_ ? omega_.to_double() : sys_.driver->omega_coord(t_);
}

void BigOrbit::load_offset() {
    const auto& fam = sys_.affine_family();
    switch (fam.offset) {
        case OffsetKind::Zero:
            h1_.set_si(0);
            h2_.set_si(0);
            break;
        case OffsetKind::OmegaX:
            h1_.set(omega_);
            h2_.set_si(0);
            break;
        case OffsetKind::Tabulated: {
            auto h = fam.offset_at(omega_.to_double());
            h1_.set(h[0]);
            h2_.set(h[1]);
            break;
        }
    }
}

void BigOrbit::step_forward() {
    if (sys_.affine()) {
        const Mat2i& m = sys_.affine_family().matrix.m;
        load_offset();
        t1_.mul_si(x_.x1, m.a);
        t2_.mul_si(x_.x2, m.b);
        t1_.add(t1_, t2_);
        t1_.add(t1_, h1_);
        t2_.mul_si(x_.x1, m.c);
        h1_.mul_si(x_.x2, m.d); // h1_ reusable after load
        t2_.add(t2_, h1_);
        t2_.add(t2_, h2_);
        x_.x1.set(t1_);
        x_.x2.set(t2_);
        x_.x1.reduce_mod1();
        x_.x2.reduce_mod1();
        if (rotation_incremental_) {
            omega_.add(omega_, alpha_);
            omega_.reduce_mod1();
        }
    } else {
        const Mat2i& m = sys_.cocycle_family().at(sys_.driver->symbol(t_));
        t1_.mul_si(x_.x1, m.a);
        t2_.mul_si(x_.x2, m.b);
        t1_.add(t1_, t2_);
        t2_.mul_si(x_.x1, m.c);
        h1_.mul_si(x_.x2, m.d);
        t2_.add(t2_, h1_);
        x_.x1.set(t1_);
        x_.x2.set(t2_);
        x_.x1.reduce_mod1();
        x_.x2.reduce_mod1();
    }
    ++t_;
}

void BigOrbit::step_backward() {
    if (!sys_.affine())
        throw PrecisionExhausted("cocycle systems iterate forward only");
    --t_;
    const Mat2i inv = sys_.affine_family().matrix.m.inverse();
    if (rotation_incremental_) {
        omega_.sub(omega_, alpha_);
        omega_.reduce_mod1();
    }
    load_offset();
    t1_.sub(x_.x1, h1_);
    t2_.sub(x_.x2, h2_);
    h1_.mul_si(t1_, inv.a);
    h2_.mul_si(t2_, inv.b);
    h1_.add(h1_, h2_);
    h2_.mul_si(t1_, inv.c);
    t1_.mul_si(t2_, inv.d);
    h2_.add(h2_, t1_);
    x_.x1.set(h1_);
    x_.x2.set(h2_);
    x_.x1.reduce_mod1();
    x_.x2.reduce_mod1();
}

void BigOrbit::advance(long steps) {
    for (; steps > 0; --steps) step_forward();
    for (; steps < 0; ++steps) step_backward();
}

void BigOrbit::reset(long t, const BigTorusPoint& x) {
    t_ = t;
    x_.x1.set(x.x1);
    x_.x2.set(x.x2);
    x_.x1.reduce_mod1();
    x_.x2.reduce_mod1();
    if (rotation_incremental_) sys_.driver->omega_coord_big(t_, omega_);
}

BigTorusPoint iterate_big(const SkewSystem& sys, long t0, const BigTorusPoint& x, long n,
                          const NumericsContext& ctx) {
    if (!ctx.is_big()) throw PrecisionExhausted("iterate_big needs a BIGFLOAT context");
    ctx.require_depth(std::labs(n), sys.expansion());
    if (n < 0 && !sys.affine())
        throw PrecisionExhausted("cocycle systems iterate forward only");
    BigOrbit orbit(sys, t0, x, ctx);
    orbit.advance(n);
    BigTorusPoint out(ctx.mantissa_bits);
    out.x1.set(orbit.point().x1);
    out.x2.set(orbit.point().x2);
    return out;
}

TorusPoint iterate(const SkewSystem& sys, long t0, const TorusPoint& x, long n,
                   const NumericsContext& ctx) {
    if (ctx.is_big()) {
        BigTorusPoint p(x, ctx.mantissa_bits);
        return iterate_big(sys, t0, p, n, ctx).to_double();
    }
    if (n < 0 && !sys.affine())
        throw PrecisionExhausted("cocycle systems iterate forward only");
    // Double-precision orbits are pseudo-orbits; statistics are trusted,
    // pointwise depth is for the BIGFLOAT path.
    TorusPoint p = x.reduced();
    if (sys.affine()) {
        const auto& fam = sys.affine_family();
        if (n >= 0) {
            for (long i = 0; i < n; ++i) p = apply_fiber(fam, sys.driver->omega_coord(t0 + i), p);
        } else {
            const Mat2i inv = fam.matrix.m.inverse();
            for (long i = 0; i > n; --i) {
                double omega = sys.driver->omega_coord(t0 + i - 1);
                auto h = fam.offset_at(omega);
                auto y = inv.apply(p.x1 - h[0], p.x2 - h[1]);
                p = TorusPoint{y[0], y[1]}.reduced();
            }
        }
    } else {
        const auto& fam = sys.cocycle_family();
        for (long i = 0; i < n; ++i) p = apply_fiber(fam, sys.driver->symbol(t0 + i), p);
    }
    return p;
}

double bowen_distance(const SkewSystem& sys, long t0, long n, const TorusPoint& x,
                      const TorusPoint& y, const NumericsContext& ctx) {
    if (n < 1) throw ConfigInvalid("bowen_distance needs n >= 1");
    double best = 0.0;
    if (ctx.is_big()) {
        ctx.require_depth(n, sys.expansion());
        BigTorusPoint bx(x, ctx.mantissa_bits), by(y, ctx.mantissa_bits);
        BigOrbit ox(sys, t0, bx, ctx), oy(sys, t0, by, ctx);
        for (long i = 0;; ++i) {
            best = std::max(best, torus_distance(ox.point(), oy.point()));
            if (i + 1 >= n) break;
            ox.step_forward();
            oy.step_forward();
        }
        return best;
    }
    TorusPoint px = x.reduced(), py = y.reduced();
    for (long i = 0;; ++i) {
        best = std::max(best, torus_distance(px, py));
        if (i + 1 >= n) break;
        if (sys.affine()) {
            double omega = sys.driver->omega_coord(t0 + i);
            px = apply_fiber(sys.affine_family(), omega, px);
            py = apply_fiber(sys.affine_family(), omega, py);
        } else {
            int s = sys.driver->symbol(t0 + i);
            px = apply_fiber(sys.cocycle_family(), s, px);
            py = apply_fiber(sys.cocycle_family(), s, py);
        }
    }
    return best;
}

bool bowen_ball_contains(const SkewSystem& sys, long t0, long n, const TorusPoint& center,
                         const TorusPoint& y, double eps, const NumericsContext& ctx) {
    return bowen_distance(sys, t0, n, center, y, ctx) < eps;
}

Observable Observable::parse(const std::string& text) {
    if (text == "cos_x1" || text == "COS_X1") return cos_x1();
    if (text == "cos_omega_sin_x2" || text == "COS_OMEGA_SIN_X2") return cos_omega_sin_x2();
    if (text == "zero" || text == "0") return zero();
    // "a*cos_x1 + b*cos_omega_sin_x2" with real a, b
    Observable phi;
    std::string s = text;
    std::replace(s.begin(), s.end(), '-', '~');
    std::replace(s.begin(), s.end(), '+', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        double sign = 1.0;
        if (tok.front() == '~') {
            sign = -1.0;
            tok.erase(0, 1);
        }
        auto star = tok.find('*');
        double coef = 1.0;
        std::string name = tok;
        if (star != std::string::npos) {
            coef = std::stod(tok.substr(0, star));
            name = tok.substr(star + 1);
        }
        Basis basis;
        if (name == "cos_x1") basis = Basis::CosX1;
        else if (name == "cos_omega_sin_x2") basis = Basis::CosOmegaSinX2;
        else throw ConfigInvalid("unknown observable term: " + name);
        phi.terms.push_back({sign * coef, basis});
    }
    if (phi.terms.empty()) throw ConfigInvalid("empty observable: " + text);
    return phi;
}

double Observable::eval(double omega, const TorusPoint& x) const {
    double v = 0.0;
    for (const auto& t : terms) {
        switch (t.basis) {
            case Basis::CosX1:
                v += t.coef * std::cos(kTwoPi * x.x1);
                break;
            case Basis::CosOmegaSinX2:
                v += t.coef * std::cos(kTwoPi * omega) * std::sin(kTwoPi * x.x2);
                break;
        }
    }
    return v;
}

double Observable::sup_norm() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::fabs(t.coef);
    return s;
}

double Observable::var_bound(double c) const {
    double s = 0.0;
    for (const auto& t : terms) s += std::fabs(t.coef) * std::min(2.0, kTwoPi * c);
    return s;
}

bool Observable::depends_on_omega() const {
    for (const auto& t : terms)
        if (t.basis == Basis::CosOmegaSinX2) return true;
    return false;
}

std::string Observable::describe() const {
    if (terms.empty()) return "0";
    std::string s;
    for (const auto& t : terms) {
        if (!s.empty()) s += " + ";
        s += std::to_string(t.coef);
        s += t.basis == Basis::CosX1 ? "*cos_x1" : "*cos_omega_sin_x2";
    }
    return s;
}

namespace {

BirkhoffTrace trace_impl(const SkewSystem& sys, const Observable& phi,
                         const std::vector<long>& checkpoints,
                         const std::function<void(long, double&, TorusPoint&)>& at) {
    if (checkpoints.empty()) throw ConfigInvalid("need at least one checkpoint");
    for (size_t i = 0; i + 1 < checkpoints.size(); ++i)
        if (checkpoints[i] >= checkpoints[i + 1])
            throw ConfigInvalid("checkpoints must be strictly increasing");
    if (checkpoints.front() < 1) throw ConfigInvalid("checkpoints start at 1");

    BirkhoffTrace tr;
    tr.times = checkpoints;
    tr.averages.reserve(checkpoints.size());
    long horizon = checkpoints.back();
    double sum = 0.0;
    size_t next = 0;
    double omega = 0.0;
    TorusPoint p;
    for (long i = 0; i < horizon; ++i) {
        at(i, omega, p);
        sum += phi.eval(omega, p);
        if (next < checkpoints.size() && i + 1 == checkpoints[next]) {
            tr.averages.push_back(sum / double(i + 1));
            ++next;
        }
    }
    return tr;
}

} // namespace

BirkhoffTrace birkhoff_trace(const SkewSystem& sys, long t0, const TorusPoint& x,
                             const Observable& phi, const std::vector<long>& checkpoints,
                             const NumericsContext& ctx) {
    if (ctx.is_big()) return birkhoff_trace_big(sys, t0, BigTorusPoint(x, ctx.mantissa_bits), phi, checkpoints, ctx);
    TorusPoint p = x.reduced();
    return trace_impl(sys, phi, checkpoints, [&](long i, double& omega, TorusPoint& out) {
        omega = phi.depends_on_omega() ? sys.driver->omega_coord(t0 + i) : 0.0;
        out = p;
        if (sys.affine())
            p = apply_fiber(sys.affine_family(), sys.affine_family().offset == OffsetKind::Zero
                                                      ? 0.0
                                                      : sys.driver->omega_coord(t0 + i),
                            p);
        else
            p = apply_fiber(sys.cocycle_family(), sys.driver->symbol(t0 + i), p);
    });
}

BirkhoffTrace birkhoff_trace_big(const SkewSystem& sys, long t0, const BigTorusPoint& x,
                                 const Observable& phi, const std::vector<long>& checkpoints,
                                 const NumericsContext& ctx) {
    if (!ctx.is_big()) throw PrecisionExhausted("birkhoff_trace_big needs a BIGFLOAT context");
    ctx.require_depth(checkpoints.empty() ? 0 : checkpoints.back(), sys.expansion());
    BigOrbit orbit(sys, t0, x, ctx);
    return trace_impl(sys, phi, checkpoints, [&](long /*i*/, double& omega, TorusPoint& out) {
        omega = phi.depends_on_omega() ? orbit.omega_coord() : 0.0;
        out = orbit.point_double();
        orbit.step_forward();
    });
}

} // namespace skewlab
