#include "skewlab/fiber.hpp"

#include <algorithm>

namespace skewlab {

namespace {

std::array<double, 2> unit(std::array<double, 2> v) {
    double n = std::hypot(v[0], v[1]);
    v[0] /= n;
    v[1] /= n;
    if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) {
        v[0] = -v[0];
        v[1] = -v[1];
    }
    return v;
}

std::array<double, 2> eigenvector(const Mat2i& m, double lambda) {
    // Rows of (M - lambda I) are orthogonal to the eigenvector.
    if (m.b != 0) return unit({double(m.b), lambda - double(m.a)});
    if (m.c != 0) return unit({lambda - double(m.d), double(m.c)});
    // Diagonal integer matrix cannot pass the hyperbolicity gate, but keep a
    // sane fallback for the axis case.
    return std::fabs(double(m.a) - lambda) < std::fabs(double(m.d) - lambda)
               ? std::array<double, 2>{1.0, 0.0}
               : std::array<double, 2>{0.0, 1.0};
}

} // namespace

HyperbolicMatrix eigen_split(const Mat2i& m) {
    long det = m.det();
    long tr = m.trace();
    if (std::labs(det) != 1)
        throw NonHyperbolicMatrix("|det| must be 1, got " + std::to_string(det));
    if (std::labs(tr) <= 2)
        throw NonHyperbolicMatrix("|trace| must exceed 2, got " + std::to_string(tr));

    double disc = double(tr) * double(tr) - 4.0 * double(det);
    double root = std::sqrt(disc);
    double l1 = (double(tr) + root) / 2.0;
    double l2 = (double(tr) - root) / 2.0;
    HyperbolicMatrix h;
    h.m = m;
    if (std::fabs(l1) > std::fabs(l2)) {
        h.lambda_u = l1;
        h.lambda_s = l2;
    } else {
        h.lambda_u = l2;
        h.lambda_s = l1;
    }
    h.e_u = eigenvector(m, h.lambda_u);
    h.e_s = eigenvector(m, h.lambda_s);
    return h;
}

EigenSplitBig::EigenSplitBig(const Mat2i& m, long prec)
    : lambda_u(prec), lambda_s(prec), eu1(prec), eu2(prec), es1(prec), es2(prec) {
    eigen_split(m); // run the hyperbolicity gate
    BigFloat tr(prec), disc(prec), root(prec);
    tr.set_si(m.trace());
    disc.mul(tr, tr);
    disc.add_si(disc, -4 * m.det());
    root.sqrt(disc);
    BigFloat half(0.5, prec);
    BigFloat lp(prec), lm(prec);
    lp.add(tr, root);
    lp.mul(lp, half);
    lm.sub(tr, root);
    lm.mul(lm, half);
    // root >= 0, so the large-modulus eigenvalue follows the sign of the trace.
    if (m.trace() > 0) {
        lambda_u = lp;
        lambda_s = lm;
    } else {
        lambda_u = lm;
        lambda_s = lp;
    }

    auto vec = [&](const BigFloat& lambda, BigFloat& v1, BigFloat& v2) {
        BigFloat entry(prec);
        if (m.b != 0) {
            v1.set_si(m.b);
            entry.set_si(m.a);
            v2.sub(lambda, entry);
        } else {
            entry.set_si(m.d);
            v1.sub(lambda, entry);
            v2.set_si(m.c);
        }
        BigFloat n2(prec), t(prec), n(prec);
        n2.mul(v1, v1);
        t.mul(v2, v2);
        n2.add(n2, t);
        n.sqrt(n2);
        v1.div(v1, n);
        v2.div(v2, n);
        if (v1.sign() < 0 || (v1.sign() == 0 && v2.sign() < 0)) {
            v1.neg(v1);
            v2.neg(v2);
        }
    };
    vec(lambda_u, eu1, eu2);
    vec(lambda_s, es1, es2);
}

std::array<double, 2> AffineFamily::offset_at(double omega) const {
    switch (offset) {
        case OffsetKind::Zero:
            return {0.0, 0.0};
        case OffsetKind::OmegaX:
            return {omega, 0.0};
        case OffsetKind::Tabulated: {
            size_t n = table.size();
            double pos = omega * double(n);
            size_t i = size_t(pos) % n;
            size_t j = (i + 1) % n;
            double frac = pos - std::floor(pos);
            return {table[i][0] * (1 - frac) + table[j][0] * frac,
                    table[i][1] * (1 - frac) + table[j][1] * frac};
        }
    }
    return {0.0, 0.0};
}

std::string AffineFamily::describe() const {
    std::string h = offset == OffsetKind::Zero ? "zero"
                    : offset == OffsetKind::OmegaX ? "omega"
                                                   : "table[" + std::to_string(table.size()) + "]";
    return "affine(T=[[" + std::to_string(matrix.m.a) + "," + std::to_string(matrix.m.b) + "],[" +
           std::to_string(matrix.m.c) + "," + std::to_string(matrix.m.d) + "]], h=" + h + ")";
}

void CocycleFamily::validate() const {
    if (matrices.empty()) throw ConfigInvalid("cocycle family needs at least one matrix");
    for (const auto& B : matrices) {
        if (B.a < 1 || B.b < 1 || B.c < 1 || B.d < 1)
            throw ConfigInvalid("cocycle matrices must have all entries >= 1");
        if (std::labs(B.det()) != 1)
            throw ConfigInvalid("cocycle matrices must have |det| = 1");
    }
}

const Mat2i& CocycleFamily::at(int symbol) const {
    if (symbol < 0 || size_t(symbol) >= matrices.size())
        throw InsufficientWord("symbol " + std::to_string(symbol) + " out of range");
    return matrices[size_t(symbol)];
}

double CocycleFamily::expansion_bound() const {
    double m = 1.0;
    for (const auto& B : matrices)
        m = std::max(m, double(std::max(std::labs(B.a) + std::labs(B.b), std::labs(B.c) + std::labs(B.d))));
    return m;
}

std::string CocycleFamily::describe() const {
    return "cocycle(" + std::to_string(matrices.size()) + " matrices)";
}

TorusPoint apply_fiber(const AffineFamily& f, double omega, const TorusPoint& p) {
    auto tx = f.matrix.m.apply(p.x1, p.x2);
    auto h = f.offset_at(omega);
    return TorusPoint{tx[0] + h[0], tx[1] + h[1]}.reduced();
}

TorusPoint apply_fiber(const CocycleFamily& f, int symbol, const TorusPoint& p) {
    auto tx = f.at(symbol).apply(p.x1, p.x2);
    return TorusPoint{tx[0], tx[1]}.reduced();
}

SplittingPair finite_time_splitting(const CocycleFamily& f, const std::vector<uint8_t>& word,
                                    long t, long depth) {
    if (depth < 1) throw InsufficientWord("depth must be >= 1");
    if (t - depth < 0 || size_t(t + depth) > word.size())
        throw InsufficientWord("word does not cover [t-depth, t+depth)");
    f.validate();

    // Unstable: push a generic vector forward through the `depth` matrices
    // before time t. Positivity contracts the cone, so this converges.
    std::array<double, 2> u{1.0, 1.0};
    for (long i = t - depth; i < t; ++i) {
        auto r = f.at(word[size_t(i)]).apply(u[0], u[1]);
        double n = std::hypot(r[0], r[1]);
        u = {r[0] / n, r[1] / n};
    }

    // Stable: pull a generic vector back through the inverses of the next
    // `depth` matrices, composed from the far future toward t. This converges
    // to the direction the forward products contract.
    std::array<double, 2> s{1.0, 0.5};
    for (long i = t + depth - 1; i >= t; --i) {
        Mat2i inv = f.at(word[size_t(i)]).inverse();
        auto r = inv.apply(s[0], s[1]);
        double n = std::hypot(r[0], r[1]);
        s = {r[0] / n, r[1] / n};
    }

    return {unit(u), unit(s)};
}

} // namespace skewlab
