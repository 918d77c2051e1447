#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "newtonlab/blaschke.hpp"
#include "newtonlab/orbit.hpp"
#include "newtonlab/parallel.hpp"

namespace newtonlab {

// ---------------------------------------------------------------------------
// annulus interpolation h : A0 -> A1
// ---------------------------------------------------------------------------

namespace detail {

struct Circle {
    cplx center;
    double radius;
};

inline Circle circle_through(cplx p1, cplx p2, cplx p3) {
    double d = 2.0 * (p1.real() * (p2.imag() - p3.imag()) + p2.real() * (p3.imag() - p1.imag()) +
                      p3.real() * (p1.imag() - p2.imag()));
    if (d == 0.0) throw Error("DegenerateInput", "collinear points have no circle");
    double n1 = std::norm(p1), n2 = std::norm(p2), n3 = std::norm(p3);
    double ux = (n1 * (p2.imag() - p3.imag()) + n2 * (p3.imag() - p1.imag()) +
                 n3 * (p1.imag() - p2.imag())) /
                d;
    double uy = (n1 * (p3.real() - p2.real()) + n2 * (p1.real() - p3.real()) +
                 n3 * (p2.real() - p1.real())) /
                d;
    cplx c{ux, uy};
    return {c, std::abs(p1 - c)};
}

} // namespace detail

/// Boundary-exact interpolation between id on S_r and M_b on S_{r^k}.
///
/// The annulus A1 between S_r and M_b(S_{r^k}) is first mapped to a round
/// concentric annulus by a Moebius transform T (the pair of points symmetric
/// with respect to both circles goes to 0/infinity). In those coordinates the
/// map is log-linear in modulus and linear in the unwrapped boundary angles,
/// which keeps h a homeomorphism for every admissible (k, b, r) - including
/// b > r^k, where the image of the inner circle does not wind around the
/// origin and a naive log interpolation of M_b breaks down.
class AnnulusInterpolation {
public:
    AnnulusInterpolation(int k, double b, double r, int table_size = 4096)
        : k_(k), b_(b), r_(r), mb_(moebius_mb(b)) {
        if (k < 2) throw Error("BadDegree", "need k >= 2");
        double alpha = detail::blaschke_alpha(k, b);
        if (!(r > alpha && r < 1.0))
            throw Error("BadRadius", "need alpha < r < 1");
        rk_ = std::pow(r_, k_);

        detail::Circle inner = detail::circle_through(
            mb_.apply(cplx{rk_, 0}), mb_.apply(cplx{-rk_, 0}), mb_.apply(cplx{0, rk_}));
        if (std::abs(inner.center) < 1e-13) {
            concentric_ = true;
            R_out_ = r_;
            R_in_ = inner.radius;
        } else {
            // symmetric point pair for the outer circle |z| = r and the inner
            // image circle: roots of t^2 - sigma t + r^2 with sigma real
            double c1 = inner.center.real(), rho1 = inner.radius;
            double sigma = (r_ * r_ + c1 * c1 - rho1 * rho1) / c1;
            double disc = sigma * sigma - 4.0 * r_ * r_;
            if (disc <= 0.0) throw Error("BadRadius", "gluing circles are not disjoint");
            double x1 = 0.5 * (sigma - std::sqrt(disc));
            double x2 = 0.5 * (sigma + std::sqrt(disc));
            // x inside the inner circle maps to 0
            if (std::abs(cplx{x1, 0} - inner.center) > rho1) std::swap(x1, x2);
            T_ = {cplx{1, 0}, cplx{-x1, 0}, cplx{1, 0}, cplx{-x2, 0}};
            R_out_ = std::abs(T_.apply(cplx{r_, 0}));
            R_in_ = std::abs(T_.apply(inner.center + cplx{inner.radius, 0}));
            if (R_in_ > R_out_) { // orient T so the image annulus is (R_in, R_out)
                T_ = MoebiusTransform{cplx{1, 0}, cplx{-x2, 0}, cplx{1, 0}, cplx{-x1, 0}};
                R_out_ = std::abs(T_.apply(cplx{r_, 0}));
                R_in_ = std::abs(T_.apply(inner.center + cplx{inner.radius, 0}));
            }
        }

        // unwrapped boundary angle tables over theta in [0, 2pi]
        phi_out_.resize(table_size + 1);
        phi_in_.resize(table_size + 1);
        cplx prev_out{0, 0}, prev_in{0, 0};
        for (int j = 0; j <= table_size; ++j) {
            double th = 2.0 * kPi * j / table_size;
            cplx vo = image_outer(th), vi = image_inner(th);
            if (j == 0) {
                phi_out_[0] = std::arg(vo);
                phi_in_[0] = std::arg(vi);
            } else {
                phi_out_[j] = phi_out_[j - 1] + std::arg(vo / prev_out);
                phi_in_[j] = phi_in_[j - 1] + std::arg(vi / prev_in);
            }
            prev_out = vo;
            prev_in = vi;
        }
    }

    double inner_radius() const { return rk_; }
    double outer_radius() const { return r_; }

    cplx apply(cplx z) const {
        double az = std::abs(z);
        if (az <= 0.0) throw Error("BadRadius", "h is defined on the annulus only");
        double t = (std::log(az) - k_ * std::log(r_)) / (std::log(r_) - k_ * std::log(r_));
        t = std::clamp(t, 0.0, 1.0);
        double th = std::arg(z);
        if (th < 0) th += 2.0 * kPi;

        double po = exact_angle(th, /*outer=*/true);
        double pi_ = exact_angle(th, /*outer=*/false);
        double ang = t * po + (1.0 - t) * pi_;
        double mod = std::exp(t * std::log(R_out_) + (1.0 - t) * std::log(R_in_));
        cplx w = mod * cplx{std::cos(ang), std::sin(ang)};
        return concentric_ ? w : T_.inverse().apply(w);
    }

private:
    cplx image_outer(double th) const {
        cplx z = r_ * cplx{std::cos(th), std::sin(th)};
        return concentric_ ? z : T_.apply(z);
    }
    cplx image_inner(double th) const {
        cplx z = mb_.apply(rk_ * cplx{std::cos(th), std::sin(th)});
        return concentric_ ? z : T_.apply(z);
    }

    // principal arg of the boundary image plus the table's winding offset
    double exact_angle(double th, bool outer) const {
        const std::vector<double>& table = outer ? phi_out_ : phi_in_;
        int n = static_cast<int>(table.size()) - 1;
        double pos = th / (2.0 * kPi) * n;
        int j = std::clamp(static_cast<int>(pos), 0, n - 1);
        double approx = table[j] + (pos - j) * (table[j + 1] - table[j]);
        cplx v = outer ? image_outer(th) : image_inner(th);
        double a = std::arg(v);
        double offset = std::round((approx - a) / (2.0 * kPi));
        return a + 2.0 * kPi * offset;
    }

    int k_;
    double b_, r_, rk_ = 0;
    MoebiusTransform mb_;
    MoebiusTransform T_{};
    bool concentric_ = false;
    double R_out_ = 0, R_in_ = 0;
    std::vector<double> phi_out_, phi_in_;
};

inline AnnulusInterpolation interpolate_h(int k, double b, double r) {
    return AnnulusInterpolation(k, b, r);
}

// ---------------------------------------------------------------------------
// the quasiregular model map g on the disk
// ---------------------------------------------------------------------------

/// g = z^k outside D_r, (h(z))^k on the annulus A0, (M_b(z))^k on D_{r^k}.
struct DiskSurgeryModel {
    int k;
    double b, r, rk;
    BlaschkeModel blaschke;
    AnnulusInterpolation h;
    MoebiusTransform mb;

    cplx fixed_point() const { // M_b^{-1}(alpha) = alpha^k
        return cplx{(blaschke.alpha - b) / (1.0 - b * blaschke.alpha), 0};
    }

    cplx apply(cplx z) const {
        double az = std::abs(z);
        if (az >= r) return std::pow(z, k);
        if (az > rk) return std::pow(h.apply(z), k);
        return std::pow(mb.apply(z), k);
    }
};

inline DiskSurgeryModel build_model_g(int k, double b, double r) {
    DiskSurgeryModel m{k,
                       b,
                       r,
                       std::pow(r, k),
                       attracting_blaschke(k, b),
                       AnnulusInterpolation(k, b, r),
                       moebius_mb(b)};
    return m;
}

// ---------------------------------------------------------------------------
// numerical dilatation
// ---------------------------------------------------------------------------

/// K from central differences: Wirtinger derivatives f_z, f_zbar and
/// K = (|f_z|+|f_zbar|)/(|f_z|-|f_zbar|). Degenerate when orientation fails
/// at the sampling scale.
inline double numerical_dilatation(const std::function<cplx(cplx)>& map, cplx z, double delta) {
    cplx fx = (map(z + cplx{delta, 0}) - map(z - cplx{delta, 0})) / (2.0 * delta);
    cplx fy = (map(z + cplx{0, delta}) - map(z - cplx{0, delta})) / (2.0 * delta);
    cplx fz = (fx - cplx{0, 1} * fy) / 2.0;
    cplx fzb = (fx + cplx{0, 1} * fy) / 2.0;
    double a = std::abs(fz), b = std::abs(fzb);
    if (a <= b) throw Error("Degenerate", "orientation violated at sample scale");
    return (a + b) / (a - b);
}

// ---------------------------------------------------------------------------
// local model at a repelling point: omega, the parabolic model, and chi
// ---------------------------------------------------------------------------

inline cplx omega_map(double lambda, cplx z) {
    if (z == cplx{0, 0}) throw Error("BranchCut", "omega undefined at 0");
    if (z.imag() == 0.0 && z.real() >= 1.0)
        throw Error("BranchCut", "omega undefined on the ray [1, inf)");
    cplx logz = std::log(z);
    if (logz == cplx{0, 0}) throw Error("BranchCut", "omega has a pole at z = 1");
    return std::log(cplx{lambda, 0}) / logz;
}

inline cplx parabolic_model(cplx omega) { return omega / (omega + cplx{1, 0}); }

/// Repelling model sector S = {theta <= arg z <= 2pi - theta, 0 < |z| < lambda^-m0}
/// with its quadrilaterals Q_m (annular sector pieces, Q_m = f^-m(Q_0)).
struct SectorModel {
    double lambda = 2.0;
    double theta = kPi / 4.0;
    int m0 = 5;

    /// smallest index with clean linear K-growth; the onset scales like
    /// 1/log(lambda) for slowly repelling multipliers
    static int growth_onset(double lambda, int floor_m0 = 5) {
        return std::max(floor_m0, static_cast<int>(std::ceil(1.5 / std::log(lambda))) + 1);
    }

    double outer_radius() const { return std::pow(lambda, -double(m0)); }
    double radius_of(double m) const { return std::pow(lambda, -m); }

    bool contains(cplx z) const {
        double az = std::abs(z);
        if (az <= 0.0 || az >= outer_radius()) return false;
        double a = std::arg(z);
        if (a < 0) a += 2.0 * kPi;
        return a >= theta && a <= 2.0 * kPi - theta;
    }

    /// quadrilateral index: m with lambda^-(m+1) <= |z| < lambda^-m
    int quad_index(cplx z) const {
        return static_cast<int>(std::floor(-std::log(std::abs(z)) / std::log(lambda)));
    }
};

/// Extension of omega into the sector. Boundary values are the principal
/// omega on both rays; in between, the modulus of the (equal-modulus)
/// boundary values is kept and the argument interpolates the long way
/// around through the positive real axis. This keeps the glued map
/// orientation-preserving and injective (the straight chord would cross the
/// cusp omega(D \ S)), and its dilatation grows linearly on Q_m.
inline cplx chi_extension(const SectorModel& sector, cplx z) {
    double az = std::abs(z);
    if (az <= 0.0 || az >= sector.outer_radius())
        throw Error("OutOfDomain", "chi is defined inside the sector");
    double phi = std::arg(z);
    if (phi < 0) phi += 2.0 * kPi;
    if (phi < sector.theta - 1e-12 || phi > 2.0 * kPi - sector.theta + 1e-12)
        throw Error("OutOfDomain", "point is outside the sector angles");
    double L = std::log(sector.lambda), s = std::log(az);
    cplx wp = L / cplx{s, sector.theta};  // omega on the ray arg = theta
    cplx wm = L / cplx{s, -sector.theta}; // omega on the ray arg = 2pi - theta
    double rhat = std::abs(wp);
    double ap = std::arg(wp); // in (-pi, -pi/2)
    double am = std::arg(wm); // in (pi/2, pi)
    double t = std::clamp((phi - sector.theta) / (2.0 * kPi - 2.0 * sector.theta), 0.0, 1.0);
    double ang = ap + t * (am - ap);
    return rhat * cplx{std::cos(ang), std::sin(ang)};
}

// ---------------------------------------------------------------------------
// dilatation profiles and area tails
// ---------------------------------------------------------------------------

struct ProfileEntry {
    int m;
    double max_K;
    double median_K;
};

/// Max/median K of chi on a polar grid over each Q_m. The grid is
/// self-similar across m (fixed relative offsets), so pointwise monotone
/// growth in m survives sampling.
inline std::vector<ProfileEntry> dilatation_profile(const SectorModel& sector, int m_lo, int m_hi,
                                                    int n_rad = 6, int n_ang = 24) {
    std::vector<ProfileEntry> out;
    auto chi = [&](cplx z) { return chi_extension(sector, z); };
    for (int m = std::max(m_lo, sector.m0); m <= m_hi; ++m) {
        std::vector<double> ks;
        for (int i = 0; i < n_rad; ++i) {
            double fm = m + (i + 0.5) / n_rad; // log-radial position inside Q_m
            double rho = sector.radius_of(fm);
            for (int j = 0; j < n_ang; ++j) {
                double span = 2.0 * kPi - 2.0 * sector.theta;
                double inset = 0.02 * span;
                double phi = sector.theta + inset + (span - 2 * inset) * (j + 0.5) / n_ang;
                cplx z = rho * cplx{std::cos(phi), std::sin(phi)};
                double delta = 1e-5 * rho;
                ks.push_back(numerical_dilatation(chi, z, delta));
            }
        }
        std::sort(ks.begin(), ks.end());
        out.push_back({m, ks.back(), ks[ks.size() / 2]});
    }
    return out;
}

struct DilatationField {
    double x0 = 0, y0 = 0; // lower-left corner
    double dx = 0, dy = 0; // cell size
    int width = 0, height = 0;
    std::vector<double> K; // row-major; NaN marks cells outside the domain

    double cell_area() const { return dx * dy; }
    double& at(int x, int y) { return K[size_t(y) * width + x]; }
    double get(int x, int y) const { return K[size_t(y) * width + x]; }
};

/// Samples K of an arbitrary map over a rectangle; cells where the map is
/// undefined or degenerate are excluded from area counts.
inline DilatationField make_dilatation_field(
    const std::function<double(cplx)>& K_of, double x0, double x1, double y0, double y1,
    int grid) {
    DilatationField f;
    f.x0 = x0;
    f.y0 = y0;
    f.width = grid;
    f.height = grid;
    f.dx = (x1 - x0) / grid;
    f.dy = (y1 - y0) / grid;
    f.K.assign(size_t(grid) * grid, std::numeric_limits<double>::quiet_NaN());
    parallel_rows(grid, [&](int y) {
        for (int x = 0; x < grid; ++x) {
            cplx z{x0 + (x + 0.5) * f.dx, y0 + (y + 0.5) * f.dy};
            try {
                f.at(x, y) = K_of(z);
            } catch (const Error&) {
                // outside the field's domain
            }
        }
    });
    return f;
}

struct AreaTailEntry {
    double K0;
    double area;
    long cells;
};

struct TailFit {
    double slope = 0, intercept = 0, r2 = 0;   // ln(area) vs K0
    double pow_slope = 0, pow_r2 = 0;          // ln(area) vs ln(K0)
    bool exponential = false;
};

namespace detail {

inline void least_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                          double& slope, double& intercept, double& r2) {
    size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double den = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / den;
    intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (size_t i = 0; i < n; ++i) {
        double pred = slope * xs[i] + intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

inline TailFit fit_tail(const std::vector<AreaTailEntry>& entries) {
    std::vector<double> xs, lxs, ys;
    for (const auto& e : entries) {
        if (e.area <= 0 || e.K0 <= 0) continue;
        xs.push_back(e.K0);
        lxs.push_back(std::log(e.K0));
        ys.push_back(std::log(e.area));
    }
    TailFit fit;
    if (xs.size() < 3) return fit;
    least_squares(xs, ys, fit.slope, fit.intercept, fit.r2);
    double pi_;
    least_squares(lxs, ys, fit.pow_slope, pi_, fit.pow_r2);
    // "exponential" only when the affine-in-K model both fits well and beats
    // the power-law alternative; polynomial tails then fail the verdict
    fit.exponential = fit.slope < 0 && fit.r2 >= 0.9 && fit.r2 >= fit.pow_r2;
    return fit;
}

} // namespace detail

struct AreaTailReport {
    std::vector<AreaTailEntry> entries;
    TailFit fit;
};

/// Cell-counting tail areas Area{K > K0} for each threshold, with the
/// exponential-vs-power fit diagnostics.
inline AreaTailReport area_tail(const DilatationField& field, const std::vector<double>& thresholds) {
    AreaTailReport rep;
    double cell = field.cell_area();
    for (double K0 : thresholds) {
        long cells = 0;
        for (double k : field.K)
            if (std::isfinite(k) && k > K0) ++cells;
        rep.entries.push_back({K0, cells * cell, cells});
    }
    bool any = false;
    for (const auto& e : rep.entries)
        if (e.cells > 0) any = true;
    if (!any) throw Error("EmptyTail", "no cell exceeds the smallest threshold");
    rep.fit = detail::fit_tail(rep.entries);
    return rep;
}

/// K-field of chi over the model square, NaN outside the sector.
inline DilatationField make_chi_field(const SectorModel& sector, int grid = 1024) {
    double R = sector.outer_radius();
    auto K_of = [&sector](cplx z) -> double {
        if (!sector.contains(z)) throw Error("OutOfDomain", "outside sector");
        return numerical_dilatation([&sector](cplx w) { return chi_extension(sector, w); }, z,
                                    1e-5 * std::abs(z));
    };
    return make_dilatation_field(K_of, -R, R, -R, R, grid);
}

// ---------------------------------------------------------------------------
// model-map continuity diagnostics
// ---------------------------------------------------------------------------

struct ContinuityReport {
    double outer_jump = 0;      // branch values compared on S_r
    double inner_jump = 0;      // branch values compared on S_{r^k}
    double fixed_point_residual = 0;
    double max_holomorphic_K = 1.0; // K on the two holomorphic regions
    double max_annulus_K = 1.0;     // finite K on A0
};

inline ContinuityReport model_continuity(const DiskSurgeryModel& g, int samples = 4096) {
    ContinuityReport rep;
    for (int j = 0; j < samples; ++j) {
        double th = 2.0 * kPi * j / samples;
        cplx dir{std::cos(th), std::sin(th)};
        cplx zo = g.r * dir;
        rep.outer_jump = std::max(rep.outer_jump,
                                  std::abs(std::pow(zo, g.k) - std::pow(g.h.apply(zo), g.k)));
        cplx zi = g.rk * dir;
        rep.inner_jump = std::max(
            rep.inner_jump, std::abs(std::pow(g.h.apply(zi), g.k) - std::pow(g.mb.apply(zi), g.k)));
    }
    cplx fp = g.fixed_point();
    rep.fixed_point_residual = std::abs(g.apply(fp) - fp);

    auto gf = [&g](cplx z) { return g.apply(z); };
    for (int j = 0; j < 64; ++j) {
        double th = 2.0 * kPi * (j + 0.5) / 64;
        cplx dir{std::cos(th), std::sin(th)};
        double r_out = 0.5 * (g.r + 1.0);
        rep.max_holomorphic_K = std::max(
            rep.max_holomorphic_K, numerical_dilatation(gf, r_out * dir, 1e-7));
        double r_in = 0.5 * g.rk;
        if (r_in > 1e-3)
            rep.max_holomorphic_K = std::max(
                rep.max_holomorphic_K, numerical_dilatation(gf, r_in * dir, 1e-7 * r_in));
        double r_mid = std::sqrt(g.rk * g.r); // geometric middle of A0
        rep.max_annulus_K = std::max(
            rep.max_annulus_K,
            numerical_dilatation([&g](cplx z) { return g.h.apply(z); }, r_mid * dir,
                                 1e-5 * r_mid));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Koenigs linearization at the repelling point at infinity
// ---------------------------------------------------------------------------

/// kappa conjugates the chart map to w -> rho*w near 0: kappa(F(w)) = rho*kappa(w).
class KoenigsChart {
public:
    explicit KoenigsChart(const RatMap& chart, double tol = 1e-13)
        : chart_(chart), tol_(tol) {
        if (spherical_distance(chart_.eval_sphere(cplx{0, 0}), cplx{0, 0}) > 1e-12)
            throw Error("NotFixed", "chart does not fix 0");
        rho_ = std::abs(chart_.derivative_at(cplx{0, 0}));
        if (rho_ <= 1.0 + 1e-9)
            throw Error("DegenerateInput", "Koenigs chart needs a repelling point");
    }

    double rho() const { return rho_; }

    /// local inverse branch fixing 0 (Newton solve seeded by w/rho)
    cplx inverse_branch(cplx w) const {
        cplx x = w / rho_;
        for (int i = 0; i < 40; ++i) {
            cplx f = chart_.eval(x) - w;
            cplx d = chart_.derivative_at(x);
            if (d == cplx{0, 0}) break;
            cplx step = f / d;
            x -= step;
            if (std::abs(step) < 1e-16 + 1e-14 * std::abs(x)) break;
        }
        if (std::abs(chart_.eval(x) - w) > 1e-9 * std::max(1.0, std::abs(w)))
            throw Error("OutOfDomain", "inverse branch did not converge");
        if (std::abs(x) > std::abs(w)) // must contract toward 0
            throw Error("OutOfDomain", "inverse branch left the linearization domain");
        return x;
    }

    cplx kappa(cplx w) const {
        if (w == cplx{0, 0}) return w;
        cplx x = w;
        cplx prev = w;
        double scale = 1.0;
        for (int n = 0; n < 80; ++n) {
            x = inverse_branch(x);
            scale *= rho_;
            cplx cur = x * scale;
            if (std::abs(cur - prev) < tol_ * std::abs(cur)) return cur;
            prev = cur;
        }
        return prev;
    }

    cplx kappa_inverse(cplx zeta) const {
        if (zeta == cplx{0, 0}) return zeta;
        int n = 0;
        cplx x = zeta;
        while (std::abs(x) > 1e-8 && n < 400) {
            x /= rho_;
            ++n;
        }
        for (int i = 0; i < n; ++i) x = chart_.eval(x);
        return x;
    }

private:
    RatMap chart_;
    double tol_;
    double rho_ = 0;
};

// ---------------------------------------------------------------------------
// area condition along preimage sectors (polynomial Newton maps)
// ---------------------------------------------------------------------------

struct SectorInstanceInfo {
    cplx vertex;
    int generation = 0;
    int branches = 0;
    int local_degree = 1;    // of N^generation at the vertex
    bool degree_flag = false; // local degree exceeded d-2
    double area = 0;         // viewport area of the pulled sectors at this vertex
};

struct NewtonAreaOptions {
    double theta = kPi / 4.0;
    int m0 = 5;
    int m_max = 26;
    int depth = 2;
    int n_rad = 4;
    int n_ang = 24;
    int max_sectors = 64;
};

struct NewtonAreaReport {
    double rho = 0;
    SectorModel model;
    std::vector<SectorInstanceInfo> sectors;
    std::vector<double> m_values;
    std::vector<double> tail_areas; // union Area{K > c*m}
    double growth_constant = 0;     // c with K ~ c*m on Q_m
    TailFit fit;
    double slope_per_m = 0;
    std::vector<double> generation_area;
    bool generation_decay = false;
    double total_area = 0;
    int flagged_degrees = 0;
};

namespace detail {

// one polar cell of the model sector
struct ModelCell {
    cplx center;
    double area; // model-plane area
    int m;       // quadrilateral index
};

inline std::vector<ModelCell> sector_cells(const SectorModel& sec, int m_max, int n_rad,
                                           int n_ang) {
    std::vector<ModelCell> cells;
    double span = 2.0 * kPi - 2.0 * sec.theta;
    for (int m = sec.m0; m < m_max; ++m) {
        for (int i = 0; i < n_rad; ++i) {
            double f_hi = m + double(i) / n_rad, f_lo = m + double(i + 1) / n_rad;
            double r_hi = sec.radius_of(f_hi), r_lo = sec.radius_of(f_lo);
            double rc = std::sqrt(r_hi * r_lo);
            double dA = 0.5 * (r_hi * r_hi - r_lo * r_lo) * (span / n_ang);
            for (int j = 0; j < n_ang; ++j) {
                double phi = sec.theta + span * (j + 0.5) / n_ang;
                cells.push_back({rc * cplx{std::cos(phi), std::sin(phi)}, dA, m});
            }
        }
    }
    return cells;
}

// Newton continuation: solve num(x) - target*den(x) = 0 from a seed
inline cplx solve_preimage(const RatMap& map, cplx target, cplx seed) {
    ComplexPoly pre = map.num() - map.den().scaled(target);
    cplx x = seed;
    for (int i = 0; i < 60; ++i) {
        cplx v, d;
        pre.eval_with_derivative(x, v, d);
        if (d == cplx{0, 0}) break;
        cplx step = v / d;
        x -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) break;
    }
    double scale = residual_scale(pre, x);
    if (std::abs(pre.eval(x)) > 1e-8 * scale)
        throw Error("OutOfDomain", "preimage continuation failed");
    return x;
}

} // namespace detail

namespace detail {

// a vertex chain y_g -> y_{g-1} -> ... -> y_1 -> infinity with the local
// multiplicity of each step
struct PreimageNode {
    std::vector<cplx> vertices; // deepest first
    std::vector<int> mults;     // aligned with vertices
    int generation = 0;
    int composed_degree = 1;
};

inline std::vector<PreimageNode> enumerate_preimage_chains(const NewtonMapSpec& N, int depth,
                                                           int max_sectors) {
    std::vector<PreimageNode> out, frontier;
    if (depth < 1) return out;
    RootResult poles = poly_roots(N.map.den());
    for (const auto& r : poles.roots) {
        PreimageNode n;
        n.vertices = {r.value};
        n.mults = {r.multiplicity};
        n.generation = 1;
        n.composed_degree = r.multiplicity;
        out.push_back(n);
        frontier.push_back(n);
    }
    for (int g = 2; g <= depth; ++g) {
        std::vector<PreimageNode> next;
        for (const auto& parent : frontier) {
            ComplexPoly pre = N.map.num() - N.map.den().scaled(parent.vertices.front());
            if (pre.degree() < 1) continue;
            RootResult rr = poly_roots(pre);
            for (const auto& r : rr.roots) {
                PreimageNode n = parent;
                n.vertices.insert(n.vertices.begin(), r.value);
                n.mults.insert(n.mults.begin(), r.multiplicity);
                n.generation = g;
                n.composed_degree = parent.composed_degree * r.multiplicity;
                next.push_back(n);
            }
        }
        for (const auto& n : next) out.push_back(n);
        frontier = std::move(next);
    }
    int total = 0;
    for (const auto& n : out) total += n.composed_degree;
    if (total > max_sectors)
        throw Error("DepthOverflow", "preimage sector budget exceeded");
    return out;
}

// the candidates of N(x) = target closest to the vertex, sorted by angle
inline std::vector<cplx> branch_candidates(const RatMap& map, cplx target, cplx vertex,
                                           int count) {
    ComplexPoly pre = map.num() - map.den().scaled(target);
    RootResult rr = poly_roots(pre);
    std::vector<cplx> cand;
    for (const auto& r : rr.roots)
        for (int i = 0; i < r.multiplicity; ++i) cand.push_back(r.value);
    std::sort(cand.begin(), cand.end(), [&](cplx a, cplx b) {
        return std::abs(a - vertex) < std::abs(b - vertex);
    });
    if (static_cast<int>(cand.size()) < count)
        throw Error("OutOfDomain", "fewer preimages than expected branches");
    cand.resize(count);
    std::sort(cand.begin(), cand.end(), [&](cplx a, cplx b) {
        return std::arg(a - vertex) < std::arg(b - vertex);
    });
    return cand;
}

} // namespace detail

/// Numerical form of the preimage-sector area estimate: the model sector is
/// placed at infinity through the Koenigs chart, pulled back along the
/// inverse branches at every preimage of infinity up to `depth`, K is
/// transported unchanged (holomorphic pullback preserves |mu|), and the union
/// tail area is measured in the bounded viewport v = 1/(z - z0) with z0 the
/// first root of p, so the whole sector union stays bounded.
inline NewtonAreaReport newton_area_condition(const NewtonMapSpec& N,
                                              const NewtonAreaOptions& opt = {}) {
    if (N.n != 0)
        throw Error("DegenerateInput", "area condition needs a polynomial Newton map (q constant)");
    NewtonAreaReport rep;
    RatMap chart = N.map.chart_at_infinity();
    KoenigsChart koenigs(chart);
    rep.rho = koenigs.rho();
    SectorModel sec{rep.rho, opt.theta, SectorModel::growth_onset(rep.rho, opt.m0)};
    rep.model = sec;
    const int m_max = std::max(opt.m_max, sec.m0 + 12);

    auto prof = dilatation_profile(sec, sec.m0, sec.m0 + 15);
    double c = 0;
    for (const auto& e : prof) c += e.median_K / e.m;
    c /= prof.size();
    rep.growth_constant = c;

    RootResult pr = poly_roots(N.p);
    if (pr.roots.empty()) throw Error("DegenerateInput", "p has no roots");
    const cplx z0 = pr.roots.front().value;
    auto to_view = [z0](cplx z) { return cplx{1, 0} / (z - z0); };

    const auto cells = detail::sector_cells(sec, m_max, opt.n_rad, opt.n_ang);
    std::vector<double> cellK(cells.size());
    for (size_t i = 0; i < cells.size(); ++i)
        cellK[i] = numerical_dilatation(
            [&sec](cplx w) { return chi_extension(sec, w); }, cells[i].center,
            1e-5 * std::abs(cells[i].center));

    const int d = N.d;
    std::vector<std::vector<double>> sector_cell_area;

    // measures one sector instance: empty path = the sector at infinity itself
    auto process_sector = [&](const detail::PreimageNode* node, const std::vector<int>& branch) {
        SectorInstanceInfo info;
        info.generation = node ? node->generation : 0;
        info.vertex = node ? node->vertices.front() : cplx{0, 0};
        info.branches = node ? node->composed_degree : 1;
        info.local_degree = node ? node->composed_degree : 1;
        info.degree_flag = info.local_degree > std::max(1, d - 2);
        if (info.degree_flag) rep.flagged_degrees += 1;

        const size_t steps = node ? node->vertices.size() : 0;
        std::vector<cplx> seed_b(steps), seed_x(steps), seed_y(steps);

        auto pull = [&](cplx z_near_inf, std::vector<cplx>& seeds, bool fresh) -> cplx {
            cplx cur = z_near_inf;
            for (size_t s = 0; s < steps; ++s) {
                size_t vi = steps - 1 - s; // shallowest vertex first
                if (fresh) {
                    auto cand = detail::branch_candidates(N.map, cur, node->vertices[vi],
                                                          node->mults[vi]);
                    cur = cand[branch[vi] % cand.size()];
                } else {
                    cur = detail::solve_preimage(N.map, cur, seeds[s]);
                }
                seeds[s] = cur;
            }
            return cur;
        };

        std::vector<double> areas(cells.size(), 0.0);
        double total = 0;
        for (size_t i = 0; i < cells.size(); ++i) {
            const cplx zeta = cells[i].center;
            const double dm = 0.02 * std::abs(zeta);
            // branch re-selection at each angular row keeps the sheet choice
            // deterministic; displaced pulls continue from the base chain
            const bool fresh = (i % size_t(opt.n_ang)) == 0;
            try {
                cplx zb = cplx{1, 0} / koenigs.kappa_inverse(zeta);
                cplx zx = cplx{1, 0} / koenigs.kappa_inverse(zeta + cplx{dm, 0});
                cplx zy = cplx{1, 0} / koenigs.kappa_inverse(zeta + cplx{0, dm});
                cplx vb = to_view(pull(zb, seed_b, fresh));
                seed_x = seed_b;
                seed_y = seed_b;
                cplx vx = to_view(pull(zx, seed_x, false));
                cplx vy = to_view(pull(zy, seed_y, false));
                double jx = std::abs(vx - vb) / dm;
                double jy = std::abs(vy - vb) / dm;
                areas[i] = cells[i].area * jx * jy; // conformal chain: jx ~ jy
            } catch (const Error&) {
                areas[i] = 0;
            }
            total += areas[i];
        }
        info.area = total;
        rep.sectors.push_back(info);
        sector_cell_area.push_back(std::move(areas));
    };

    process_sector(nullptr, {});
    auto nodes = detail::enumerate_preimage_chains(N, opt.depth, opt.max_sectors);
    for (const auto& node : nodes) {
        // one instance per branch tuple (mixed-radix over the step multiplicities)
        std::vector<int> branch(node.vertices.size(), 0);
        bool done = false;
        while (!done) {
            process_sector(&node, branch);
            done = true;
            for (size_t s = 0; s < branch.size(); ++s) {
                if (++branch[s] < node.mults[s]) {
                    done = false;
                    break;
                }
                branch[s] = 0;
            }
        }
    }

    int max_gen = 0;
    for (const auto& info : rep.sectors) max_gen = std::max(max_gen, info.generation);
    rep.generation_area.assign(max_gen + 1, 0.0);
    for (const auto& info : rep.sectors) rep.generation_area[info.generation] += info.area;
    // the union stays summable when generation totals decay geometrically
    // beyond the first preimage generation
    rep.generation_decay = true;
    for (size_t g = 2; g < rep.generation_area.size(); ++g)
        if (rep.generation_area[g] > 0.95 * rep.generation_area[g - 1])
            rep.generation_decay = false;
    for (double a : rep.generation_area) rep.total_area += a;

    for (int m = sec.m0 + 1; m < m_max - 1; ++m) {
        double area = 0;
        for (const auto& areas : sector_cell_area)
            for (size_t i = 0; i < cells.size(); ++i)
                if (cellK[i] > c * m) area += areas[i];
        rep.m_values.push_back(m);
        rep.tail_areas.push_back(area);
    }
    std::vector<AreaTailEntry> entries;
    for (size_t i = 0; i < rep.m_values.size(); ++i)
        entries.push_back({c * rep.m_values[i], rep.tail_areas[i], 1});
    rep.fit = detail::fit_tail(entries);
    rep.slope_per_m = rep.fit.slope * c;
    return rep;
}

// ---------------------------------------------------------------------------
// end-to-end surgery pipeline
// ---------------------------------------------------------------------------

struct BasinSurgeryReport {
    int root_index = -1;
    cplx root{0, 0};
    int k = 2;
    double b = 0, alpha = 0, r = 0;
    int access_count = 1;
    ContinuityReport continuity;
    double profile_ratio = 0; // max/min of (max K on Q_m)/m
    bool profile_monotone = false;
    double conjugacy_residual = 0; // |omega(lambda z) - g_par(omega(z))| worst case
    AreaTailReport chi_tail;       // model-field tail at depth 0
    bool pass = false;
};

struct SurgeryPipelineReport {
    bool pcf_plausible = false;
    std::vector<int> markings;
    std::vector<BasinSurgeryReport> basins;
    NewtonAreaReport area; // preimage-sector area condition
    std::string david_integration = "not performed (out of scope)";
    bool pass = false;
};

struct PipelineOptions {
    double lambda_target = 0.5; // attracting multiplier prepared for surgery
    int profile_m_hi = 100;
    int chi_grid = 512;
    double r = 0.0; // 0: automatic
    NewtonAreaOptions area;
};

/// Constructive ingredients of the surgery on marked basins of a polynomial
/// Newton map: disk model parameters, the model map g with its gluing
/// diagnostics, the local-model dilatation growth, and the area condition.
/// The David integration step itself is reported, not performed.
inline SurgeryPipelineReport surgery_pipeline_report(const NewtonMapSpec& N,
                                                     const std::vector<int>& markings,
                                                     const PipelineOptions& opt = {}) {
    if (N.n != 0)
        throw Error("DegenerateInput", "the pipeline starts from a polynomial Newton map");
    SurgeryPipelineReport rep;
    rep.markings = markings;
    if (static_cast<int>(markings.size()) > N.d)
        throw Error("MarkingInvalid", "more markings than basins");

    // PCF heuristic: every critical orbit classified (landing or converging)
    std::vector<cplx> roots;
    {
        auto fps = fixed_points(N);
        for (const auto& f : fps)
            if (!f.location.at_infinity) roots.push_back(f.location.z);
        std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
    }
    auto crits = critical_points(N);
    rep.pcf_plausible = true;
    {
        OrbitOptions oo;
        oo.max_steps = 2000;
        Dynamics dyn = make_dynamics(N, oo);
        for (const auto& co : postcritical_analysis(dyn))
            if (co.orbit.outcome.type == OutcomeType::undecided) rep.pcf_plausible = false;
    }

    if (rep.markings.empty()) {
        rep.pass = true; // nothing marked, trivially consistent
        return rep;
    }

    double lambda_inf = N.d / double(N.d - 1);
    bool all_ok = true;
    for (int idx : markings) {
        if (idx < 0 || idx >= static_cast<int>(roots.size()))
            throw Error("MarkingInvalid", "marked basin index out of range");
        BasinSurgeryReport br;
        br.root_index = idx;
        br.root = roots[idx];

        // local degree of the map at the root = 1 + critical multiplicity
        int crit_mult = 0;
        for (const auto& c : crits)
            if (!c.location.at_infinity && std::abs(c.location.z - br.root) < 1e-6)
                crit_mult = c.multiplicity;
        br.k = crit_mult + 1;
        br.access_count = crit_mult; // accesses = in-basin critical count
        if (br.access_count != 1)
            throw Error("MarkingInvalid",
                        "marked basin lacks a unique access ray (critical count != 1)");

        BlaschkeModel bm = solve_b_for_multiplier(br.k, opt.lambda_target);
        br.b = bm.b;
        br.alpha = bm.alpha;
        double r_min = std::max(bm.alpha, std::pow(bm.b, 1.0 / br.k));
        br.r = opt.r > 0 ? opt.r : std::max(0.8, 0.5 * (1.0 + r_min));

        DiskSurgeryModel g = build_model_g(br.k, br.b, br.r);
        br.continuity = model_continuity(g);

        SectorModel sec{lambda_inf, opt.area.theta,
                        SectorModel::growth_onset(lambda_inf, opt.area.m0)};
        auto prof = dilatation_profile(sec, sec.m0, opt.profile_m_hi);
        double lo = 1e300, hi = 0, prev = 0;
        br.profile_monotone = true;
        for (const auto& e : prof) {
            double ratio = e.max_K / e.m;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            if (e.max_K < prev) br.profile_monotone = false;
            prev = e.max_K;
        }
        br.profile_ratio = hi / lo;

        for (int i = 1; i <= 200; ++i) {
            double m = sec.m0 + 10.0 * i / 200.0;
            double ang = 0.4 * opt.area.theta * std::sin(3.7 * i);
            cplx z = std::pow(lambda_inf, -m) * cplx{std::cos(ang), std::sin(ang)};
            cplx lhs = omega_map(lambda_inf, lambda_inf * z);
            cplx rhs = parabolic_model(omega_map(lambda_inf, z));
            br.conjugacy_residual = std::max(br.conjugacy_residual, std::abs(lhs - rhs));
        }

        DilatationField field = make_chi_field(sec, opt.chi_grid);
        double c = 0;
        {
            auto p2 = dilatation_profile(sec, sec.m0, sec.m0 + 15);
            for (const auto& e : p2) c += e.median_K / e.m;
            c /= p2.size();
        }
        std::vector<double> thr;
        for (int m = sec.m0 + 1; m <= sec.m0 + 8; ++m) thr.push_back(c * m);
        br.chi_tail = area_tail(field, thr);

        br.pass = br.continuity.outer_jump < 1e-9 && br.continuity.inner_jump < 1e-9 &&
                  br.continuity.fixed_point_residual < 1e-10 &&
                  br.continuity.max_holomorphic_K - 1.0 < 1e-6 && br.profile_ratio <= 10.0 &&
                  br.profile_monotone && br.conjugacy_residual < 1e-12 &&
                  br.chi_tail.fit.exponential;
        all_ok = all_ok && br.pass;
        rep.basins.push_back(std::move(br));
    }

    rep.area = newton_area_condition(N, opt.area);
    all_ok = all_ok && rep.area.fit.exponential && rep.area.fit.slope < 0 &&
             rep.area.fit.r2 >= 0.9;
    rep.pass = all_ok;
    return rep;
}

} // namespace newtonlab
