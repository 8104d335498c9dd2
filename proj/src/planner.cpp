#include "lla/planner.hpp"

#include <algorithm>
#include <cmath>

#include "lla/polyline.hpp"

namespace lla {

namespace {

poly::View view_of(const RaceLine& rl) { return {rl.points, rl.s, rl.length}; }

// Signed three-point (circumscribed circle) curvature at index m of a
// closed polyline. The tight stencil leaves no alternating-offset null
// space, so the optimizer cannot trade a lower sum for sawtooth spikes.
double kappa_at(const std::vector<Vec2>& q, std::size_t m) {
    const std::size_t n = q.size();
    const Vec2& a = q[(m + n - 1) % n];
    const Vec2& b = q[m];
    const Vec2& c = q[(m + 1) % n];
    const Vec2 ab = b - a, bc = c - b, ac = c - a;
    const double denom = norm(ab) * norm(bc) * norm(ac);
    return (denom > 0.0) ? 2.0 * cross(ab, bc) / denom : 0.0;
}

double curvature_objective(const std::vector<Vec2>& q) {
    double obj = 0.0;
    for (std::size_t m = 0; m < q.size(); ++m) {
        double k = kappa_at(q, m);
        obj += k * k;
    }
    return obj;
}

}  // namespace

double RaceLine::wrap_s(double s_query) const { return poly::wrap_s(view_of(*this), s_query); }

Vec2 RaceLine::point_at(double s_query) const { return poly::point_at(view_of(*this), s_query); }

double RaceLine::heading_at(double s_query) const {
    return poly::angle_at(view_of(*this), heading, s_query);
}

double RaceLine::curvature_at(double s_query) const {
    return poly::value_at(view_of(*this), curvature, s_query);
}

CurvilinearPose RaceLine::project(const Vec2& point, std::optional<double> hint_s) const {
    poly::Projection p = poly::project(view_of(*this), point, hint_s);
    return {p.s, p.e_y, 0.0};
}

RaceLine min_curvature_raceline(const Track& track, double margin, int iters, double step) {
    if (iters < 0) throw ValidationError("raceline iterations must be >= 0");
    if (!(step > 0.0)) throw ValidationError("raceline step must be positive");
    if (margin < 0.0) throw ValidationError("raceline margin must be non-negative");
    const std::size_t n = track.size();

    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        hi[i] = track.half_width_left[i] - margin;
        lo[i] = -(track.half_width_right[i] - margin);
        if (!(lo[i] < hi[i]) || hi[i] < 0.0 || lo[i] > 0.0)
            throw ValidationError("track too narrow for raceline margin at point " + std::to_string(i));
    }

    std::vector<Vec2> normals(n);
    for (std::size_t i = 0; i < n; ++i) {
        normals[i] = {-std::sin(track.heading[i]), std::cos(track.heading[i])};  // left normal
    }

    auto build_points = [&](const std::vector<double>& a) {
        std::vector<Vec2> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = track.centerline[i] + normals[i] * a[i];
        return q;
    };

    // Offsets are optimized coarse-to-fine on knot grids. A single fine knot
    // cannot lower the objective on its own (its S-wiggle costs more than the
    // local radius gain), so whole sections must move together first.
    struct Level {
        std::size_t knots;
        int first_iter;  // consumed once the global iteration count passes this
    };
    const Level levels[3] = {{8, 0}, {24, 60}, {96, 120}};

    std::vector<double> alpha(n, 0.0);
    std::vector<double> best_alpha = alpha;
    double best_obj = curvature_objective(build_points(alpha));
    const double grad_h = std::max(1e-7 * track.length, 1e-9);

    for (const Level& level : levels) {
        if (iters <= level.first_iter) break;
        const int level_iters =
            std::min(iters, (&level == &levels[2]) ? iters : level.first_iter + 60) - level.first_iter;

        const std::size_t n_knots = std::min<std::size_t>(std::max<std::size_t>(level.knots, 4), n / 2);
        const std::size_t stride = (n + n_knots - 1) / n_knots;
        const std::size_t eff_knots = (n + stride - 1) / stride;

        auto alpha_from_knots = [&](const std::vector<double>& knots) {
            std::vector<double> a(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = i / stride;
                std::size_t j1 = (j + 1) % eff_knots;
                double t = static_cast<double>(i - j * stride) / static_cast<double>(stride);
                double w = t * t * (3.0 - 2.0 * t);  // C1 blend, no kinks at knots
                a[i] = std::clamp((1.0 - w) * knots[j] + w * knots[j1], lo[i], hi[i]);
            }
            return a;
        };

        // Per-knot bounds from the points each knot influences, so a knot at
        // its stop cannot drift outward as a repeated no-op step.
        std::vector<double> klo(eff_knots, -1e300), khi(eff_knots, 1e300);
        for (std::size_t j = 0; j < eff_knots; ++j) {
            for (std::size_t off = 0; off < 2 * stride; ++off) {
                std::size_t i = (j * stride + n - stride + 1 + off) % n;
                klo[j] = std::max(klo[j], lo[i]);
                khi[j] = std::min(khi[j], hi[i]);
            }
            if (klo[j] > khi[j]) {  // uneven widths; fall back to the knot's own point
                klo[j] = lo[(j * stride) % n];
                khi[j] = hi[(j * stride) % n];
            }
        }

        std::vector<double> knots(eff_knots);
        for (std::size_t j = 0; j < eff_knots; ++j)
            knots[j] = std::clamp(alpha[j * stride], klo[j], khi[j]);
        alpha = alpha_from_knots(knots);
        std::vector<Vec2> q = build_points(alpha);
        double obj = curvature_objective(q);
        if (obj < best_obj) {
            best_obj = obj;
            best_alpha = alpha;
        }
        double step_cur = step;

        std::vector<double> grad(eff_knots), knots_try(eff_knots);
        for (int it = 0; it < level_iters; ++it) {
            // Finite-difference gradient; knot j only moves the points of its
            // two adjacent spans, hence curvature one point beyond them.
            std::vector<double> knot_bump = knots;
            for (std::size_t j = 0; j < eff_knots; ++j) {
                const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j * stride);
                const std::ptrdiff_t reach = static_cast<std::ptrdiff_t>(stride) + 1;
                auto window_index = [&](std::ptrdiff_t off) {
                    return static_cast<std::size_t>((base + off + (std::ptrdiff_t)n) % (std::ptrdiff_t)n);
                };
                auto local_obj = [&](double value) {
                    knot_bump[j] = value;
                    for (std::ptrdiff_t off = -reach; off <= reach; ++off) {
                        std::size_t i = window_index(off);
                        std::size_t jj = i / stride;
                        std::size_t j1 = (jj + 1) % eff_knots;
                        double t = static_cast<double>(i - jj * stride) / static_cast<double>(stride);
                        double w = t * t * (3.0 - 2.0 * t);
                        double v = std::clamp((1.0 - w) * knot_bump[jj] + w * knot_bump[j1], lo[i], hi[i]);
                        q[i] = track.centerline[i] + normals[i] * v;
                    }
                    double o = 0.0;
                    for (std::ptrdiff_t off = -reach; off <= reach; ++off) {
                        double k = kappa_at(q, window_index(off));
                        o += k * k;
                    }
                    for (std::ptrdiff_t off = -reach; off <= reach; ++off) {
                        std::size_t i = window_index(off);
                        q[i] = track.centerline[i] + normals[i] * alpha[i];
                    }
                    knot_bump[j] = knots[j];
                    return o;
                };
                grad[j] = (local_obj(knots[j] + grad_h) - local_obj(knots[j] - grad_h)) / (2.0 * grad_h);
            }

            double grad_inf = 0.0;
            for (double gj : grad) grad_inf = std::max(grad_inf, std::abs(gj));
            if (grad_inf == 0.0) break;

            // Backtracking step sized in lateral metres at the worst knot;
            // never accept an increase.
            bool improved = false;
            double t = step_cur;
            for (int tries = 0; tries < 30; ++tries) {
                for (std::size_t j = 0; j < eff_knots; ++j)
                    knots_try[j] = std::clamp(knots[j] - t * grad[j] / grad_inf, klo[j], khi[j]);
                std::vector<double> alpha_try = alpha_from_knots(knots_try);
                std::vector<Vec2> q_try = build_points(alpha_try);
                double obj_try = curvature_objective(q_try);
                if (obj_try <= obj) {
                    knots.swap(knots_try);
                    alpha.swap(alpha_try);
                    q.swap(q_try);
                    obj = obj_try;
                    step_cur = std::min(t * 1.5, 5.0 * step);
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!improved) step_cur *= 0.5;
            if (obj < best_obj) {
                best_obj = obj;
                best_alpha = alpha;
            }
        }
        alpha = best_alpha;  // hand the best line so far to the next level
    }

    std::vector<Vec2> q = build_points(best_alpha);
    PolylineGeometry g = compute_polyline_geometry(q, /*closed=*/true);
    RaceLine rl;
    rl.points = std::move(q);
    rl.s = std::move(g.s);
    rl.heading = std::move(g.heading);
    rl.curvature = std::move(g.curvature);
    rl.offset = std::move(best_alpha);
    rl.length = g.length;
    return rl;
}

std::vector<double> velocity_profile(const RaceLine& raceline, double mu, const SpeedLimits& limits) {
    if (!(mu > 0.0)) throw ValidationError("velocity_profile: mu must be positive");
    const std::size_t n = raceline.size();

    std::vector<double> v(n), ds(n);
    for (std::size_t i = 0; i < n; ++i) {
        double kappa = std::max(std::abs(raceline.curvature[i]), limits.kappa_min);
        v[i] = std::min(limits.v_max, std::sqrt(limits.a_lat_scale * mu * limits.g / kappa));
        ds[i] = (i + 1 < n) ? raceline.s[i + 1] - raceline.s[i] : raceline.length - raceline.s[i];
    }

    const double a_acc = limits.a_acc_scale * mu * limits.g;
    const double a_brake = limits.a_brake_scale * mu * limits.g;

    // Forward (acceleration) and backward (braking) passes, run twice so
    // the wrap edge settles.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = (i + 1) % n;
            v[j] = std::min(v[j], std::sqrt(v[i] * v[i] + 2.0 * a_acc * ds[i]));
        }
        for (std::size_t k = n; k-- > 0;) {
            std::size_t j = (k + 1) % n;
            v[k] = std::min(v[k], std::sqrt(v[j] * v[j] + 2.0 * a_brake * ds[k]));
        }
    }
    return v;
}

VelocityProfileLibrary build_library(const RaceLine& raceline, double mu_min, double mu_max,
                                     int n_profiles, const SpeedLimits& limits) {
    if (!(mu_min > 0.0) || !(mu_min < mu_max)) throw ValidationError("build_library: need 0 < mu_min < mu_max");
    if (n_profiles < 2) throw ValidationError("build_library: need at least 2 profiles");

    VelocityProfileLibrary lib;
    lib.limits = limits;
    lib.mu_grid.resize(static_cast<std::size_t>(n_profiles));
    lib.profiles.resize(static_cast<std::size_t>(n_profiles));
    for (int k = 0; k < n_profiles; ++k) {
        double mu = mu_min + (mu_max - mu_min) * k / (n_profiles - 1);
        lib.mu_grid[static_cast<std::size_t>(k)] = mu;
        lib.profiles[static_cast<std::size_t>(k)] = velocity_profile(raceline, mu, limits);
    }
    return lib;
}

double library_speed(const RaceLine& raceline, const VelocityProfileLibrary& library, double mu_hat,
                     double s_query) {
    const auto& grid = library.mu_grid;
    const double mu = std::clamp(mu_hat, grid.front(), grid.back());

    auto it = std::upper_bound(grid.begin(), grid.end(), mu);
    std::size_t k1 = std::min<std::size_t>(grid.size() - 1, static_cast<std::size_t>(it - grid.begin()));
    std::size_t k0 = (k1 == 0) ? 0 : k1 - 1;
    double w = (k1 == k0) ? 0.0 : (mu - grid[k0]) / (grid[k1] - grid[k0]);

    const poly::View view = view_of(raceline);
    double v0 = poly::value_at(view, library.profiles[k0], s_query);
    double v1 = poly::value_at(view, library.profiles[k1], s_query);
    return (1.0 - w) * v0 + w * v1;
}

ReferenceTrajectory reference(const RaceLine& raceline, const VelocityProfileLibrary& library,
                              double mu_hat, const VehicleState& state, int h_steps, double dt,
                              std::optional<double> hint_s) {
    if (h_steps < 1) throw ValidationError("reference: h_steps must be >= 1");
    if (!(dt > 0.0)) throw ValidationError("reference: dt must be positive");

    ReferenceTrajectory ref;
    ref.s.reserve(static_cast<std::size_t>(h_steps) + 1);
    ref.x.reserve(ref.s.capacity());
    ref.y.reserve(ref.s.capacity());
    ref.phi.reserve(ref.s.capacity());
    ref.v.reserve(ref.s.capacity());

    double s = raceline.project({state.x, state.y}, hint_s).s;
    for (int i = 0; i <= h_steps; ++i) {
        double v = library_speed(raceline, library, mu_hat, s);
        Vec2 p = raceline.point_at(s);
        ref.s.push_back(s);
        ref.x.push_back(p.x);
        ref.y.push_back(p.y);
        ref.phi.push_back(raceline.heading_at(s));
        ref.v.push_back(v);
        s = raceline.wrap_s(s + v * dt);
    }
    return ref;
}

}  // namespace lla
