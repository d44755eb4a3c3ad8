#include "sbcm/reduced.hpp"

#include "sbcm/analytic.hpp"
#include "sbcm/dynamics.hpp"
#include "sbcm/io.hpp"
#include "sbcm/ode.hpp"
#include "sbcm/parallel.hpp"
#include "sbcm/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

namespace sbcm {

namespace {

OpinionState family_state_unchecked(const FamilySpec& spec, double theta) {
  const int n = spec.n;
  const double half = (n + 1) / 2.0;
  OpinionState x(n + 2);
  for (int j = 0; j < n + 2; ++j) {
    const double harmonic = -half + j;
    double v = 0.0;
    if (spec.kind == FamilyKind::polarized)
      v = j <= n / 2 ? -1.0 : 1.0;
    else if (j == 0 || j == n + 1)
      v = j == 0 ? -1.0 : 1.0;
    x[j] = (1.0 - theta) * harmonic + theta * half * v;
  }
  return x;
}

// d x_active / d theta along the family; constant in theta.
double active_slope(const FamilySpec& spec) {
  const NodeId m = family_active_node(spec);
  return family_state_unchecked(spec, 1.0)[m] - family_state_unchecked(spec, 0.0)[m];
}

Stability classify_real_parts(const Eigen::Matrix2d& J, double tol) {
  const double tr = J.trace(), det = J.determinant();
  const double disc = tr * tr - 4.0 * det;
  const double top = disc >= 0.0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * tr;
  return classify_sign(top, tol);
}

// Zero of a continuous scalar function bracketed by [lo, hi].
double refine_root(const std::function<double(double)>& f, double lo, double hi) {
  return bisect(f, lo, hi, 1e-15);
}

}  // namespace

std::string_view to_string(FamilyKind k) {
  return k == FamilyKind::polarized ? "polarized" : "consensus";
}

FamilyKind family_kind_from_string(std::string_view s) {
  if (s == "polarized") return FamilyKind::polarized;
  if (s == "consensus") return FamilyKind::consensus;
  throw ValidationError("unknown family '" + std::string(s) + "'");
}

void FamilySpec::validate() const {
  if (n < 2 || n % 2 != 0)
    throw ValidationError("family needs an even persuadable count >= 2, got " + std::to_string(n));
}

OpinionState family_state(const FamilySpec& spec, double theta) {
  spec.validate();
  if (!(theta >= 0.0 && theta <= 1.0))
    throw ValidationError("theta must lie in [0, 1], got " + std::to_string(theta));
  return family_state_unchecked(spec, theta);
}

NodeId family_active_node(const FamilySpec& spec) {
  return spec.kind == FamilyKind::polarized ? spec.n / 2 : 1;
}

double reduced_velocity(const FamilySpec& spec, double theta, const ModelParams& p) {
  const Graph g = path_graph(spec.n);
  return node_velocity(g, family_state(spec, theta), p, family_active_node(spec));
}

FamilyCount count_stable_family(const FamilySpec& spec, const ModelParams& p, int scan_points,
                                double marginal_tol) {
  spec.validate();
  p.validate();
  if (scan_points < 2) throw ValidationError("scan needs at least two points");
  const Graph g = path_graph(spec.n);
  const NodeId m = family_active_node(spec);
  const double slope = active_slope(spec);
  auto f = [&](double theta) {
    return node_velocity(g, family_state_unchecked(spec, theta), p, m);
  };

  std::vector<double> roots{0.0};
  std::vector<double> values(static_cast<std::size_t>(scan_points));
  auto theta_at = [&](int k) { return static_cast<double>(k) / (scan_points - 1); };
  for (int k = 0; k < scan_points; ++k) values[k] = f(theta_at(k));
  for (int k = 1; k < scan_points; ++k) {
    if (values[k] == 0.0) {
      roots.push_back(theta_at(k));
    } else if (values[k - 1] != 0.0 && (values[k - 1] > 0.0) != (values[k] > 0.0)) {
      roots.push_back(refine_root(f, theta_at(k - 1), theta_at(k)));
    }
  }

  FamilyCount out;
  for (double theta : roots) {
    FamilyRoot r;
    r.theta = theta;
    // Stability of d theta/dt = f(theta) / slope.
    const double h = 1e-6;
    const double deriv = (f(theta + h) - f(theta - h)) / (2.0 * h * slope);
    r.reduced = classify_sign(deriv, marginal_tol);
    const OpinionState x = family_state_unchecked(spec, theta);
    r.residual = max_abs(velocity(g, x, p));
    const auto rep = spectral_report(g, x, p, marginal_tol);
    r.full = rep.classification;
    r.top_eigenvalue = rep.top();
    if (r.full == Stability::stable) ++out.count_full;
    if (r.reduced == Stability::stable) ++out.count_reduced;
    out.roots.push_back(r);
  }
  return out;
}

OpinionState clique_embed(const PairedCliques& pc, double x1, double x2) {
  OpinionState x = pc.graph.uniform_state(0.0);
  for (NodeId i : pc.first_class) x[i] = x1;
  for (NodeId i : pc.second_class) x[i] = x2;
  return x;
}

std::array<double, 2> clique_reduced_velocity(const PairedCliques& pc, double x1, double x2,
                                              const ModelParams& p) {
  const OpinionState f = velocity(pc.graph, clique_embed(pc, x1, x2), p);
  std::array<double, 2> out{f[pc.first_class.front()], f[pc.second_class.front()]};
  for (int c = 0; c < 2; ++c) {
    const auto& cls = c == 0 ? pc.first_class : pc.second_class;
    for (NodeId i : cls)
      if (std::abs(f[i] - out[c]) > 1e-10)
        throw Error("class velocities disagree at node " + std::to_string(i) +
                    "; partition does not reduce the dynamics");
  }
  return out;
}

std::array<double, 2> clique_fast_velocity(const PairedCliques& pc, double x1, double x2,
                                           const ModelParams& p) {
  const OpinionState x = clique_embed(pc, x1, x2);
  return {node_velocity(pc.graph, x, p, pc.first_class.front()),
          node_velocity(pc.graph, x, p, pc.second_class.front())};
}

Stability clique_reduced_stability(const PairedCliques& pc, double x1, double x2,
                                   const ModelParams& p, double marginal_tol) {
  const double h = 1e-6;
  Eigen::Matrix2d J;
  auto a = clique_fast_velocity(pc, x1 + h, x2, p), b = clique_fast_velocity(pc, x1 - h, x2, p);
  auto c = clique_fast_velocity(pc, x1, x2 + h, p), d = clique_fast_velocity(pc, x1, x2 - h, p);
  J << (a[0] - b[0]) / (2 * h), (c[0] - d[0]) / (2 * h), (a[1] - b[1]) / (2 * h),
      (c[1] - d[1]) / (2 * h);
  return classify_real_parts(J, marginal_tol);
}

std::string_view to_string(CliqueLine l) {
  return l == CliqueLine::anti_diagonal ? "anti_diagonal" : "diagonal";
}

LineCount count_stable_on_line(const PairedCliques& pc, const ModelParams& p, CliqueLine line,
                               int scan_points, double marginal_tol) {
  p.validate();
  if (scan_points < 3 || scan_points % 2 == 0)
    throw ValidationError("line scan needs an odd point count >= 3 so the origin is sampled");
  const double sign = line == CliqueLine::anti_diagonal ? -1.0 : 1.0;
  auto f = [&](double t) { return clique_fast_velocity(pc, t, sign * t, p)[0]; };
  auto t_at = [&](int k) { return -1.0 + 2.0 * k / (scan_points - 1); };

  std::vector<double> roots;
  std::vector<double> values(static_cast<std::size_t>(scan_points));
  for (int k = 0; k < scan_points; ++k) values[k] = f(t_at(k));
  for (int k = 0; k < scan_points; ++k) {
    if (values[k] == 0.0) {
      roots.push_back(t_at(k));
    } else if (k > 0 && values[k - 1] != 0.0 && (values[k - 1] > 0.0) != (values[k] > 0.0)) {
      roots.push_back(refine_root(f, t_at(k - 1), t_at(k)));
    }
  }

  LineCount out;
  for (double t : roots) {
    LineRoot r;
    r.x1 = t;
    r.x2 = sign * t;
    const OpinionState x = clique_embed(pc, r.x1, r.x2);
    r.residual = max_abs(velocity(pc.graph, x, p));
    r.full = spectral_report(pc.graph, x, p, marginal_tol).classification;
    r.reduced = clique_reduced_stability(pc, r.x1, r.x2, p, marginal_tol);
    if (r.full == Stability::stable) ++out.count;
    if (r.reduced == Stability::stable) ++out.count_reduced;
    out.roots.push_back(r);
  }
  return out;
}

namespace {

std::optional<std::array<double, 2>> newton_2d(const PairedCliques& pc, const ModelParams& p,
                                               double x1, double x2) {
  const double h = 1e-7;
  for (int it = 0; it < 60; ++it) {
    auto f = clique_fast_velocity(pc, x1, x2, p);
    const double res = std::max(std::abs(f[0]), std::abs(f[1]));
    if (res < 1e-13) return std::array<double, 2>{x1, x2};
    auto a = clique_fast_velocity(pc, x1 + h, x2, p), b = clique_fast_velocity(pc, x1 - h, x2, p);
    auto c = clique_fast_velocity(pc, x1, x2 + h, p), d = clique_fast_velocity(pc, x1, x2 - h, p);
    Eigen::Matrix2d J;
    J << (a[0] - b[0]) / (2 * h), (c[0] - d[0]) / (2 * h), (a[1] - b[1]) / (2 * h),
        (c[1] - d[1]) / (2 * h);
    const double det = J.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return std::nullopt;
    Eigen::Vector2d step = J.fullPivLu().solve(-Eigen::Vector2d(f[0], f[1]));
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-4) {
      const double y1 = x1 + alpha * step[0], y2 = x2 + alpha * step[1];
      auto g = clique_fast_velocity(pc, y1, y2, p);
      if (std::max(std::abs(g[0]), std::abs(g[1])) < (1.0 - 1e-4 * alpha) * res) {
        x1 = y1;
        x2 = y2;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (std::abs(x1) > 10.0 || std::abs(x2) > 10.0) return std::nullopt;
  }
  auto f = clique_fast_velocity(pc, x1, x2, p);
  if (std::max(std::abs(f[0]), std::abs(f[1])) < 1e-11) return std::array<double, 2>{x1, x2};
  return std::nullopt;
}

void march_squares(const GridSpec& grid, const std::vector<double>& v, int component,
                   std::vector<NullclineSegment>& out) {
  auto at = [&](int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; };
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const double x0 = grid.x_at(i), x1 = grid.x_at(i + 1);
      const double y0 = grid.y_at(j), y1 = grid.y_at(j + 1);
      const double f00 = at(i, j), f10 = at(i + 1, j), f11 = at(i + 1, j + 1),
                   f01 = at(i, j + 1);
      // Crossing points on the four cell edges: bottom, right, top, left.
      std::vector<std::array<double, 2>> pts;
      auto edge = [&](double fa, double fb, double xa, double ya, double xb, double yb) {
        if ((fa > 0.0) == (fb > 0.0)) return;
        const double t = fa == fb ? 0.5 : fa / (fa - fb);
        pts.push_back({xa + t * (xb - xa), ya + t * (yb - ya)});
      };
      edge(f00, f10, x0, y0, x1, y0);
      edge(f10, f11, x1, y0, x1, y1);
      edge(f11, f01, x1, y1, x0, y1);
      edge(f01, f00, x0, y1, x0, y0);
      if (pts.size() == 2) {
        out.push_back({component, pts[0][0], pts[0][1], pts[1][0], pts[1][1]});
      } else if (pts.size() == 4) {
        // Saddle cell: pair crossings according to the sign at the center.
        const double center = 0.25 * (f00 + f10 + f11 + f01);
        if ((center > 0.0) == (f00 > 0.0)) {
          out.push_back({component, pts[0][0], pts[0][1], pts[1][0], pts[1][1]});
          out.push_back({component, pts[2][0], pts[2][1], pts[3][0], pts[3][1]});
        } else {
          out.push_back({component, pts[0][0], pts[0][1], pts[3][0], pts[3][1]});
          out.push_back({component, pts[1][0], pts[1][1], pts[2][0], pts[2][1]});
        }
      }
    }
  }
}

}  // namespace

PhasePortrait phase_portrait(const PairedCliques& pc, const ModelParams& p, const GridSpec& grid,
                             const PortraitOptions& opts) {
  p.validate();
  if (grid.nx < 2 || grid.ny < 2 || !(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
    throw ValidationError("portrait grid needs at least 2x2 points and positive extent");
  PhasePortrait out;
  out.grid = grid;

  // Fixed points by multistart Newton.
  const int s = std::max(2, opts.starts_per_axis);
  std::vector<std::optional<std::array<double, 2>>> found(static_cast<std::size_t>(s * s));
  parallel_for(found.size(), opts.workers, [&](std::size_t k) {
    const int i = static_cast<int>(k) % s, j = static_cast<int>(k) / s;
    const double x1 = grid.x_min + (grid.x_max - grid.x_min) * i / (s - 1);
    const double x2 = grid.y_min + (grid.y_max - grid.y_min) * j / (s - 1);
    found[k] = newton_2d(pc, p, x1, x2);
  });
  for (const auto& f : found) {
    if (!f) continue;
    bool dup = std::any_of(out.fixed_points.begin(), out.fixed_points.end(), [&](const auto& q) {
      return std::max(std::abs(q.x1 - (*f)[0]), std::abs(q.x2 - (*f)[1])) < 1e-6;
    });
    if (dup) continue;
    const OpinionState x = clique_embed(pc, (*f)[0], (*f)[1]);
    FixedPoint fp;
    fp.x1 = (*f)[0];
    fp.x2 = (*f)[1];
    fp.residual = max_abs(velocity(pc.graph, x, p));
    if (!(fp.residual < 1e-8)) continue;
    fp.full = spectral_report(pc.graph, x, p, opts.marginal_tol).classification;
    fp.reduced = clique_reduced_stability(pc, fp.x1, fp.x2, p, opts.marginal_tol);
    out.fixed_points.push_back(fp);
  }
  std::sort(out.fixed_points.begin(), out.fixed_points.end(), [](const auto& a, const auto& b) {
    return a.x1 != b.x1 ? a.x1 < b.x1 : a.x2 < b.x2;
  });

  // Nullclines from the sampled field.
  const std::size_t cells = static_cast<std::size_t>(grid.nx) * grid.ny;
  std::vector<double> f1(cells), f2(cells);
  parallel_for(static_cast<std::size_t>(grid.ny), opts.workers, [&](std::size_t j) {
    for (int i = 0; i < grid.nx; ++i) {
      auto f = clique_fast_velocity(pc, grid.x_at(i), grid.y_at(static_cast<int>(j)), p);
      f1[j * grid.nx + i] = f[0];
      f2[j * grid.nx + i] = f[1];
    }
  });
  march_squares(grid, f1, 1, out.nullclines);
  march_squares(grid, f2, 2, out.nullclines);

  if (!opts.basins) return out;
  out.basins.resize(cells);
  StepControl ctl;
  ctl.rtol = 1e-7;
  ctl.atol = 1e-9;
  ctl.stop_tol = 1e-9;
  ctl.max_steps = 200'000;
  parallel_for(cells, opts.workers, [&](std::size_t k) {
    const int i = static_cast<int>(k % grid.nx), j = static_cast<int>(k / grid.nx);
    BasinCell cell;
    cell.x1 = grid.x_at(i);
    cell.x2 = grid.y_at(j);
    Eigen::VectorXd y(2);
    y << cell.x1, cell.x2;
    auto rhs = [&](const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
      auto f = clique_fast_velocity(pc, z[0], z[1], p);
      dz.resize(2);
      dz << f[0], f[1];
    };
    try {
      y = solve_ode(rhs, y, opts.horizon, ctl).y;
    } catch (const IntegrationError& e) {
      y = e.last_state();
    }
    double best = 1e-3;
    for (std::size_t q = 0; q < out.fixed_points.size(); ++q) {
      const auto& fp = out.fixed_points[q];
      const double d = std::max(std::abs(fp.x1 - y[0]), std::abs(fp.x2 - y[1]));
      if (d < best) {
        best = d;
        cell.attractor = static_cast<int>(q);
      }
    }
    if (cell.attractor >= 0) {
      const auto& fp = out.fixed_points[static_cast<std::size_t>(cell.attractor)];
      cell.polarization = std::abs(fp.x1 - fp.x2);
    } else {
      cell.polarization = std::abs(y[0] - y[1]);
    }
    out.basins[k] = cell;
  });
  out.unresolved = static_cast<int>(std::count_if(
      out.basins.begin(), out.basins.end(), [](const BasinCell& c) { return c.attractor < 0; }));
  return out;
}

void write_portrait(const std::filesystem::path& dir, const PhasePortrait& portrait) {
  std::filesystem::create_directories(dir);
  std::ostringstream fp;
  fp << "x1,x2,class_reduced,class_full\n";
  for (const auto& q : portrait.fixed_points)
    fp << format_double(q.x1) << ',' << format_double(q.x2) << ',' << to_string(q.reduced) << ','
       << to_string(q.full) << '\n';
  write_file(dir / "fixed_points.csv", fp.str());

  std::ostringstream nc;
  nc << "component,segment,x1,x2\n";
  for (std::size_t k = 0; k < portrait.nullclines.size(); ++k) {
    const auto& s = portrait.nullclines[k];
    nc << s.component << ',' << k << ',' << format_double(s.xa) << ',' << format_double(s.ya)
       << '\n';
    nc << s.component << ',' << k << ',' << format_double(s.xb) << ',' << format_double(s.yb)
       << '\n';
  }
  write_file(dir / "nullclines.csv", nc.str());

  std::ostringstream bs;
  bs << "x1,x2,attractor_id,polarization\n";
  for (const auto& c : portrait.basins)
    bs << format_double(c.x1) << ',' << format_double(c.x2) << ',' << c.attractor << ','
       << format_double(c.polarization) << '\n';
  write_file(dir / "basins.csv", bs.str());
}

}  // namespace sbcm
