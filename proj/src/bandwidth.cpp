#include "dgff/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dgff {

namespace {

double wrap_unit(double u) {
  u -= std::floor(u);
  if (u >= 1.0) u -= 1.0;
  return u;
}

struct Segment {
  double v_lo;
  double v_hi;
  double len;
};

// Value distribution of g(x) = F_N(x) - x over Lebesgue measure: a uniform
// mixture over per-interval ranges, each with slope -1.
std::vector<Segment> cdf_difference_segments(std::vector<double> x) {
  const std::size_t n = x.size();
  for (double& v : x) v = wrap_unit(v);
  std::sort(x.begin(), x.end());
  std::vector<Segment> segs;
  segs.reserve(n + 1);
  double prev = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double next = k == n ? 1.0 : x[k];
    if (next > prev) {
      const double cnt = static_cast<double>(k) / static_cast<double>(n);
      segs.push_back({cnt - next, cnt - prev, next - prev});
    }
    prev = std::max(prev, next);
  }
  return segs;
}

double segment_median(const std::vector<Segment>& segs) {
  // Sweep the sorted interval endpoints; within each slab the mass below m
  // is linear in m, so the median solves a linear equation.
  std::vector<double> cuts;
  cuts.reserve(2 * segs.size());
  for (const auto& s : segs) {
    cuts.push_back(s.v_lo);
    cuts.push_back(s.v_hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto mass_below = [&](double m) {
    double acc = 0.0;
    for (const auto& s : segs) {
      if (m >= s.v_hi) {
        acc += s.len;
      } else if (m > s.v_lo) {
        acc += s.len * (m - s.v_lo) / (s.v_hi - s.v_lo);
      }
    }
    return acc;
  };
  double lo = cuts.front(), hi = cuts.back();
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (mass_below(cuts[i]) >= 0.5) {
      lo = cuts[i - 1];
      hi = cuts[i];
      break;
    }
  }
  // Density within the slab is constant; interpolate linearly.
  const double m_lo = mass_below(lo), m_hi = mass_below(hi);
  if (m_hi <= m_lo) return lo;
  return lo + (0.5 - m_lo) / (m_hi - m_lo) * (hi - lo);
}

}  // namespace

double wasserstein1_circle(const std::vector<double>& points) {
  if (points.empty()) {
    throw std::invalid_argument("wasserstein1_circle: empty point list");
  }
  const auto segs = cdf_difference_segments(points);
  const double m = segment_median(segs);
  double w = 0.0;
  for (const auto& s : segs) {
    if (m <= s.v_lo) {
      w += 0.5 * ((s.v_hi - m) * (s.v_hi - m) - (s.v_lo - m) * (s.v_lo - m));
    } else if (m >= s.v_hi) {
      w += 0.5 * ((m - s.v_lo) * (m - s.v_lo) - (m - s.v_hi) * (m - s.v_hi));
    } else {
      w += 0.5 * ((s.v_hi - m) * (s.v_hi - m) + (m - s.v_lo) * (m - s.v_lo));
    }
  }
  return w;
}

namespace {

// Min-cost flow on the dense bipartite transport network by successive
// shortest paths with potentials. Supplies and demands are integer units.
class TransportSolver {
 public:
  TransportSolver(const std::vector<std::vector<double>>& cost,
                  std::vector<long long> supply, std::vector<long long> demand)
      : cost_(cost),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        ns_(supply_.size()),
        nt_(demand_.size()),
        flow_(ns_, std::vector<long long>(nt_, 0)),
        pot_src_(ns_, 0.0),
        pot_snk_(nt_, 0.0) {}

  double solve() {
    long long remaining = std::accumulate(supply_.begin(), supply_.end(), 0LL);
    const long long total_demand =
        std::accumulate(demand_.begin(), demand_.end(), 0LL);
    if (remaining != total_demand) {
      throw std::invalid_argument("transport: unbalanced problem");
    }
    while (remaining > 0) {
      remaining -= augment();
    }
    double total = 0.0;
    for (std::size_t i = 0; i < ns_; ++i) {
      for (std::size_t j = 0; j < nt_; ++j) {
        total += static_cast<double>(flow_[i][j]) * cost_[i][j];
      }
    }
    return total;
  }

 private:
  // One shortest-path computation over the residual graph (Dijkstra with
  // reduced costs), followed by a max push along the path.
  long long augment() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist_s(ns_, kInf), dist_t(nt_, kInf);
    std::vector<int> par_t(nt_, -1);   // sink's predecessor source
    std::vector<int> par_s(ns_, -1);   // source's predecessor sink (-1: root)
    std::vector<char> done_s(ns_, 0), done_t(nt_, 0);
    for (std::size_t i = 0; i < ns_; ++i) {
      if (supply_[i] > 0) dist_s[i] = 0.0;
    }
    while (true) {
      // Pick the unfinished node with the smallest distance.
      double best = kInf;
      int idx = -1;
      bool is_src = true;
      for (std::size_t i = 0; i < ns_; ++i) {
        if (!done_s[i] && dist_s[i] < best) {
          best = dist_s[i];
          idx = static_cast<int>(i);
          is_src = true;
        }
      }
      for (std::size_t j = 0; j < nt_; ++j) {
        if (!done_t[j] && dist_t[j] < best) {
          best = dist_t[j];
          idx = static_cast<int>(j);
          is_src = false;
        }
      }
      if (idx < 0) break;
      if (is_src) {
        done_s[idx] = 1;
        for (std::size_t j = 0; j < nt_; ++j) {
          if (done_t[j]) continue;
          const double rc =
              cost_[idx][j] - pot_src_[idx] + pot_snk_[j];
          const double nd = dist_s[idx] + rc;
          if (nd < dist_t[j] - 1e-15) {
            dist_t[j] = nd;
            par_t[j] = idx;
          }
        }
      } else {
        done_t[idx] = 1;
        for (std::size_t i = 0; i < ns_; ++i) {
          if (done_s[i] || flow_[i][idx] <= 0) continue;
          const double rc =
              -(cost_[i][idx] - pot_src_[i] + pot_snk_[idx]);
          const double nd = dist_t[idx] + rc;
          if (nd < dist_s[i] - 1e-15) {
            dist_s[i] = nd;
            par_s[i] = idx;
          }
        }
      }
    }
    // Closest reachable sink with unmet demand.
    int best_sink = -1;
    for (std::size_t j = 0; j < nt_; ++j) {
      if (demand_[j] > 0 && dist_t[j] < kInf &&
          (best_sink < 0 || dist_t[j] < dist_t[best_sink])) {
        best_sink = static_cast<int>(j);
      }
    }
    if (best_sink < 0) {
      throw std::runtime_error("transport: infeasible (no augmenting path)");
    }
    // Walk back to a root source, find the bottleneck.
    long long push = demand_[best_sink];
    int sink = best_sink;
    int src = par_t[sink];
    while (true) {
      if (par_s[src] < 0) {
        push = std::min(push, supply_[src]);
        break;
      }
      const int prev_sink = par_s[src];
      push = std::min(push, flow_[src][prev_sink]);
      sink = prev_sink;
      src = par_t[sink];
    }
    // Apply the push.
    sink = best_sink;
    src = par_t[sink];
    while (true) {
      flow_[src][sink] += push;
      if (par_s[src] < 0) {
        supply_[src] -= push;
        break;
      }
      const int prev_sink = par_s[src];
      flow_[src][prev_sink] -= push;
      sink = prev_sink;
      src = par_t[sink];
    }
    demand_[best_sink] -= push;
    // Johnson potential update, capped at the augmenting sink's distance so
    // reduced costs stay nonnegative on every residual arc.
    const double cap = dist_t[best_sink];
    for (std::size_t i = 0; i < ns_; ++i) {
      if (dist_s[i] < kInf) pot_src_[i] -= std::min(dist_s[i], cap);
    }
    for (std::size_t j = 0; j < nt_; ++j) {
      if (dist_t[j] < kInf) pot_snk_[j] -= std::min(dist_t[j], cap);
    }
    return push;
  }

  const std::vector<std::vector<double>>& cost_;
  std::vector<long long> supply_;
  std::vector<long long> demand_;
  std::size_t ns_;
  std::size_t nt_;
  std::vector<std::vector<long long>> flow_;
  std::vector<double> pot_src_;
  std::vector<double> pot_snk_;
};

}  // namespace

double wasserstein1_two_sample(const ManifoldModel& model,
                               const std::vector<Point>& a,
                               const std::vector<Point>& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("wasserstein1_two_sample: empty point set");
  }
  const std::size_t n = a.size(), m = b.size();
  if (m % n != 0 && n % m != 0) {
    throw std::invalid_argument(
        "wasserstein1_two_sample: one size must divide the other");
  }
  const long long ra = static_cast<long long>(m >= n ? m / n : 1);
  const long long rb = static_cast<long long>(m >= n ? 1 : n / m);
  std::vector<std::vector<double>> cost(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i][j] = model.geodesic_distance(a[i], b[j]);
    }
  }
  TransportSolver solver(cost, std::vector<long long>(n, ra),
                         std::vector<long long>(m, rb));
  const double units = static_cast<double>(n) * static_cast<double>(ra);
  return solver.solve() / units;
}

W1Estimate wasserstein1_estimate(std::shared_ptr<const ManifoldModel> model,
                                 const std::vector<Point>& points,
                                 std::size_t reference_size, RngStream& rng) {
  const std::size_t n = points.size();
  if (n == 0) {
    throw std::invalid_argument("wasserstein1_estimate: empty point list");
  }
  if (reference_size < 10 * n) {
    throw std::invalid_argument(
        "wasserstein1_estimate: reference_size must be >= 10 N");
  }
  const std::size_t m = ((reference_size + n - 1) / n) * n;
  const std::vector<Point> ref = model->sample_uniform(m, rng);
  W1Estimate out;
  out.reference_size = m;
  out.estimate = wasserstein1_two_sample(*model, points, ref);
  if (model->kind() == ManifoldKind::kTorus1) {
    std::vector<double> coords(m);
    for (std::size_t i = 0; i < m; ++i) coords[i] = ref[i][0];
    out.bias_bound = wasserstein1_circle(coords);
  } else {
    // E W1(ref, uniform) <= E W1 between two independent references; a small
    // pair calibration estimates that upper bound.
    double acc = 0.0;
    const int pairs = 2;
    for (int p = 0; p < pairs; ++p) {
      const std::vector<Point> c1 = model->sample_uniform(m, rng);
      const std::vector<Point> c2 = model->sample_uniform(m, rng);
      acc += wasserstein1_two_sample(*model, c1, c2);
    }
    out.bias_bound = acc / pairs;
  }
  return out;
}

double select_bandwidth_wass(double w1, int d, double safety) {
  if (!(w1 > 0.0)) {
    throw std::invalid_argument("select_bandwidth_wass: w1 must be > 0");
  }
  if (!(safety > 0.0 && safety < 1.0)) {
    throw std::invalid_argument(
        "select_bandwidth_wass: safety must lie in (0, 1)");
  }
  if (d < 1) throw std::invalid_argument("select_bandwidth_wass: bad d");
  const double exponent = 0.5 * d + 2.0;
  return std::pow(w1 / safety, 1.0 / exponent);
}

double intermediate_gap(double t, double lambda2) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("intermediate_gap: t must be > 0");
  }
  return -std::expm1(-t * lambda2) / t;
}

double GapErrorTable::at(int j, std::size_t n) const {
  for (std::size_t ji = 0; ji < j_values.size(); ++ji) {
    if (j_values[ji] != j) continue;
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
      if (n_values[ni] == n) return error[ji][ni];
    }
  }
  throw std::out_of_range("GapErrorTable: cell not measured");
}

BandwidthSchedule::BandwidthSchedule(std::vector<ScheduleEntry> entries,
                                     double safety, double exponent)
    : entries_(std::move(entries)), safety_(safety), exponent_(exponent) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.covered && e.t < e.t_prime) {
      throw std::logic_error("BandwidthSchedule: t_N >= t'_N violated");
    }
    if (i > 0 && entries_[i - 1].covered && e.covered &&
        e.t > entries_[i - 1].t) {
      throw std::logic_error("BandwidthSchedule: t_N must be nonincreasing");
    }
  }
}

const ScheduleEntry& BandwidthSchedule::at(std::size_t n) const {
  for (const auto& e : entries_) {
    if (e.n == n) return e;
  }
  throw std::out_of_range("BandwidthSchedule: no entry for requested N");
}

void BandwidthSchedule::to_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.schedule.v1 safety=" << safety_
      << " exponent=" << exponent_ << "\n";
  out << "N,w1,bias_bound,t_prime,j,t_N\n";
  char buf[160];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%d,%.17g", e.n,
                  e.w1, e.bias_bound, e.t_prime, e.j, e.covered ? e.t : -1.0);
    out << buf << '\n';
  }
}

BandwidthSchedule gap_adjusted_schedule(
    const GapErrorTable& table, const std::vector<ScheduleInput>& t_prime,
    double safety, double exponent) {
  if (t_prime.empty()) {
    throw std::invalid_argument("gap_adjusted_schedule: no t' inputs");
  }
  for (std::size_t i = 1; i < t_prime.size(); ++i) {
    if (t_prime[i].n <= t_prime[i - 1].n) {
      throw std::invalid_argument(
          "gap_adjusted_schedule: t' inputs must have ascending N");
    }
    if (t_prime[i].t_prime > t_prime[i - 1].t_prime + 1e-15) {
      throw std::invalid_argument(
          "gap_adjusted_schedule: t' must be nonincreasing");
    }
  }
  if (table.j_values.empty() || table.n_values.empty()) {
    throw std::invalid_argument("gap_adjusted_schedule: empty gap table");
  }

  // For each j: n_j = smallest measured n with n > n_{j-1}, error <= 1/j
  // from n onward, and n at least the first index where t' <= 1/j.
  std::vector<std::size_t> n_j;
  std::size_t prev = 0;
  for (std::size_t ji = 0; ji < table.j_values.size(); ++ji) {
    const int j = table.j_values[ji];
    const double tol = 1.0 / j;
    std::size_t wass_floor = 0;
    bool found_floor = false;
    for (const auto& in : t_prime) {
      if (in.t_prime <= tol) {
        wass_floor = in.n;
        found_floor = true;
        break;
      }
    }
    if (!found_floor) break;  // schedule truncated at j-1
    bool placed = false;
    for (std::size_t ni = 0; ni < table.n_values.size(); ++ni) {
      const std::size_t n = table.n_values[ni];
      if (n <= prev || n < wass_floor) continue;
      bool ok = true;
      for (std::size_t k = ni; k < table.n_values.size(); ++k) {
        if (table.error[ji][k] > tol) {
          ok = false;
          break;
        }
      }
      if (ok) {
        n_j.push_back(n);
        prev = n;
        placed = true;
        break;
      }
    }
    if (!placed) break;
  }

  std::vector<ScheduleEntry> entries;
  entries.reserve(t_prime.size());
  for (const auto& in : t_prime) {
    ScheduleEntry e;
    e.n = in.n;
    e.w1 = in.w1;
    e.bias_bound = in.bias_bound;
    e.t_prime = in.t_prime;
    int j_of_n = 0;
    for (std::size_t ji = 0; ji < n_j.size(); ++ji) {
      if (n_j[ji] <= in.n) j_of_n = table.j_values[ji];
    }
    if (j_of_n > 0) {
      e.j = j_of_n;
      e.t = 1.0 / j_of_n;
      e.covered = true;
    }
    entries.push_back(e);
  }
  return BandwidthSchedule(std::move(entries), safety, exponent);
}

}  // namespace dgff
