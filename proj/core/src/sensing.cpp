#include "zson/sensing.hpp"

#include <cmath>
#include <limits>

#include "zson/geometry.hpp"

namespace zson {

bool line_of_sight(const GridWorld& w, int r0, int c0, int r1, int c1) {
  int dc = c1 - c0, dr = r1 - r0;
  int sc = (dc > 0) - (dc < 0), sr = (dr > 0) - (dr < 0);
  long ac = std::abs(long(dc)), ar = std::abs(long(dr));
  // Crossing "times" compared as exact fractions: the k-th vertical boundary
  // sits at parameter (2k-1)/(2*ac) of the segment, so cross-multiplying the
  // odd numerators avoids floating point entirely.
  long nc = 1, nr = 1;
  int c = c0, r = r0;
  constexpr long kNever = std::numeric_limits<long>::max();
  while (c != c1 || r != r1) {
    long tc = ac == 0 ? kNever : nc * ar;
    long tr = ar == 0 ? kNever : nr * ac;
    if (tc < tr) {
      c += sc;
      nc += 2;
    } else if (tr < tc) {
      r += sr;
      nr += 2;
    } else {  // exact corner: step diagonally, side cells are only grazed
      c += sc;
      r += sr;
      nc += 2;
      nr += 2;
    }
    if (c == c1 && r == r1) break;
    if (w.blocked(r, c)) return false;
  }
  return true;
}

double ray_obstacle_distance(const GridWorld& w, Vec2 origin, double angle_rad,
                             double max_range) {
  const double cs = w.cell_size;
  double x = origin.x / cs, y = origin.y / cs;  // cell units
  int c = int(std::floor(x)), r = int(std::floor(y));
  double dx = std::cos(angle_rad), dy = std::sin(angle_rad);
  int sc = (dx > 0.0) - (dx < 0.0), sr = (dy > 0.0) - (dy < 0.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double tmax_c = kInf, tdel_c = kInf, tmax_r = kInf, tdel_r = kInf;
  if (sc != 0) {
    tmax_c = ((sc > 0 ? c + 1 : c) - x) / dx;
    tdel_c = sc / dx;
  }
  if (sr != 0) {
    tmax_r = ((sr > 0 ? r + 1 : r) - y) / dy;
    tdel_r = sr / dy;
  }
  const double max_t = max_range / cs;
  while (true) {
    double t;
    if (tmax_c < tmax_r) {
      t = tmax_c;
      tmax_c += tdel_c;
      c += sc;
    } else {
      t = tmax_r;
      tmax_r += tdel_r;
      r += sr;
    }
    if (t >= max_t) return max_range;
    if (w.blocked(r, c)) return t * cs;
  }
}

namespace {

// in range, inside the HFOV cone, unoccluded; `rel_out` receives the signed
// relative bearing for sector binning
bool object_visible(const GridWorld& w, const AgentPose& pose,
                    const KinematicsConfig& cfg, const ObjectInstance& obj,
                    double* rel_out) {
  Vec2 d = obj.position - pose.position;
  if (norm(d) > cfg.view_range) return false;
  double bearing = rad2deg(std::atan2(d.y, d.x));
  double rel = rel_bearing_deg(bearing, double(pose.heading));
  if (std::abs(rel) > cfg.hfov / 2.0) return false;
  if (!line_of_sight(w, w.cell_row(pose.position.y), w.cell_col(pose.position.x),
                     w.cell_row(obj.position.y), w.cell_col(obj.position.x)))
    return false;
  if (rel_out) *rel_out = rel;
  return true;
}

}  // namespace

ConceptBag visible_concept_bag(const GridWorld& w, const AgentPose& pose,
                               const KinematicsConfig& cfg) {
  ConceptBag bag;
  for (const auto& obj : w.objects)
    if (object_visible(w, pose, cfg, obj, nullptr)) bag.add(obj.object_concept);
  int ri = w.room_index_at(pose.position);
  if (ri >= 0) bag.add(w.rooms[size_t(ri)].room_concept);
  return bag;
}

int observation_dim(const ConceptVocabulary& vocab, const KinematicsConfig& cfg) {
  return cfg.n_view_bins * (1 + vocab.n_objects()) + vocab.n_rooms();
}

ObservationFeature observe(const GridWorld& w, const AgentPose& pose,
                           const KinematicsConfig& cfg,
                           const ConceptVocabulary& vocab) {
  const int nb = cfg.n_view_bins;
  const int nobj = vocab.n_objects();
  ObservationFeature f;
  f.values.assign(size_t(observation_dim(vocab, cfg)), 0.0f);

  const double bin_width = double(cfg.hfov) / nb;
  const double half_fov = cfg.hfov / 2.0;
  for (int b = 0; b < nb; ++b) {
    double rel = -half_fov + (b + 0.5) * bin_width;
    double ang = deg2rad(pose.heading + rel);
    double d = ray_obstacle_distance(w, pose.position, ang, cfg.view_range);
    f.values[size_t(b) * (1 + nobj)] = float(d / cfg.view_range);
  }

  for (const auto& obj : w.objects) {
    double rel = 0.0;
    if (!object_visible(w, pose, cfg, obj, &rel)) continue;
    int oi = vocab.object_index(obj.object_concept);
    if (oi < 0) continue;  // off-vocabulary objects carry no feature
    int b = int(std::floor((rel + half_fov) / bin_width));
    b = std::max(0, std::min(nb - 1, b));
    f.values[size_t(b) * (1 + nobj) + 1 + size_t(oi)] = 1.0f;
  }

  int ri = w.room_index_at(pose.position);
  if (ri >= 0) {
    int rv = vocab.room_index(w.rooms[size_t(ri)].room_concept);
    if (rv >= 0) f.values[size_t(nb) * (1 + nobj) + size_t(rv)] = 1.0f;
  }
  return f;
}

}  // namespace zson
