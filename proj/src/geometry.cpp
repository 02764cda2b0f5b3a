#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "util.hpp"

namespace mcnav::geom {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k.x));
    h = hash_combine(h, static_cast<std::uint64_t>(k.y));
    h = hash_combine(h, static_cast<std::uint64_t>(k.z));
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_of(const Point3& p, double voxel) {
  return VoxelKey{static_cast<std::int64_t>(std::floor(p.x / voxel)),
                  static_cast<std::int64_t>(std::floor(p.y / voxel)),
                  static_cast<std::int64_t>(std::floor(p.z / voxel))};
}

double sq(double v) { return v * v; }

double dist2(const Point3& a, const Point3& b) {
  return sq(a.x - b.x) + sq(a.y - b.y) + sq(a.z - b.z);
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("voxel_downsample: voxel must be > 0");

  struct Acc {
    double sx = 0, sy = 0, sz = 0;
    std::size_t n = 0;
    std::size_t order = 0;
  };
  std::unordered_map<VoxelKey, Acc, VoxelKeyHash> acc;
  acc.reserve(cloud.points.size());
  std::size_t next_order = 0;
  for (const Point3& p : cloud.points) {
    Acc& a = acc[voxel_of(p, voxel)];
    if (a.n == 0) a.order = next_order++;
    a.sx += p.x;
    a.sy += p.y;
    a.sz += p.z;
    a.n += 1;
  }

  PointCloud out;
  out.points.resize(acc.size());
  for (const auto& [key, a] : acc) {
    out.points[a.order] = Point3{a.sx / static_cast<double>(a.n),
                                 a.sy / static_cast<double>(a.n),
                                 a.sz / static_cast<double>(a.n)};
  }
  return out;
}

PointCloud dbscan_filter(const PointCloud& cloud, double eps, int min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan_filter: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan_filter: min_pts must be >= 1");
  const std::size_t n = cloud.points.size();
  if (n == 0) return cloud;

  // Bucket points on an eps-sized grid so neighbor queries only touch the
  // 3x3x3 surrounding buckets. Distances are still checked exactly.
  std::unordered_map<VoxelKey, std::vector<std::uint32_t>, VoxelKeyHash> buckets;
  buckets.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    buckets[voxel_of(cloud.points[i], eps)].push_back(static_cast<std::uint32_t>(i));

  const double eps2 = eps * eps;
  auto neighbors_of = [&](std::size_t i, std::vector<std::uint32_t>& out) {
    out.clear();
    const VoxelKey c = voxel_of(cloud.points[i], eps);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find(VoxelKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == buckets.end()) continue;
          for (std::uint32_t j : it->second)
            if (dist2(cloud.points[i], cloud.points[j]) <= eps2) out.push_back(j);
        }
  };

  std::vector<bool> core(n, false);
  std::vector<std::uint32_t> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    neighbors_of(i, scratch);
    core[i] = scratch.size() >= static_cast<std::size_t>(min_pts);
  }

  // Retained = every core point plus any point with a core neighbor.
  std::vector<bool> keep(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      keep[i] = true;
      continue;
    }
    neighbors_of(i, scratch);
    for (std::uint32_t j : scratch)
      if (core[j]) {
        keep[i] = true;
        break;
      }
  }

  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.points.push_back(cloud.points[i]);
  if (out.points.empty()) return cloud;  // all-noise fallback
  return out;
}

double cloud_iou(const PointCloud& a, const PointCloud& b, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("cloud_iou: voxel must be > 0");
  std::unordered_set<VoxelKey, VoxelKeyHash> va, vb;
  va.reserve(a.points.size());
  vb.reserve(b.points.size());
  for (const Point3& p : a.points) va.insert(voxel_of(p, voxel));
  for (const Point3& p : b.points) vb.insert(voxel_of(p, voxel));
  if (va.empty() && vb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const VoxelKey& k : va) inter += vb.count(k);
  const std::size_t uni = va.size() + vb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Principal {
  double ax = 1.0, ay = 0.0;  // unit principal axis
  double extent = 0.0;        // spread of cell centers along it, meters
};

Principal principal_axis(const std::vector<CellIndex>& cells, double res) {
  Principal out;
  if (cells.size() < 2) return out;
  double mx = 0, my = 0;
  for (const CellIndex& c : cells) {
    mx += (c.x + 0.5) * res;
    my += (c.y + 0.5) * res;
  }
  mx /= static_cast<double>(cells.size());
  my /= static_cast<double>(cells.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (const CellIndex& c : cells) {
    const double dx = (c.x + 0.5) * res - mx;
    const double dy = (c.y + 0.5) * res - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  // Leading eigenvector of the 2x2 covariance.
  if (std::abs(sxy) < 1e-12) {
    if (syy > sxx) {
      out.ax = 0.0;
      out.ay = 1.0;
    }
  } else {
    const double lam = 0.5 * (sxx + syy + std::sqrt(sq(sxx - syy) + 4.0 * sxy * sxy));
    double vx = sxy, vy = lam - sxx;
    const double norm = std::sqrt(vx * vx + vy * vy);
    out.ax = vx / norm;
    out.ay = vy / norm;
  }
  double lo = 0, hi = 0;
  bool first = true;
  for (const CellIndex& c : cells) {
    const double t = ((c.x + 0.5) * res) * out.ax + ((c.y + 0.5) * res) * out.ay;
    if (first) {
      lo = hi = t;
      first = false;
    } else {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  out.extent = hi - lo;
  return out;
}

CellCluster finish_cluster(std::vector<CellIndex> cells, double res, const Principal& pr) {
  CellCluster cl;
  cl.cells = std::move(cells);
  double mx = 0, my = 0;
  for (const CellIndex& c : cl.cells) {
    mx += (c.x + 0.5) * res;
    my += (c.y + 0.5) * res;
  }
  cl.centroid_x = mx / static_cast<double>(cl.cells.size());
  cl.centroid_y = my / static_cast<double>(cl.cells.size());
  cl.principal_extent = pr.extent;
  return cl;
}

void emit_split(std::vector<CellIndex> cells, double res, double split_extent,
                std::vector<CellCluster>& out) {
  const Principal pr = principal_axis(cells, res);
  if (split_extent <= 0.0 || pr.extent <= split_extent || cells.size() < 2) {
    out.push_back(finish_cluster(std::move(cells), res, pr));
    return;
  }
  std::sort(cells.begin(), cells.end(), [&](const CellIndex& a, const CellIndex& b) {
    const double ta = ((a.x + 0.5) * pr.ax + (a.y + 0.5) * pr.ay);
    const double tb = ((b.x + 0.5) * pr.ax + (b.y + 0.5) * pr.ay);
    if (ta != tb) return ta < tb;
    return a < b;
  });
  const std::size_t half = cells.size() / 2;
  std::vector<CellIndex> lo(cells.begin(), cells.begin() + half);
  std::vector<CellIndex> hi(cells.begin() + half, cells.end());
  emit_split(std::move(lo), res, split_extent, out);
  emit_split(std::move(hi), res, split_extent, out);
}

}  // namespace

std::vector<CellCluster> cluster_cells(const std::vector<CellIndex>& cells, double resolution,
                                       double split_extent) {
  if (!(resolution > 0.0)) throw std::invalid_argument("cluster_cells: resolution must be > 0");
  std::set<CellIndex> pending(cells.begin(), cells.end());
  std::vector<CellCluster> out;
  while (!pending.empty()) {
    // BFS from the smallest remaining cell keeps component order deterministic.
    std::vector<CellIndex> comp;
    std::queue<CellIndex> q;
    q.push(*pending.begin());
    pending.erase(pending.begin());
    while (!q.empty()) {
      CellIndex c = q.front();
      q.pop();
      comp.push_back(c);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          auto it = pending.find(CellIndex{c.x + dx, c.y + dy});
          if (it != pending.end()) {
            q.push(*it);
            pending.erase(it);
          }
        }
    }
    std::sort(comp.begin(), comp.end());
    emit_split(std::move(comp), resolution, split_extent, out);
  }
  return out;
}

}  // namespace mcnav::geom
