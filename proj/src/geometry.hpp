#pragma once

#include <cstdint>
#include <vector>

namespace mcnav::geom {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PointCloud {
  std::vector<Point3> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

struct CellIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// A planar cluster of grid cells with its metric centroid and the spread
// along its first principal axis.
struct CellCluster {
  std::vector<CellIndex> cells;
  double centroid_x = 0.0;  // meters, cell-center convention
  double centroid_y = 0.0;
  double principal_extent = 0.0;  // meters
};

// Keeps at most one point per occupied voxel (the centroid of the voxel's
// input points). Output order follows the first appearance of each voxel in
// the input, so the operation is deterministic and idempotent.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

// Density-based outlier removal: returns the union of all DBSCAN clusters in
// input order. A point is kept iff it is a core point or within eps of one
// (min_pts counts the point itself). If every point would be discarded the
// input is returned unchanged so small detections are never annihilated.
PointCloud dbscan_filter(const PointCloud& cloud, double eps, int min_pts);

// Intersection-over-Union of the voxelized point sets; 0 when both are empty.
double cloud_iou(const PointCloud& a, const PointCloud& b, double voxel);

// Groups cells into 8-connected components; components longer than
// split_extent along their first principal axis are bisected at the projected
// median until every emitted cluster fits.
std::vector<CellCluster> cluster_cells(const std::vector<CellIndex>& cells,
                                       double resolution,
                                       double split_extent);

}  // namespace mcnav::geom
