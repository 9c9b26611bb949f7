// Point-cloud container, voxel downsampling and the voxel-hash map used as
// odometry local map and as the frozen localization prior map.
#pragma once

#include <mlmap/geom.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mlmap {

/// Points with intensity, per-point sweep time offset and sensor id.
/// All arrays have equal length; a scan has one sensor id throughout, a map
/// mixes them.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensity;
  std::vector<float> time_offset;  // seconds within the sweep
  std::vector<uint8_t> sensor_id;
  double stamp = 0.0;  // sweep reference time (sweep end), seconds

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void reserve(size_t n) {
    points.reserve(n);
    intensity.reserve(n);
    time_offset.reserve(n);
    sensor_id.reserve(n);
  }

  void push_back(const Vec3& p, float inten = 0.0f, float toff = 0.0f, uint8_t sid = 0) {
    points.push_back(p);
    intensity.push_back(inten);
    time_offset.push_back(toff);
    sensor_id.push_back(sid);
  }

  void append(const PointCloud& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    intensity.insert(intensity.end(), other.intensity.begin(), other.intensity.end());
    time_offset.insert(time_offset.end(), other.time_offset.begin(), other.time_offset.end());
    sensor_id.insert(sensor_id.end(), other.sensor_id.begin(), other.sensor_id.end());
  }

  bool consistent() const {
    const size_t n = points.size();
    return intensity.size() == n && time_offset.size() == n && sensor_id.size() == n;
  }
};

/// Integer voxel coordinates from floor division (floors toward -inf so keys
/// are seam-free across the origin).
struct VoxelKey {
  int32_t x = 0, y = 0, z = 0;
  bool operator==(const VoxelKey&) const = default;
};

inline VoxelKey voxel_of(const Vec3& p, double voxel_size) {
  return {static_cast<int32_t>(std::floor(p.x() / voxel_size)),
          static_cast<int32_t>(std::floor(p.y() / voxel_size)),
          static_cast<int32_t>(std::floor(p.z() / voxel_size))};
}

struct VoxelKeyHash {
  size_t operator()(const VoxelKey& k) const {
    return static_cast<size_t>(k.x) * 73856093u ^ static_cast<size_t>(k.y) * 19349669u ^
           static_cast<size_t>(k.z) * 83492791u;
  }
};

/// Keeps at most one point per occupied voxel, first point in input order
/// wins; attributes travel with the retained point.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) throw std::invalid_argument("voxel_downsample: voxel_size must be > 0");
  PointCloud out;
  out.stamp = cloud.stamp;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  seen.reserve(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (seen.insert(voxel_of(cloud.points[i], voxel_size)).second) {
      out.push_back(cloud.points[i], cloud.intensity[i], cloud.time_offset[i], cloud.sensor_id[i]);
    }
  }
  return out;
}

/// Sparse voxel-indexed point store. Many concurrent readers or one writer.
class VoxelHashMap {
 public:
  explicit VoxelHashMap(double voxel_size = 1.0, int max_points_per_voxel = 20)
      : voxel_size_(voxel_size), max_points_per_voxel_(max_points_per_voxel) {
    if (voxel_size <= 0.0 || max_points_per_voxel <= 0)
      throw std::invalid_argument("VoxelHashMap: non-positive parameters");
  }

  double voxel_size() const { return voxel_size_; }
  int max_points_per_voxel() const { return max_points_per_voxel_; }
  bool empty() const { return voxels_.empty(); }
  size_t num_voxels() const { return voxels_.size(); }

  size_t num_points() const {
    size_t n = 0;
    for (const auto& [k, v] : voxels_) n += v.size();
    return n;
  }

  void clear() { voxels_.clear(); }

  void insert(const Vec3& p) {
    auto& bucket = voxels_[voxel_of(p, voxel_size_)];
    if (bucket.size() < static_cast<size_t>(max_points_per_voxel_)) bucket.push_back(p);
  }

  void insert(const std::vector<Vec3>& points) {
    for (const auto& p : points) insert(p);
  }

  void insert(const PointCloud& cloud) { insert(cloud.points); }

  /// Closest stored point among the 27 voxels around the query, if within
  /// max_dist. Exact whenever max_dist <= voxel_size, approximate beyond.
  std::optional<std::pair<Vec3, double>> nearest_neighbor(const Vec3& query,
                                                          double max_dist) const {
    const VoxelKey c = voxel_of(query, voxel_size_);
    double best_d2 = max_dist * max_dist;
    const Vec3* best = nullptr;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = voxels_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == voxels_.end()) continue;
          for (const auto& p : it->second) {
            const double d2 = (p - query).squaredNorm();
            if (d2 <= best_d2) {
              best_d2 = d2;
              best = &p;
            }
          }
        }
    if (!best) return std::nullopt;
    return std::make_pair(*best, std::sqrt(best_d2));
  }

  /// Drop voxels whose first stored point is farther than radius from center.
  void crop(const Vec3& center, double radius) {
    const double r2 = radius * radius;
    for (auto it = voxels_.begin(); it != voxels_.end();) {
      if (!it->second.empty() && (it->second.front() - center).squaredNorm() > r2) {
        it = voxels_.erase(it);
      } else {
        ++it;
      }
    }
  }

  template <typename Fn>
  void for_each_point(Fn&& fn) const {
    for (const auto& [k, v] : voxels_)
      for (const auto& p : v) fn(p);
  }

  std::vector<Vec3> all_points() const {
    std::vector<Vec3> out;
    out.reserve(num_points());
    for_each_point([&](const Vec3& p) { out.push_back(p); });
    return out;
  }

 private:
  double voxel_size_;
  int max_points_per_voxel_;
  std::unordered_map<VoxelKey, std::vector<Vec3>, VoxelKeyHash> voxels_;
};

/// Incremental first-wins voxel accumulator for building output maps with
/// attributes preserved.
class MapAccumulator {
 public:
  explicit MapAccumulator(double voxel_size) : voxel_size_(voxel_size) {
    if (voxel_size <= 0.0) throw std::invalid_argument("MapAccumulator: voxel_size must be > 0");
  }

  void add(const PointCloud& cloud, const Pose& pose) {
    for (size_t i = 0; i < cloud.size(); ++i) {
      const Vec3 p = transform_point(pose, cloud.points[i]);
      if (seen_.insert(voxel_of(p, voxel_size_)).second) {
        map_.push_back(p, cloud.intensity[i], 0.0f, cloud.sensor_id[i]);
      }
    }
  }

  const PointCloud& map() const { return map_; }
  PointCloud take() { return std::move(map_); }

 private:
  double voxel_size_;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen_;
  PointCloud map_;
};

/// Rigidly transform a whole cloud.
inline PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = transform_point(pose, p);
  return out;
}

}  // namespace mlmap
