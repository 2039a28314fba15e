#ifndef UNIVAR_VALUEMAP_HPP
#define UNIVAR_VALUEMAP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "univar/evalharness.hpp"
#include "univar/types.hpp"

namespace univar {

// ValueID -> arithmetic mean of its member embeddings, in the full embedding
// space (never re-normalized and never projected).
struct CentroidTable {
  std::map<ValueID, std::vector<double>> centroids;
};

struct ProjectedPoint {
  ValueID value_id;
  double x = 0.0;
  double y = 0.0;
  std::string qa_id;
};

// 2D projector interface; UMAP or anything else attaches here.
class Projector2D {
 public:
  virtual ~Projector2D() = default;
  virtual std::string name() const = 0;
  // points is N rows of dimension d; returns N rows of (x, y).
  virtual std::vector<std::pair<double, double>> fit_transform(
      const std::vector<std::vector<double>>& points, std::uint64_t seed) = 0;
};

// Built-in projector: top-2 principal directions of the centered data, with a
// deterministic sign convention (largest-magnitude loading positive). Throws
// DegenerateData when all points coincide.
class PcaProjector : public Projector2D {
 public:
  std::string name() const override { return "pca"; }
  std::vector<std::pair<double, double>> fit_transform(
      const std::vector<std::vector<double>>& points, std::uint64_t seed) override;
};

CentroidTable compute_centroids(const std::vector<EvalItem>& items);

// Euclidean distance between two centroids. Throws UnknownValueID.
double value_distance(const CentroidTable& table, const ValueID& a,
                      const ValueID& b);

struct ProjectionInput {
  std::string qa_id;
  ValueID value_id;
  std::vector<double> embedding;
};

std::vector<ProjectedPoint> project_2d(const std::vector<ProjectionInput>& inputs,
                                       Projector2D& projector,
                                       std::uint64_t seed);

struct TrajectoryPoint {
  int step = 0;
  double d_source = 0.0;
  double d_target = 0.0;
};

// Distance of the subject's centroid (recomputed per checkpoint set) to fixed
// source/target reference centroids. Reference centroids come from
// reference_bank, never from the moving subject.
std::vector<TrajectoryPoint> transfer_trajectory(
    const std::vector<std::vector<EvalItem>>& checkpoint_sets,
    const ValueID& subject, const ValueID& source_ref,
    const ValueID& target_ref, const std::vector<EvalItem>& reference_bank);

// CSV "qa_id,llm,lang,x,y" plus a JSON sidecar at path + ".meta.json" with
// projector name, seed, dimension, per-value counts, and per-group convex
// hulls.
void export_map(const std::vector<ProjectedPoint>& points,
                const std::string& projector_name, std::uint64_t seed, int dim,
                const std::string& path);

// Andrew monotone-chain convex hull in 2D, counter-clockwise.
std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> points);

}  // namespace univar

#endif
