#include "univar/valuemap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "univar/errors.hpp"

namespace univar {

namespace {

double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(sq_norm(v));
  if (n > 0.0)
    for (double& x : v) x /= n;
}

std::vector<double> mat_vec(const std::vector<std::vector<double>>& m,
                            const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

void orthogonalize(std::vector<double>& v, const std::vector<double>& against) {
  double proj = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * against[i];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * against[i];
}

// Sign convention: the largest-magnitude loading is positive.
void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

std::vector<std::pair<double, double>> PcaProjector::fit_transform(
    const std::vector<std::vector<double>>& points, std::uint64_t seed) {
  if (points.size() < 3)
    throw DegenerateData("built-in projector needs >= 3 points");
  const std::size_t n = points.size();
  const std::size_t d = points[0].size();
  for (const auto& p : points)
    if (p.size() != d) throw DimensionError("ragged projection input");

  std::vector<double> mean(d, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) mean[j] += p[j];
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> centered(n, std::vector<double>(d));
  double total_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      centered[i][j] = points[i][j] - mean[j];
    total_var += sq_norm(centered[i]);
  }
  if (total_var < 1e-18)
    throw DegenerateData("all points coincide; nothing to project");

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : centered)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a][b] += row[a] * row[b];
  for (auto& row : cov)
    for (double& v : row) v /= static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> axes;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v(d);
    for (double& x : v) x = dist(rng);
    for (const auto& prev : axes) orthogonalize(v, prev);
    normalize(v);
    for (int iter = 0; iter < 500; ++iter) {
      std::vector<double> next = mat_vec(cov, v);
      for (const auto& prev : axes) orthogonalize(next, prev);
      const double n2 = sq_norm(next);
      if (n2 < 1e-30) break;  // no variance left past the previous axes
      normalize(next);
      double delta = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        delta = std::max(delta, std::abs(next[j] - v[j]));
      v = std::move(next);
      if (delta < 1e-13) break;
    }
    fix_sign(v);
    axes.push_back(std::move(v));
  }

  std::vector<std::pair<double, double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x += centered[i][j] * axes[0][j];
      y += centered[i][j] * axes[1][j];
    }
    out[i] = {x, y};
  }
  return out;
}

CentroidTable compute_centroids(const std::vector<EvalItem>& items) {
  if (items.empty()) throw EmptyGroup("no items to compute centroids from");
  CentroidTable table;
  std::map<ValueID, int> counts;
  for (const auto& item : items) {
    auto& c = table.centroids[item.label];
    if (c.empty()) c.assign(item.embedding.values.size(), 0.0);
    if (c.size() != item.embedding.values.size())
      throw DimensionError("mixed embedding dimensions for " +
                           item.label.str());
    for (std::size_t j = 0; j < c.size(); ++j)
      c[j] += item.embedding.values[j];
    ++counts[item.label];
  }
  for (auto& [id, c] : table.centroids)
    for (double& v : c) v /= static_cast<double>(counts[id]);
  return table;
}

double value_distance(const CentroidTable& table, const ValueID& a,
                      const ValueID& b) {
  auto ita = table.centroids.find(a);
  auto itb = table.centroids.find(b);
  if (ita == table.centroids.end())
    throw UnknownValueID("no centroid for " + a.str());
  if (itb == table.centroids.end())
    throw UnknownValueID("no centroid for " + b.str());
  double s = 0.0;
  for (std::size_t j = 0; j < ita->second.size(); ++j) {
    const double diff = ita->second[j] - itb->second[j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<ProjectedPoint> project_2d(const std::vector<ProjectionInput>& inputs,
                                       Projector2D& projector,
                                       std::uint64_t seed) {
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (const auto& in : inputs) rows.push_back(in.embedding);
  const auto coords = projector.fit_transform(rows, seed);
  std::vector<ProjectedPoint> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(coords[i].first) || !std::isfinite(coords[i].second))
      throw DegenerateData("projector produced non-finite coordinates");
    out.push_back(
        {inputs[i].value_id, coords[i].first, coords[i].second, inputs[i].qa_id});
  }
  return out;
}

std::vector<TrajectoryPoint> transfer_trajectory(
    const std::vector<std::vector<EvalItem>>& checkpoint_sets,
    const ValueID& subject, const ValueID& source_ref,
    const ValueID& target_ref, const std::vector<EvalItem>& reference_bank) {
  const CentroidTable refs = compute_centroids(reference_bank);
  if (!refs.centroids.count(source_ref))
    throw UnknownValueID("reference bank lacks " + source_ref.str());
  if (!refs.centroids.count(target_ref))
    throw UnknownValueID("reference bank lacks " + target_ref.str());

  std::vector<TrajectoryPoint> trajectory;
  int step = 0;
  for (const auto& set : checkpoint_sets) {
    std::vector<EvalItem> subject_items;
    for (const auto& item : set)
      if (item.label == subject) subject_items.push_back(item);
    if (subject_items.empty())
      throw UnknownValueID("checkpoint set " + std::to_string(step) +
                           " has no items for subject " + subject.str());
    CentroidTable moving = compute_centroids(subject_items);
    CentroidTable merged = refs;
    merged.centroids[subject] = moving.centroids.at(subject);
    trajectory.push_back({step, value_distance(merged, subject, source_ref),
                          value_distance(merged, subject, target_ref)});
    ++step;
  }
  return trajectory;
}

std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const std::pair<double, double>& o,
                  const std::pair<double, double>& a,
                  const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

void export_map(const std::vector<ProjectedPoint>& points,
                const std::string& projector_name, std::uint64_t seed, int dim,
                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out << "qa_id,llm,lang,x,y\n";
  std::map<ValueID, int> counts;
  std::map<ValueID, std::vector<std::pair<double, double>>> groups;
  for (const auto& p : points) {
    out << p.qa_id << "," << p.value_id.llm_name << "," << p.value_id.language
        << "," << p.x << "," << p.y << "\n";
    ++counts[p.value_id];
    groups[p.value_id].push_back({p.x, p.y});
  }
  if (!out) throw IOError("write failed: " + path);

  nlohmann::json meta;
  meta["projector"] = projector_name;
  meta["seed"] = seed;
  meta["d"] = dim;
  nlohmann::json count_obj = nlohmann::json::object();
  nlohmann::json hull_obj = nlohmann::json::object();
  for (const auto& [id, n] : counts) {
    count_obj[id.str()] = n;
    nlohmann::json hull = nlohmann::json::array();
    for (const auto& [x, y] : convex_hull(groups[id]))
      hull.push_back({x, y});
    hull_obj[id.str()] = hull;
  }
  meta["counts"] = count_obj;
  meta["hulls"] = hull_obj;
  std::ofstream meta_out(path + ".meta.json", std::ios::binary);
  if (!meta_out) throw IOError("cannot open " + path + ".meta.json");
  meta_out << meta.dump(2) << "\n";
}

}  // namespace univar
