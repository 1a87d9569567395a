#include "cinemagraph/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace cinemagraph {
namespace {

// Floor for zero-degree tokens so D^(-1/2) stays finite.
constexpr double kMinDegree = 1e-12;
constexpr double kSymmetryTolerance = 1e-6;

Eigen::MatrixXd map_as_matrix(const AttentionStack& stack, std::size_t index) {
  const int n = stack.tokens();
  Eigen::MatrixXd m(n, n);
  const auto& src = stack.maps[index];
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = src[static_cast<std::size_t>(r) * n + c];
  }
  return m;
}

AffinityMatrix symmetrized(Eigen::MatrixXd m) {
  AffinityMatrix a;
  a.entries = 0.5 * (m + m.transpose());
  return a;
}

void require_cluster_count(int k, int tokens) {
  if (k < 1) throw InvalidArgument("cluster count must be >= 1");
  if (k > tokens) {
    throw InvalidArgument("cluster count " + std::to_string(k) + " exceeds token count " +
                          std::to_string(tokens));
  }
}

// Assigns every row to its nearest centroid; returns the total squared
// distance.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
              std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int best = nearest_centroid(centroids, points.row(i));
    labels[static_cast<std::size_t>(i)] = best;
    inertia += (points.row(i) - centroids.row(best)).squaredNorm();
  }
  return inertia;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = (points.row(i) - centroids.row(0)).squaredNorm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : dist) total += d;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= dist[static_cast<std::size_t>(i)];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every point coincides with a chosen center.
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = dist[static_cast<std::size_t>(i)];
      d = std::min(d, (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, int max_iterations) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(centroids.rows());
  KMeansResult r;
  r.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));

  for (int iter = 0; iter < max_iterations; ++iter) {
    assign(points, centroids, next);
    if (next == r.labels) break;
    r.labels = next;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = r.labels[static_cast<std::size_t>(i)];
      sums.row(l) += points.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: steal the point farthest from its centroid among
      // clusters that can spare one.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int l = r.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(l)] < 2) continue;
        const double d = (points.row(i) - centroids.row(l)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) continue;
      --counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(far)])];
      ++counts[static_cast<std::size_t>(c)];
      r.labels[static_cast<std::size_t>(far)] = c;
      centroids.row(c) = points.row(far);
    }
  }
  r.inertia = assign(points, centroids, r.labels);
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

void AttentionStack::validate() const {
  if (grid_h <= 0 || grid_w <= 0) throw InvalidArgument("attention grid must be positive");
  if (timestep_ids.size() != maps.size()) {
    throw InvalidArgument("attention stack has mismatched timestep and map counts");
  }
  const std::size_t side = static_cast<std::size_t>(tokens());
  for (const auto& m : maps) {
    if (m.size() != side * side) {
      throw InvalidArgument("attention map is not " + std::to_string(side) + "x" +
                            std::to_string(side));
    }
    for (float v : m) {
      if (!std::isfinite(v) || v < 0.0f) {
        throw InvalidArgument("attention map entries must be finite and >= 0");
      }
    }
  }
}

void AffinityMatrix::validate() const {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InvalidArgument("affinity must be a nonempty square matrix");
  }
  if (!entries.allFinite() || (entries.array() < 0.0).any()) {
    throw InvalidArgument("affinity entries must be finite and >= 0");
  }
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw InvalidArgument("affinity is not symmetric");
  }
}

AffinityMatrix average_attention(const AttentionStack& stack, std::uint32_t from_step) {
  stack.validate();
  const int n = stack.tokens();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  int used = 0;
  for (std::size_t t = 0; t < stack.maps.size(); ++t) {
    if (stack.timestep_ids[t] < from_step) continue;
    sum += map_as_matrix(stack, t);
    ++used;
  }
  if (used == 0) {
    throw InvalidArgument("no attention maps at or after step " + std::to_string(from_step));
  }
  return symmetrized(sum / used);
}

AffinityMatrix single_step_affinity(const AttentionStack& stack, std::uint32_t step) {
  stack.validate();
  const auto it = std::find(stack.timestep_ids.begin(), stack.timestep_ids.end(), step);
  if (it == stack.timestep_ids.end()) {
    throw InvalidArgument("attention stack has no map for step " + std::to_string(step));
  }
  return symmetrized(map_as_matrix(stack, static_cast<std::size_t>(it - stack.timestep_ids.begin())));
}

AffinityMatrix cosine_affinity(const AffinityMatrix& affinity) {
  affinity.validate();
  Eigen::MatrixXd rows = affinity.entries;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  AffinityMatrix out;
  out.entries = (rows * rows.transpose()).cwiseMax(0.0);
  out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
  return out;
}

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (point - centroids.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
  require_cluster_count(k, static_cast<int>(points.rows()));
  if (!points.allFinite()) throw NumericalError("kmeans: non-finite input");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto result = lloyd(points, kmeans_plus_plus(points, k, rng), options.max_iterations);
    if (result.inertia < best.inertia) best = std::move(result);
  }
  return best;
}

ClusterLabels spectral_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed) {
  affinity.validate();
  const int n = affinity.size();
  require_cluster_count(k, n);

  const Eigen::VectorXd degree = affinity.entries.rowwise().sum().cwiseMax(kMinDegree);
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd laplacian = -(inv_sqrt.asDiagonal() * affinity.entries * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  laplacian = 0.5 * (laplacian + laplacian.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_cluster: eigendecomposition did not converge");
  }
  // Eigenvalues come back ascending.
  Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return {kmeans(embedding, k, seed).labels, k};
}

ClusterLabels kmeans_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed) {
  affinity.validate();
  require_cluster_count(k, affinity.size());
  return {kmeans(affinity.entries, k, seed).labels, k};
}

std::vector<BinaryMask> labels_to_masks(const ClusterLabels& labels, int grid_h, int grid_w,
                                        int out_h, int out_w) {
  if (grid_h <= 0 || grid_w <= 0 || out_h <= 0 || out_w <= 0) {
    throw InvalidArgument("labels_to_masks: sizes must be positive");
  }
  if (labels.labels.size() != static_cast<std::size_t>(grid_h) * grid_w) {
    throw DimensionMismatch("labels_to_masks: " + std::to_string(labels.labels.size()) +
                            " labels for a " + std::to_string(grid_h) + "x" +
                            std::to_string(grid_w) + " grid");
  }
  for (int l : labels.labels) {
    if (l < 0 || l >= labels.k) throw InvalidArgument("labels_to_masks: label outside [0, k)");
  }

  std::vector<int> token_of(static_cast<std::size_t>(out_h) * out_w);
  for (int y = 0; y < out_h; ++y) {
    const int gy = static_cast<int>(static_cast<long long>(y) * grid_h / out_h);
    for (int x = 0; x < out_w; ++x) {
      const int gx = static_cast<int>(static_cast<long long>(x) * grid_w / out_w);
      token_of[static_cast<std::size_t>(y) * out_w + x] = gy * grid_w + gx;
    }
  }

  std::vector<BinaryMask> masks;
  for (int label = 0; label < labels.k; ++label) {
    if (std::find(labels.labels.begin(), labels.labels.end(), label) == labels.labels.end()) {
      continue;
    }
    std::vector<std::uint8_t> data(token_of.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = labels.labels[static_cast<std::size_t>(token_of[i])] == label;
    }
    masks.emplace_back(out_w, out_h, std::move(data));
  }
  return masks;
}

double overlap_ratio(const BinaryMask& cluster, const BinaryMask& guide) {
  require_same_shape(cluster, guide, "overlap_ratio");
  std::size_t size = 0;
  std::size_t inside = 0;
  const auto c = cluster.data();
  const auto g = guide.data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    size += c[i];
    inside += c[i] & g[i];
  }
  return size == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(size);
}

BinaryMask select_clusters(const std::vector<BinaryMask>& cluster_masks, const BinaryMask& guide,
                           double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("select_clusters: threshold must be in (0, 1]");
  }
  std::vector<std::uint8_t> out(guide.pixel_count(), 0);
  for (const auto& cluster : cluster_masks) {
    require_same_shape(cluster, guide, "select_clusters");
    if (cluster.count() == 0 || overlap_ratio(cluster, guide) < threshold) continue;
    const auto c = cluster.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] |= c[i];
  }
  return BinaryMask(guide.width(), guide.height(), std::move(out));
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "iou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    inter += da[i] & db[i];
    uni += da[i] | db[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("adjusted_rand_index: label counts differ");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;

  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  const auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, m] : joint) index += pairs(m);
  double sum_rows = 0.0;
  for (const auto& [key, m] : rows) sum_rows += pairs(m);
  double sum_cols = 0.0;
  for (const auto& [key, m] : cols) sum_cols += pairs(m);

  const double expected = sum_rows * sum_cols / pairs(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) {
    // Both labelings are trivial (one cluster, or all singletons).
    return index == max_index ? 1.0 : 0.0;
  }
  return (index - expected) / (max_index - expected);
}

PcaResult pca(const AffinityMatrix& affinity, int count) {
  affinity.validate();
  const Eigen::Index n = affinity.entries.rows();
  if (count < 1 || count > n) throw InvalidArgument("pca: component count out of range");

  const Eigen::RowVectorXd mean = affinity.entries.colwise().mean();
  const Eigen::MatrixXd centered = affinity.entries.rowwise() - mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd covariance = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");

  PcaResult r;
  r.components.resize(n, count);
  r.variances.resize(count);
  const double total = std::max(0.0, solver.eigenvalues().sum());
  for (int i = 0; i < count; ++i) {
    const Eigen::Index src = n - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // Sign convention: the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    r.components.col(i) = v;
    r.variances(i) = std::max(0.0, solver.eigenvalues()(src));
  }
  r.explained_ratio =
      total > 0.0 ? Eigen::VectorXd(r.variances / total) : Eigen::VectorXd::Zero(count);
  r.projections = centered * r.components;
  return r;
}

Image pca_visualize(const AffinityMatrix& affinity, int grid_h, int grid_w) {
  affinity.validate();
  const int n = affinity.size();
  if (grid_h <= 0 || grid_w <= 0 || grid_h * grid_w != n) {
    throw DimensionMismatch("pca_visualize: token count does not match grid");
  }
  Image out(grid_w, grid_h, 3);
  std::fill(out.data().begin(), out.data().end(), 0.5f);

  const int count = std::min(3, n);
  const PcaResult r = pca(affinity, count);
  const double scale = std::max(1.0, affinity.entries.cwiseAbs().maxCoeff());
  if (r.variances.sum() <= 1e-24 * scale * scale) return out;

  for (int c = 0; c < count; ++c) {
    const Eigen::VectorXd p = r.projections.col(c);
    const double lo = p.minCoeff();
    const double range = p.maxCoeff() - lo;
    if (range <= 1e-12 * scale) continue;
    for (int t = 0; t < n; ++t) {
      const double v = std::clamp((p(t) - lo) / range, 0.0, 1.0);
      out.at(t % grid_w, t / grid_w, c) = static_cast<float>(v);
    }
  }
  return out;
}

BinaryMask generate_motion_mask(const AttentionStack& stack, const BinaryMask& guide,
                                const MaskOptions& options) {
  AffinityMatrix affinity = options.single_step
                                ? single_step_affinity(stack, *options.single_step)
                                : average_attention(stack, options.from_step);
  if (options.affinity == AffinityKind::kCosine) affinity = cosine_affinity(affinity);

  const ClusterLabels labels = options.method == ClusterMethod::kSpectral
                                   ? spectral_cluster(affinity, options.clusters, options.seed)
                                   : kmeans_cluster(affinity, options.clusters, options.seed);
  const auto masks =
      labels_to_masks(labels, stack.grid_h, stack.grid_w, guide.height(), guide.width());
  return select_clusters(masks, guide, options.overlap);
}

}  // namespace cinemagraph
