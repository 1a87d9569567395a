#pragma once

// Motion-mask generation from diffusion self-attention maps.
//
// Maps from late denoising steps are averaged into a token affinity, the
// tokens are clustered, and clusters that mostly fall inside a guide
// segmentation are kept. K-Means and single-step variants are provided as
// baselines, plus a PCA rendering of the affinity for inspection.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cinemagraph/fields.hpp"

namespace cinemagraph {

inline constexpr int kDefaultAttentionGrid = 32;
inline constexpr std::uint32_t kDefaultFromStep = 25;
inline constexpr int kDefaultClusters = 10;
inline constexpr double kDefaultOverlap = 0.70;
/// For thin structures such as waterfalls.
inline constexpr double kFineStructureOverlap = 0.90;

/// Self-attention maps indexed by denoising step. Each map is a
/// (grid_h*grid_w) x (grid_h*grid_w) row-major float matrix.
struct AttentionStack {
  int grid_h = kDefaultAttentionGrid;
  int grid_w = kDefaultAttentionGrid;
  std::vector<std::uint32_t> timestep_ids;
  std::vector<std::vector<float>> maps;

  int tokens() const { return grid_h * grid_w; }
  /// Throws InvalidArgument on shape errors, negative or non-finite entries.
  void validate() const;
};

/// Symmetric nonnegative token affinity.
struct AffinityMatrix {
  Eigen::MatrixXd entries;

  int size() const { return static_cast<int>(entries.rows()); }
  /// Throws InvalidArgument unless square, nonnegative, finite and symmetric
  /// within 1e-6.
  void validate() const;
};

struct ClusterLabels {
  std::vector<int> labels;
  int k = 0;
};

/// Mean of the maps with timestep_id >= from_step, symmetrized.
AffinityMatrix average_attention(const AttentionStack& stack, std::uint32_t from_step);

/// The map recorded at `step`, symmetrized.
AffinityMatrix single_step_affinity(const AttentionStack& stack, std::uint32_t step);

/// Cosine similarity between affinity rows, clamped at 0. Alternative to
/// clustering the attention matrix directly.
AffinityMatrix cosine_affinity(const AffinityMatrix& affinity);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
/// Keeps the restart with the lowest inertia.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Index of the nearest centroid (lowest index wins ties).
int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point);

/// Normalized-Laplacian spectral clustering with row-normalized embeddings.
ClusterLabels spectral_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed);

/// K-Means directly on affinity rows.
ClusterLabels kmeans_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed);

/// One nearest-neighbor upsampled mask per nonempty label, ascending label.
std::vector<BinaryMask> labels_to_masks(const ClusterLabels& labels, int grid_h, int grid_w,
                                        int out_h, int out_w);

/// |cluster & guide| / |cluster|; 0 for an empty cluster.
double overlap_ratio(const BinaryMask& cluster, const BinaryMask& guide);

/// Union of the clusters whose overlap ratio with `guide` is >= threshold.
BinaryMask select_clusters(const std::vector<BinaryMask>& cluster_masks, const BinaryMask& guide,
                           double threshold);

/// Intersection over union; 0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

/// Adjusted Rand Index between two labelings of the same tokens.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct PcaResult {
  /// Columns are unit principal directions, by decreasing variance.
  Eigen::MatrixXd components;
  /// Variance along each component.
  Eigen::VectorXd variances;
  /// Fraction of total variance per component.
  Eigen::VectorXd explained_ratio;
  /// Token rows projected onto the components (tokens x count).
  Eigen::MatrixXd projections;
};

/// PCA of the affinity rows, `count` leading components.
PcaResult pca(const AffinityMatrix& affinity, int count);

/// Top three principal components as RGB at grid resolution, each channel
/// min-max normalized. Degenerate input renders uniform mid-gray.
Image pca_visualize(const AffinityMatrix& affinity, int grid_h, int grid_w);

enum class ClusterMethod { kSpectral, kKMeans };
enum class AffinityKind { kAttention, kCosine };

struct MaskOptions {
  int clusters = kDefaultClusters;
  double overlap = kDefaultOverlap;
  std::uint32_t from_step = kDefaultFromStep;
  /// When set, use only this step's map instead of the average.
  std::optional<std::uint32_t> single_step;
  ClusterMethod method = ClusterMethod::kSpectral;
  AffinityKind affinity = AffinityKind::kAttention;
  std::uint64_t seed = 0;
};

/// Full pipeline: affinity, clustering, upsampling to the guide's size and
/// cluster selection against the guide.
BinaryMask generate_motion_mask(const AttentionStack& stack, const BinaryMask& guide,
                                const MaskOptions& options = {});

}  // namespace cinemagraph
