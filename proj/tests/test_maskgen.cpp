#include <doctest.h>

#include <numeric>
#include <random>

#include "cinemagraph/maskgen.hpp"
#include "oracles.hpp"

using namespace cinemagraph;

namespace {

std::vector<float> to_map(const std::vector<std::vector<double>>& a) {
  std::vector<float> m;
  for (const auto& row : a)
    for (double v : row) m.push_back(static_cast<float>(v));
  return m;
}

std::vector<float> random_map(int tokens, std::mt19937& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> m(static_cast<std::size_t>(tokens) * tokens);
  for (auto& v : m) v = u(rng);
  return m;
}

AffinityMatrix from_rows(const std::vector<std::vector<double>>& a) {
  AffinityMatrix m;
  const auto n = static_cast<Eigen::Index>(a.size());
  m.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m.entries(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

BinaryMask mask_from(int w, int h, const std::function<bool(int, int)>& pred) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, pred(x, y));
  return m;
}

}  // namespace

TEST_CASE("default parameters") {
  CHECK(kDefaultClusters == 10);
  CHECK(kDefaultOverlap == 0.70);
  CHECK(kFineStructureOverlap == 0.90);
  CHECK(kDefaultFromStep == 25u);
  CHECK(kDefaultAttentionGrid == 32);
  const MaskOptions opts;
  CHECK(opts.clusters == 10);
  CHECK(opts.overlap == 0.70);
}

TEST_CASE("average_attention of identical maps") {
  std::mt19937 rng(1);
  AttentionStack s{2, 2, {30, 35, 40}, {}};
  const auto m = random_map(4, rng);
  s.maps = {m, m, m};
  const auto avg = average_attention(s, 25);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(avg.entries(i, j) == doctest::Approx(0.5 * (m[i * 4 + j] + m[j * 4 + i])));
  CHECK((avg.entries - avg.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("average_attention keeps steps at or after from_step") {
  std::mt19937 rng(2);
  AttentionStack s{2, 2, {20, 30}, {random_map(4, rng), random_map(4, rng)}};
  const auto avg = average_attention(s, 25);
  const auto only30 = single_step_affinity(s, 30);
  CHECK(avg.entries == only30.entries);
  CHECK_THROWS_AS(average_attention(s, 31), InvalidArgument);
}

TEST_CASE("average_attention matches a direct entrywise mean") {
  std::mt19937 rng(3);
  AttentionStack s{3, 3, {5, 26, 27, 49}, {}};
  for (int t = 0; t < 4; ++t) s.maps.push_back(random_map(9, rng));
  const auto avg = average_attention(s, 25);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      double sum = 0.0;
      for (int t = 1; t < 4; ++t) sum += s.maps[t][i * 9 + j] + s.maps[t][j * 9 + i];
      CHECK(std::abs(avg.entries(i, j) - sum / 6.0) <= 1e-6);
    }
  }

  // Timestep order and duplicated identical maps do not matter.
  AttentionStack shuffled{3, 3, {49, 27, 5, 26}, {s.maps[3], s.maps[2], s.maps[0], s.maps[1]}};
  CHECK((average_attention(shuffled, 25).entries - avg.entries).cwiseAbs().maxCoeff() <= 1e-12);
  AttentionStack same{3, 3, {30, 31}, {s.maps[1], s.maps[1]}};
  AttentionStack single{3, 3, {30}, {s.maps[1]}};
  CHECK((average_attention(same, 25).entries - average_attention(single, 25).entries).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("attention stacks are validated") {
  AttentionStack s{2, 2, {1}, {std::vector<float>(15, 0.0f)}};
  CHECK_THROWS_AS(average_attention(s, 0), InvalidArgument);
  s.maps[0].resize(16, 0.0f);
  s.maps[0][3] = -1.0f;
  CHECK_THROWS_AS(average_attention(s, 0), InvalidArgument);
}

TEST_CASE("single_step_affinity") {
  std::mt19937 rng(4);
  AttentionStack one{2, 2, {12}, {random_map(4, rng)}};
  CHECK(single_step_affinity(one, 12).entries == average_attention(one, 0).entries);

  AttentionStack two{2, 2, {30, 40}, {random_map(4, rng), random_map(4, rng)}};
  const auto m40 = single_step_affinity(two, 40);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(m40.entries(i, j) == doctest::Approx(0.5 * (two.maps[1][i * 4 + j] + two.maps[1][j * 4 + i])));
  CHECK((m40.entries - average_attention(two, 0).entries).cwiseAbs().maxCoeff() > 1e-3);
  CHECK_THROWS_AS(single_step_affinity(two, 35), InvalidArgument);
}

TEST_CASE("spectral_cluster separates disconnected blocks") {
  std::vector<std::vector<double>> a(10, std::vector<double>(10, 0.0));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) a[i][j] = ((i < 4) == (j < 4)) ? 1.0 : 0.0;
  const auto labels = spectral_cluster(from_rows(a), 2, 0);
  std::vector<int> truth(10);
  for (int i = 0; i < 10; ++i) truth[i] = i < 4 ? 0 : 1;
  CHECK(labels.k == 2);
  CHECK(adjusted_rand_index(labels.labels, truth) == 1.0);
}

TEST_CASE("spectral_cluster recovers a planted partition") {
  std::vector<int> truth;
  const auto a = oracle::planted_partition(96, 3, 0.01, 7, truth);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto labels = spectral_cluster(from_rows(a), 3, seed);
    CHECK(adjusted_rand_index(labels.labels, truth) == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral_cluster is invariant under token permutation") {
  std::vector<int> truth;
  const auto a = oracle::planted_partition(60, 4, 0.05, 9, truth);
  std::vector<int> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  std::vector<std::vector<double>> b(60, std::vector<double>(60));
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) b[i][j] = a[perm[i]][perm[j]];

  const auto la = spectral_cluster(from_rows(a), 4, 1);
  const auto lb = spectral_cluster(from_rows(b), 4, 1);
  std::vector<int> lb_unpermuted(60);
  for (int i = 0; i < 60; ++i) lb_unpermuted[perm[i]] = lb.labels[i];
  CHECK(adjusted_rand_index(la.labels, lb_unpermuted) == doctest::Approx(1.0));
}

TEST_CASE("spectral_cluster tolerates isolated tokens") {
  // Two blocks plus token 10 with zero degree. The degree floor keeps the
  // embedding finite and the blocks are still recovered.
  std::vector<std::vector<double>> a(11, std::vector<double>(11, 0.0));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) a[i][j] = ((i < 5) == (j < 5)) ? 1.0 : 0.0;
  const auto labels = spectral_cluster(from_rows(a), 2, 0);
  const std::vector<int> blocks(labels.labels.begin(), labels.labels.begin() + 10);
  const std::vector<int> truth = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CHECK(adjusted_rand_index(blocks, truth) == 1.0);
  CHECK(labels.labels[10] >= 0);
  CHECK(labels.labels[10] < 2);
}

TEST_CASE("spectral_cluster errors") {
  std::vector<std::vector<double>> a(3, std::vector<double>(3, 1.0));
  CHECK_THROWS_AS(spectral_cluster(from_rows(a), 4, 0), InvalidArgument);
  CHECK_THROWS_AS(spectral_cluster(from_rows(a), 0, 0), InvalidArgument);
  a[0][1] = 0.5;
  CHECK_THROWS_AS(spectral_cluster(from_rows(a), 2, 0), InvalidArgument);
}

TEST_CASE("kmeans_cluster") {
  std::vector<std::vector<double>> a(8, std::vector<double>(8, 0.0));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) a[i][j] = ((i < 3) == (j < 3)) ? 10.0 : 0.0;
  const auto two = kmeans_cluster(from_rows(a), 2, 4);
  for (int i = 1; i < 3; ++i) CHECK(two.labels[i] == two.labels[0]);
  for (int i = 4; i < 8; ++i) CHECK(two.labels[i] == two.labels[3]);
  CHECK(two.labels[0] != two.labels[3]);

  const auto one = kmeans_cluster(from_rows(a), 1, 4);
  for (int l : one.labels) CHECK(l == 0);
  CHECK_THROWS_AS(kmeans_cluster(from_rows(a), 9, 0), InvalidArgument);
}

TEST_CASE("kmeans converges to a fixed point") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd pts(200, 5);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = g(rng) + 4.0 * static_cast<double>(i % 4 == j);
  const auto r = kmeans(pts, 4, 11);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    CHECK(nearest_centroid(r.centroids, pts.row(i)) == r.labels[static_cast<std::size_t>(i)]);
  }
  // Same seed, same answer.
  CHECK(kmeans(pts, 4, 11).labels == r.labels);
}

TEST_CASE("labels_to_masks") {
  const auto single = labels_to_masks({{0, 0, 0, 0}, 1}, 2, 2, 5, 7);
  REQUIRE(single.size() == 1);
  CHECK(single[0].count() == 35);

  const auto checker = labels_to_masks({{0, 1, 1, 0}, 2}, 2, 2, 4, 4);
  REQUIRE(checker.size() == 2);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(checker[0].at(x, y) == ((x < 2) == (y < 2)));

  // Partition of the canvas for random labels; empty labels produce no mask.
  std::mt19937 rng(6);
  std::vector<int> labels(6 * 5);
  for (auto& l : labels) l = static_cast<int>(rng() % 4) * 2;
  const auto masks = labels_to_masks({labels, 8}, 5, 6, 23, 17);
  for (int y = 0; y < 23; ++y) {
    for (int x = 0; x < 17; ++x) {
      int hits = 0;
      for (const auto& m : masks) hits += m.at(x, y);
      CHECK(hits == 1);
    }
  }
  CHECK(masks.size() <= 4);
  CHECK_THROWS_AS(labels_to_masks({{0, 1}, 2}, 2, 2, 4, 4), DimensionMismatch);
}

TEST_CASE("select_clusters thresholds") {
  // 10x10 canvas, guide = left 5 columns.
  const BinaryMask guide = mask_from(10, 10, [](int x, int) { return x < 5; });
  const BinaryMask inside = mask_from(10, 10, [](int x, int y) { return x < 5 && y < 2; });
  const BinaryMask outside = mask_from(10, 10, [](int x, int y) { return x >= 5 && y < 2; });
  // 3 + 2 = 5 pixels on the bottom row, 3 of them inside the guide.
  const BinaryMask p60 = mask_from(10, 10, [](int x, int y) { return y == 9 && (x < 3 || (x >= 5 && x < 7)); });
  REQUIRE(overlap_ratio(p60, guide) == doctest::Approx(0.6));

  CHECK(select_clusters({inside}, guide, 0.7) == inside);
  CHECK(select_clusters({outside}, guide, 0.7).count() == 0);
  CHECK(select_clusters({p60}, guide, 0.7).count() == 0);
  CHECK(select_clusters({p60}, guide, 0.5) == p60);
  CHECK(select_clusters({BinaryMask(10, 10)}, guide, 0.01).count() == 0);
  CHECK_THROWS_AS(select_clusters({inside}, guide, 0.0), InvalidArgument);
  CHECK_THROWS_AS(select_clusters({BinaryMask(3, 3)}, guide, 0.5), DimensionMismatch);
}

TEST_CASE("select_clusters is monotone in the threshold") {
  std::mt19937 rng(8);
  const BinaryMask guide = mask_from(16, 16, [&](int, int) { return rng() % 2 == 0; });
  std::vector<int> labels(16);
  for (auto& l : labels) l = static_cast<int>(rng() % 6);
  const auto masks = labels_to_masks({labels, 6}, 4, 4, 16, 16);
  std::size_t prev = 16 * 16 + 1;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    const auto sel = select_clusters(masks, guide, t);
    CHECK(sel.count() <= prev);
    prev = sel.count();
  }
}

TEST_CASE("iou") {
  const BinaryMask a = mask_from(4, 1, [](int x, int) { return x < 2; });
  const BinaryMask b = mask_from(4, 1, [](int x, int) { return x >= 1 && x < 3; });
  const BinaryMask c = mask_from(4, 1, [](int x, int) { return x >= 2; });
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, c) == 0.0);
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(BinaryMask(4, 1), BinaryMask(4, 1)) == 0.0);
  CHECK_THROWS_AS(iou(a, BinaryMask(2, 2)), DimensionMismatch);

  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask p = mask_from(6, 6, [&](int, int) { return rng() % 3 == 0; });
    const BinaryMask q = mask_from(6, 6, [&](int, int) { return rng() % 3 == 0; });
    const double v = iou(p, q);
    CHECK(v == iou(q, p));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK((v == 1.0) == (p == q && p.count() > 0));
  }
}

TEST_CASE("adjusted_rand_index matches pair counting") {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(40), b(40);
    for (auto& v : a) v = static_cast<int>(rng() % 4);
    for (auto& v : b) v = static_cast<int>(rng() % 5);
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle::pair_counting_ari(a, b)).epsilon(1e-12));
  }
  const std::vector<int> x = {0, 0, 1, 1, 2};
  const std::vector<int> relabeled = {2, 2, 0, 0, 1};
  CHECK(adjusted_rand_index(x, relabeled) == 1.0);
}

TEST_CASE("pca of a rank-1 affinity") {
  Eigen::VectorXd u(12);
  for (int i = 0; i < 12; ++i) u(i) = 0.1 + 0.07 * i;
  AffinityMatrix a{u * u.transpose()};
  const auto r = pca(a, 3);
  CHECK(r.explained_ratio(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.explained_ratio(1) <= 1e-9);

  const Image img = pca_visualize(a, 3, 4);
  CHECK(img.width() == 4);
  CHECK(img.height() == 3);
  for (float v : img.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("pca directions match an independent eigensolver") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 10;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  AffinityMatrix a{0.5 * (m + m.transpose())};
  const auto r = pca(a, 3);

  // Row covariance built and diagonalized without Eigen.
  std::vector<double> mean(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) mean[j] += a.entries(i, j);
    mean[j] /= n;
  }
  std::vector<double> cov(n * n, 0.0);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      for (int i = 0; i < n; ++i) cov[p * n + q] += (a.entries(i, p) - mean[p]) * (a.entries(i, q) - mean[q]);
      cov[p * n + q] /= (n - 1);
    }
  std::vector<double> values, vectors;
  oracle::jacobi_eigen(cov, n, values, vectors);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return values[x] > values[y]; });

  for (int c = 0; c < 3; ++c) {
    const int k = order[c];
    CHECK(r.variances(c) == doctest::Approx(values[k]).epsilon(1e-9));
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += r.components(i, c) * vectors[i * n + k];
    const double sign = dot >= 0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) CHECK(std::abs(r.components(i, c) - sign * vectors[i * n + k]) <= 1e-5);
  }
}

TEST_CASE("pca_visualize of identical rows is mid-gray") {
  AffinityMatrix a{Eigen::MatrixXd::Constant(4, 4, 0.25)};
  const Image img = pca_visualize(a, 2, 2);
  for (float v : img.data()) CHECK(v == 0.5f);
  CHECK_THROWS_AS(pca_visualize(a, 3, 2), DimensionMismatch);
}

TEST_CASE("cosine affinity") {
  std::vector<std::vector<double>> a = {{1, 1, 0}, {1, 1, 0}, {0, 0, 1}};
  const auto c = cosine_affinity(from_rows(a));
  CHECK(c.entries(0, 1) == doctest::Approx(1.0));
  CHECK(c.entries(0, 2) == doctest::Approx(0.0));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("generate_motion_mask end to end") {
  // 8x8 token grid; tokens in the left half attend to each other, as do
  // the right half. Guide covers the left half of a 32x32 image.
  const int g = 8;
  const int n = g * g;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = ((i % g < 4) == (j % g < 4)) ? 1.0 : 0.001;
  AttentionStack s{g, g, {30, 40}, {to_map(a), to_map(a)}};
  const BinaryMask guide = mask_from(32, 32, [](int x, int) { return x < 16; });

  MaskOptions opts;
  opts.clusters = 2;
  CHECK(generate_motion_mask(s, guide, opts) == guide);
  opts.method = ClusterMethod::kKMeans;
  CHECK(generate_motion_mask(s, guide, opts) == guide);
  opts.affinity = AffinityKind::kCosine;
  opts.single_step = 40;
  CHECK(generate_motion_mask(s, guide, opts) == guide);
}
