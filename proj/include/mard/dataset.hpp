#ifndef MARD_DATASET_HPP_
#define MARD_DATASET_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mard/distributions.hpp"
#include "mard/matrix_ops.hpp"

namespace mard {

// One song's frame-level data: acoustic features and arousal/valence
// annotations sampled on the same 2 Hz grid.
struct SongSeries {
  std::string song_id;
  Matrix feature_frames;     // frames x features
  Matrix annotation_frames;  // frames x 2, arousal then valence in [-1, 1]
};

struct SongSummary {
  Vector feature_vector;
  Eigen::Vector2d av;
};

struct PcaResult {
  Matrix scores;        // n x k, orthogonal columns
  Matrix loadings;      // p x k
  Vector explained;     // per-component variance, non-increasing
  Vector column_means;  // centering applied before projection
};

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  std::uint64_t seed = 0;
};

struct Dataset {
  Matrix x;  // n x p
  Matrix y;  // n x m, m in {1, 2}
  std::vector<std::string> song_ids;
  std::vector<std::string> feature_names;
  std::optional<PcaResult> pca;
  std::optional<SplitIndices> split;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  Matrix train_x() const;
  Matrix train_y() const;
  Matrix test_x() const;
  Matrix test_y() const;
};

struct SyntheticDataset {
  Dataset data;
  Matrix b_true;  // p x 2 ground-truth coefficients
};

// Per-song reduction: drop the leading ceil(10%) frames, drop the maximal
// trailing run of all-zero feature frames, then average the remaining
// frames column-wise (features and annotations alike).
SongSummary preprocess_song(const SongSeries &series);

// Principal components of the column-centered input; components are
// ordered by non-increasing explained variance and sign-fixed so the
// largest-magnitude loading entry of each component is positive.
PcaResult pca(const Matrix &x, Eigen::Index n_components);

// Projection of new rows onto an existing PCA basis.
Matrix pca_transform(const PcaResult &basis, const Matrix &x);

// Uniform random train/test partition; the train side receives
// ceil(train_fraction * n) rows.
Dataset split(const Dataset &data, double train_fraction, std::uint64_t seed);

// Exact-count variant; train_count + test_count must equal n.
Dataset split_counts(const Dataset &data, Eigen::Index train_count, Eigen::Index test_count,
                     std::uint64_t seed);

// Controlled-scenario generator: X has i.i.d. standard normal entries, B
// has exactly k_nonzero nonzero rows with magnitudes uniform on
// [0.5, 2], error rows are N(0, k_inv), and Y = X B + E.
SyntheticDataset synthetic_dataset(Eigen::Index n, Eigen::Index p, Eigen::Index k_nonzero,
                                   const SpdMatrix &k_inv, std::uint64_t seed);

}  // namespace mard

#endif  // MARD_DATASET_HPP_
