#include "mard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mard {

namespace {

Matrix select_rows(const Matrix &m, const std::vector<Eigen::Index> &rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Dataset with_split(const Dataset &data, std::vector<Eigen::Index> perm, Eigen::Index train_count,
                   std::uint64_t seed) {
  Dataset out = data;
  SplitIndices idx;
  idx.seed = seed;
  idx.train.assign(perm.begin(), perm.begin() + train_count);
  idx.test.assign(perm.begin() + train_count, perm.end());
  std::sort(idx.train.begin(), idx.train.end());
  std::sort(idx.test.begin(), idx.test.end());
  out.split = std::move(idx);
  return out;
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with our own stream so the partition is seed-reproducible.
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace

Matrix Dataset::train_x() const {
  if (!split) throw ParameterError("Dataset: no split available");
  return select_rows(x, split->train);
}

Matrix Dataset::train_y() const {
  if (!split) throw ParameterError("Dataset: no split available");
  return select_rows(y, split->train);
}

Matrix Dataset::test_x() const {
  if (!split) throw ParameterError("Dataset: no split available");
  return select_rows(x, split->test);
}

Matrix Dataset::test_y() const {
  if (!split) throw ParameterError("Dataset: no split available");
  return select_rows(y, split->test);
}

SongSummary preprocess_song(const SongSeries &series) {
  const Eigen::Index frames = series.feature_frames.rows();
  if (frames < 10) {
    throw DataError("preprocess_song: song '" + series.song_id + "' has fewer than 10 frames");
  }
  if (series.annotation_frames.rows() != frames || series.annotation_frames.cols() != 2) {
    throw DataError("preprocess_song: annotation frames do not match feature frames for '" +
                    series.song_id + "'");
  }
  if ((series.annotation_frames.array().abs() > 1.0).any()) {
    throw DataError("preprocess_song: annotations outside [-1, 1] for '" + series.song_id + "'");
  }

  const auto first =
      static_cast<Eigen::Index>(std::ceil(0.10 * static_cast<double>(frames)));
  // Trailing frames that are exactly zero across every feature column come
  // from padded short excerpts; a single nonzero entry ends the run.
  Eigen::Index last = frames - 1;
  while (last >= first && (series.feature_frames.row(last).array() == 0.0).all()) {
    --last;
  }
  if (last < first) {
    throw DataError("preprocess_song: no frames left after trimming '" + series.song_id + "'");
  }

  const Eigen::Index kept = last - first + 1;
  SongSummary out;
  out.feature_vector =
      series.feature_frames.middleRows(first, kept).colwise().mean().transpose();
  const Vector av = series.annotation_frames.middleRows(first, kept).colwise().mean().transpose();
  out.av = Eigen::Vector2d(av(0), av(1));
  return out;
}

PcaResult pca(const Matrix &x, Eigen::Index n_components) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n_components < 1 || n_components > std::min(n, p)) {
    throw ParameterError("pca: n_components must lie in [1, min(n, p)]");
  }
  PcaResult out;
  out.column_means = x.colwise().mean().transpose();
  Matrix centered = x.rowwise() - out.column_means.transpose();
  if (centered.cwiseAbs().maxCoeff() <= 0.0) {
    throw DataError("pca: input has zero variance in every column");
  }

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &sv = svd.singularValues();
  Matrix u = svd.matrixU().leftCols(n_components);
  Matrix v = svd.matrixV().leftCols(n_components);

  // Deterministic sign: make the largest-magnitude loading entry positive.
  for (Eigen::Index k = 0; k < n_components; ++k) {
    Eigen::Index arg = 0;
    v.col(k).cwiseAbs().maxCoeff(&arg);
    if (v(arg, k) < 0) {
      v.col(k) = -v.col(k);
      u.col(k) = -u.col(k);
    }
  }

  out.loadings = v;
  out.scores = u * sv.head(n_components).asDiagonal();
  out.explained = sv.head(n_components).array().square() /
                  std::max<double>(1.0, static_cast<double>(n - 1));
  return out;
}

Matrix pca_transform(const PcaResult &basis, const Matrix &x) {
  if (x.cols() != basis.loadings.rows()) {
    throw ParameterError("pca_transform: column count does not match the basis");
  }
  return (x.rowwise() - basis.column_means.transpose()) * basis.loadings;
}

Dataset split(const Dataset &data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("split: train_fraction must lie in (0, 1)");
  }
  const Eigen::Index n = data.n();
  const auto train_count = static_cast<Eigen::Index>(
      std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  if (train_count < 1 || train_count >= n) {
    throw ParameterError("split: partition would leave an empty side");
  }
  return with_split(data, shuffled_indices(n, seed), train_count, seed);
}

Dataset split_counts(const Dataset &data, Eigen::Index train_count, Eigen::Index test_count,
                     std::uint64_t seed) {
  const Eigen::Index n = data.n();
  if (train_count < 1 || test_count < 1 || train_count + test_count != n) {
    std::ostringstream msg;
    msg << "split_counts: " << train_count << " + " << test_count << " must equal n = " << n
        << " with both sides non-empty";
    throw ParameterError(msg.str());
  }
  return with_split(data, shuffled_indices(n, seed), train_count, seed);
}

SyntheticDataset synthetic_dataset(Eigen::Index n, Eigen::Index p, Eigen::Index k_nonzero,
                                   const SpdMatrix &k_inv, std::uint64_t seed) {
  if (n < 1 || p < 1) throw ParameterError("synthetic_dataset: n and p must be >= 1");
  if (k_nonzero < 0 || k_nonzero > p) {
    throw ParameterError("synthetic_dataset: k_nonzero must lie in [0, p]");
  }
  if (k_inv.dim() != 2) throw ParameterError("synthetic_dataset: k_inv must be 2x2");

  Rng rng(seed);

  // Support first: a uniform k-subset of rows carries the signal.
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(p));
  std::iota(rows.begin(), rows.end(), 0);
  for (Eigen::Index i = p - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }

  Matrix b = Matrix::Zero(p, 2);
  for (Eigen::Index k = 0; k < k_nonzero; ++k) {
    for (int r = 0; r < 2; ++r) {
      // Magnitudes uniform on [0.5, 2] keep "nonzero" well separated from 0.
      const double magnitude = 0.5 + 1.5 * rng.uniform();
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      b(rows[static_cast<std::size_t>(k)], r) = sign * magnitude;
    }
  }

  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  }

  const Matrix l = k_inv.llt().matrixL();
  Matrix e(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d z(rng.normal(), rng.normal());
    e.row(i) = (l * z).transpose();
  }

  SyntheticDataset out;
  out.b_true = b;
  out.data.x = x;
  out.data.y = x * b + e;
  out.data.song_ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::ostringstream id;
    id << "synth_" << i;
    out.data.song_ids.push_back(id.str());
  }
  out.data.feature_names.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::ostringstream name;
    name << "x_" << (j + 1);
    out.data.feature_names.push_back(name.str());
  }
  return out;
}

}  // namespace mard
