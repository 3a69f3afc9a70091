#ifndef MARD_SERIALIZE_HPP_
#define MARD_SERIALIZE_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "mard/ard.hpp"
#include "mard/bayes_lasso.hpp"
#include "mard/dataset.hpp"
#include "mard/evaluation.hpp"
#include "mard/mard.hpp"
#include "mard/recommender.hpp"

namespace mard {

using Json = nlohmann::json;

// Shortest round-trippable decimal rendering, used everywhere a double
// lands in a CSV cell so outputs are byte-stable under a fixed seed.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string &path);
void write_lines(const std::string &path, const std::vector<std::string> &lines);

Json matrix_to_json(const Matrix &m);
Matrix matrix_from_json(const Json &j);
Json vector_to_json(const Vector &v);
Vector vector_from_json(const Json &j);

Json ard_posterior_to_json(const ArdPosterior &posterior);
ArdPosterior ard_posterior_from_json(const Json &j);

Json mard_posterior_to_json(const MardPosterior &posterior);
MardPosterior mard_posterior_from_json(const Json &j);

// Chain dump: one row per kept draw with columns
// beta0, beta_1..beta_p, sigma2, lambda, gamma_1..gamma_p.
std::vector<std::string> chain_to_csv(const ChainOutput &chain);

Json posterior_summary_to_json(const PosteriorSummary &summary);

// Consolidated dataset: song_id, feature columns, then arousal [, valence];
// the sidecar carries split indices, PCA basis and the seed.
void write_dataset_csv(const std::string &path, const Dataset &data);
Json dataset_sidecar_json(const Dataset &data);
Dataset read_dataset(const std::string &csv_path, const std::string &sidecar_path = "");

Catalog read_catalog_csv(const std::string &path);

std::vector<std::string> predictive_samples_to_csv(const std::vector<Eigen::Vector2d> &draws);

Json metrics_to_json(const std::vector<MetricsReport> &reports);

void write_text_file(const std::string &path, const std::string &content);
std::string read_text_file(const std::string &path);

}  // namespace mard

#endif  // MARD_SERIALIZE_HPP_
