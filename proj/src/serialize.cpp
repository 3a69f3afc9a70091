#include "mard/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mard {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string &s, const std::string &context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw DataError("could not parse number '" + s + "' in " + context);
  }
}

std::string join_csv(const std::vector<std::string> &fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  return line;
}

}  // namespace

CsvTable read_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split_line(line);
      first = false;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  if (first) throw DataError("CSV file is empty: " + path);
  return table;
}

void write_lines(const std::string &path, const std::vector<std::string> &lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (const std::string &line : lines) out << line << '\n';
}

void write_text_file(const std::string &path, const std::string &content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json matrix_to_json(const Matrix &m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  }
  j["data"] = data;  // row-major
  return j;
}

Matrix matrix_from_json(const Json &j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataError("matrix JSON: data length does not match dims");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
  }
  return m;
}

Json vector_to_json(const Vector &v) {
  std::vector<double> data(v.data(), v.data() + v.size());
  return Json(data);
}

Vector vector_from_json(const Json &j) {
  const auto data = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) v(static_cast<Eigen::Index>(i)) = data[i];
  return v;
}

Json ard_posterior_to_json(const ArdPosterior &posterior) {
  Json j;
  j["model"] = "ard";
  j["beta_star"] = vector_to_json(posterior.beta_star);
  j["v_star_inv"] = matrix_to_json(posterior.v_star_inv.mat());
  j["a_star"] = posterior.a_star;
  j["b_star"] = posterior.b_star;
  j["c_star"] = vector_to_json(posterior.c_star);
  j["d_star"] = vector_to_json(posterior.d_star);
  j["elbo_trace"] = posterior.elbo_trace;
  j["has_intercept"] = posterior.has_intercept;
  return j;
}

ArdPosterior ard_posterior_from_json(const Json &j) {
  ArdPosterior post{vector_from_json(j.at("beta_star")),
                    SpdMatrix(matrix_from_json(j.at("v_star_inv"))),
                    j.at("a_star").get<double>(),
                    j.at("b_star").get<double>(),
                    vector_from_json(j.at("c_star")),
                    vector_from_json(j.at("d_star")),
                    j.at("elbo_trace").get<std::vector<double>>(),
                    j.at("has_intercept").get<bool>()};
  if (post.beta_star.size() != post.v_star_inv.dim() ||
      post.c_star.size() != post.beta_star.size() ||
      post.d_star.size() != post.beta_star.size()) {
    throw DataError("ARD posterior JSON: inconsistent dimensions");
  }
  return post;
}

Json mard_posterior_to_json(const MardPosterior &posterior) {
  Json j;
  j["model"] = "mard";
  j["beta_star"] = vector_to_json(posterior.beta_star);
  j["m_star"] = matrix_to_json(posterior.m_star.mat());
  j["v_star"] = matrix_to_json(posterior.v_star.mat());
  j["nu_star"] = posterior.nu_star;
  j["c_star"] = posterior.c_star;
  j["d_star"] = vector_to_json(posterior.d_star);
  j["delta_star"] = vector_to_json(posterior.delta_star);
  return j;
}

MardPosterior mard_posterior_from_json(const Json &j) {
  MardPosterior post{vector_from_json(j.at("beta_star")),
                     SpdMatrix(matrix_from_json(j.at("m_star"))),
                     SpdMatrix(matrix_from_json(j.at("v_star"))),
                     j.at("nu_star").get<double>(),
                     j.at("c_star").get<double>(),
                     vector_from_json(j.at("d_star")),
                     vector_from_json(j.at("delta_star"))};
  if (post.beta_star.size() != 2 * post.m_star.dim() || post.v_star.dim() != 2 ||
      post.d_star.size() != post.m_star.dim() ||
      post.delta_star.size() != post.m_star.dim()) {
    throw DataError("MARD posterior JSON: inconsistent dimensions");
  }
  return post;
}

std::vector<std::string> chain_to_csv(const ChainOutput &chain) {
  if (chain.draws.empty()) throw DataError("chain_to_csv: no kept draws");
  const Eigen::Index p = chain.draws.front().beta.size();
  std::vector<std::string> lines;
  lines.reserve(chain.draws.size() + 1);

  std::vector<std::string> header{"beta0"};
  for (Eigen::Index j = 0; j < p; ++j) header.push_back("beta_" + std::to_string(j + 1));
  header.emplace_back("sigma2");
  header.emplace_back("lambda");
  for (Eigen::Index j = 0; j < p; ++j) header.push_back("gamma_" + std::to_string(j + 1));
  lines.push_back(join_csv(header));

  for (const GibbsState &s : chain.draws) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(2 * p + 3));
    row.push_back(format_double(s.beta0));
    for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_double(s.beta(j)));
    row.push_back(format_double(s.sigma2));
    row.push_back(format_double(s.lambda));
    for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_double(s.gamma(j)));
    lines.push_back(join_csv(row));
  }
  return lines;
}

namespace {

Json interval_summary_to_json(const IntervalSummary &s) {
  return Json{{"mean", s.mean}, {"lo", s.lo}, {"hi", s.hi}};
}

}  // namespace

Json posterior_summary_to_json(const PosteriorSummary &summary) {
  Json j;
  j["level"] = summary.level;
  j["beta0"] = interval_summary_to_json(summary.beta0);
  j["sigma2"] = interval_summary_to_json(summary.sigma2);
  j["lambda"] = interval_summary_to_json(summary.lambda);
  Json beta = Json::array();
  for (const IntervalSummary &s : summary.beta) beta.push_back(interval_summary_to_json(s));
  j["beta"] = beta;
  Json gamma = Json::array();
  for (const IntervalSummary &s : summary.gamma) gamma.push_back(interval_summary_to_json(s));
  j["gamma"] = gamma;
  return j;
}

void write_dataset_csv(const std::string &path, const Dataset &data) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(n) + 1);

  std::vector<std::string> header{"song_id"};
  for (Eigen::Index j = 0; j < p; ++j) {
    header.push_back(static_cast<std::size_t>(j) < data.feature_names.size()
                         ? data.feature_names[static_cast<std::size_t>(j)]
                         : "x_" + std::to_string(j + 1));
  }
  header.emplace_back("arousal");
  if (data.y.cols() > 1) header.emplace_back("valence");
  lines.push_back(join_csv(header));

  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(p) + 3);
    row.push_back(static_cast<std::size_t>(i) < data.song_ids.size()
                      ? data.song_ids[static_cast<std::size_t>(i)]
                      : "row_" + std::to_string(i));
    for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_double(data.x(i, j)));
    row.push_back(format_double(data.y(i, 0)));
    if (data.y.cols() > 1) row.push_back(format_double(data.y(i, 1)));
    lines.push_back(join_csv(row));
  }
  write_lines(path, lines);
}

Json dataset_sidecar_json(const Dataset &data) {
  Json j;
  j["n"] = data.n();
  j["p"] = data.p();
  if (data.split) {
    j["split"] = {{"seed", data.split->seed},
                  {"train_idx", data.split->train},
                  {"test_idx", data.split->test}};
  }
  if (data.pca) {
    j["pca"] = {{"loadings", matrix_to_json(data.pca->loadings)},
                {"column_means", vector_to_json(data.pca->column_means)},
                {"explained", vector_to_json(data.pca->explained)}};
  }
  return j;
}

Dataset read_dataset(const std::string &csv_path, const std::string &sidecar_path) {
  const CsvTable table = read_csv(csv_path);
  if (table.header.size() < 3 || table.header.front() != "song_id") {
    throw DataError("dataset CSV: expected header song_id, features..., arousal[, valence]");
  }
  const bool has_valence = table.header.back() == "valence";
  const std::size_t m = has_valence ? 2 : 1;
  if (m == 2 && table.header[table.header.size() - 2] != "arousal") {
    throw DataError("dataset CSV: expected arousal,valence as the trailing columns");
  }
  const std::size_t p = table.header.size() - 1 - m;
  if (p == 0) throw DataError("dataset CSV: no feature columns");

  Dataset data;
  data.feature_names.assign(table.header.begin() + 1, table.header.end() - m);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw DataError("dataset CSV: no rows");
  data.x.resize(n, static_cast<Eigen::Index>(p));
  data.y.resize(n, static_cast<Eigen::Index>(m));
  data.song_ids.reserve(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = table.rows[static_cast<std::size_t>(i)];
    if (row.size() != table.header.size()) {
      throw DataError("dataset CSV: row " + std::to_string(i) + " has wrong field count");
    }
    data.song_ids.push_back(row[0]);
    for (std::size_t j = 0; j < p; ++j) {
      data.x(i, static_cast<Eigen::Index>(j)) = parse_double(row[j + 1], csv_path);
    }
    for (std::size_t r = 0; r < m; ++r) {
      data.y(i, static_cast<Eigen::Index>(r)) = parse_double(row[p + 1 + r], csv_path);
    }
  }

  if (!sidecar_path.empty()) {
    const Json j = Json::parse(read_text_file(sidecar_path));
    if (j.contains("split")) {
      SplitIndices idx;
      idx.seed = j["split"].at("seed").get<std::uint64_t>();
      idx.train = j["split"].at("train_idx").get<std::vector<Eigen::Index>>();
      idx.test = j["split"].at("test_idx").get<std::vector<Eigen::Index>>();
      data.split = std::move(idx);
    }
    if (j.contains("pca")) {
      PcaResult basis;
      basis.loadings = matrix_from_json(j["pca"].at("loadings"));
      basis.column_means = vector_from_json(j["pca"].at("column_means"));
      basis.explained = vector_from_json(j["pca"].at("explained"));
      data.pca = std::move(basis);
    }
  }
  return data;
}

Catalog read_catalog_csv(const std::string &path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 3 || table.header[0] != "song_id" ||
      table.header[1] != "arousal" || table.header[2] != "valence") {
    throw DataError("catalog CSV: expected header song_id,arousal,valence");
  }
  Catalog catalog;
  catalog.items.reserve(table.rows.size());
  for (const auto &row : table.rows) {
    if (row.size() != 3) throw DataError("catalog CSV: malformed row");
    catalog.items.push_back(
        CatalogItem{row[0], parse_double(row[1], path), parse_double(row[2], path)});
  }
  catalog.validate();
  return catalog;
}

std::vector<std::string> predictive_samples_to_csv(const std::vector<Eigen::Vector2d> &draws) {
  std::vector<std::string> lines;
  lines.reserve(draws.size() + 1);
  lines.emplace_back("draw_index,arousal,valence");
  for (std::size_t i = 0; i < draws.size(); ++i) {
    lines.push_back(std::to_string(i) + "," + format_double(draws[i](0)) + "," +
                    format_double(draws[i](1)));
  }
  return lines;
}

Json metrics_to_json(const std::vector<MetricsReport> &reports) {
  Json out = Json::array();
  for (const MetricsReport &report : reports) {
    Json j;
    j["model"] = report.model_name;
    j["n_test"] = report.n_test;
    Json responses = Json::array();
    for (const ResponseMetrics &resp : report.responses) {
      responses.push_back(Json{{"name", resp.name},
                               {"train_r2", resp.train_r2},
                               {"test_r2", resp.test_r2},
                               {"rmse", resp.rmse},
                               {"interval_hits", resp.interval_hits}});
    }
    j["responses"] = responses;
    if (report.has_regions) j["region_hits"] = report.region_hits;
    out.push_back(j);
  }
  return out;
}

}  // namespace mard
