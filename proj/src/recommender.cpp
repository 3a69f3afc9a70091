#include "mard/recommender.hpp"

#include <algorithm>
#include <cmath>

#include "mard/distributions.hpp"
#include "mard/errors.hpp"

namespace mard {

void Catalog::validate() const {
  for (const CatalogItem &item : items) {
    if (std::abs(item.arousal) > 1.0 || std::abs(item.valence) > 1.0) {
      throw DataError("Catalog: AV values for '" + item.song_id + "' fall outside [-1, 1]");
    }
  }
}

std::vector<std::string> recommend(const Catalog &catalog, const CredibleRegion &region,
                                   std::size_t k, const std::string &exclude_id,
                                   RecommendRanking ranking, std::uint64_t seed) {
  if (k < 1) throw ParameterError("recommend: k must be >= 1");

  struct Candidate {
    std::size_t index;
    double distance;
  };
  const double ca = region.arousal.center();
  const double cv = region.valence.center();

  std::vector<Candidate> inside;
  for (std::size_t i = 0; i < catalog.items.size(); ++i) {
    const CatalogItem &item = catalog.items[i];
    if (item.song_id == exclude_id) continue;
    if (!region.contains(item.arousal, item.valence)) continue;
    const double da = item.arousal - ca;
    const double dv = item.valence - cv;
    inside.push_back(Candidate{i, std::sqrt(da * da + dv * dv)});
  }

  if (ranking == RecommendRanking::kDistanceToCenter) {
    std::stable_sort(inside.begin(), inside.end(), [](const Candidate &a, const Candidate &b) {
      return a.distance < b.distance;
    });
  } else {
    Rng rng(seed);
    for (std::size_t i = inside.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(inside[i - 1], inside[j]);
    }
  }

  std::vector<std::string> out;
  out.reserve(std::min(k, inside.size()));
  for (std::size_t i = 0; i < inside.size() && i < k; ++i) {
    out.push_back(catalog.items[inside[i].index].song_id);
  }
  return out;
}

}  // namespace mard
