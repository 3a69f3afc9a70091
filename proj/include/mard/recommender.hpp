#ifndef MARD_RECOMMENDER_HPP_
#define MARD_RECOMMENDER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mard/interval.hpp"

namespace mard {

struct CatalogItem {
  std::string song_id;
  double arousal = 0.0;
  double valence = 0.0;
};

struct Catalog {
  std::vector<CatalogItem> items;

  void validate() const;
};

enum class RecommendRanking {
  kDistanceToCenter,
  kUniformRandom,
};

// Items whose AV coordinates fall inside the region (boundary inclusive),
// minus the query item, ranked and truncated to k. An empty result is a
// valid outcome for a sparse rectangle.
std::vector<std::string> recommend(const Catalog &catalog, const CredibleRegion &region,
                                   std::size_t k, const std::string &exclude_id,
                                   RecommendRanking ranking = RecommendRanking::kDistanceToCenter,
                                   std::uint64_t seed = 0);

}  // namespace mard

#endif  // MARD_RECOMMENDER_HPP_
