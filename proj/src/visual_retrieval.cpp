#include "capsel/visual_retrieval.hpp"

#include <algorithm>
#include <stdexcept>

namespace capsel {

namespace {

void sort_and_truncate(NeighborSet& set, std::size_t max_images) {
  std::sort(set.entries.begin(), set.entries.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) {
      return a.distance < b.distance;
    }
    return a.record->image_id < b.record->image_id;
  });
  if (set.entries.size() > max_images) {
    set.entries.resize(max_images);
  }
}

void validate_inputs(const DenseVector& query_feature, std::span<const ImageRecord> store,
                     double epsilon, std::size_t max_images) {
  if (store.empty()) {
    throw std::invalid_argument("retrieve_neighbors: empty store");
  }
  if (epsilon < 0.0) {
    throw std::invalid_argument("retrieve_neighbors: epsilon must be >= 0");
  }
  if (max_images == 0) {
    throw std::invalid_argument("retrieve_neighbors: max_images must be >= 1");
  }
  for (const auto& record : store) {
    if (record.feature.size() != query_feature.size()) {
      throw std::invalid_argument("retrieve_neighbors: feature dimension mismatch for '" +
                                  record.image_id + "'");
    }
  }
}

NeighborSet collect(std::span<const ImageRecord> store, const std::vector<double>& distances,
                    double epsilon, std::size_t max_images,
                    std::string_view exclude_image_id) {
  double closest = -1.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].image_id == exclude_image_id) {
      continue;
    }
    if (closest < 0.0 || distances[i] < closest) {
      closest = distances[i];
    }
  }
  if (closest < 0.0) {
    throw std::invalid_argument("retrieve_neighbors: store empty after exclusion");
  }

  NeighborSet set;
  set.closest_distance = closest;
  set.radius = (1.0 + epsilon) * closest;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].image_id == exclude_image_id) {
      continue;
    }
    if (distances[i] <= set.radius) {
      set.entries.push_back({&store[i], distances[i]});
    }
  }
  sort_and_truncate(set, max_images);
  return set;
}

}  // namespace

NeighborSet retrieve_neighbors(const DenseVector& query_feature,
                               std::span<const ImageRecord> store, double epsilon,
                               std::size_t max_images, std::string_view exclude_image_id) {
  validate_inputs(query_feature, store, epsilon, max_images);
  std::vector<double> distances(store.size(), 0.0);
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(store.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    distances[static_cast<std::size_t>(i)] =
        euclidean_distance(query_feature, store[static_cast<std::size_t>(i)].feature);
  }
  return collect(store, distances, epsilon, max_images, exclude_image_id);
}

NeighborSet retrieve_neighbors_serial(const DenseVector& query_feature,
                                      std::span<const ImageRecord> store, double epsilon,
                                      std::size_t max_images,
                                      std::string_view exclude_image_id) {
  validate_inputs(query_feature, store, epsilon, max_images);
  std::vector<double> distances(store.size(), 0.0);
  for (std::size_t i = 0; i < store.size(); ++i) {
    distances[i] = euclidean_distance(query_feature, store[i].feature);
  }
  return collect(store, distances, epsilon, max_images, exclude_image_id);
}

double similarity_from_distance(double distance, double normalizer_z) {
  if (normalizer_z <= 0.0) {
    throw std::invalid_argument("visual_similarity: normalizer Z must be > 0");
  }
  return 1.0 - distance / normalizer_z;
}

double visual_similarity(const DenseVector& query_feature, const ImageRecord& record,
                         double normalizer_z) {
  return similarity_from_distance(euclidean_distance(query_feature, record.feature),
                                  normalizer_z);
}

double pipeline_normalizer(const NeighborSet& neighbors) {
  return neighbors.radius > 0.0 ? neighbors.radius : 1.0;
}

}  // namespace capsel
