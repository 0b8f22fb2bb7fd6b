#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capsel/dense_vector.hpp"

namespace capsel {

struct ImageRecord {
  std::string image_id;
  DenseVector feature;
  std::vector<std::string> captions;  // normalized at ingestion
};

struct Neighbor {
  const ImageRecord* record = nullptr;
  double distance = 0.0;
};

/// Adaptive neighborhood of a query: every record within radius
/// (1 + epsilon) * closest_distance, ascending by distance, ties broken by
/// image_id, truncated to the max_images closest.
struct NeighborSet {
  std::vector<Neighbor> entries;
  double closest_distance = 0.0;
  double radius = 0.0;
};

/// Parallel distance scan over the store. exclude_image_id drops records with
/// that id before the ratio test (the pipeline passes the query's own id).
/// Throws std::invalid_argument on an empty store (after exclusion) or a
/// feature-dimension mismatch.
NeighborSet retrieve_neighbors(const DenseVector& query_feature,
                               std::span<const ImageRecord> store, double epsilon,
                               std::size_t max_images,
                               std::string_view exclude_image_id = {});

/// Single-threaded reference with identical semantics; kept for tests and the
/// benchmark target.
NeighborSet retrieve_neighbors_serial(const DenseVector& query_feature,
                                      std::span<const ImageRecord> store, double epsilon,
                                      std::size_t max_images,
                                      std::string_view exclude_image_id = {});

/// 1 - distance / Z. With Z chosen as the neighborhood radius this lies in
/// [0, 1] for every in-neighborhood record. Throws on Z <= 0.
double similarity_from_distance(double distance, double normalizer_z);

double visual_similarity(const DenseVector& query_feature, const ImageRecord& record,
                         double normalizer_z);

/// The Z used by the pipeline: the neighborhood radius, or 1 when the radius
/// is exactly zero (every retrieved record then sits at distance 0 and gets
/// similarity 1).
double pipeline_normalizer(const NeighborSet& neighbors);

}  // namespace capsel
