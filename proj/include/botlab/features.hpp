#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botlab/corpus.hpp"

namespace botlab {

inline constexpr std::string_view kRegistryVersion = "botlab-features-v1";

enum class FeatureClass {
  UserProfile,
  Friends,
  Network,
  Temporal,
  ContentLanguage,
  Sentiment,
};

inline constexpr FeatureClass kAllFeatureClasses[] = {
    FeatureClass::UserProfile,     FeatureClass::Friends,
    FeatureClass::Network,         FeatureClass::Temporal,
    FeatureClass::ContentLanguage, FeatureClass::Sentiment};

std::string_view to_string(FeatureClass cls);

struct FeatureSpec {
  std::string name;
  FeatureClass feature_class;
  bool language_dependent = false;
  bool lite_eligible = false;
  std::string definition;
};

/// Ordered, versioned list of features. Subsets derived from the default
/// registry carry a suffixed version (`.../universal`, `.../lite`).
struct FeatureRegistry {
  std::string version;
  std::vector<FeatureSpec> features;

  std::size_t size() const { return features.size(); }
  /// Index of `name`, or size() when absent.
  std::size_t index_of(std::string_view name) const;
};

struct FeatureVector {
  std::vector<double> values;
  std::string registry_version;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// The desk-scale registry covering all six feature classes.
const FeatureRegistry& default_registry();

/// Throws ValidationError when names collide or class/flag rules are broken.
void validate_registry(const FeatureRegistry& registry);

/// Features with language_dependent == false.
FeatureRegistry language_independent(const FeatureRegistry& registry);
/// Features with lite_eligible == true. Idempotent.
FeatureRegistry lite_subset(const FeatureRegistry& registry);

/// Positions in `from` of every feature of `to`, in `to`'s order.
/// Throws VersionMismatch when a feature of `to` is absent from `from`.
std::vector<std::size_t> projection_indices(const FeatureRegistry& from,
                                            const FeatureRegistry& to);
FeatureVector project(const FeatureVector& v, std::span<const std::size_t> indices,
                      const std::string& target_version);

/// Full extraction from a payload. Total on valid payloads; missing data is
/// imputed (interval statistics and fractions on empty timelines are 0).
FeatureVector extract_full(const AccountPayload& payload,
                           const FeatureRegistry& registry);

/// Metadata-only extraction. The result is aligned with lite_subset(registry)
/// and equals the projection of extract_full onto it.
FeatureVector extract_lite(const UserObject& user, Timestamp probe_time,
                           const FeatureRegistry& registry);

json to_json(const FeatureRegistry& registry);

}  // namespace botlab
