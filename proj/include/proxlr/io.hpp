#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>

#include "proxlr/sensing.hpp"

namespace proxlr {

/// A sensing operator, optionally with observations and the ground truth
/// that produced them.
struct Fixture {
  std::shared_ptr<const SensingOperator> op;
  std::optional<Vector> y;
  std::optional<GroundTruth> truth;

  /// Throws PreconditionError when y is absent.
  Observation observation() const;
};

inline constexpr std::uint32_t kFixtureVersion = 1;

/// Binary layout, little-endian:
///   "PXLR" | u32 version | u64 n1 | u64 n2 | u64 m | u8 flags (1 = y, 2 = truth)
///   m matrices A_i, each n1 x n2 row-major f64
///   [y: m f64]
///   [truth: X* n1 x n2 row-major f64 | i64 rank | u64 k | k x u64 outlier index
///           | k x f64 outlier value | m f64 noise]
void write_fixture_binary(std::ostream& os, const Fixture& fx);
Fixture read_fixture_binary(std::istream& is);

/// Same content as JSON; matrices are nested row-major arrays.
void write_fixture_json(std::ostream& os, const Fixture& fx);
Fixture read_fixture_json(std::istream& is);

/// Picks JSON for a ".json" extension and binary otherwise.
void save_fixture(const std::filesystem::path& path, const Fixture& fx);
Fixture load_fixture(const std::filesystem::path& path);

}  // namespace proxlr
