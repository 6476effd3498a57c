#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfem/fem.hpp"
#include "wfem/mesh.hpp"

namespace wfem {

inline constexpr const char* kArtifactVersion = "wfem-artifacts/1";

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Hash of the canonical (sorted, compact) serialization of a config.
std::string config_hash(const nlohmann::json& config);

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string artifact_version = kArtifactVersion;

  std::vector<std::string> lines() const;
  nlohmann::json to_json() const;
};

/// Writes `content` after the provenance lines, each prefixed by `comment`.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string commented(const Provenance& prov, const std::string& comment);

/// JSON document with a leading "provenance" member.
void write_json(const std::filesystem::path& path, const nlohmann::json& body,
                const Provenance& prov);

struct VtkScalar {
  std::string name;
  Vector values; ///< one per mesh vertex
};

/// Legacy ASCII UNSTRUCTURED_GRID with point scalars. The provenance goes
/// into the title line; the format has no other comment syntax.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<VtkScalar>& scalars, const Provenance& prov);

/// MatrixMarket coordinate real general, provenance as % comments.
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& A,
                         const Provenance& prov);

/// {"vertices": [[x, y], ...]}
ConvexPolygon polygon_from_json(const nlohmann::json& j);
nlohmann::json polygon_to_json(const ConvexPolygon& polygon);

} // namespace wfem
