// mesh_io.hpp -- STL (binary/ASCII) and OBJ ingestion with vertex welding

#pragma once

#include "smallbody/mesh.hpp"

#include <filesystem>

namespace smallbody {

enum class MeshFormat { Auto, StlBinary, StlAscii, Obj };

/// Load a closed surface from disk. STL facets are welded with tolerance
/// 1e-9 * diameter before the watertight check. Auto picks the format from
/// the extension (.obj -> OBJ, .stl -> binary vs ASCII sniffed from the
/// file content).
TriangleMesh load_mesh(const std::filesystem::path& path,
                       MeshFormat format = MeshFormat::Auto);

void save_stl_binary(const TriangleMesh& mesh,
                     const std::filesystem::path& path);
void save_stl_ascii(const TriangleMesh& mesh,
                    const std::filesystem::path& path);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace smallbody
