#pragma once

#include "distgeo/types.hpp"

#include <string>
#include <vector>

namespace distgeo {

struct StitchedGraph;
struct LocalityGraph;
struct PatchCover;

/// Shortest decimal form that round-trips the double exactly (up to 17
/// significant digits).
std::string fmt_double(double v);

/// Writes via a temp file in the same directory, then renames over the
/// target, so readers never observe partial content.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

/// CoordinateTable CSV, header `id,x,y`, full-precision floats.
std::string coordinate_table_csv(const CoordinateTable& table);
void write_coordinate_table(const std::string& path, const CoordinateTable& table);
CoordinateTable read_coordinate_table(const std::string& path);

/// Matrix CSV with a caller-supplied header row (e.g. gene names).
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header);
Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);

/// Square labeled matrix CSV: header `id,<ids...>`, each row an id followed
/// by its values. Column ids must match the row ids.
std::string labeled_matrix_csv(const Matrix& m, const std::vector<std::string>& ids);
Matrix read_labeled_matrix_csv(const std::string& path, std::vector<std::string>& ids);

/// Stitched distance graph CSV, header `i,j,d,omega,count,spread`.
void write_stitched_graph(const std::string& path, const StitchedGraph& graph);
StitchedGraph read_stitched_graph(const std::string& path, int num_nodes = -1);

/// Locality graph edge list CSV, header `i,j,jaccard`.
void write_locality_graph(const std::string& path, const LocalityGraph& graph);

/// Patch cover as a JSON list of index arrays.
void write_patch_cover(const std::string& path, const PatchCover& cover);

}  // namespace distgeo
