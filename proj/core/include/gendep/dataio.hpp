#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"

namespace gendep::io {

/// Parse a matrix TSV: header row of sample ids, first column feature ids,
/// remaining cells finite decimal numbers. Row/column order preserved.
/// Throws std::runtime_error with a line number on malformed input.
ExpressionMatrix read_matrix(const std::filesystem::path& path);

/// Write the matrix TSV format read by read_matrix. Values are serialized
/// with round-trip precision ("%.17g").
void write_matrix(const ExpressionMatrix& m, const std::filesystem::path& path);

/// Parse a two-column TSV of undirected edges. Duplicate edges collapse;
/// self-loop lines are skipped and counted in the returned network.
InteractionNetwork read_edge_list(const std::filesystem::path& path);

void write_edge_list(const InteractionNetwork& net, const std::filesystem::path& path);

/// Parse a three-column TSV: feature_id, chromosome, coordinate (>= 0).
PositionTable read_positions(const std::filesystem::path& path);

void write_positions(const PositionTable& table, const std::filesystem::path& path);

/// Write result records as JSON lines, one object per record. Records written
/// by this function parse back structurally equal via read_results.
void write_results(const std::vector<nlohmann::json>& records, const std::filesystem::path& path);

std::vector<nlohmann::json> read_results(const std::filesystem::path& path);

}  // namespace gendep::io
