#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phtori/observables.hpp"
#include "phtori/torus.hpp"

namespace phtori {

inline constexpr int kRecordSchema = 1;

// On-disk torus record. Layout:
//   PHTORI-RECORD <schema>
//   key value lines (17 significant digits), then "K i" / "W i" blocks of N sample rows
//   BINARY <nbytes>
//   <nbytes of little-endian doubles: scalars, observables, K samples, W samples>
//   CHECKSUM <crc32 of every byte before this line, 8 hex digits>
// The binary section is authoritative; the text is for inspection.
struct TorusRecord {
    int schema = kRecordSchema;
    std::string family;
    int index = 0;
    int parent = -1;      // index of the torus this one was continued from, -1 for a seed
    std::string tag;      // continuation parameter, or "seed"/"refine"
    double alpha_used = 0;
    double alpha_next = 0;
    double mu = 0;
    TorusState state;
    std::optional<ObservableRecord> observables;

    std::string id() const;
};

void write_record(std::ostream& os, const TorusRecord& record);
TorusRecord read_record(std::istream& is);

// Temp file in the same directory, then rename.
void write_record(const TorusRecord& record, const std::filesystem::path& path);
TorusRecord read_record(const std::filesystem::path& path);

std::filesystem::path record_path(const std::filesystem::path& dir, int index);

struct IndexEntry {
    int index = 0;
    std::string file;
    double h = 0;
    double T = 0;
    double omega = 0;
    double unstable_multiplier = 0;
    double c1 = 0;
    double c2 = 0;
    int N = 0;
};

// Records (*.rec) of a family directory ordered by continuation index.
// Throws IoError when the records belong to more than one family or repeat an index.
std::vector<IndexEntry> family_index(const std::filesystem::path& dir);
void write_index(std::ostream& os, const std::vector<IndexEntry>& entries);
// Writes <dir>/index.tsv and returns the entries.
std::vector<IndexEntry> update_index(const std::filesystem::path& dir);

// Writes text through a temp file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace phtori
